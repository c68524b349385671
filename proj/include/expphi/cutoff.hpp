#pragma once

#include <functional>
#include <string>

#include "expphi/torus_grid.hpp"

namespace expphi {

enum class CutoffKind { sharp, smooth, unit, custom };

/// Fourier cutoff psi : R^2 -> [0, 1] used by P_N f = sum_k psi(2^-N k) <f,e_k> e_k.
///
/// sharp  : indicator of the closed disk |x| <= radius.
/// smooth : Gaussian exp(-|x|^2).
/// unit   : psi = 1 on every grid mode; a test hook, not an admissible cutoff.
/// custom : user supplied, with its own support radius for grid resolution.
class CutoffProfile {
 public:
  static CutoffProfile sharp(double radius = 1.0);
  static CutoffProfile smooth();
  static CutoffProfile unit();
  static CutoffProfile custom(std::string name, std::function<double(double, double)> fn,
                              double theta, double decay_power, double support_radius);

  CutoffKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double theta() const { return theta_; }
  double decay_power() const { return decay_power_; }
  double radius() const { return radius_; }

  double operator()(double x1, double x2) const;
  double at_level(int level, int k1, int k2) const;

  // Radius beyond which psi is treated as zero when checking grid resolution.
  double support_radius() const { return support_radius_; }
  // True when every mode where psi(2^-N k) is non-negligible is an active grid mode.
  bool resolves(const TorusGrid& grid, int level) const;
  int max_resolved_level(const TorusGrid& grid) const;

 private:
  CutoffProfile() = default;

  CutoffKind kind_ = CutoffKind::sharp;
  std::string name_;
  double radius_ = 1.0;
  double theta_ = 0.99;
  double decay_power_ = 4.0;
  double support_radius_ = 1.0;
  std::function<double(double, double)> fn_;
};

CutoffKind parse_cutoff_kind(const std::string& name);
std::string to_string(CutoffKind kind);

struct AdmissibilityReport {
  bool in_unit_interval = true;
  bool symmetric = true;
  double theta_constant = 0.0;  // sampled sup |x|^-theta |psi(x) - 1|
  double decay_constant = 0.0;  // sampled sup |x|^m |psi(x)|
  bool theta_bounded = true;
  bool decay_bounded = true;
  bool admissible() const { return in_unit_interval && symmetric && theta_bounded && decay_bounded; }
};

/// Checks the four admissibility conditions by sampling on a log-polar set.
/// A supremum counts as bounded if doubling the sampled radius range does not
/// raise it by more than 1%.
AdmissibilityReport check_admissibility(const CutoffProfile& psi);

}  // namespace expphi
