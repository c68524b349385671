#pragma once

#include <optional>
#include <span>
#include <vector>

#include "expphi/cutoff.hpp"
#include "expphi/rng.hpp"
#include "expphi/spectral_field.hpp"
#include "expphi/wick.hpp"

namespace expphi {

enum class Scheme { exponential_euler, semi_implicit };
enum class Equation { full, projected, shifted };

Scheme parse_scheme(const std::string& name);
Equation parse_equation(const std::string& name);
std::string to_string(Scheme s);
std::string to_string(Equation e);

/// Integration settings for the regularized stochastic quantization equations.
///
/// The explicit treatment of the exponential term is guarded per step by
///   dt * (alpha^2 / 2) * max_x exp(alpha u - ...) <= stability_limit,
/// which keeps the pointwise Euler factor of the monotone term in [-1, 1].
/// The linear part is integrated exactly, so there is no 2^{-2N} restriction.
struct SqeConfig {
  double horizon = 1.0;
  double dt = 1.0 / 256.0;
  Scheme scheme = Scheme::exponential_euler;
  Equation equation = Equation::full;
  WickParams params;
  CutoffProfile psi = CutoffProfile::sharp();
  double mollifier_scale = 0.0;
  double stability_limit = 2.0;
  bool record_decomposition = false;
  int record_stride = 1;
  double diagnostic_exponent = -0.5;  // Sobolev exponent of the per-step norm log

  void validate() const;
};

/// Time-indexed fields sharing one grid.
struct FieldPath {
  std::vector<double> times;
  std::vector<SpectralField> states;
};

struct Decomposition {
  std::vector<SpectralField> x_part;  // P_N X
  std::vector<SpectralField> y_part;  // shifted-equation solution driven by the Wick exponential of P_N X
};

/// Solver output. `states` always holds the directly integrated solution;
/// the optional decomposition is integrated along an independent route and
/// agrees with it up to the first-order time discretization error.
struct SolutionPath {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::optional<Decomposition> decomposition;
  std::vector<double> state_norms;
  double max_stiffness = 0.0;
};

/// Product of a continuous f (grid values) with a nonnegative field xi,
/// mollified by e^{lambda Delta} first when lambda > 0. xi must be >= -1e-10
/// at every grid point.
SpectralField measure_product(std::span<const double> f, const SpectralField& xi, double mollifier_scale);

/// Whether upsilon is resolved as an H^{2-beta} element: at most half of
/// ||upsilon||^2_{H^{2-beta}} sits in the top octave |k| > M/4.
bool resolved_in_h2_minus_beta(const SpectralField& upsilon, double beta);

/// Mild stepping of d_t U = (1/2)(Delta - 1) U - (alpha/2) M(e^{alpha U}, chi):
///   U_{n+1} = e^{(Delta-1) dt/2} [U_n - (alpha/2) dt M(e^{alpha U_n}, chi_n)].
/// chi_path.times is the time grid; its states must be nonnegative.
SolutionPath solve_shifted(const SpectralField& upsilon, const FieldPath& chi_path, const SqeConfig& config);

/// Regularized equation with projected noise and initial datum P_N phi0.
/// When config.record_decomposition is set the pair
/// (P_N X, Y) is produced from the same noise.
SolutionPath solve_sqe_full(const SpectralField& phi0, const SqeConfig& config, const RngStream& stream);

/// Equation with nonlinearity (alpha/2) P_N exp(alpha P_N Phi - alpha^2 C_N / 2),
/// unprojected noise and unprojected initial datum.
SolutionPath solve_sqe_projected(const SpectralField& phi0, const SqeConfig& config, const RngStream& stream);

// sup over recorded times of || state - (x + y) ||_{H^s}.
double decomposition_residual(const SolutionPath& path, double s);

// sup over recorded times of || a_t - b_t ||_{H^s}.
double sup_distance(const SolutionPath& a, const SolutionPath& b, double s);

struct ContractionReport {
  std::vector<double> times;
  std::vector<double> gaps;         // ||U1_t - U2_t||_{L^2}
  std::vector<double> scaled_gaps;  // e^{t/2} gaps
  double worst_growth_rate = 0.0;   // max relative increase of scaled gap per unit time
  bool nonincreasing = true;        // worst_growth_rate <= tolerance
};

ContractionReport contraction_check(const SpectralField& upsilon1, const SpectralField& upsilon2,
                                    const FieldPath& chi_path, const SqeConfig& config,
                                    double tolerance_per_unit_time = 0.01);

}  // namespace expphi
