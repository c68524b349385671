#include "expphi/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace expphi {

CutoffProfile CutoffProfile::sharp(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("sharp cutoff radius must be positive");
  CutoffProfile p;
  p.kind_ = CutoffKind::sharp;
  p.name_ = "sharp";
  p.radius_ = radius;
  p.support_radius_ = radius;
  return p;
}

CutoffProfile CutoffProfile::smooth() {
  CutoffProfile p;
  p.kind_ = CutoffKind::smooth;
  p.name_ = "smooth";
  // Gaussian satisfies the theta condition for theta up to 2; recorded as 0.99.
  p.theta_ = 0.99;
  p.decay_power_ = 4.0;
  // psi(4) = e^-16 ~ 1.1e-7 and psi^2 ~ 1.3e-14 on the first excluded shell.
  p.support_radius_ = 4.0;
  return p;
}

CutoffProfile CutoffProfile::unit() {
  CutoffProfile p;
  p.kind_ = CutoffKind::unit;
  p.name_ = "unit";
  p.theta_ = 0.0;
  p.decay_power_ = 0.0;
  p.support_radius_ = std::numeric_limits<double>::infinity();
  return p;
}

CutoffProfile CutoffProfile::custom(std::string name, std::function<double(double, double)> fn,
                                    double theta, double decay_power, double support_radius) {
  if (!fn) throw std::invalid_argument("custom cutoff needs an evaluator");
  CutoffProfile p;
  p.kind_ = CutoffKind::custom;
  p.name_ = std::move(name);
  p.fn_ = std::move(fn);
  p.theta_ = theta;
  p.decay_power_ = decay_power;
  p.support_radius_ = support_radius;
  return p;
}

double CutoffProfile::operator()(double x1, double x2) const {
  switch (kind_) {
    case CutoffKind::sharp:
      return (x1 * x1 + x2 * x2 <= radius_ * radius_) ? 1.0 : 0.0;
    case CutoffKind::smooth:
      return std::exp(-(x1 * x1 + x2 * x2));
    case CutoffKind::unit:
      return 1.0;
    case CutoffKind::custom:
      return fn_(x1, x2);
  }
  return 0.0;
}

double CutoffProfile::at_level(int level, int k1, int k2) const {
  return (*this)(std::ldexp(static_cast<double>(k1), -level),
                 std::ldexp(static_cast<double>(k2), -level));
}

bool CutoffProfile::resolves(const TorusGrid& grid, int level) const {
  if (level < 0) return false;
  if (kind_ == CutoffKind::unit) return true;
  const double reach = std::ldexp(support_radius_, level);
  const double half = grid.size() / 2.0;
  // The closed support disk of the indicator must avoid the Nyquist shell.
  return kind_ == CutoffKind::sharp ? reach < half : reach <= half;
}

int CutoffProfile::max_resolved_level(const TorusGrid& grid) const {
  int n = -1;
  while (n < 62 && resolves(grid, n + 1)) ++n;
  return n;
}

CutoffKind parse_cutoff_kind(const std::string& name) {
  if (name == "sharp") return CutoffKind::sharp;
  if (name == "smooth") return CutoffKind::smooth;
  if (name == "unit") return CutoffKind::unit;
  throw std::invalid_argument("unknown cutoff kind '" + name + "'");
}

std::string to_string(CutoffKind kind) {
  switch (kind) {
    case CutoffKind::sharp: return "sharp";
    case CutoffKind::smooth: return "smooth";
    case CutoffKind::unit: return "unit";
    case CutoffKind::custom: return "custom";
  }
  return "?";
}

namespace {

struct Suprema {
  double theta = 0.0;
  double decay = 0.0;
};

Suprema sample_suprema(const CutoffProfile& psi, double r_max, AdmissibilityReport& rep) {
  Suprema s;
  // Fixed density per decade: a wider range samples a superset of the points.
  constexpr int per_decade = 64;
  constexpr int angular = 24;
  const double r_min = 1e-4;
  const int radial = static_cast<int>(std::ceil(per_decade * std::log10(r_max / r_min)));
  for (int i = 0; i <= radial; ++i) {
    const double r = r_min * std::pow(10.0, static_cast<double>(i) / per_decade);
    for (int a = 0; a < angular; ++a) {
      const double phi = 2.0 * std::numbers::pi * a / angular;
      const double x1 = r * std::cos(phi);
      const double x2 = r * std::sin(phi);
      const double v = psi(x1, x2);
      if (v < 0.0 || v > 1.0) rep.in_unit_interval = false;
      if (std::abs(v - psi(-x1, -x2)) > 1e-14) rep.symmetric = false;
      s.theta = std::max(s.theta, std::pow(r, -psi.theta()) * std::abs(v - 1.0));
      s.decay = std::max(s.decay, std::pow(r, psi.decay_power()) * std::abs(v));
    }
  }
  return s;
}

}  // namespace

AdmissibilityReport check_admissibility(const CutoffProfile& psi) {
  AdmissibilityReport rep;
  const Suprema near = sample_suprema(psi, 64.0, rep);
  const Suprema far = sample_suprema(psi, 128.0, rep);
  rep.theta_constant = far.theta;
  rep.decay_constant = far.decay;
  rep.theta_bounded = psi.theta() > 0.0 && psi.theta() < 1.0 && far.theta <= 1.01 * near.theta + 1e-300;
  rep.decay_bounded = psi.decay_power() >= 4.0 && far.decay <= 1.01 * near.decay + 1e-300;
  return rep;
}

}  // namespace expphi
