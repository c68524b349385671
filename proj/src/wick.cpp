#include "expphi/wick.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "expphi/norms.hpp"
#include "expphi/semigroup.hpp"

namespace expphi {

double alpha_limit() { return std::sqrt(4.0 * std::numbers::pi); }

WickParams make_wick_params(double alpha, int level, double beta, const CutoffProfile& psi,
                            const TorusGrid& grid) {
  if (!(std::abs(alpha) < alpha_limit())) {
    throw std::invalid_argument("charge must satisfy |alpha| < sqrt(4 pi)");
  }
  const double beta_min = alpha * alpha / (4.0 * std::numbers::pi);
  if (!(beta > beta_min && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (alpha^2 / 4 pi, 1)");
  }
  if (level < 0) throw std::invalid_argument("cutoff level must be nonnegative");
  return WickParams{alpha, level, renorm_constant(psi, level, grid), beta};
}

SpectralField apply_PN(const SpectralField& field, const CutoffProfile& psi, int level) {
  if (!psi.resolves(field.grid(), level)) {
    throw std::invalid_argument("cutoff level " + std::to_string(level) + " is not resolved by a " +
                                std::to_string(field.grid().size()) + "-point grid");
  }
  if (psi.kind() == CutoffKind::unit) return field;
  return apply_multiplier(field, [&](int k1, int k2) { return psi.at_level(level, k1, k2); });
}

double renorm_constant(const CutoffProfile& psi, int level, const TorusGrid& grid) {
  if (!psi.resolves(grid, level)) {
    throw std::invalid_argument("cutoff level " + std::to_string(level) + " is not resolved by grid");
  }
  const int half = grid.size() / 2;
  double sum = 0.0;
  for (int k1 = -half + 1; k1 < half; ++k1) {
    for (int k2 = -half + 1; k2 < half; ++k2) {
      const double w = psi.at_level(level, k1, k2);
      if (w != 0.0) sum += w * w / (1.0 + k1 * k1 + k2 * k2);
    }
  }
  const double inv = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  if (psi.kind() != CutoffKind::unit) {
    double tail = 0.0;
    const int wide = 4 * half;
    for (int k1 = -wide; k1 < wide; ++k1) {
      for (int k2 = -wide; k2 < wide; ++k2) {
        if (std::abs(k1) < half && std::abs(k2) < half) continue;
        const double w = psi.at_level(level, k1, k2);
        if (w != 0.0) tail += w * w / (1.0 + k1 * k1 + k2 * k2);
      }
    }
    if (tail * inv > kRenormTailTolerance) {
      throw std::invalid_argument("renormalization tail beyond the grid exceeds tolerance");
    }
  }
  return sum * inv;
}

WickExponential wick_exp_projected(const SpectralField& projected, const WickParams& params) {
  const auto& grid = projected.grid();
  WickExponential out{SpectralField(grid), from_spectral(projected), 0.0, false};
  const double shift = 0.5 * params.alpha * params.alpha * params.c_n;
  double max_exp = -std::numeric_limits<double>::infinity();
  for (double& v : out.values) {
    v = params.alpha * v - shift;
    max_exp = std::max(max_exp, v);
  }
  out.max_exponent = max_exp;
  if (max_exp > kExponentGuard) {
    out.overflow = true;
    for (double& v : out.values) v = std::exp(v);
    return out;
  }
  for (double& v : out.values) v = std::exp(v);
  out.field = to_spectral(out.values, grid);
  return out;
}

WickExponential wick_exp_gff(const SpectralField& phi, const WickParams& params, const CutoffProfile& psi) {
  return wick_exp_projected(apply_PN(phi, psi, params.level), params);
}

double analytic_wick_cov(const WickParams& params, const CutoffProfile& psi, const TorusGrid& grid,
                         double x1, double x2, double y1, double y2) {
  const double k = green_value(1.0, psi, params.level, grid, x1 - y1, x2 - y2);
  return std::exp(params.alpha * params.alpha * k);
}

WickPath wick_exp_ou(const OuTrajectory& traj, const WickParams& params, const CutoffProfile& psi,
                     bool keep_values) {
  WickPath out;
  out.times = traj.times;
  out.fields.reserve(traj.states.size());
  for (const auto& state : traj.states) {
    auto w = wick_exp_gff(state, params, psi);
    if (w.overflow) ++out.overflow_count;
    out.fields.push_back(std::move(w.field));
    if (keep_values) out.values.push_back(std::move(w.values));
  }
  return out;
}

double l2_time_distance(std::span<const double> times, std::span<const SpectralField> a,
                        std::span<const SpectralField> b, double s) {
  if (a.size() != times.size() || (!b.empty() && b.size() != times.size())) {
    throw std::invalid_argument("path length does not match time grid");
  }
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double n = b.empty() ? sobolev_norm(a[i], s) : sobolev_distance(a[i], b[i], s);
    const double sq = n * n;
    if (i > 0) acc += 0.5 * (times[i] - times[i - 1]) * (sq + prev);
    prev = sq;
  }
  return std::sqrt(acc);
}

double l2_time_norm(std::span<const double> times, std::span<const SpectralField> fields, double s) {
  return l2_time_distance(times, fields, {}, s);
}

}  // namespace expphi
