#include "expphi/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace expphi {
namespace {

double smooth_transition(double t) {
  // 0 for t <= 0, 1 for t >= 1, C-infinity in between.
  auto f = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  const double a = f(t);
  const double b = f(1.0 - t);
  return a / (a + b);
}

double theta_profile(double r) {
  constexpr double lo = 3.0 / 4.0;
  constexpr double hi = 4.0 / 3.0;
  if (r <= lo) return 1.0;
  if (r >= hi) return 0.0;
  return 1.0 - smooth_transition((r - lo) / (hi - lo));
}

void check_index(double v, const char* name) {
  if (!(v >= 1.0)) {
    throw std::invalid_argument(std::string("Besov index ") + name + " must lie in [1, inf]");
  }
}

}  // namespace

double sobolev_norm(const SpectralField& field, double s) {
  return std::sqrt(weighted_energy(field, [s](int k1, int k2) {
    return std::pow(1.0 + k1 * k1 + k2 * k2, s);
  }));
}

double sobolev_distance(const SpectralField& a, const SpectralField& b, double s) {
  return sobolev_norm(a - b, s);
}

double dyadic_chi(double r) { return theta_profile(r); }

double dyadic_rho(double r) { return theta_profile(r / 2.0) - theta_profile(r); }

double dyadic_block(int j, double r) {
  if (j < 0) return dyadic_chi(r);
  return dyadic_rho(std::ldexp(r, -j));
}

int dyadic_block_count(const TorusGrid& grid) {
  // Largest |k| on the grid is (M/2) sqrt(2); block j starts at (3/4) 2^j.
  const double kmax = grid.size() / 2.0 * std::sqrt(2.0);
  int j = -1;
  while (0.75 * std::ldexp(1.0, j + 1) < kmax) ++j;
  return j + 2;  // blocks -1..j
}

double lp_norm(std::span<const double> values, const TorusGrid& grid, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(s * grid.cell_area(), 1.0 / p);
}

double besov_norm(const SpectralField& field, const NormSpec& spec) {
  check_index(spec.p, "p");
  check_index(spec.q, "q");
  const auto& grid = field.grid();
  const int blocks = dyadic_block_count(grid);
  std::vector<double> terms;
  terms.reserve(blocks);
  for (int j = -1; j < blocks - 1; ++j) {
    auto block = apply_multiplier(field, [j](int k1, int k2) {
      return dyadic_block(j, std::hypot(k1, k2));
    });
    double lp;
    if (spec.p == 2.0) {
      lp = std::sqrt(weighted_energy(block, [](int, int) { return 1.0; }));
    } else {
      lp = lp_norm(from_spectral(block), grid, spec.p);
    }
    terms.push_back(std::exp2(j * spec.s) * lp);
  }
  if (std::isinf(spec.q)) return *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::pow(t, spec.q);
  return std::pow(acc, 1.0 / spec.q);
}

double norm(const SpectralField& field, const NormSpec& spec) {
  return spec.kind == NormKind::sobolev ? sobolev_norm(field, spec.s) : besov_norm(field, spec);
}

}  // namespace expphi
