#include "expphi/semigroup.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace expphi {

SpectralField heat_semigroup(const SpectralField& field, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat semigroup time must be nonnegative");
  return apply_multiplier(field, [t](int k1, int k2) {
    return std::exp(-0.5 * (1.0 + k1 * k1 + k2 * k2) * t);
  });
}

SpectralField heat_semigroup_massless(const SpectralField& field, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("heat semigroup time must be nonnegative");
  return apply_multiplier(field, [lambda](int k1, int k2) {
    return std::exp(-static_cast<double>(k1 * k1 + k2 * k2) * lambda);
  });
}

SpectralField green_field(double gamma, const CutoffProfile& psi, int level, const TorusGrid& grid) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!psi.resolves(grid, level)) throw std::invalid_argument("cutoff level not resolved by grid");
  SpectralField out(grid);
  auto c = out.coeffs();
  // u(z) = (2 pi)^-1 sum u_hat(k) e^{ikz}, so u_hat(k) = (2 pi)^-1 psi^2 (1+|k|^2)^-gamma.
  const double norm = 1.0 / (2.0 * std::numbers::pi);
  for_each_mode(grid, [&](std::size_t idx, int k1, int k2, double, bool active) {
    if (!active) return;
    const double w = psi.at_level(level, k1, k2);
    c[idx] = norm * w * w * std::pow(1.0 + k1 * k1 + k2 * k2, -gamma);
  });
  return out;
}

double green_value(double gamma, const CutoffProfile& psi, int level, const TorusGrid& grid,
                   double z1, double z2) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  const int half = grid.size() / 2;
  double sum = 0.0;
  for (int k1 = -half + 1; k1 < half; ++k1) {
    for (int k2 = -half + 1; k2 < half; ++k2) {
      const double w = psi.at_level(level, k1, k2);
      if (w == 0.0) continue;
      sum += w * w * std::pow(1.0 + k1 * k1 + k2 * k2, -gamma) * std::cos(k1 * z1 + k2 * z2);
    }
  }
  return sum / (4.0 * std::numbers::pi * std::numbers::pi);
}

double torus_distance(double z1, double z2) {
  auto wrap = [](double z) {
    const double two_pi = 2.0 * std::numbers::pi;
    z = std::fmod(z, two_pi);
    if (z < -std::numbers::pi) z += two_pi;
    if (z >= std::numbers::pi) z -= two_pi;
    return z;
  };
  return std::hypot(wrap(z1), wrap(z2));
}

}  // namespace expphi
