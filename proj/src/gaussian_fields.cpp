#include "expphi/gaussian_fields.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace expphi {

SpectralField white_modes(const TorusGrid& grid, const RngStream& stream) {
  CounterEngine engine(stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField out(grid);
  const double h = std::sqrt(0.5);
  const int half = grid.size() / 2;
  for (int r = 0; r < grid.rows(); ++r) {
    if (r == half) continue;
    for (int c = 0; c < half; ++c) {
      if (c == 0) {
        if (r == 0) {
          out.at(0, 0) = normal(engine);
        } else if (r < half) {
          const double a = normal(engine);
          const double b = normal(engine);
          out.at(r, 0) = Complex(h * a, h * b);
          out.at(grid.mirror_row(r), 0) = Complex(h * a, -h * b);
        }
        continue;
      }
      const double a = normal(engine);
      const double b = normal(engine);
      out.at(r, c) = Complex(h * a, h * b);
    }
  }
  return out;
}

SpectralField gff_sample(const TorusGrid& grid, const RngStream& stream) {
  return apply_multiplier(white_modes(grid, stream), [](int k1, int k2) {
    return 1.0 / std::sqrt(1.0 + k1 * k1 + k2 * k2);
  });
}

SpectralField wiener_increment(const TorusGrid& grid, double dt, const RngStream& stream) {
  if (!(dt > 0.0)) throw std::invalid_argument("Wiener increment needs dt > 0");
  return white_modes(grid, stream) * std::sqrt(dt);
}

double ou_decay_factor(double ksq, double dt) { return std::exp(-0.5 * (1.0 + ksq) * dt); }

double ou_noise_variance(double ksq, double dt) {
  const double a = 1.0 + ksq;
  return -std::expm1(-a * dt) / a;
}

SpectralField ou_noise(const TorusGrid& grid, double dt, const SpectralField& white) {
  if (!(white.grid() == grid)) throw std::invalid_argument("grid mismatch");
  return apply_multiplier(white, [dt](int k1, int k2) {
    return std::sqrt(ou_noise_variance(k1 * k1 + k2 * k2, dt));
  });
}

SpectralField ou_transition(const SpectralField& state, double dt, const SpectralField& white) {
  if (!(dt > 0.0)) throw std::invalid_argument("OU transition needs dt > 0");
  if (!(state.grid() == white.grid())) throw std::invalid_argument("grid mismatch");
  SpectralField out = state;
  auto o = out.coeffs();
  const auto w = white.coeffs();
  for_each_mode(state.grid(), [&](std::size_t idx, int k1, int k2, double, bool) {
    const double ksq = k1 * k1 + k2 * k2;
    o[idx] = ou_decay_factor(ksq, dt) * o[idx] + std::sqrt(ou_noise_variance(ksq, dt)) * w[idx];
  });
  return out;
}

SpectralField ou_transition(const SpectralField& state, double dt, const RngStream& stream,
                            double noise_scale) {
  if (!(dt > 0.0)) throw std::invalid_argument("OU transition needs dt > 0");
  SpectralField white = white_modes(state.grid(), stream);
  white *= noise_scale;
  return ou_transition(state, dt, white);
}

OuTrajectory ou_path(const SpectralField& init, std::span<const double> times, const RngStream& stream) {
  if (times.empty() || times.front() != 0.0) {
    throw std::invalid_argument("OU path times must start at 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("OU path times must increase");
  }
  OuTrajectory path{{times.begin(), times.end()}, {}, stream};
  path.states.reserve(times.size());
  path.states.push_back(init);
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const SpectralField white = white_modes(init.grid(), stream.substream(j));
    path.states.push_back(ou_transition(path.states.back(), times[j + 1] - times[j], white));
  }
  return path;
}

std::vector<double> uniform_times(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0) || dt > horizon) {
    throw std::invalid_argument("need 0 < dt <= horizon");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = std::min(horizon, i * dt);
  return t;
}

}  // namespace expphi
