#pragma once

#include <span>
#include <vector>

#include "expphi/rng.hpp"
#include "expphi/spectral_field.hpp"

namespace expphi {

/// Standard complex white noise on the active modes: E|xi(k)|^2 = 1 with
/// independent real and imaginary parts of variance 1/2, xi(0) real N(0,1),
/// xi(-k) = conj(xi(k)). Nyquist modes are zero.
///
/// Real/complex bookkeeping: for the real orthonormal basis e_k (cosines on
/// Z^2_+, sines on Z^2_-) and W = sum_k w^(k) e_k one has, for k in Z^2_+,
///   <W, e_k> = (w^(k) - i w^(-k)) / sqrt(2),   <W, e_0> = w^(0),
/// so the complex coefficients above are the unit-time increments of W.
SpectralField white_modes(const TorusGrid& grid, const RngStream& stream);

// Free-field draw: u_hat(k) = (1+|k|^2)^{-1/2} xi(k).
SpectralField gff_sample(const TorusGrid& grid, const RngStream& stream);

// Cylindrical Wiener increment over dt: sqrt(dt) xi(k).
SpectralField wiener_increment(const TorusGrid& grid, double dt, const RngStream& stream);

double ou_decay_factor(double ksq, double dt);    // exp(-(1+|k|^2) dt / 2)
double ou_noise_variance(double ksq, double dt);  // (1 - exp(-(1+|k|^2) dt)) / (1+|k|^2)

/// Exact transition of dX = (1/2)(Delta - 1) X dt + dW over dt, per mode:
///   X_hat(k) <- ou_decay_factor X_hat(k) + sqrt(ou_noise_variance) xi(k).
SpectralField ou_transition(const SpectralField& state, double dt, const SpectralField& white);
SpectralField ou_transition(const SpectralField& state, double dt, const RngStream& stream,
                            double noise_scale = 1.0);

// Stochastic-convolution part of one exact OU step.
SpectralField ou_noise(const TorusGrid& grid, double dt, const SpectralField& white);

struct OuTrajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  RngStream stream;
};

/// Chained exact transitions. Step j (times[j] -> times[j+1]) consumes
/// white_modes(grid, stream.substream(j)); the SQE solvers use the same
/// convention, which couples them to this path.
OuTrajectory ou_path(const SpectralField& init, std::span<const double> times, const RngStream& stream);

// 0, dt, 2 dt, ..., T (the last step is shortened if dt does not divide T).
std::vector<double> uniform_times(double horizon, double dt);

}  // namespace expphi
