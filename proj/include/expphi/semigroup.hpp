#pragma once

#include "expphi/cutoff.hpp"
#include "expphi/spectral_field.hpp"

namespace expphi {

// e^{t(Delta - 1)/2}: multiplies u_hat(k) by exp(-(1+|k|^2) t / 2).
SpectralField heat_semigroup(const SpectralField& field, double t);

// e^{lambda Delta}: multiplies u_hat(k) by exp(-|k|^2 lambda).
SpectralField heat_semigroup_massless(const SpectralField& field, double lambda);

/// Truncated Green kernel as a field in z:
///   K_N^gamma(z) = (2 pi)^{-2} sum_k psi(2^-N k)^2 (1+|k|^2)^{-gamma} e^{i k.z}.
SpectralField green_field(double gamma, const CutoffProfile& psi, int level, const TorusGrid& grid);

// Same kernel evaluated at an arbitrary displacement by direct mode summation.
double green_value(double gamma, const CutoffProfile& psi, int level, const TorusGrid& grid,
                   double z1, double z2);

// Distance on the torus from the origin, each coordinate wrapped to [-pi, pi).
double torus_distance(double z1, double z2);

}  // namespace expphi
