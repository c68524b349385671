#pragma once

#include <span>
#include <vector>

#include "expphi/cutoff.hpp"
#include "expphi/gaussian_fields.hpp"
#include "expphi/spectral_field.hpp"

namespace expphi {

inline constexpr double kRenormTailTolerance = 1e-8;
inline constexpr double kExponentGuard = 700.0;

/// Charge, cutoff level, renormalization constant and target regularity.
struct WickParams {
  double alpha = 0.0;
  int level = 0;
  double c_n = 0.0;
  double beta = 0.5;
};

// |alpha| < sqrt(4 pi)
double alpha_limit();

/// Validates |alpha| < sqrt(4 pi) and alpha^2/(4 pi) < beta < 1, then fills c_n.
WickParams make_wick_params(double alpha, int level, double beta, const CutoffProfile& psi,
                            const TorusGrid& grid);

// u_hat(k) <- psi(2^-N k) u_hat(k). Throws when the level is not resolved by the grid.
SpectralField apply_PN(const SpectralField& field, const CutoffProfile& psi, int level);

/// C_N = (4 pi^2)^-1 sum_k psi(2^-N k)^2 / (1+|k|^2) over the active grid modes.
/// The part of the lattice sum outside the grid is estimated on a 4x wider
/// lattice; a tail above kRenormTailTolerance is an error.
double renorm_constant(const CutoffProfile& psi, int level, const TorusGrid& grid);

/// exp(alpha P_N phi(x) - alpha^2 C_N / 2) on the grid.
struct WickExponential {
  SpectralField field;
  std::vector<double> values;
  double max_exponent = 0.0;
  bool overflow = false;  // max exponent above kExponentGuard; field is left at zero
};

WickExponential wick_exp_gff(const SpectralField& phi, const WickParams& params, const CutoffProfile& psi);

// Same, for a field that is already projected (P_N phi given directly).
WickExponential wick_exp_projected(const SpectralField& projected, const WickParams& params);

/// exp(alpha^2 K^1_N(x - y)), the second moment E[exp_N(x) exp_N(y)] under the free field.
double analytic_wick_cov(const WickParams& params, const CutoffProfile& psi, const TorusGrid& grid,
                         double x1, double x2, double y1, double y2);

struct WickPath {
  std::vector<double> times;
  std::vector<SpectralField> fields;
  std::vector<std::vector<double>> values;
  int overflow_count = 0;
};

// Wick exponential of every state of an OU trajectory.
WickPath wick_exp_ou(const OuTrajectory& traj, const WickParams& params, const CutoffProfile& psi,
                     bool keep_values = false);

/// sqrt(int_0^T ||u_t||_{H^s}^2 dt) by the trapezoid rule on the given times.
double l2_time_norm(std::span<const double> times, std::span<const SpectralField> fields, double s);
double l2_time_distance(std::span<const double> times, std::span<const SpectralField> a,
                        std::span<const SpectralField> b, double s);

}  // namespace expphi
