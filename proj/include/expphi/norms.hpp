#pragma once

#include <limits>
#include <string_view>

#include "expphi/spectral_field.hpp"

namespace expphi {

enum class NormKind { sobolev, besov };

/// Regularity norm selector. For the Sobolev kind p = q = 2 implicitly.
struct NormSpec {
  NormKind kind = NormKind::sobolev;
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;

  static NormSpec sobolev(double s) { return {NormKind::sobolev, s, 2.0, 2.0}; }
  static NormSpec besov(double s, double p, double q) { return {NormKind::besov, s, p, q}; }
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// sqrt(sum_k (1+|k|^2)^s |u_hat(k)|^2)
double sobolev_norm(const SpectralField& field, double s);
double sobolev_distance(const SpectralField& a, const SpectralField& b, double s);

/// Littlewood-Paley partition of unity (chi, rho), both radial.
///
/// theta(r) is 1 on [0, 3/4], 0 on [4/3, inf) and interpolates with the
/// C-infinity transition built from exp(-1/t). chi(r) = theta(r) and
/// rho(r) = theta(r/2) - theta(r), so rho is supported in [3/4, 8/3] and
/// chi + sum_j rho(2^-j .) telescopes to 1.
inline constexpr std::string_view kDyadicPartitionVersion = "dyadic-bump/1";
double dyadic_chi(double r);
double dyadic_rho(double r);
// rho_j(|k|) with rho_{-1} = chi.
double dyadic_block(int j, double r);
// Largest block index with nonzero support on the grid.
int dyadic_block_count(const TorusGrid& grid);

// L^p norm of a grid function by quadrature; p = kInfinity gives the max norm.
double lp_norm(std::span<const double> values, const TorusGrid& grid, double p);

/// ell^q over j >= -1 of 2^{js} ||Delta_j u||_{L^p}. Blocks with p = 2 use
/// Parseval; other p go through the inverse transform and grid quadrature.
double besov_norm(const SpectralField& field, const NormSpec& spec);

double norm(const SpectralField& field, const NormSpec& spec);

}  // namespace expphi
