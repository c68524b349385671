#pragma once

#include <complex>
#include <span>
#include <vector>

#include "expphi/torus_grid.hpp"

namespace expphi {

using Complex = std::complex<double>;

/// Real field on the torus held by its Fourier coefficients
/// u_hat(k) = <u, e_k> with e_k(x) = (2 pi)^{-1} exp(i k.x).
///
/// Only the half plane k2 >= 0 is stored; u_hat(-k) = conj(u_hat(k)) is implied.
class SpectralField {
 public:
  explicit SpectralField(const TorusGrid& grid);
  SpectralField(const TorusGrid& grid, std::vector<Complex> coeffs);

  const TorusGrid& grid() const { return grid_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  std::span<Complex> coeffs() { return coeffs_; }

  Complex& at(int row, int col) { return coeffs_[grid_.index(row, col)]; }
  const Complex& at(int row, int col) const { return coeffs_[grid_.index(row, col)]; }

  // Coefficient of an arbitrary integer mode; zero outside the grid's mode set.
  Complex mode(int k1, int k2) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double scale);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

 private:
  TorusGrid grid_;
  std::vector<Complex> coeffs_;
};

/// Grid values are row-major: values[i * M + j] = u(2 pi i / M, 2 pi j / M).
SpectralField to_spectral(std::span<const double> values, const TorusGrid& grid);
std::vector<double> from_spectral(const SpectralField& field);

/// Multiplies every coefficient by m(k1, k2); m must be even in k.
template <class Multiplier>
SpectralField apply_multiplier(SpectralField field, Multiplier&& m) {
  auto c = field.coeffs();
  for_each_mode(field.grid(), [&](std::size_t idx, int k1, int k2, double, bool) {
    c[idx] *= m(k1, k2);
  });
  return field;
}

/// Sum over the full mode plane of weight(k1, k2) * |u_hat(k)|^2.
template <class Weight>
double weighted_energy(const SpectralField& field, Weight&& weight) {
  const auto c = field.coeffs();
  double total = 0.0;
  for_each_mode(field.grid(), [&](std::size_t idx, int k1, int k2, double mult, bool) {
    total += mult * weight(k1, k2) * std::norm(c[idx]);
  });
  return total;
}

// Zeroes every mode with a Nyquist component.
void clear_inactive(SpectralField& field);

// Largest violation of conjugate symmetry inside the self-conjugate columns.
double hermitian_defect(const SpectralField& field);

// Grid quadrature of a function sampled on the grid: sum * (2 pi / M)^2.
double quadrature(std::span<const double> values, const TorusGrid& grid);

}  // namespace expphi
