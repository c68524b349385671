#include "expphi/spectral_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"

namespace expphi {

SpectralField::SpectralField(const TorusGrid& grid)
    : grid_(grid), coeffs_(grid.coeff_count(), Complex{0.0, 0.0}) {}

SpectralField::SpectralField(const TorusGrid& grid, std::vector<Complex> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.coeff_count()) {
    throw std::invalid_argument("coefficient count does not match grid");
  }
}

Complex SpectralField::mode(int k1, int k2) const {
  const int half = grid_.size() / 2;
  if (k1 < -half || k1 >= half || k2 < -half || k2 >= half) return {0.0, 0.0};
  bool conj = false;
  if (k2 < 0 && k2 != -half) {
    k1 = -k1;
    k2 = -k2;
    conj = true;
    if (k1 == half) k1 = -half;
  }
  const int row = k1 >= 0 ? k1 : k1 + grid_.size();
  const int col = k2 >= 0 ? k2 : half;
  const Complex v = at(row, col);
  return conj ? std::conj(v) : v;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

SpectralField to_spectral(std::span<const double> values, const TorusGrid& grid) {
  if (values.size() != grid.points()) {
    throw std::invalid_argument("value count does not match grid");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite grid value");
  }
  std::vector<Complex> coeffs(grid.coeff_count());
  detail::fft_forward(grid, values, coeffs);
  const double m = grid.size();
  const double scale = 2.0 * std::numbers::pi / (m * m);
  for (auto& c : coeffs) c *= scale;
  return SpectralField(grid, std::move(coeffs));
}

std::vector<double> from_spectral(const SpectralField& field) {
  const auto& grid = field.grid();
  std::vector<double> values(grid.points());
  detail::fft_inverse(grid, field.coeffs(), values);
  const double scale = 1.0 / (2.0 * std::numbers::pi);
  for (auto& v : values) v *= scale;
  return values;
}

void clear_inactive(SpectralField& field) {
  const auto& grid = field.grid();
  auto c = field.coeffs();
  for_each_mode(grid, [&](std::size_t idx, int, int, double, bool active) {
    if (!active) c[idx] = 0.0;
  });
}

double hermitian_defect(const SpectralField& field) {
  const auto& grid = field.grid();
  double worst = 0.0;
  for (int col : {0, grid.size() / 2}) {
    for (int r = 0; r < grid.rows(); ++r) {
      const Complex a = field.at(r, col);
      const Complex b = field.at(grid.mirror_row(r), col);
      worst = std::max(worst, std::abs(a - std::conj(b)));
    }
  }
  return worst;
}

double quadrature(std::span<const double> values, const TorusGrid& grid) {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_area();
}

}  // namespace expphi
