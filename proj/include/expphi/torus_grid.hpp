#pragma once

#include <cstddef>
#include <numbers>

namespace expphi {

/// Uniform M x M collocation grid on the torus (R / 2 pi Z)^2.
///
/// Spectral data is stored in the half-plane layout produced by a real-to-
/// complex transform: rows carry k1 in [-M/2, M/2), columns carry k2 in
/// [0, M/2]. Column M/2 is the Nyquist column and is reported as k2 = -M/2 so
/// that every stored mode lies in the mode set [-M/2, M/2)^2. Modes with a
/// Nyquist component are "inactive": samplers leave them at zero because they
/// have no independent conjugate partner on the grid.
class TorusGrid {
 public:
  explicit TorusGrid(int modes_per_dim);

  int size() const { return m_; }
  std::size_t points() const { return static_cast<std::size_t>(m_) * m_; }
  int rows() const { return m_; }
  int cols() const { return m_ / 2 + 1; }
  std::size_t coeff_count() const { return static_cast<std::size_t>(rows()) * cols(); }

  double spacing() const { return 2.0 * std::numbers::pi / m_; }
  double cell_area() const { return 4.0 * std::numbers::pi * std::numbers::pi / (static_cast<double>(m_) * m_); }
  double coordinate(int index) const { return spacing() * index; }

  int k1(int row) const { return row < m_ / 2 ? row : row - m_; }
  int k2(int col) const { return col < m_ / 2 ? col : col - m_; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols() + col;
  }
  // Number of full-plane modes the stored coefficient stands for (1 or 2).
  double multiplicity(int col) const { return (col == 0 || col == m_ / 2) ? 1.0 : 2.0; }
  bool is_active(int row, int col) const { return row != m_ / 2 && col != m_ / 2; }

  // Row holding -k1 for a mode in column 0 (conjugate partner inside the column).
  int mirror_row(int row) const { return row == 0 ? 0 : m_ - row; }

  bool operator==(const TorusGrid&) const = default;

 private:
  int m_;
};

TorusGrid make_grid(int modes_per_dim);

/// Calls fn(index, k1, k2, multiplicity, active) for every stored mode.
template <class Fn>
void for_each_mode(const TorusGrid& grid, Fn&& fn) {
  for (int r = 0; r < grid.rows(); ++r) {
    const int k1 = grid.k1(r);
    for (int c = 0; c < grid.cols(); ++c) {
      fn(grid.index(r, c), k1, grid.k2(c), grid.multiplicity(c), grid.is_active(r, c));
    }
  }
}

}  // namespace expphi
