#pragma once

#include <complex>
#include <span>

#include "expphi/torus_grid.hpp"

namespace expphi::detail {

// Unnormalized 2-D real-to-complex transform, sign -1.
void fft_forward(const TorusGrid& grid, std::span<const double> in,
                 std::span<std::complex<double>> out);

// Unnormalized 2-D complex-to-real transform, sign +1. The input is not modified.
void fft_inverse(const TorusGrid& grid, std::span<const std::complex<double>> in,
                 std::span<double> out);

}  // namespace expphi::detail
