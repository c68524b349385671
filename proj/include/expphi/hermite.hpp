#pragma once

namespace expphi {

inline constexpr int kMaxHermiteDegree = 64;

/// Hermite polynomial H_n(x; sigma) with generating function
/// exp(a x - a^2 sigma / 2) = sum_n a^n / n! H_n(x; sigma), evaluated by
/// H_{n+1} = x H_n - n sigma H_{n-1}. Throws for n outside [0, 64] or sigma < 0.
double hermite(int n, double x, double sigma);

}  // namespace expphi
