#include "expphi/hermite.hpp"

#include <stdexcept>

namespace expphi {

double hermite(int n, double x, double sigma) {
  if (n < 0 || n > kMaxHermiteDegree) throw std::invalid_argument("Hermite degree out of range");
  if (!(sigma >= 0.0)) throw std::invalid_argument("Hermite variance must be nonnegative");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = x * cur - k * sigma * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace expphi
