#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace expphi::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

const PlanPair& plans_for(int m) {
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  std::vector<double> real(static_cast<std::size_t>(m) * m);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(m) * (m / 2 + 1));
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  PlanPair p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.forward = fftw_plan_dft_r2c_2d(m, m, real.data(), c, flags);
  p.inverse = fftw_plan_dft_c2r_2d(m, m, c, real.data(), flags | FFTW_DESTROY_INPUT);
  return cache.emplace(m, p).first->second;
}

}  // namespace

void fft_forward(const TorusGrid& grid, std::span<const double> in,
                 std::span<std::complex<double>> out) {
  const auto& p = plans_for(grid.size());
  // r2c leaves its input intact; the cast only satisfies the C signature.
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void fft_inverse(const TorusGrid& grid, std::span<const std::complex<double>> in,
                 std::span<double> out) {
  const auto& p = plans_for(grid.size());
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

}  // namespace expphi::detail
