#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "expphi/gaussian_fields.hpp"
#include "expphi/norms.hpp"
#include "expphi/semigroup.hpp"
#include "expphi/wick.hpp"

using namespace expphi;

namespace {

constexpr double kPi = std::numbers::pi;

// Covariance of P_N phi between two points, summed directly over the active modes.
double direct_cov(const CutoffProfile& psi, int level, const TorusGrid& g, double z1, double z2) {
  double s = 0.0;
  for_each_mode(g, [&](std::size_t, int k1, int k2, double, bool active) {
    if (!active) return;
    const double w = psi.at_level(level, k1, k2);
    const double term = w * w / (1.0 + k1 * k1 + k2 * k2);
    // Stored half plane: column 0 holds both signs of k1, other columns stand for +-k.
    if (k2 == 0) {
      s += term * std::cos(k1 * z1);
    } else {
      s += 2.0 * term * std::cos(k1 * z1 + k2 * z2);
    }
  });
  return s / (4 * kPi * kPi);
}

// 2D Gauss-Hermite expectation of e^{aX - a^2 v/2} e^{aY - a^2 v/2}, Var X = Var Y = v, Cov = c.
double gauss_hermite_second_moment(double a, double v, double c) {
  // 40-point physicists' rule, roots by Newton iteration on normalized Hermite polynomials.
  const int n = 40;
  std::vector<double> x(n), w(n);
  double z = 0.0;
  for (int i = 0; i < n / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = std::pow(kPi, -0.25), p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
  }
  // X = sqrt(2v) u, Y = rho X + sqrt(2 v (1 - rho^2)) t with rho = c / v.
  const double rho = c / v;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double X = std::sqrt(2 * v) * x[i];
      const double Y = rho * X + std::sqrt(2 * v * (1 - rho * rho)) * x[j];
      total += w[i] * w[j] * std::exp(a * X + a * Y - a * a * v);
    }
  }
  return total / kPi;
}

}  // namespace

TEST_CASE("renormalization constant examples") {
  const TorusGrid g(32);
  CHECK(renorm_constant(CutoffProfile::sharp(), 0, g) == doctest::Approx(3.0 / (4 * kPi * kPi)).epsilon(1e-14));
  const auto only_zero = CutoffProfile::custom("zero-only", [](double x, double y) {
    return x * x + y * y < 0.25 ? 1.0 : 0.0; }, 0.5, 4.0, 0.5);
  CHECK(renorm_constant(only_zero, 0, g) == doctest::Approx(1.0 / (4 * kPi * kPi)).epsilon(1e-14));
  CHECK(green_value(1.0, CutoffProfile::sharp(), 3, g, 0.0, 0.0) ==
        doctest::Approx(renorm_constant(CutoffProfile::sharp(), 3, g)).epsilon(1e-13));
}

TEST_CASE("renormalization constant grows like N log 2 / (2 pi)") {
  const TorusGrid g(512);  // sharp levels up to 7 are resolved
  const auto psi = CutoffProfile::sharp();
  std::vector<double> diff;
  for (int n = 1; n <= 7; ++n) {
    diff.push_back(renorm_constant(psi, n, g) - n * std::log(2.0) / (2 * kPi));
  }
  // The remainder settles: successive changes shrink toward 0.
  CHECK(std::abs(diff[6] - diff[5]) < 0.01);
  CHECK(std::abs(diff[6] - diff[0]) < 0.2);
}

TEST_CASE("renormalization tail guard and resolution errors") {
  const TorusGrid g(16);
  CHECK_THROWS_AS(renorm_constant(CutoffProfile::sharp(), 3, g), std::invalid_argument);
  const auto wide = CutoffProfile::custom("wide", [](double x, double y) { return 1.0 / (1.0 + std::pow(x * x + y * y, 4)); },
                                          0.99, 4.0, 1.0);
  CHECK_THROWS_AS(renorm_constant(wide, 2, g), std::invalid_argument);
  CHECK_THROWS_AS(make_wick_params(4.0, 1, 0.5, CutoffProfile::sharp(), g), std::invalid_argument);
  CHECK_THROWS_AS(make_wick_params(1.5, 1, 0.1, CutoffProfile::sharp(), g), std::invalid_argument);
  CHECK_THROWS_AS(make_wick_params(1.0, -1, 0.5, CutoffProfile::sharp(), g), std::invalid_argument);
  CHECK(alpha_limit() == doctest::Approx(std::sqrt(4 * kPi)));
}

TEST_CASE("projection") {
  const TorusGrid g(32);
  const auto f = gff_sample(g, RngStream(1, 0, StreamPurpose::test));
  const auto p = apply_PN(f, CutoffProfile::sharp(), 2);
  CHECK(p.mode(4, 0) == f.mode(4, 0));
  CHECK(p.mode(3, 3) == Complex(0.0, 0.0));
  CHECK(sobolev_distance(apply_PN(p, CutoffProfile::sharp(), 2), p, 0.0) == 0.0);
  CHECK(sobolev_distance(apply_PN(f, CutoffProfile::unit(), 7), f, 0.0) == 0.0);
  CHECK_THROWS_AS(apply_PN(f, CutoffProfile::sharp(), 4), std::invalid_argument);
}

TEST_CASE("Wick exponential at zero charge is identically one") {
  const TorusGrid g(32);
  const auto psi = CutoffProfile::sharp();
  const auto w = wick_exp_gff(gff_sample(g, RngStream(2, 0, StreamPurpose::test)), make_wick_params(0.0, 3, 0.5, psi, g), psi);
  for (double v : w.values) CHECK(v == 1.0);
  CHECK(w.field.at(0, 0).real() == doctest::Approx(2 * kPi));
  CHECK_FALSE(w.overflow);
}

TEST_CASE("Wick exponential matches its definition pointwise") {
  const TorusGrid g(32);
  const auto psi = CutoffProfile::smooth();
  const auto params = make_wick_params(1.2, 2, 0.5, psi, g);
  const auto phi = gff_sample(g, RngStream(3, 0, StreamPurpose::test));
  const auto pn = from_spectral(apply_PN(phi, psi, 2));
  const auto w = wick_exp_gff(phi, params, psi);
  for (std::size_t i = 0; i < pn.size(); i += 37) {
    CHECK(w.values[i] == doctest::Approx(std::exp(1.2 * pn[i] - 0.72 * params.c_n)).epsilon(1e-14));
  }
}

TEST_CASE("overflow is flagged") {
  const TorusGrid g(8);
  SpectralField big(g);
  big.at(0, 0) = 2 * kPi * 1000.0;
  WickParams p{1.0, 1, 0.0, 0.5};
  const auto w = wick_exp_projected(big, p);
  CHECK(w.overflow);
  CHECK(w.max_exponent == doctest::Approx(1000.0));
  CHECK(sobolev_norm(w.field, 0.0) == 0.0);
}

TEST_CASE("analytic second moment against independent routes") {
  const TorusGrid g(32);
  for (const auto& psi : {CutoffProfile::sharp(), CutoffProfile::smooth()}) {
    const auto params = make_wick_params(1.0, 2, 0.5, psi, g);
    for (auto [dx, dy] : {std::pair{0.0, 0.0}, std::pair{0.4, -1.3}, std::pair{3.0, 2.9}}) {
      const double oracle = analytic_wick_cov(params, psi, g, 0.5 + dx, 1.0 + dy, 0.5, 1.0);
      const double c = direct_cov(psi, 2, g, dx, dy);
      CHECK(oracle == doctest::Approx(std::exp(c)).epsilon(1e-12));
      if (dx != 0.0) {
        CHECK(oracle == doctest::Approx(gauss_hermite_second_moment(1.0, params.c_n, c)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("Green function field matches the direct sum") {
  const TorusGrid g(32);
  const auto psi = CutoffProfile::sharp();
  for (double gamma : {0.5, 1.0}) {
    const auto vals = from_spectral(green_field(gamma, psi, 3, g));
    for (int idx : {0, 5, 300, 777}) {
      const double z1 = g.coordinate(idx / 32), z2 = g.coordinate(idx % 32);
      CHECK(vals[idx] == doctest::Approx(green_value(gamma, psi, 3, g, z1, z2)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(green_field(0.0, psi, 1, g), std::invalid_argument);
  CHECK_THROWS_AS(green_value(1.5, psi, 1, g, 0, 0), std::invalid_argument);
}

TEST_CASE("Wick exponential along an OU path and time norms") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  const auto params = make_wick_params(1.0, 2, 0.5, psi, g);
  const auto times = uniform_times(1.0, 0.125);
  const auto traj = ou_path(gff_sample(g, RngStream(1, 0, StreamPurpose::test)), times, RngStream(1, 0, StreamPurpose::dynamics_noise));
  const auto w = wick_exp_ou(traj, params, psi, true);
  CHECK(w.fields.size() == times.size());
  CHECK(w.values.size() == times.size());
  CHECK(w.overflow_count == 0);
  CHECK(l2_time_distance(times, w.fields, w.fields, -0.5) == 0.0);

  // A constant-in-time path: the L2-in-time norm is sqrt(T) times the norm.
  std::vector<SpectralField> same(times.size(), w.fields[3]);
  CHECK(l2_time_norm(times, same, -0.5) == doctest::Approx(sobolev_norm(w.fields[3], -0.5)).epsilon(1e-14));
  const std::vector<double> short_times = {0.0, 1.0};
  CHECK_THROWS_AS(l2_time_norm(short_times, same, 0.0), std::invalid_argument);
}
