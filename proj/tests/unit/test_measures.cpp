#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "expphi/errors.hpp"
#include "expphi/gaussian_fields.hpp"
#include "expphi/measures.hpp"
#include "expphi/norms.hpp"

using namespace expphi;

namespace {

constexpr double kPi = std::numbers::pi;

// E[a^power exp(-g(a) load)] for a ~ N(0,1) by composite Simpson on [-80, 20].
double simpson_zero_mode(double load, const ZeroModeSplit& s, double power = 0.0) {
  const int n = 200000;
  const double lo = -80.0, h = 100.0 / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double a = lo + i * h;
    const double g = std::exp(s.slope * a - s.offset);
    const double f = std::pow(a, power) * std::exp(-0.5 * a * a - g * load) / std::sqrt(2 * kPi);
    acc += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return acc * h / 3.0;
}

SpectralField without_zero_mode(SpectralField f) {
  f.at(0, 0) = 0.0;
  return f;
}

}  // namespace

TEST_CASE("zero charge weights are exactly exp(-4 pi^2)") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  const auto params = make_wick_params(0.0, 2, 0.5, psi, g);
  for (auto prop : {Proposal::free_field, Proposal::zero_mode_marginal}) {
    const auto ens = sample_ensemble(g, params, psi, 50, prop, 3);
    const auto est = estimate_partition(ens);
    CHECK(est.mean == doctest::Approx(std::exp(-4 * kPi * kPi)).epsilon(1e-13));
    CHECK(est.std_error == 0.0);
    CHECK(ens.ess() == doctest::Approx(50.0));
  }
}

TEST_CASE("weights are bounded by one") {
  const TorusGrid g(32);
  const auto psi = CutoffProfile::smooth();
  const auto params = make_wick_params(1.5, 2, 0.5, psi, g);
  for (auto prop : {Proposal::free_field, Proposal::zero_mode_marginal}) {
    const auto ens = sample_ensemble(g, params, psi, 200, prop, 4);
    for (double w : ens.weights()) {
      CHECK(w <= 1.0);
      CHECK(w >= 0.0);
    }
    CHECK(estimate_partition(ens).weights_bounded);
  }
}

TEST_CASE("zero-mode split is a pointwise identity") {
  const TorusGrid g(32);
  for (const auto& psi : {CutoffProfile::sharp(), CutoffProfile::smooth()}) {
    const auto params = make_wick_params(1.2, 2, 0.5, psi, g);
    const auto split = zero_mode_split(params, psi);
    CHECK(split.reduced_c == doctest::Approx(params.c_n - 1.0 / (4 * kPi * kPi)).epsilon(1e-14));
    for (int r = 0; r < 5; ++r) {
      const auto phi = gff_sample(g, RngStream(11, r, StreamPurpose::test));
      const double a = phi.at(0, 0).real();
      const double load = zero_mode_load(without_zero_mode(phi), params, psi);
      const double g_a = std::exp(split.slope * a - split.offset);
      CHECK(rn_log_weight(phi, params, psi) == doctest::Approx(-g_a * load).epsilon(1e-12));
    }
    CHECK_THROWS_AS(zero_mode_load(gff_sample(g, RngStream(1, 0, StreamPurpose::test)), params, psi),
                    std::invalid_argument);
  }
}

TEST_CASE("zero-mode quadrature against Simpson") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  const auto split = zero_mode_split(make_wick_params(1.0, 2, 0.5, psi, g), psi);
  CHECK(log_zero_mode_weight(0.0, split) == doctest::Approx(0.0).epsilon(1e-12));
  for (double load : {0.5, 10.0, 40.0, 1000.0}) {
    CHECK(log_zero_mode_weight(load, split) == doctest::Approx(std::log(simpson_zero_mode(load, split))).epsilon(1e-9));
  }
  CHECK(std::isinf(log_zero_mode_weight(std::numeric_limits<double>::infinity(), split)));
  CHECK_THROWS_AS(log_zero_mode_weight(-1.0, split), std::invalid_argument);
}

TEST_CASE("zero-mode conditional sampling") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  const auto split = zero_mode_split(make_wick_params(1.0, 2, 0.5, psi, g), psi);
  CHECK(sample_zero_mode(0.0, split, 0.5) == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(sample_zero_mode(0.0, split, 0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-3));
  // Conditional mean by averaging the inverse CDF over a fine u grid.
  for (double load : {5.0, 40.0, 3000.0}) {
    const int n = 20000;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += sample_zero_mode(load, split, (i + 0.5) / n);
    mean /= n;
    const double oracle = simpson_zero_mode(load, split, 1.0) / simpson_zero_mode(load, split);
    CHECK(oracle < 0.0);
    CHECK(mean == doctest::Approx(oracle).epsilon(1e-3));
  }
}

TEST_CASE("effective sample size and self-normalized means") {
  const std::vector<double> flat(10, -3.0);
  CHECK(effective_sample_size(flat) == doctest::Approx(10.0));
  std::vector<double> one(10, -std::numeric_limits<double>::infinity());
  one[4] = -700.0;
  CHECK(effective_sample_size(one) == doctest::Approx(1.0));
  CHECK(effective_sample_size(std::vector<double>(3, -std::numeric_limits<double>::infinity())) == 0.0);

  const std::vector<double> lw = {-1.0, -2.0, -0.5, -4.0};
  const std::vector<double> vals = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> shifted = lw;
  for (double& x : shifted) x -= 800.0;
  CHECK(self_normalized_mean(shifted, vals) == doctest::Approx(self_normalized_mean(lw, vals)).epsilon(1e-13));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    num += std::exp(lw[i]) * vals[i];
    den += std::exp(lw[i]);
  }
  CHECK(self_normalized_mean(lw, vals) == doctest::Approx(num / den).epsilon(1e-14));
  CHECK(effective_sample_size(shifted) == doctest::Approx(effective_sample_size(lw)).epsilon(1e-13));
}

TEST_CASE("effective sample size falls as the charge grows") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  double prev = 1e300;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto ens = sample_ensemble(g, make_wick_params(alpha, 1, 0.5, psi, g), psi, 2000, Proposal::free_field, 12);
    CHECK(ens.ess() < prev);
    prev = ens.ess();
  }
}

TEST_CASE("the two proposals estimate the same partition function") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  const auto params = make_wick_params(1.0, 2, 0.5, psi, g);
  const auto a = estimate_partition(sample_ensemble(g, params, psi, 4000, Proposal::free_field, 13));
  const auto b = estimate_partition(sample_ensemble(g, params, psi, 4000, Proposal::zero_mode_marginal, 13));
  CHECK(a.jensen_ok);
  CHECK(b.jensen_ok);
  CHECK(b.std_error < a.std_error);
  CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("partition estimate is stable between neighbouring levels") {
  const TorusGrid g(64);
  const auto psi = CutoffProfile::sharp();
  const auto z3 = estimate_partition(
      sample_ensemble(g, make_wick_params(1.0, 3, 0.5, psi, g), psi, 2000, Proposal::zero_mode_marginal, 14));
  const auto z4 = estimate_partition(
      sample_ensemble(g, make_wick_params(1.0, 4, 0.5, psi, g), psi, 2000, Proposal::zero_mode_marginal, 15));
  CHECK(std::abs(z3.mean - z4.mean) <= 3.0 * std::hypot(z3.std_error, z4.std_error));
}

TEST_CASE("partition estimate regression pin") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  const auto est = estimate_partition(
      sample_ensemble(g, make_wick_params(1.0, 2, 0.5, psi, g), psi, 500, Proposal::zero_mode_marginal, 2024));
  CHECK(est.mean / std::exp(-4 * kPi * kPi) == doctest::Approx(55777.004901930908).epsilon(1e-9));
}

TEST_CASE("resampling reproduces the weighted mean") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  const auto params = make_wick_params(1.0, 2, 0.5, psi, g);
  const auto ens = sample_ensemble(g, params, psi, 4000, Proposal::zero_mode_marginal, 16);
  std::vector<double> obs;
  for (const auto& s : ens.samples) obs.push_back(sobolev_norm(s, -1.0));
  const double weighted = self_normalized_mean(ens.log_weights, obs);

  const auto draws = resample_stationary(ens, 2000, RngStream(16, 0, StreamPurpose::resampling));
  double mean = 0.0, sq = 0.0;
  bool zero_modes_filled = true;
  for (const auto& d : draws) {
    if (d.at(0, 0) == Complex(0.0, 0.0)) zero_modes_filled = false;
    const double v = sobolev_norm(without_zero_mode(d), -1.0);
    mean += v;
    sq += v * v;
  }
  mean /= draws.size();
  const double se = std::sqrt((sq / draws.size() - mean * mean) / draws.size());
  CHECK(zero_modes_filled);
  CHECK(std::abs(mean - weighted) <= 3.0 * se);

  CHECK_THROWS_AS(resample_stationary(ens, 10, RngStream(1, 0, StreamPurpose::resampling), 1e6), EssTooLowError);
}

TEST_CASE("free field is stationary under zero-charge dynamics") {
  const TorusGrid g(16);
  const auto psi = CutoffProfile::sharp();
  SqeConfig cfg;
  cfg.horizon = 0.25;
  cfg.dt = 1.0 / 64;
  cfg.equation = Equation::projected;
  cfg.params = make_wick_params(0.0, 2, 0.5, psi, g);
  std::vector<SpectralField> init;
  for (int r = 0; r < 400; ++r) init.push_back(gff_sample(g, RngStream(17, r, StreamPurpose::initial_state)));
  const auto rep = invariance_test(init, cfg, make_wick_params(1.0, 2, 0.5, psi, g), 0.5, 17, 2);
  CHECK(rep.observables.size() == invariance_observables().size());
  CHECK(rep.stationary);
  CHECK(rep.max_abs_z <= 3.0);
}

TEST_CASE("proposal names") {
  CHECK(parse_proposal("free-field") == Proposal::free_field);
  CHECK(to_string(Proposal::zero_mode_marginal) == "zero-mode-marginal");
  CHECK_THROWS_AS(parse_proposal("uniform"), std::invalid_argument);
}
