// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "expphi/config.hpp"
#include "expphi/dynamics.hpp"
#include "expphi/experiments.hpp"
#include "expphi/gaussian_fields.hpp"
#include "expphi/hermite.hpp"
#include "expphi/measures.hpp"
#include "expphi/norms.hpp"
#include "expphi/rng.hpp"
#include "expphi/semigroup.hpp"
#include "expphi/wick.hpp"

using namespace expphi;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSeed = 20240601;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return r;
}

// Passes when |mean - target| <= 3 se; a zero standard error demands an exact match.
bool within_3se(const MeanSe& m, double target) {
  if (m.se == 0.0) return std::abs(m.mean - target) <= 1e-12 * std::max(1.0, std::abs(target));
  return std::abs(m.mean - target) <= 3.0 * m.se;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double criterion_measured(const ExperimentOutput& out, const std::string& name, bool& pass) {
  for (const auto& c : out.report.at("criteria")) {
    if (c.at("name") == name) {
      pass = pass && c.at("pass").get<bool>();
      return c.at("measured").get<double>();
    }
  }
  pass = false;
  return NAN;
}

// 1. E[H_n(X;1) H_m(Y;1)] = delta_nm n! r^n for standard normals with correlation r.
Verdict hermite_orthogonality() {
  const std::size_t draws = 100000;
  Verdict v;
  int checked = 0, failed = 0;
  double worst = 0.0;
  for (double r : {0.0, 0.5, 1.0}) {
    CounterEngine eng(RngStream(kSeed, static_cast<std::uint64_t>(r * 10), StreamPurpose::test));
    std::normal_distribution<double> normal;
    std::vector<double> xs(draws), ys(draws);
    for (std::size_t i = 0; i < draws; ++i) {
      xs[i] = normal(eng);
      const double z = normal(eng);
      ys[i] = r * xs[i] + std::sqrt(1.0 - r * r) * z;
    }
    for (int n = 0; n <= 4; ++n) {
      for (int m = 0; m <= 4; ++m) {
        std::vector<double> prod(draws);
        for (std::size_t i = 0; i < draws; ++i) prod[i] = hermite(n, xs[i], 1.0) * hermite(m, ys[i], 1.0);
        const double target = n == m ? std::tgamma(n + 1.0) * std::pow(r, n) : 0.0;
        const MeanSe ms = mean_se(prod);
        ++checked;
        if (!within_3se(ms, target)) ++failed;
        if (ms.se > 0) worst = std::max(worst, std::abs(ms.mean - target) / ms.se);
      }
    }
  }
  v.pass = failed == 0;
  v.detail = std::to_string(checked) + " (n,m,r) cells, " + std::to_string(failed) + " outside 3 se, worst " +
             fmt("%.2f", worst) + " se";
  return v;
}

// 2. E exp_N(alpha phi)(x) = 1.
Verdict wick_mean() {
  const TorusGrid grid(64);
  const auto psi = CutoffProfile::sharp();
  const std::size_t draws = 10000;
  const std::vector<std::size_t> points = {0, 17 * 64 + 40};
  std::vector<WickParams> params;
  for (int n : {1, 3}) params.push_back(make_wick_params(1.0, n, 0.5, psi, grid));
  std::vector<std::vector<std::vector<double>>> vals(params.size(),
                                                     std::vector<std::vector<double>>(points.size()));
  for (std::size_t d = 0; d < draws; ++d) {
    const auto phi = gff_sample(grid, RngStream(kSeed, d, StreamPurpose::initial_state));
    for (std::size_t l = 0; l < params.size(); ++l) {
      const auto w = wick_exp_gff(phi, params[l], psi);
      for (std::size_t p = 0; p < points.size(); ++p) vals[l][p].push_back(w.values[points[p]]);
    }
  }
  Verdict v;
  std::ostringstream os;
  for (std::size_t l = 0; l < params.size(); ++l) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      const MeanSe m = mean_se(vals[l][p]);
      v.pass = v.pass && within_3se(m, 1.0);
      os << "N=" << params[l].level << " z=" << fmt("%.2f", (m.mean - 1.0) / m.se) << " ";
    }
  }
  v.detail = os.str();
  return v;
}

// 3. E[exp_N(x) exp_N(y)] = exp(alpha^2 K^1_N(x - y)).
Verdict wick_covariance() {
  const TorusGrid grid(64);
  const auto psi = CutoffProfile::sharp();
  const auto params = make_wick_params(1.0, 2, 0.5, psi, grid);
  const std::size_t draws = 10000;
  std::vector<std::pair<int, int>> pairs;  // flat grid indices
  for (int i = 0; i < 10; ++i) pairs.emplace_back(i * 131 % 4096, (i * 977 + 5 * i * i) % 4096);
  std::vector<std::vector<double>> prod(pairs.size());
  for (std::size_t d = 0; d < draws; ++d) {
    const auto phi = gff_sample(grid, RngStream(kSeed + 1, d, StreamPurpose::initial_state));
    const auto w = wick_exp_gff(phi, params, psi);
    for (std::size_t p = 0; p < pairs.size(); ++p) prod[p].push_back(w.values[pairs[p].first] * w.values[pairs[p].second]);
  }
  Verdict v;
  double worst = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    const double oracle = analytic_wick_cov(params, psi, grid, grid.coordinate(a / 64), grid.coordinate(a % 64),
                                            grid.coordinate(b / 64), grid.coordinate(b % 64));
    const MeanSe m = mean_se(prod[p]);
    v.pass = v.pass && within_3se(m, oracle);
    worst = std::max(worst, std::abs(m.mean - oracle) / m.se);
  }
  v.detail = "10 point pairs, worst |z| " + fmt("%.2f", worst);
  return v;
}

// 4. Cauchy decay of the Wick exponential over the cutoff level.
Verdict wick_cauchy_decay() {
  Config c;
  const auto out = cmd_wick_converge(c, 1);
  Verdict v;
  const double rate = criterion_measured(out, "gff_decay_rate", v.pass);
  const double cross = criterion_measured(out, "cross_profile_below_first_gap", v.pass);
  const double ou = out.report.at("fit").at("ou_rate").get<double>();
  v.detail = "fitted rate " + fmt("%.3f", rate) + " (OU path " + fmt("%.3f", ou) + "), cross/first gap " +
             fmt("%.3f", cross);
  return v;
}

// 5. Per-mode variance preserved by exact OU transitions; two half steps equal one step.
Verdict ou_exactness() {
  Verdict v;
  const TorusGrid grid(8);
  const std::size_t reps = 4000;
  const double dt = 0.1;
  std::vector<std::vector<double>> power(grid.coeff_count());
  for (std::size_t r = 0; r < reps; ++r) {
    auto f = gff_sample(grid, RngStream(kSeed, r, StreamPurpose::initial_state));
    const RngStream noise(kSeed, r, StreamPurpose::dynamics_noise);
    for (int j = 0; j < 10; ++j) f = ou_transition(f, dt, white_modes(grid, noise.substream(j)));
    const auto c = f.coeffs();
    for_each_mode(grid, [&](std::size_t idx, int k1, int k2, double, bool active) {
      if (active) power[idx].push_back((1.0 + k1 * k1 + k2 * k2) * std::norm(c[idx]));
    });
  }
  int modes = 0, off = 0;
  double worst = 0.0;
  for (const auto& p : power) {
    if (p.empty()) continue;
    const MeanSe m = mean_se(p);
    ++modes;
    if (!within_3se(m, 1.0)) ++off;
    worst = std::max(worst, std::abs(m.mean - 1.0) / m.se);
  }
  double identity = 0.0;
  for (double h : {1e-4, 1.0 / 256, 0.1, 1.0, 7.5}) {
    for (int ksq = 0; ksq <= 2 * 64 * 64; ksq += 37) {
      const double one = ou_noise_variance(ksq, h);
      const double a = ou_decay_factor(ksq, h / 2);
      const double two = a * a * ou_noise_variance(ksq, h / 2) + ou_noise_variance(ksq, h / 2);
      identity = std::max(identity, std::abs(one - two) / one);
      identity = std::max(identity, std::abs(ou_decay_factor(ksq, h) - a * a) / ou_decay_factor(ksq, h));
    }
  }
  v.pass = off == 0 && identity <= 1e-12;
  v.detail = std::to_string(modes) + " stored modes, " + std::to_string(off) + " outside 3 se (worst " +
             fmt("%.2f", worst) + "); half-step identity defect " + fmt("%.1e", identity);
  return v;
}

FieldPath wick_forcing(const TorusGrid& grid, const WickParams& params, const CutoffProfile& psi, double horizon,
                       double dt, std::uint64_t replica) {
  const auto times = uniform_times(horizon, dt);
  const auto x0 = gff_sample(grid, RngStream(kSeed, replica, StreamPurpose::initial_state));
  const auto traj = ou_path(x0, times, RngStream(kSeed, replica, StreamPurpose::dynamics_noise));
  auto w = wick_exp_ou(traj, params, psi);
  return FieldPath{w.times, std::move(w.fields)};
}

// 6. Zero datum and positive charge keep the shifted solution nonpositive.
Verdict comparison_principle() {
  const TorusGrid grid(64);
  const auto psi = CutoffProfile::sharp();
  SqeConfig cfg;
  cfg.params = make_wick_params(1.0, 3, 0.5, psi, grid);
  cfg.psi = psi;
  cfg.dt = 1.0 / 128;
  std::size_t violations = 0;
  double max_value = -INFINITY;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto chi = wick_forcing(grid, cfg.params, psi, cfg.horizon, cfg.dt, r);
    const auto path = solve_shifted(SpectralField(grid), chi, cfg);
    for (const auto& s : path.states) {
      for (double u : from_spectral(s)) {
        if (u > 0.0) ++violations;
        max_value = std::max(max_value, u);
      }
    }
  }
  Verdict v;
  v.pass = violations == 0;
  v.detail = "100 replicas, " + std::to_string(violations) + " positive grid values, max " + fmt("%.3e", max_value);
  return v;
}

// 7. e^{t/2} ||U1 - U2||_{L2} is nonincreasing along a common forcing.
Verdict energy_contraction() {
  const TorusGrid grid(64);
  const auto psi = CutoffProfile::sharp();
  SqeConfig cfg;
  cfg.params = make_wick_params(1.0, 3, 0.5, psi, grid);
  cfg.psi = psi;
  cfg.dt = 1.0 / 128;
  int bad = 0;
  double worst = -INFINITY;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto chi = wick_forcing(grid, cfg.params, psi, cfg.horizon, cfg.dt, 1000 + r);
    const auto u1 = heat_semigroup(gff_sample(grid, RngStream(kSeed, 2 * r, StreamPurpose::test)), 0.2);
    const auto u2 = heat_semigroup(gff_sample(grid, RngStream(kSeed, 2 * r + 1, StreamPurpose::test)), 0.2);
    const auto rep = contraction_check(u1, u2, chi, cfg, 0.01);
    if (!rep.nonincreasing) ++bad;
    worst = std::max(worst, rep.worst_growth_rate);
  }
  Verdict v;
  v.pass = bad == 0;
  v.detail = "20 replicas, " + std::to_string(bad) + " with growth > 1%/unit time, worst rate " + fmt("%.2e", worst);
  return v;
}

}  // namespace

int main() {
  struct Row {
    const char* id;
    const char* title;
    std::function<Verdict()> run;
  };
  ExperimentOutput sqe_out;
  bool sqe_ran = false;
  auto sqe = [&]() -> const ExperimentOutput& {
    if (!sqe_ran) {
      Config c;
      sqe_out = cmd_sqe(c, 1);
      sqe_ran = true;
    }
    return sqe_out;
  };

  const std::vector<Row> rows = {
      {"AC01", "Hermite orthogonality", hermite_orthogonality},
      {"AC02", "Wick exponential mean", wick_mean},
      {"AC03", "Wick second moment vs analytic kernel", wick_covariance},
      {"AC04", "Wick exponential Cauchy decay", wick_cauchy_decay},
      {"AC05", "OU exactness and free-field invariance", ou_exactness},
      {"AC06", "comparison principle", comparison_principle},
      {"AC07", "energy contraction", energy_contraction},
      {"AC08", "decomposition identity order",
       [&] {
         Verdict v;
         const auto& out = sqe();
         const double order = criterion_measured(out, "decomposition_order", v.pass);
         const auto& d = out.report.at("decomposition");
         v.detail = "measured order " + fmt("%.3f", order) + " (residual " +
                    fmt("%.3e", d.at("mean_residual")[0].get<double>()) + " -> " +
                    fmt("%.3e", d.at("mean_residual")[1].get<double>()) + ")";
         return v;
       }},
      {"AC09", "common-noise level gaps decrease",
       [&] {
         Verdict v;
         const auto& out = sqe();
         criterion_measured(out, "gap_strictly_decreasing", v.pass);
         std::ostringstream os;
         os << "mean sup gaps";
         for (const auto& l : out.report.at("levels")) os << " " << fmt("%.4f", l.at("sup_gap_mean").get<double>());
         os << ", failures " << out.report.at("solver_failures").get<int>();
         v.detail = os.str();
         return v;
       }},
      {"AC10", "invariance of the regularized measure",
       [] {
         Config c;
         const auto out = cmd_invariance(c, 1);
         Verdict v;
         const double z = criterion_measured(out, "stationary", v.pass);
         const double zc = criterion_measured(out, "control_detected", v.pass);
         v.detail = "max |z| " + fmt("%.2f", z) + " at 1000 replicas; halved-C control max |z| " + fmt("%.2f", zc) +
                    " (" + fmt("%.2f", out.report.at("negative_control").at("max_abs_z_at_primary_replicas").get<double>()) +
                    " on the first 1000); ESS " + fmt("%.0f", out.report.at("ess").get<double>());
         return v;
       }},
      {"AC11", "partition function bounds",
       [] {
         Verdict v;
         const TorusGrid grid(64);
         const auto psi = CutoffProfile::sharp();
         const double bound = std::exp(-4.0 * kPi * kPi);
         const auto zero = sample_ensemble(grid, make_wick_params(0.0, 2, 0.5, psi, grid), psi, 200,
                                           Proposal::free_field, kSeed, 1);
         const auto z0 = estimate_partition(zero);
         bool exact = z0.std_error == 0.0 && std::abs(z0.mean - bound) <= 1e-15 * bound;
         const auto ens = sample_ensemble(grid, make_wick_params(1.0, 2, 0.5, psi, grid), psi, 10000,
                                          Proposal::free_field, kSeed, 1);
         const auto z1 = estimate_partition(ens);
         const auto marg = sample_ensemble(grid, make_wick_params(1.0, 2, 0.5, psi, grid), psi, 10000,
                                           Proposal::zero_mode_marginal, kSeed, 1);
         const auto z2 = estimate_partition(marg);
         v.pass = exact && z1.weights_bounded && z1.jensen_ok && z2.weights_bounded && z2.jensen_ok;
         v.detail = "alpha=0 " + std::string(exact ? "exact" : "NOT exact") + "; alpha=1 Z/e^{-4pi^2} = " +
                    fmt("%.4g", z1.mean / bound) + " +- " + fmt("%.2g", z1.std_error / bound) +
                    " (free field), " + fmt("%.4g", z2.mean / bound) + " +- " + fmt("%.2g", z2.std_error / bound) +
                    " (zero mode integrated)";
         return v;
       }},
      {"AC12", "Besov/Sobolev equivalence and heat-semigroup bounds",
       [] {
         Config c;
         const auto out = cmd_norms_bench(c, 1);
         Verdict v;
         const double b = criterion_measured(out, "besov_sobolev_ratio_bounded", v.pass);
         const double h = criterion_measured(out, "heat_ratios_bounded", v.pass);
         const double law = criterion_measured(out, "semigroup_law", v.pass);
         v.detail = "ratio/bound " + fmt("%.3f", b) + ", heat ratio/bound " + fmt("%.3f", h) + ", semigroup defect " +
                    fmt("%.1e", law);
         return v;
       }},
  };

  int failed = 0;
  for (const auto& row : rows) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = row.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s  %s: %s  [%.1fs]\n", row.id, v.pass ? "PASS" : "FAIL", row.title, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", rows.size() - failed, rows.size());
  return failed == 0 ? 0 : 1;
}
