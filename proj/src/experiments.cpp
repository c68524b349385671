#include "expphi/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "expphi/bindump.hpp"
#include "expphi/dynamics.hpp"
#include "expphi/errors.hpp"
#include "expphi/gaussian_fields.hpp"
#include "expphi/measures.hpp"
#include "expphi/norms.hpp"
#include "expphi/parallel.hpp"
#include "expphi/semigroup.hpp"
#include "expphi/wick.hpp"

namespace expphi {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

const std::set<std::string> kCommonKeys = {"seed", "replicas", "grid.M", "cutoff.kind"};

std::set<std::string> keys_with(std::initializer_list<const char*> extra) {
  std::set<std::string> k = kCommonKeys;
  for (const char* e : extra) k.insert(e);
  return k;
}

// Setup errors become config errors; anything thrown later is a run failure.
template <class F>
auto configure(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

CutoffProfile profile_from(const std::string& kind) {
  switch (parse_cutoff_kind(kind)) {
    case CutoffKind::sharp: return CutoffProfile::sharp();
    case CutoffKind::smooth: return CutoffProfile::smooth();
    case CutoffKind::unit: return CutoffProfile::unit();
    case CutoffKind::custom: break;
  }
  throw ConfigError("custom cutoff profiles are not available from a config file");
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && item[used] == ' ') ++used;
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': bad list entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("key '" + key + "' is an empty list");
  return out;
}

std::size_t positive_count(Config& c, const std::string& key, long long fallback) {
  const long long v = c.get_int(key, fallback);
  if (v < 1) throw ConfigError("key '" + key + "' must be at least 1");
  return static_cast<std::size_t>(v);
}

struct Stats {
  double mean = 0.0;
  double se = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

json criterion(const std::string& name, bool pass, double measured, const std::string& requirement) {
  return json{{"name", name}, {"pass", pass}, {"measured", measured}, {"requirement", requirement}};
}

json base_report(const std::string& command, const Config& config) {
  json r;
  r["schema_version"] = kReportSchemaVersion;
  r["code_version"] = kCodeVersion;
  r["command"] = command;
  r["config"] = config.resolved();
  return r;
}

void finish(json& report, const json& criteria) {
  bool pass = true;
  for (const auto& c : criteria) pass = pass && c.at("pass").get<bool>();
  report["criteria"] = criteria;
  report["pass"] = pass;
}

std::string level_name(int n) { return std::to_string(n); }

}  // namespace

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::render() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

bool ExperimentOutput::passed() const { return report.value("pass", false); }

// ---------------------------------------------------------------------------

ExperimentOutput cmd_wick_converge(Config& config, int threads) {
  config.require_known(keys_with({"wick.alpha", "wick.beta", "wick.N", "wick.N_min", "wick.compare_kind",
                                  "wick.min_rate", "ou.T", "ou.dt", "ou.replicas"}));
  struct Setup {
    TorusGrid grid{8};
    CutoffProfile psi = CutoffProfile::sharp();
    CutoffProfile other = CutoffProfile::smooth();
    double alpha, beta, min_rate, ou_t, ou_dt;
    int n_min, n_max;
    std::size_t replicas, ou_replicas;
    std::uint64_t seed;
    std::vector<WickParams> params;  // levels n_min .. n_max + 1
    WickParams other_params;
  };
  const Setup S = configure([&] {
    Setup s;
    s.grid = TorusGrid(static_cast<int>(config.get_int("grid.M", 256)));
    s.psi = profile_from(config.get_string("cutoff.kind", "sharp"));
    s.other = profile_from(config.get_string("wick.compare_kind", "smooth"));
    s.alpha = config.get_double("wick.alpha", 1.0);
    s.beta = config.get_double("wick.beta", 0.5);
    s.n_min = static_cast<int>(config.get_int("wick.N_min", 1));
    s.n_max = static_cast<int>(config.get_int("wick.N", 5));
    s.min_rate = config.get_double("wick.min_rate", 0.2);
    s.replicas = positive_count(config, "replicas", 100);
    s.ou_replicas = positive_count(config, "ou.replicas", 20);
    s.ou_t = config.get_double("ou.T", 1.0);
    s.ou_dt = config.get_double("ou.dt", 1.0 / 32.0);
    s.seed = config.get_u64("seed", 1);
    if (s.n_min < 0 || s.n_max < s.n_min + 1) throw ConfigError("need 0 <= wick.N_min < wick.N");
    for (int n = s.n_min; n <= s.n_max + 1; ++n) {
      s.params.push_back(make_wick_params(s.alpha, n, s.beta, s.psi, s.grid));
    }
    s.other_params = make_wick_params(s.alpha, s.n_max, s.beta, s.other, s.grid);
    uniform_times(s.ou_t, s.ou_dt);
    return s;
  });

  const int levels = S.n_max - S.n_min + 1;  // gaps N = n_min .. n_max
  std::vector<std::vector<double>> gff_gap(S.replicas, std::vector<double>(levels));
  std::vector<double> cross(S.replicas);
  parallel_for(S.replicas, threads, [&](std::size_t r) {
    const SpectralField phi = gff_sample(S.grid, RngStream(S.seed, r, StreamPurpose::initial_state));
    std::vector<SpectralField> e;
    for (const auto& p : S.params) {
      auto w = wick_exp_gff(phi, p, S.psi);
      if (w.overflow) throw NumericGuardError("Wick exponential overflow");
      e.push_back(std::move(w.field));
    }
    for (int i = 0; i < levels; ++i) gff_gap[r][i] = std::pow(sobolev_distance(e[i + 1], e[i], -S.beta), 2);
    const auto w = wick_exp_gff(phi, S.other_params, S.other);
    if (w.overflow) throw NumericGuardError("Wick exponential overflow");
    cross[r] = std::pow(sobolev_distance(e[levels - 1], w.field, -S.beta), 2);
  });

  const auto times = uniform_times(S.ou_t, S.ou_dt);
  std::vector<std::vector<double>> ou_gap(S.ou_replicas, std::vector<double>(levels));
  parallel_for(S.ou_replicas, threads, [&](std::size_t r) {
    const SpectralField phi = gff_sample(S.grid, RngStream(S.seed, r, StreamPurpose::initial_state));
    const auto traj = ou_path(phi, times, RngStream(S.seed, r, StreamPurpose::dynamics_noise));
    WickPath prev = wick_exp_ou(traj, S.params[0], S.psi);
    for (int i = 0; i < levels; ++i) {
      WickPath next = wick_exp_ou(traj, S.params[i + 1], S.psi);
      if (prev.overflow_count || next.overflow_count) throw NumericGuardError("Wick exponential overflow");
      ou_gap[r][i] = std::pow(l2_time_distance(times, next.fields, prev.fields, -S.beta), 2);
      prev = std::move(next);
    }
  });

  ExperimentOutput out;
  CsvTable table{{"replica", "route", "level", "gap_sq"}, {}};
  std::vector<double> xs, gff_log, ou_log;
  json per_level = json::array();
  bool all_zero = true;
  for (int i = 0; i < levels; ++i) {
    std::vector<double> g(S.replicas), o(S.ou_replicas);
    for (std::size_t r = 0; r < S.replicas; ++r) {
      g[r] = gff_gap[r][i];
      table.add({std::to_string(r), "gff", level_name(S.n_min + i), csv_number(g[r])});
    }
    for (std::size_t r = 0; r < S.ou_replicas; ++r) {
      o[r] = ou_gap[r][i];
      table.add({std::to_string(r), "ou", level_name(S.n_min + i), csv_number(o[r])});
    }
    const Stats gs = stats_of(g), os = stats_of(o);
    all_zero = all_zero && gs.mean == 0.0 && os.mean == 0.0;
    per_level.push_back({{"level", S.n_min + i},
                         {"gff_mean", gs.mean},
                         {"gff_se", gs.se},
                         {"ou_mean", os.mean},
                         {"ou_se", os.se}});
    xs.push_back(S.n_min + i);
    gff_log.push_back(std::log2(gs.mean));
    ou_log.push_back(std::log2(os.mean));
  }
  for (std::size_t r = 0; r < S.replicas; ++r) {
    table.add({std::to_string(r), "cross", level_name(S.n_max), csv_number(cross[r])});
  }
  const Stats cs = stats_of(cross);
  const double first_gap = per_level.front().at("gff_mean").get<double>();

  json& rep = out.report = base_report("wick-converge", config);
  rep["seed_layout"] = {{"gff_field", "RngStream(seed, replica, initial_state)"},
                        {"ou_noise", "RngStream(seed, replica, dynamics_noise).substream(step)"}};
  rep["levels"] = per_level;
  rep["cross_profile"] = {{"level", S.n_max}, {"profile", S.other.name()}, {"mean", cs.mean}, {"se", cs.se}};
  json criteria = json::array();
  if (S.alpha == 0.0) {
    rep["fit"] = nullptr;
    criteria.push_back(criterion("alpha_zero_exact", all_zero, all_zero ? 0.0 : 1.0, "all gaps exactly 0"));
  } else {
    const double lam = -slope(xs, gff_log);
    const double lam_ou = -slope(xs, ou_log);
    rep["fit"] = {{"gff_rate", lam}, {"ou_rate", lam_ou}};
    criteria.push_back(criterion("gff_decay_rate", lam >= S.min_rate, lam, ">= " + csv_number(S.min_rate)));
    criteria.push_back(criterion("ou_decay_rate", lam_ou >= S.min_rate, lam_ou, ">= " + csv_number(S.min_rate)));
    criteria.push_back(criterion("cross_profile_below_first_gap", cs.mean < first_gap, cs.mean / first_gap,
                                 "cross-profile mean / first same-profile gap < 1"));
  }
  finish(rep, criteria);
  out.tables["wick_gaps.csv"] = std::move(table);
  return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput cmd_sqe(Config& config, int threads) {
  config.require_known(keys_with({"wick.alpha", "wick.beta", "wick.N", "wick.N_min", "sqe.T", "sqe.dt",
                                  "sqe.scheme", "sqe.epsilon", "sqe.record_stride", "sqe.residual_level",
                                  "sqe.residual_dt", "sqe.residual_M", "sqe.residual_replicas",
                                  "sqe.min_order"}));
  struct Setup {
    TorusGrid grid{8};
    TorusGrid residual_grid{8};
    CutoffProfile psi = CutoffProfile::sharp();
    SqeConfig base;
    double alpha, beta, epsilon, residual_dt, min_order;
    int n_min, n_max, residual_level;
    std::size_t replicas, residual_replicas;
    std::uint64_t seed;
    std::vector<WickParams> params;
  };
  const Setup S = configure([&] {
    Setup s;
    s.grid = TorusGrid(static_cast<int>(config.get_int("grid.M", 128)));
    s.residual_grid = TorusGrid(static_cast<int>(config.get_int("sqe.residual_M", 64)));
    s.psi = profile_from(config.get_string("cutoff.kind", "sharp"));
    s.alpha = config.get_double("wick.alpha", 1.0);
    s.beta = config.get_double("wick.beta", 0.5);
    s.n_min = static_cast<int>(config.get_int("wick.N_min", 1));
    s.n_max = static_cast<int>(config.get_int("wick.N", 4));
    s.epsilon = config.get_double("sqe.epsilon", 0.5);
    s.replicas = positive_count(config, "replicas", 50);
    s.residual_replicas = positive_count(config, "sqe.residual_replicas", 20);
    s.residual_level = static_cast<int>(config.get_int("sqe.residual_level", 2));
    s.residual_dt = config.get_double("sqe.residual_dt", 1.0 / 256.0);
    s.min_order = config.get_double("sqe.min_order", 0.9);
    s.seed = config.get_u64("seed", 1);
    s.base.horizon = config.get_double("sqe.T", 1.0);
    s.base.dt = config.get_double("sqe.dt", 1.0 / 128.0);
    s.base.scheme = parse_scheme(config.get_string("sqe.scheme", "exponential-euler"));
    s.base.psi = s.psi;
    s.base.record_stride = static_cast<int>(config.get_int("sqe.record_stride", 1));
    s.base.diagnostic_exponent = -s.epsilon;
    s.base.validate();
    if (s.n_min < 0 || s.n_max < s.n_min + 1) throw ConfigError("need 0 <= wick.N_min < wick.N");
    if (!(s.epsilon > 0.0)) throw ConfigError("sqe.epsilon must be positive");
    for (int n = s.n_min; n <= s.n_max + 1; ++n) {
      s.params.push_back(make_wick_params(s.alpha, n, s.beta, s.psi, s.grid));
    }
    make_wick_params(s.alpha, s.residual_level, s.beta, s.psi, s.residual_grid);
    SqeConfig probe = s.base;
    probe.dt = s.residual_dt;
    probe.validate();
    return s;
  });

  const int levels = S.n_max - S.n_min + 1;
  // gap[r][i] = sup_t ||Phi^{N+1} - Phi^N||_{H^-eps}, N = n_min + i.
  std::vector<std::vector<double>> gap(S.replicas, std::vector<double>(levels, 0.0));
  std::vector<std::vector<std::vector<double>>> trace(S.replicas);
  std::vector<std::string> failure(S.replicas);
  std::vector<double> record_times;
  parallel_for(S.replicas, threads, [&](std::size_t r) {
    try {
      const SpectralField phi0 = gff_sample(S.grid, RngStream(S.seed, r, StreamPurpose::initial_state));
      const RngStream noise(S.seed, r, StreamPurpose::dynamics_noise);
      std::vector<SolutionPath> paths;
      for (const auto& p : S.params) {
        SqeConfig cfg = S.base;
        cfg.params = p;
        paths.push_back(solve_sqe_full(phi0, cfg, noise));
      }
      trace[r].resize(levels);
      for (int i = 0; i < levels; ++i) {
        for (std::size_t t = 0; t < paths[i].states.size(); ++t) {
          trace[r][i].push_back(sobolev_distance(paths[i + 1].states[t], paths[i].states[t], -S.epsilon));
        }
        gap[r][i] = *std::max_element(trace[r][i].begin(), trace[r][i].end());
      }
      if (r == 0) record_times = paths[0].times;
    } catch (const NumericGuardError& e) {
      failure[r] = e.what();
    }
  });
  std::size_t failures = 0;
  for (const auto& f : failure) failures += f.empty() ? 0 : 1;
  if (failures == S.replicas) throw NumericGuardError("every replica failed: " + failure.front());

  // alpha = 0 must reproduce the projected exact OU process with the same noise.
  double ou_deviation = 0.0;
  {
    SqeConfig cfg = S.base;
    cfg.params = make_wick_params(0.0, S.n_max, S.beta, S.psi, S.grid);
    const SpectralField phi0 = gff_sample(S.grid, RngStream(S.seed, 0, StreamPurpose::initial_state));
    const RngStream noise(S.seed, 0, StreamPurpose::dynamics_noise);
    const auto path = solve_sqe_full(phi0, cfg, noise);
    const auto ou = ou_path(phi0, uniform_times(cfg.horizon, cfg.dt), noise);
    std::size_t k = 0;
    for (std::size_t j = 0; j < ou.states.size(); ++j) {
      if (k < path.times.size() && path.times[k] == ou.times[j]) {
        const auto pn = apply_PN(ou.states[j], S.psi, S.n_max);
        ou_deviation = std::max(ou_deviation, sobolev_distance(path.states[k], pn, 0.0) /
                                                  std::max(1.0, sobolev_norm(pn, 0.0)));
        ++k;
      }
    }
  }

  // Decomposition residual at dt and dt/2.
  const double dts[2] = {S.residual_dt, S.residual_dt / 2.0};
  std::vector<std::vector<double>> residual(2, std::vector<double>(S.residual_replicas));
  const WickParams rp = make_wick_params(S.alpha, S.residual_level, S.beta, S.psi, S.residual_grid);
  for (int d = 0; d < 2; ++d) {
    parallel_for(S.residual_replicas, threads, [&](std::size_t r) {
      SqeConfig cfg = S.base;
      cfg.dt = dts[d];
      cfg.params = rp;
      cfg.record_decomposition = true;
      cfg.record_stride = 1;
      const SpectralField phi0 = gff_sample(S.residual_grid, RngStream(S.seed, r, StreamPurpose::initial_state));
      const auto path = solve_sqe_full(phi0, cfg, RngStream(S.seed, r, StreamPurpose::dynamics_noise));
      residual[d][r] = decomposition_residual(path, -S.epsilon);
    });
  }

  ExperimentOutput out;
  CsvTable gaps{{"replica", "level", "t", "gap"}, {}};
  CsvTable res{{"replica", "dt", "residual"}, {}};
  json per_level = json::array();
  std::vector<double> means;
  for (int i = 0; i < levels; ++i) {
    std::vector<double> g;
    for (std::size_t r = 0; r < S.replicas; ++r) {
      if (!failure[r].empty()) continue;
      g.push_back(gap[r][i]);
      for (std::size_t t = 0; t < trace[r][i].size(); ++t) {
        gaps.add({std::to_string(r), level_name(S.n_min + i), csv_number(record_times[t]),
                  csv_number(trace[r][i][t])});
      }
    }
    const Stats st = stats_of(g);
    means.push_back(st.mean);
    per_level.push_back({{"level", S.n_min + i}, {"sup_gap_mean", st.mean}, {"sup_gap_se", st.se}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < means.size(); ++i) decreasing = decreasing && means[i] < means[i - 1];
  const Stats r0 = stats_of(residual[0]), r1 = stats_of(residual[1]);
  for (int d = 0; d < 2; ++d) {
    for (std::size_t r = 0; r < S.residual_replicas; ++r) {
      res.add({std::to_string(r), csv_number(dts[d]), csv_number(residual[d][r])});
    }
  }
  const double order = std::log2(r0.mean / r1.mean);

  json& rep = out.report = base_report("sqe", config);
  rep["seed_layout"] = {{"initial_field", "RngStream(seed, replica, initial_state)"},
                        {"noise", "RngStream(seed, replica, dynamics_noise).substream(step), shared by all levels"}};
  rep["levels"] = per_level;
  rep["solver_failures"] = failures;
  json fails = json::array();
  for (std::size_t r = 0; r < S.replicas; ++r) {
    if (!failure[r].empty()) fails.push_back({{"replica", r}, {"error", failure[r]}});
  }
  rep["failed_replicas"] = fails;
  rep["decomposition"] = {{"level", S.residual_level},
                          {"dt", {dts[0], dts[1]}},
                          {"mean_residual", {r0.mean, r1.mean}},
                          {"se_residual", {r0.se, r1.se}},
                          {"order", order}};
  rep["alpha_zero_ou_deviation"] = ou_deviation;
  json criteria = json::array();
  if (S.alpha != 0.0) {
    criteria.push_back(criterion("gap_strictly_decreasing", decreasing, means.back() / means.front(),
                                 "mean sup-gap strictly decreasing in N"));
    criteria.push_back(criterion("decomposition_order", order >= S.min_order, order,
                                 ">= " + csv_number(S.min_order)));
  }
  criteria.push_back(criterion("alpha_zero_exact_ou", ou_deviation <= 1e-12, ou_deviation, "<= 1e-12"));
  finish(rep, criteria);
  out.tables["sqe_gaps.csv"] = std::move(gaps);
  out.tables["sqe_residual.csv"] = std::move(res);
  return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput cmd_invariance(Config& config, int threads) {
  config.require_known(keys_with({"wick.alpha", "wick.beta", "wick.N", "sqe.T", "sqe.dt", "sqe.scheme",
                                  "sqe.epsilon", "invariance.proposals", "invariance.proposal",
                                  "invariance.control", "invariance.control_replicas", "invariance.z"}));
  struct Setup {
    TorusGrid grid{8};
    CutoffProfile psi = CutoffProfile::sharp();
    SqeConfig dyn;
    WickParams params;
    Proposal proposal;
    double epsilon, z;
    std::size_t proposals, replicas, control_replicas;
    bool control;
    std::uint64_t seed;
  };
  const Setup S = configure([&] {
    Setup s;
    s.grid = TorusGrid(static_cast<int>(config.get_int("grid.M", 32)));
    s.psi = profile_from(config.get_string("cutoff.kind", "sharp"));
    s.params = make_wick_params(config.get_double("wick.alpha", 1.0), static_cast<int>(config.get_int("wick.N", 2)),
                                config.get_double("wick.beta", 0.5), s.psi, s.grid);
    s.proposal = parse_proposal(config.get_string("invariance.proposal", "zero-mode-marginal"));
    s.epsilon = config.get_double("sqe.epsilon", 0.5);
    s.z = config.get_double("invariance.z", 3.0);
    s.proposals = positive_count(config, "invariance.proposals", 40000);
    s.replicas = positive_count(config, "replicas", 1000);
    s.control = config.get_int("invariance.control", 1) != 0;
    s.control_replicas = positive_count(config, "invariance.control_replicas", 5000);
    s.seed = config.get_u64("seed", 1);
    s.dyn.horizon = config.get_double("sqe.T", 1.0);
    s.dyn.dt = config.get_double("sqe.dt", 1.0 / 256.0);
    s.dyn.scheme = parse_scheme(config.get_string("sqe.scheme", "exponential-euler"));
    s.dyn.equation = Equation::projected;
    s.dyn.psi = s.psi;
    s.dyn.params = s.params;
    s.dyn.validate();
    if (!(s.epsilon > 0.0)) throw ConfigError("sqe.epsilon must be positive");
    return s;
  });

  const auto ens = sample_ensemble(S.grid, S.params, S.psi, S.proposals, S.proposal, S.seed, threads);
  const auto part = estimate_partition(ens);
  const double ess = ens.ess();
  const std::size_t drawn = S.control ? std::max(S.replicas, S.control_replicas) : S.replicas;
  const auto initial = resample_stationary(ens, drawn, RngStream(S.seed, 0, StreamPurpose::resampling));
  const std::span<const SpectralField> all(initial);
  const auto inv = invariance_test(all.first(S.replicas), S.dyn, S.params, S.epsilon, S.seed, threads);

  ExperimentOutput out;
  json& rep = out.report = base_report("invariance", config);
  rep["seed_layout"] = {{"proposals", "RngStream(seed, index, proposal)"},
                        {"resampling", "RngStream(seed, 0, resampling).substream(draw)"},
                        {"noise", "RngStream(seed, replica, dynamics_noise).substream(step)"}};
  rep["partition"] = {{"mean", part.mean},         {"std_error", part.std_error}, {"jensen_bound", part.jensen_bound},
                      {"jensen_ok", part.jensen_ok}, {"excluded", part.excluded},   {"count", part.count}};
  rep["ess"] = ess;
  rep["proposal"] = to_string(S.proposal);

  CsvTable weights{{"index", "log_weight", "load"}, {}};
  for (std::size_t i = 0; i < ens.size(); ++i) {
    weights.add({std::to_string(i), csv_number(ens.log_weights[i]), ens.loads.empty() ? "" : csv_number(ens.loads[i])});
  }
  CsvTable values{{"replica", "run", "observable", "start", "end"}, {}};
  const auto names = invariance_observables();
  auto dump_run = [&](const InvarianceReport& ir, const std::string& run) {
    json obs = json::array();
    for (const auto& c : ir.observables) {
      obs.push_back({{"name", c.name},
                     {"mean_start", c.mean_start},
                     {"mean_end", c.mean_end},
                     {"se_start", c.se_start},
                     {"se_end", c.se_end},
                     {"z_two_sample", c.z_two_sample},
                     {"z_paired", c.z_paired}});
    }
    for (std::size_t r = 0; r < ir.start_values.size(); ++r) {
      for (std::size_t k = 0; k < names.size(); ++k) {
        values.add({std::to_string(r), run, names[k], csv_number(ir.start_values[r][k]),
                    csv_number(ir.end_values[r][k])});
      }
    }
    return json{{"observables", obs}, {"max_abs_z", ir.max_abs_z}, {"stationary", ir.stationary}};
  };
  rep["invariance"] = dump_run(inv, "correct");

  json criteria = json::array();
  criteria.push_back(criterion("weights_bounded", part.weights_bounded, part.mean, "every weight <= 1"));
  criteria.push_back(criterion("jensen_bound", part.jensen_ok, part.mean / part.jensen_bound,
                               "mean >= exp(-4 pi^2) (1 - 3 sigma)"));
  criteria.push_back(criterion("stationary", inv.max_abs_z <= S.z, inv.max_abs_z, "max |z| <= " + csv_number(S.z)));
  if (S.control) {
    SqeConfig wrong = S.dyn;
    wrong.params.c_n = S.params.c_n / 2.0;
    const auto ctl = invariance_test(all.first(S.control_replicas), wrong, S.params, S.epsilon, S.seed, threads);
    rep["negative_control"] = dump_run(ctl, "control");
    // The same test restricted to the primary replica count, for the power record.
    InvarianceReport head;
    const std::size_t k = std::min(S.replicas, S.control_replicas);
    head.start_values.assign(ctl.start_values.begin(), ctl.start_values.begin() + k);
    head.end_values.assign(ctl.end_values.begin(), ctl.end_values.begin() + k);
    summarize_invariance(head);
    rep["negative_control"]["max_abs_z_at_primary_replicas"] = head.max_abs_z;
    criteria.push_back(criterion("control_detected", ctl.max_abs_z > S.z, ctl.max_abs_z,
                                 "max |z| > " + csv_number(S.z) + " with C_N halved"));
  }
  finish(rep, criteria);
  out.tables["weights.csv"] = std::move(weights);
  out.tables["invariance.csv"] = std::move(values);
  out.dumps["initial.bin"] = std::vector<SpectralField>(initial.begin(), initial.begin() + S.replicas);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Squared Besov/Sobolev ratio for a single mode lies in
// [min(g^s) / 2, max(g^s)] with g = 2^{2j} / (1+|k|^2) in [9/128, 16/9].
std::pair<double, double> single_mode_ratio_bounds(double s) {
  const double lo = 9.0 / 128.0, hi = 16.0 / 9.0;
  const double a = std::pow(lo, s / 2.0), b = std::pow(hi, s / 2.0);
  return {std::sqrt(0.5) * std::min(a, b), std::max(a, b)};
}

SpectralField cosine_mode(const TorusGrid& grid, int k1, int k2) {
  const int m = grid.size();
  std::vector<double> v(grid.points());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) v[i * m + j] = std::cos(k1 * grid.coordinate(i) + k2 * grid.coordinate(j));
  }
  return to_spectral(v, grid);
}

}  // namespace

ExperimentOutput cmd_norms_bench(Config& config, int threads) {
  config.require_known(keys_with({"norms.s", "norms.deltas", "norms.t_octaves"}));
  struct Setup {
    TorusGrid grid{8};
    std::vector<double> s_values, deltas;
    int t_octaves;
    std::size_t replicas;
    std::uint64_t seed;
  };
  const Setup S = configure([&] {
    Setup s;
    s.grid = TorusGrid(static_cast<int>(config.get_int("grid.M", 64)));
    s.s_values = parse_list(config.get_string("norms.s", "-1,-0.5,0,0.5,1"), "norms.s");
    s.deltas = parse_list(config.get_string("norms.deltas", "0.25,0.5,0.75,1"), "norms.deltas");
    s.t_octaves = static_cast<int>(config.get_int("norms.t_octaves", 10));
    s.replicas = positive_count(config, "replicas", 10);
    s.seed = config.get_u64("seed", 1);
    config.get_string("cutoff.kind", "sharp");
    for (double d : s.deltas) {
      if (!(d > 0.0 && d <= 1.0)) throw ConfigError("norms.deltas entries must lie in (0, 1]");
    }
    if (s.t_octaves < 0) throw ConfigError("norms.t_octaves must be nonnegative");
    return s;
  });
  const int m = S.grid.size();
  const int half = m / 2;

  // Single-mode sweep over every mode with |k_i| < M/2, one representative per +-k pair.
  std::vector<std::pair<int, int>> modes;
  for (int k1 = -half + 1; k1 < half; ++k1) {
    for (int k2 = 0; k2 < half; ++k2) {
      if (k2 == 0 && k1 < 0) continue;
      modes.emplace_back(k1, k2);
    }
  }
  const std::size_t ns = S.s_values.size();
  std::vector<std::vector<double>> ratio(modes.size(), std::vector<double>(ns));
  parallel_for(modes.size(), threads, [&](std::size_t i) {
    const auto f = cosine_mode(S.grid, modes[i].first, modes[i].second);
    for (std::size_t j = 0; j < ns; ++j) {
      ratio[i][j] = besov_norm(f, NormSpec::besov(S.s_values[j], 2.0, 2.0)) / sobolev_norm(f, S.s_values[j]);
    }
  });

  ExperimentOutput out;
  json& rep = out.report = base_report("norms-bench", config);
  json criteria = json::array();
  CsvTable mode_table{{"k1", "k2", "s", "ratio"}, {}};
  json sweep = json::array();
  bool within = true;
  double worst = 0.0;  // max of measured / bound over both sides; <= 1 inside the bounds
  for (std::size_t j = 0; j < ns; ++j) {
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      lo = std::min(lo, ratio[i][j]);
      hi = std::max(hi, ratio[i][j]);
      mode_table.add({std::to_string(modes[i].first), std::to_string(modes[i].second), csv_number(S.s_values[j]),
                      csv_number(ratio[i][j])});
    }
    const auto [blo, bhi] = single_mode_ratio_bounds(S.s_values[j]);
    const bool ok = lo >= blo * (1 - 1e-12) && hi <= bhi * (1 + 1e-12);
    within = within && ok;
    worst = std::max({worst, hi / bhi, blo / lo});
    sweep.push_back({{"s", S.s_values[j]}, {"min_ratio", lo}, {"max_ratio", hi}, {"bound_low", blo}, {"bound_high", bhi}});
  }
  rep["besov_sobolev_sweep"] = sweep;
  criteria.push_back(criterion("besov_sobolev_ratio_bounded", within, worst, "single-mode ratios inside derived bounds"));

  // Smoothing and difference ratios of the heat semigroup.
  std::vector<SpectralField> fields;
  for (std::size_t r = 0; r < S.replicas; ++r) {
    fields.push_back(gff_sample(S.grid, RngStream(S.seed, r, StreamPurpose::initial_state)));
  }
  for (int k : {0, 1, 3, half / 2, half - 1}) fields.push_back(cosine_mode(S.grid, k, 0));
  CsvTable heat{{"delta", "t", "field", "smoothing_ratio", "difference_ratio"}, {}};
  json heat_json = json::array();
  bool heat_ok = true;
  double heat_worst = 0.0;
  for (double delta : S.deltas) {
    const double smooth_bound = std::pow(2.0 * delta / std::numbers::e, delta);
    const double diff_bound = std::pow(0.5, delta);
    double smooth_max = 0.0, diff_max = 0.0;
    for (int o = 0; o <= S.t_octaves; ++o) {
      const double t = std::ldexp(1.0, -o);
      for (std::size_t f = 0; f < fields.size(); ++f) {
        const auto pt = heat_semigroup(fields[f], t);
        const double base = sobolev_norm(fields[f], 0.0);
        const double sm = std::pow(t, delta) * sobolev_norm(pt, 2.0 * delta) / base;
        const double df = sobolev_norm(pt - fields[f], -2.0 * delta) / (std::pow(t, delta) * base);
        smooth_max = std::max(smooth_max, sm);
        diff_max = std::max(diff_max, df);
        heat.add({csv_number(delta), csv_number(t), std::to_string(f), csv_number(sm), csv_number(df)});
      }
    }
    const bool ok = smooth_max <= smooth_bound * (1 + 1e-12) && diff_max <= diff_bound * (1 + 1e-12);
    heat_ok = heat_ok && ok;
    heat_worst = std::max({heat_worst, smooth_max / smooth_bound, diff_max / diff_bound});
    heat_json.push_back({{"delta", delta},
                         {"smoothing_max", smooth_max},
                         {"smoothing_bound", smooth_bound},
                         {"difference_max", diff_max},
                         {"difference_bound", diff_bound}});
  }
  rep["heat_ratios"] = heat_json;
  criteria.push_back(criterion("heat_ratios_bounded", heat_ok, heat_worst, "sup ratios <= analytic constants"));

  double law = 0.0;
  for (const auto& f : fields) {
    for (double t : {0.0, 0.125, 0.5, 1.0}) {
      for (double s : {0.0, 0.0625, 0.3, 2.0}) {
        const auto lhs = heat_semigroup(heat_semigroup(f, s), t);
        const auto rhs = heat_semigroup(f, t + s);
        law = std::max(law, sobolev_distance(lhs, rhs, 0.0) / sobolev_norm(f, 0.0));
      }
    }
  }
  rep["semigroup_law_defect"] = law;
  criteria.push_back(criterion("semigroup_law", law <= 1e-12, law, "<= 1e-12"));

  const SpectralField zero(S.grid);
  double zero_norm = sobolev_norm(zero, 0.0) + besov_norm(zero, NormSpec::besov(0.5, 3.0, 1.0));
  rep["zero_field_norm"] = zero_norm;
  criteria.push_back(criterion("zero_field", zero_norm == 0.0, zero_norm, "== 0"));
  finish(rep, criteria);
  out.tables["norm_modes.csv"] = std::move(mode_table);
  out.tables["heat_ratios.csv"] = std::move(heat);
  return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput cmd_sample_gff(Config& config, int threads) {
  config.require_known(keys_with({}));
  struct Setup {
    TorusGrid grid{8};
    std::size_t replicas;
    std::uint64_t seed;
  };
  const Setup S = configure([&] {
    Setup s;
    s.grid = TorusGrid(static_cast<int>(config.get_int("grid.M", 64)));
    s.replicas = positive_count(config, "replicas", 200);
    s.seed = config.get_u64("seed", 1);
    config.get_string("cutoff.kind", "sharp");
    return s;
  });
  std::vector<SpectralField> samples(S.replicas, SpectralField(S.grid));
  parallel_for(S.replicas, threads, [&](std::size_t r) {
    samples[r] = gff_sample(S.grid, RngStream(S.seed, r, StreamPurpose::initial_state));
  });

  // Shell statistics of (1+|k|^2)|u_hat(k)|^2, which has mean 1 on every active mode.
  std::map<int, std::vector<double>> shells;
  std::vector<double> all;
  for (const auto& f : samples) {
    const auto c = f.coeffs();
    std::map<int, std::pair<double, int>> per;
    double total = 0.0;
    int count = 0;
    for_each_mode(S.grid, [&](std::size_t idx, int k1, int k2, double mult, bool active) {
      if (!active) return;
      const int ksq = k1 * k1 + k2 * k2;
      const double v = (1.0 + ksq) * std::norm(c[idx]);
      per[ksq].first += mult * v;
      per[ksq].second += static_cast<int>(mult);
      total += mult * v;
      count += static_cast<int>(mult);
    });
    for (const auto& [ksq, p] : per) shells[ksq].push_back(p.first / p.second);
    all.push_back(total / count);
  }
  ExperimentOutput out;
  CsvTable table{{"ksq", "mean_normalized_power", "se", "z"}, {}};
  double max_z = 0.0;
  for (const auto& [ksq, v] : shells) {
    const Stats st = stats_of(v);
    const double z = st.se > 0 ? (st.mean - 1.0) / st.se : 0.0;
    max_z = std::max(max_z, std::abs(z));
    table.add({std::to_string(ksq), csv_number(st.mean), csv_number(st.se), csv_number(z)});
  }
  const Stats agg = stats_of(all);
  const double z = agg.se > 0 ? (agg.mean - 1.0) / agg.se : 0.0;
  json& rep = out.report = base_report("sample-gff", config);
  rep["seed_layout"] = {{"field", "RngStream(seed, replica, initial_state)"}};
  rep["aggregate"] = {{"mean_normalized_power", agg.mean}, {"se", agg.se}, {"z", z}};
  rep["shells"] = shells.size();
  rep["max_abs_shell_z"] = max_z;
  json criteria = json::array();
  criteria.push_back(criterion("aggregate_variance", std::abs(z) <= 3.0, z, "|z| <= 3"));
  finish(rep, criteria);
  out.tables["gff_shells.csv"] = std::move(table);
  out.dumps["gff.bin"] = std::move(samples);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> command_names() { return {"wick-converge", "sqe", "invariance", "norms-bench", "sample-gff"}; }

ExperimentOutput run_command(const std::string& name, Config& config, int threads) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutput out;
  if (name == "wick-converge") {
    out = cmd_wick_converge(config, threads);
  } else if (name == "sqe") {
    out = cmd_sqe(config, threads);
  } else if (name == "invariance") {
    out = cmd_invariance(config, threads);
  } else if (name == "norms-bench") {
    out = cmd_norms_bench(config, threads);
  } else if (name == "sample-gff") {
    out = cmd_sample_gff(config, threads);
  } else {
    throw ConfigError("unknown command '" + name + "'");
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_outputs(const ExperimentOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(base / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (base / name).string());
    f << text;
  };
  write("report.json", out.report.dump(2) + "\n");
  write("timing.json", json{{"wall_clock_seconds", out.wall_seconds}}.dump(2) + "\n");
  for (const auto& [name, table] : out.tables) write(name, table.render());
  for (const auto& [name, fields] : out.dumps) write_field_dump((base / name).string(), fields);
}

}  // namespace expphi
