#include "expphi/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "expphi/errors.hpp"
#include "expphi/gaussian_fields.hpp"
#include "expphi/norms.hpp"
#include "expphi/parallel.hpp"

namespace expphi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kVolume = 4.0 * kPi * kPi;
constexpr double kZeroModeSpan = 12.0;
constexpr int kZeroModeCells = 4800;

double uniform01(CounterEngine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Maximizer of -a^2/2 - load exp(slope a - offset), by bisection on its derivative.
double zero_mode_centre(double load, const ZeroModeSplit& split) {
  auto slope_at = [&](double a) { return -a - load * split.slope * std::exp(split.slope * a - split.offset); };
  double lo = -200.0, hi = 200.0;
  if (slope_at(lo) <= 0.0) return lo;
  if (slope_at(hi) >= 0.0) return hi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope_at(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Log density on the window centre +- kZeroModeSpan, which holds all the mass
// because the log density is concave with curvature at most -1.
struct ZeroModeGrid {
  double start = 0.0;
  std::vector<double> log_density;
};

ZeroModeGrid zero_mode_log_density(double load, const ZeroModeSplit& split) {
  ZeroModeGrid out;
  out.start = zero_mode_centre(load, split) - kZeroModeSpan;
  out.log_density.resize(kZeroModeCells + 1);
  const double h = 2.0 * kZeroModeSpan / kZeroModeCells;
  for (int i = 0; i <= kZeroModeCells; ++i) {
    const double a = out.start + i * h;
    out.log_density[i] = -0.5 * a * a - 0.5 * std::log(2.0 * kPi) - std::exp(split.slope * a - split.offset) * load;
  }
  return out;
}

}  // namespace

Proposal parse_proposal(const std::string& name) {
  if (name == "free-field") return Proposal::free_field;
  if (name == "zero-mode-marginal") return Proposal::zero_mode_marginal;
  throw std::invalid_argument("unknown proposal '" + name + "'");
}

std::string to_string(Proposal p) {
  return p == Proposal::free_field ? "free-field" : "zero-mode-marginal";
}

std::vector<double> WeightedEnsemble::weights() const {
  std::vector<double> w(log_weights.size());
  std::transform(log_weights.begin(), log_weights.end(), w.begin(), [](double l) { return std::exp(l); });
  return w;
}

double WeightedEnsemble::ess() const { return effective_sample_size(log_weights); }

std::size_t WeightedEnsemble::flagged() const {
  return static_cast<std::size_t>(
      std::count_if(log_weights.begin(), log_weights.end(), [](double l) { return std::exp(l) == 0.0; }));
}

double rn_log_weight(const SpectralField& field, const WickParams& params, const CutoffProfile& psi) {
  const auto w = wick_exp_gff(field, params, psi);
  if (w.overflow) return -std::numeric_limits<double>::infinity();
  return -quadrature(w.values, field.grid());
}

double rn_weight(const SpectralField& field, const WickParams& params, const CutoffProfile& psi) {
  return std::exp(rn_log_weight(field, params, psi));
}

ZeroModeSplit zero_mode_split(const WickParams& params, const CutoffProfile& psi) {
  const double p0 = psi(0.0, 0.0);
  ZeroModeSplit s;
  s.slope = params.alpha * p0 / (2.0 * kPi);
  s.offset = params.alpha * params.alpha * p0 * p0 / (8.0 * kPi * kPi);
  s.reduced_c = params.c_n - p0 * p0 / kVolume;
  return s;
}

double zero_mode_load(const SpectralField& nonzero, const WickParams& params, const CutoffProfile& psi) {
  if (std::abs(nonzero.at(0, 0)) != 0.0) throw std::invalid_argument("field carries a zero mode");
  WickParams reduced = params;
  reduced.c_n = zero_mode_split(params, psi).reduced_c;
  const auto w = wick_exp_gff(nonzero, reduced, psi);
  if (w.overflow) return std::numeric_limits<double>::infinity();
  return quadrature(w.values, nonzero.grid());
}

double log_zero_mode_weight(double load, const ZeroModeSplit& split) {
  if (!(load >= 0.0)) throw std::invalid_argument("zero-mode load must be nonnegative");
  if (std::isinf(load)) return -std::numeric_limits<double>::infinity();
  auto dens = zero_mode_log_density(load, split).log_density;
  dens.front() -= std::log(2.0);
  dens.back() -= std::log(2.0);
  return std::log(2.0 * kZeroModeSpan / kZeroModeCells) + log_sum_exp(dens);
}

double sample_zero_mode(double load, const ZeroModeSplit& split, double u) {
  if (!(load >= 0.0) || std::isinf(load)) throw std::invalid_argument("zero-mode load must be finite and nonnegative");
  const auto window = zero_mode_log_density(load, split);
  const auto& dens = window.log_density;
  const double top = *std::max_element(dens.begin(), dens.end());
  const double h = 2.0 * kZeroModeSpan / kZeroModeCells;
  std::vector<double> cum(kZeroModeCells + 1, 0.0);
  for (int i = 0; i < kZeroModeCells; ++i) {
    cum[i + 1] = cum[i] + 0.5 * h * (std::exp(dens[i] - top) + std::exp(dens[i + 1] - top));
  }
  const double target = u * cum.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), target);
  const int cell = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0, kZeroModeCells - 1);
  const double mass = cum[cell + 1] - cum[cell];
  const double frac = mass > 0.0 ? (target - cum[cell]) / mass : 0.5;
  return window.start + (cell + std::clamp(frac, 0.0, 1.0)) * h;
}

double effective_sample_size(std::span<const double> log_weights) {
  if (log_weights.empty()) return 0.0;
  std::vector<double> twice(log_weights.begin(), log_weights.end());
  for (double& x : twice) x *= 2.0;
  const double l1 = log_sum_exp(log_weights);
  if (!std::isfinite(l1)) return 0.0;
  return std::exp(2.0 * l1 - log_sum_exp(twice));
}

double self_normalized_mean(std::span<const double> log_weights, std::span<const double> values) {
  if (log_weights.size() != values.size() || values.empty()) {
    throw std::invalid_argument("weights and values must be nonempty and of equal length");
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double x : log_weights) m = std::max(m, x);
  if (!std::isfinite(m)) throw std::invalid_argument("all weights are zero");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = std::exp(log_weights[i] - m);
    num += w * values[i];
    den += w;
  }
  return num / den;
}

WeightedEnsemble sample_ensemble(const TorusGrid& grid, const WickParams& params, const CutoffProfile& psi,
                                 std::size_t count, Proposal proposal, std::uint64_t seed, int threads) {
  if (count == 0) throw std::invalid_argument("ensemble size must be positive");
  WeightedEnsemble ens;
  ens.proposal = proposal;
  ens.params = params;
  ens.psi = psi;
  ens.samples.assign(count, SpectralField(grid));
  ens.log_weights.assign(count, 0.0);
  if (proposal == Proposal::zero_mode_marginal) ens.loads.assign(count, 0.0);
  const auto split = zero_mode_split(params, psi);
  parallel_for(count, threads, [&](std::size_t i) {
    SpectralField phi = gff_sample(grid, RngStream(seed, i, StreamPurpose::proposal));
    if (proposal == Proposal::free_field) {
      ens.log_weights[i] = rn_log_weight(phi, params, psi);
    } else {
      phi.at(0, 0) = 0.0;
      ens.loads[i] = zero_mode_load(phi, params, psi);
      ens.log_weights[i] = log_zero_mode_weight(ens.loads[i], split);
    }
    ens.samples[i] = std::move(phi);
  });
  return ens;
}

PartitionEstimate estimate_partition(const WeightedEnsemble& ensemble) {
  if (ensemble.size() == 0) throw std::invalid_argument("empty ensemble");
  PartitionEstimate est;
  est.count = ensemble.size();
  est.excluded = ensemble.flagged();
  est.jensen_bound = std::exp(-kVolume);
  const auto w = ensemble.weights();
  // Offsets from the first weight keep a constant ensemble exact.
  const double ref = w.front();
  double offset = 0.0;
  for (double x : w) {
    offset += x - ref;
    if (x > 1.0) est.weights_bounded = false;
  }
  est.mean = ref + offset / static_cast<double>(w.size());
  double ss = 0.0;
  for (double x : w) ss += (x - est.mean) * (x - est.mean);
  if (w.size() > 1) est.std_error = std::sqrt(ss / static_cast<double>(w.size() - 1) / static_cast<double>(w.size()));
  est.jensen_ok = est.mean >= est.jensen_bound - 3.0 * est.std_error * est.jensen_bound / std::max(est.mean, est.jensen_bound);
  return est;
}

std::vector<SpectralField> resample_stationary(const WeightedEnsemble& ensemble, std::size_t count,
                                               const RngStream& stream, double min_ess) {
  const double ess = ensemble.ess();
  if (ess < min_ess) {
    throw EssTooLowError("effective sample size " + std::to_string(ess) + " below threshold " +
                             std::to_string(min_ess),
                         ess);
  }
  const auto& lw = ensemble.log_weights;
  const double top = *std::max_element(lw.begin(), lw.end());
  std::vector<double> cum(lw.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    acc += std::exp(lw[i] - top);
    cum[i] = acc;
  }
  const auto split = zero_mode_split(ensemble.params, ensemble.psi);
  std::vector<SpectralField> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    CounterEngine eng(stream.substream(j));
    const double target = uniform01(eng) * acc;
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    const std::size_t pick = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), lw.size() - 1);
    SpectralField phi = ensemble.samples[pick];
    if (ensemble.proposal == Proposal::zero_mode_marginal) {
      phi.at(0, 0) = sample_zero_mode(ensemble.loads[pick], split, uniform01(eng));
    }
    out.push_back(std::move(phi));
  }
  return out;
}

std::vector<std::string> invariance_observables() {
  return {"hneg_norm", "hneg_norm_sq", "mode0_re", "mode0_sq", "wick_mean"};
}

std::vector<double> evaluate_observables(const SpectralField& phi, const WickParams& params,
                                         const CutoffProfile& psi, double epsilon) {
  const double n = sobolev_norm(phi, -epsilon);
  const Complex z = phi.at(0, 0);
  const auto w = wick_exp_gff(phi, params, psi);
  const double wick_mean = w.overflow ? std::numeric_limits<double>::infinity()
                                      : quadrature(w.values, phi.grid()) / kVolume;
  return {n, n * n, z.real(), std::norm(z), wick_mean};
}

void summarize_invariance(InvarianceReport& rep) {
  if (rep.start_values.size() < 2 || rep.end_values.size() != rep.start_values.size()) {
    throw std::invalid_argument("need at least two paired replicas");
  }
  rep.observables.clear();
  rep.max_abs_z = 0.0;
  const auto names = invariance_observables();
  const std::size_t n = rep.start_values.size();
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < names.size(); ++k) {
    double m0 = 0.0, m1 = 0.0, md = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      m0 += rep.start_values[r][k];
      m1 += rep.end_values[r][k];
    }
    m0 /= dn;
    m1 /= dn;
    md = m1 - m0;
    double v0 = 0.0, v1 = 0.0, vd = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double a = rep.start_values[r][k] - m0;
      const double b = rep.end_values[r][k] - m1;
      v0 += a * a;
      v1 += b * b;
      vd += (b - a) * (b - a);
    }
    ObservableComparison c;
    c.name = names[k];
    c.mean_start = m0;
    c.mean_end = m1;
    c.se_start = std::sqrt(v0 / (dn - 1.0) / dn);
    c.se_end = std::sqrt(v1 / (dn - 1.0) / dn);
    const double se_two = std::hypot(c.se_start, c.se_end);
    const double se_pair = std::sqrt(vd / (dn - 1.0) / dn);
    c.z_two_sample = se_two > 0.0 ? md / se_two : 0.0;
    c.z_paired = se_pair > 0.0 ? md / se_pair : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(c.z_paired));
    rep.observables.push_back(c);
  }
  rep.stationary = rep.max_abs_z <= rep.z_threshold;
}

InvarianceReport invariance_test(std::span<const SpectralField> initial, const SqeConfig& dynamics,
                                 const WickParams& observed, double epsilon, std::uint64_t seed,
                                 int threads) {
  if (initial.size() < 2) throw std::invalid_argument("invariance test needs at least two replicas");
  SqeConfig cfg = dynamics;
  cfg.record_stride = std::numeric_limits<int>::max();
  cfg.record_decomposition = false;
  const std::size_t n = initial.size();
  InvarianceReport rep;
  rep.start_values.resize(n);
  rep.end_values.resize(n);
  parallel_for(n, threads, [&](std::size_t r) {
    const auto path = solve_sqe_projected(initial[r], cfg, RngStream(seed, r, StreamPurpose::dynamics_noise));
    rep.start_values[r] = evaluate_observables(path.states.front(), observed, cfg.psi, epsilon);
    rep.end_values[r] = evaluate_observables(path.states.back(), observed, cfg.psi, epsilon);
  });
  summarize_invariance(rep);
  return rep;
}

}  // namespace expphi
