#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "expphi/cutoff.hpp"
#include "expphi/dynamics.hpp"
#include "expphi/rng.hpp"
#include "expphi/spectral_field.hpp"
#include "expphi/wick.hpp"

namespace expphi {

inline constexpr double kMinResampleEss = 50.0;

/// free_field: samples are full free-field draws, weight exp(-int exp_N).
/// zero_mode_marginal: samples carry no zero mode; the zero mode a ~ N(0,1)
/// is integrated out by quadrature, so the weight is E_a[exp(-int exp_N)].
/// Both weights are in (0,1] and have the same mean Z_N.
enum class Proposal { free_field, zero_mode_marginal };

Proposal parse_proposal(const std::string& name);
std::string to_string(Proposal p);

struct WeightedEnsemble {
  Proposal proposal = Proposal::free_field;
  WickParams params;
  CutoffProfile psi = CutoffProfile::sharp();
  std::vector<SpectralField> samples;
  std::vector<double> log_weights;
  // int exp(alpha P_N phi' - alpha^2 C'_N / 2) dx for the marginal proposal.
  std::vector<double> loads;

  std::size_t size() const { return samples.size(); }
  std::vector<double> weights() const;
  double ess() const;
  // Weights that underflow to zero in double precision.
  std::size_t flagged() const;
};

/// -int exp_N(alpha phi)(x) dx by grid quadrature.
double rn_log_weight(const SpectralField& field, const WickParams& params, const CutoffProfile& psi);
double rn_weight(const SpectralField& field, const WickParams& params, const CutoffProfile& psi);

/// Zero-mode factor: exp_N(alpha phi) = g(a) exp(alpha P_N phi' - alpha^2 C'_N / 2) with
/// g(a) = exp(alpha psi(0) a / (2 pi) - alpha^2 psi(0)^2 / (8 pi^2)), C'_N = C_N - psi(0)^2/(4 pi^2).
struct ZeroModeSplit {
  double slope = 0.0;   // alpha psi(0) / (2 pi)
  double offset = 0.0;  // alpha^2 psi(0)^2 / (8 pi^2)
  double reduced_c = 0.0;
};
ZeroModeSplit zero_mode_split(const WickParams& params, const CutoffProfile& psi);

// int exp(alpha P_N phi' - alpha^2 C'_N/2) dx for a field without zero mode.
double zero_mode_load(const SpectralField& nonzero, const WickParams& params, const CutoffProfile& psi);

/// log E_a[exp(-g(a) load)], a ~ N(0,1), by trapezoid quadrature on a window of half-width 12 around the integrand peak.
double log_zero_mode_weight(double load, const ZeroModeSplit& split);

/// Draws a from the density proportional to N(0,1)(a) exp(-g(a) load).
double sample_zero_mode(double load, const ZeroModeSplit& split, double u);

// (sum w)^2 / sum w^2 computed from log weights.
double effective_sample_size(std::span<const double> log_weights);

// sum w_i f_i / sum w_i computed from log weights.
double self_normalized_mean(std::span<const double> log_weights, std::span<const double> values);

WeightedEnsemble sample_ensemble(const TorusGrid& grid, const WickParams& params, const CutoffProfile& psi,
                                 std::size_t count, Proposal proposal, std::uint64_t seed, int threads = 1);

struct PartitionEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double jensen_bound = 0.0;  // e^{-4 pi^2}
  bool jensen_ok = true;      // mean >= bound (1 - 3 sigma / mean)
  bool weights_bounded = true;
  std::size_t count = 0;
  std::size_t excluded = 0;
};

PartitionEstimate estimate_partition(const WeightedEnsemble& ensemble);

/// Multinomial resampling. Marginal ensembles get a fresh zero mode from its
/// conditional law. Throws EssTooLowError when ESS < min_ess.
std::vector<SpectralField> resample_stationary(const WeightedEnsemble& ensemble, std::size_t count,
                                               const RngStream& stream, double min_ess = kMinResampleEss);

/// Fixed observable set, in report order.
std::vector<std::string> invariance_observables();
std::vector<double> evaluate_observables(const SpectralField& phi, const WickParams& params,
                                         const CutoffProfile& psi, double epsilon);

struct ObservableComparison {
  std::string name;
  double mean_start = 0.0;
  double mean_end = 0.0;
  double se_start = 0.0;
  double se_end = 0.0;
  double z_two_sample = 0.0;  // difference over sqrt(se_start^2 + se_end^2)
  double z_paired = 0.0;      // mean of per-replica differences over its standard error
};

struct InvarianceReport {
  std::vector<ObservableComparison> observables;
  std::vector<std::vector<double>> start_values;  // [replica][observable]
  std::vector<std::vector<double>> end_values;
  double max_abs_z = 0.0;
  double z_threshold = 3.0;
  bool stationary = true;  // every |z_paired| <= threshold
};

// Fills observables, max_abs_z and stationary from the paired start/end values.
void summarize_invariance(InvarianceReport& rep);

/// Evolves each initial state with solve_sqe_projected under `dynamics`
/// and compares observables (computed with `observed` params) at 0 and T.
/// Noise for replica r comes from RngStream(seed, r, dynamics_noise).
InvarianceReport invariance_test(std::span<const SpectralField> initial, const SqeConfig& dynamics,
                                 const WickParams& observed, double epsilon, std::uint64_t seed,
                                 int threads = 1);

}  // namespace expphi
