#include "expphi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "expphi/errors.hpp"
#include "expphi/gaussian_fields.hpp"
#include "expphi/norms.hpp"
#include "expphi/semigroup.hpp"

namespace expphi {

Scheme parse_scheme(const std::string& name) {
  if (name == "exponential-euler") return Scheme::exponential_euler;
  if (name == "semi-implicit") return Scheme::semi_implicit;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

Equation parse_equation(const std::string& name) {
  if (name == "full") return Equation::full;
  if (name == "projected") return Equation::projected;
  if (name == "shifted") return Equation::shifted;
  throw std::invalid_argument("unknown equation '" + name + "'");
}

std::string to_string(Scheme s) {
  return s == Scheme::exponential_euler ? "exponential-euler" : "semi-implicit";
}

std::string to_string(Equation e) {
  switch (e) {
    case Equation::full: return "full";
    case Equation::projected: return "projected";
    case Equation::shifted: return "shifted";
  }
  return "?";
}

void SqeConfig::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(dt > 0.0) || dt > horizon) throw std::invalid_argument("need 0 < dt <= horizon");
  if (!(mollifier_scale >= 0.0)) throw std::invalid_argument("mollifier scale must be nonnegative");
  if (!(stability_limit > 0.0)) throw std::invalid_argument("stability limit must be positive");
  if (record_stride < 1) throw std::invalid_argument("record stride must be at least 1");
}

namespace {

constexpr double kNonnegTolerance = -1e-10;

double min_value(std::span<const double> v) {
  return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

// Per-mode multipliers for one step size, in storage order.
struct StepTables {
  double dt = -1.0;
  std::vector<double> decay;     // e^{-a dt}, a = (1+|k|^2)/2
  std::vector<double> noise_sd;  // sqrt((1 - e^{-2 a dt}) / (2a))
  std::vector<double> etd;       // (1 - e^{-a dt}) / a
  std::vector<double> implicit;  // 1 / (1 + a dt)
  std::vector<double> cutoff;    // psi(2^-N k)

  void prepare(const TorusGrid& grid, double step, const CutoffProfile& psi, int level) {
    if (step == dt && !decay.empty()) return;
    dt = step;
    const std::size_t n = grid.coeff_count();
    decay.assign(n, 0.0);
    noise_sd.assign(n, 0.0);
    etd.assign(n, 0.0);
    implicit.assign(n, 0.0);
    cutoff.assign(n, 0.0);
    const bool unit = psi.kind() == CutoffKind::unit;
    for_each_mode(grid, [&](std::size_t idx, int k1, int k2, double, bool) {
      const double ksq = k1 * k1 + k2 * k2;
      const double a = 0.5 * (1.0 + ksq);
      decay[idx] = ou_decay_factor(ksq, dt);
      noise_sd[idx] = std::sqrt(ou_noise_variance(ksq, dt));
      etd[idx] = -std::expm1(-a * dt) / a;
      implicit[idx] = 1.0 / (1.0 + a * dt);
      cutoff[idx] = unit ? 1.0 : psi.at_level(level, k1, k2);
    });
  }
};

void scale(SpectralField& f, const std::vector<double>& m) {
  auto c = f.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= m[i];
}

SpectralField scaled(SpectralField f, const std::vector<double>& m) {
  scale(f, m);
  return f;
}

void guard_exponent(double max_exponent) {
  if (max_exponent > kExponentGuard) {
    std::ostringstream os;
    os << "exponent " << max_exponent << " exceeds overflow guard";
    throw NumericGuardError(os.str());
  }
}

double guard_stiffness(const SqeConfig& cfg, double dt, double max_rate) {
  const double a = cfg.params.alpha;
  const double stiffness = dt * 0.5 * a * a * max_rate;
  if (stiffness > cfg.stability_limit) {
    std::ostringstream os;
    os << "explicit step stiffness " << stiffness << " exceeds limit " << cfg.stability_limit
       << "; reduce dt";
    throw NumericGuardError(os.str());
  }
  return stiffness;
}

std::vector<double> mollify_values(const SpectralField& xi, double lambda) {
  return from_spectral(heat_semigroup_massless(xi, lambda));
}

// One mild step of the shifted equation; chi holds the forcing at grid points.
SpectralField shifted_step(const SpectralField& u, std::span<const double> chi, double dt,
                           const SqeConfig& cfg, double& max_stiffness) {
  const double alpha = cfg.params.alpha;
  std::vector<double> prod = from_spectral(u);
  double max_exp = -std::numeric_limits<double>::infinity();
  for (double v : prod) max_exp = std::max(max_exp, alpha * v);
  guard_exponent(max_exp);
  double max_rate = 0.0;
  for (std::size_t i = 0; i < prod.size(); ++i) {
    prod[i] = std::exp(alpha * prod[i]) * chi[i];
    max_rate = std::max(max_rate, prod[i]);
  }
  max_stiffness = std::max(max_stiffness, guard_stiffness(cfg, dt, max_rate));
  SpectralField bracket = u;
  if (alpha != 0.0) bracket -= to_spectral(prod, u.grid()) * (0.5 * alpha * dt);
  return heat_semigroup(bracket, dt);
}

std::vector<double> forcing_values(const SpectralField& xi, double lambda) {
  std::vector<double> v = from_spectral(xi);
  if (min_value(v) < kNonnegTolerance) {
    throw std::invalid_argument("forcing field is negative at a grid point");
  }
  if (lambda > 0.0) v = mollify_values(xi, lambda);
  return v;
}

bool should_record(std::size_t step, std::size_t steps, int stride) {
  return (step % static_cast<std::size_t>(stride)) == 0 || step == steps;
}

void record(SolutionPath& path, double t, const SpectralField& state, const SqeConfig& cfg) {
  path.times.push_back(t);
  path.state_norms.push_back(sobolev_norm(state, cfg.diagnostic_exponent));
  path.states.push_back(state);
}

}  // namespace

SpectralField measure_product(std::span<const double> f, const SpectralField& xi, double mollifier_scale) {
  if (!(mollifier_scale >= 0.0)) throw std::invalid_argument("mollifier scale must be nonnegative");
  if (f.size() != xi.grid().points()) throw std::invalid_argument("f does not match grid");
  std::vector<double> v = forcing_values(xi, mollifier_scale);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= f[i];
  return to_spectral(v, xi.grid());
}

bool resolved_in_h2_minus_beta(const SpectralField& upsilon, double beta) {
  const double s = 2.0 - beta;
  const double cut = upsilon.grid().size() / 4.0;
  double total = 0.0;
  double top = 0.0;
  const auto c = upsilon.coeffs();
  for_each_mode(upsilon.grid(), [&](std::size_t idx, int k1, int k2, double mult, bool) {
    const double ksq = k1 * k1 + k2 * k2;
    const double e = mult * std::pow(1.0 + ksq, s) * std::norm(c[idx]);
    total += e;
    if (ksq > cut * cut) top += e;
  });
  return total == 0.0 || top <= 0.5 * total;
}

SolutionPath solve_shifted(const SpectralField& upsilon, const FieldPath& chi_path, const SqeConfig& config) {
  config.validate();
  const auto& times = chi_path.times;
  if (times.size() != chi_path.states.size() || times.size() < 2) {
    throw std::invalid_argument("forcing path needs matching times and at least two entries");
  }
  if (!resolved_in_h2_minus_beta(upsilon, config.params.beta)) {
    throw std::invalid_argument("initial datum is not resolved in H^{2-beta} on this grid");
  }
  SolutionPath path;
  record(path, times.front(), upsilon, config);
  SpectralField u = upsilon;
  const std::size_t steps = times.size() - 1;
  for (std::size_t j = 0; j < steps; ++j) {
    const double dt = times[j + 1] - times[j];
    if (!(dt > 0.0)) throw std::invalid_argument("forcing path times must increase");
    const auto chi = forcing_values(chi_path.states[j], config.mollifier_scale);
    u = shifted_step(u, chi, dt, config, path.max_stiffness);
    if (should_record(j + 1, steps, config.record_stride)) record(path, times[j + 1], u, config);
  }
  return path;
}

SolutionPath solve_sqe_full(const SpectralField& phi0, const SqeConfig& config, const RngStream& stream) {
  config.validate();
  const auto& grid = phi0.grid();
  const auto& p = config.params;
  const auto& psi = config.psi;
  const auto times = uniform_times(config.horizon, config.dt);
  const std::size_t steps = times.size() - 1;
  const double shift = 0.5 * p.alpha * p.alpha * p.c_n;

  SolutionPath path;
  SpectralField phi = apply_PN(phi0, psi, p.level);
  SpectralField x = phi0;
  SpectralField y(grid);
  const bool decompose = config.record_decomposition;
  if (decompose) path.decomposition.emplace();
  StepTables tables;
  auto record_all = [&](double t) {
    record(path, t, phi, config);
    if (decompose) {
      path.decomposition->x_part.push_back(apply_PN(x, psi, p.level));
      path.decomposition->y_part.push_back(y);
    }
  };
  record_all(0.0);

  for (std::size_t j = 0; j < steps; ++j) {
    const double dt = times[j + 1] - times[j];
    const SpectralField white = white_modes(grid, stream.substream(j));

    std::vector<double> e = from_spectral(phi);
    double max_exp = -std::numeric_limits<double>::infinity();
    for (double& v : e) {
      v = p.alpha * v - shift;
      max_exp = std::max(max_exp, v);
    }
    guard_exponent(max_exp);
    double max_rate = 0.0;
    for (double& v : e) {
      v = std::exp(v);
      max_rate = std::max(max_rate, v);
    }
    path.max_stiffness = std::max(path.max_stiffness, guard_stiffness(config, dt, max_rate));
    tables.prepare(grid, dt, psi, p.level);
    const SpectralField drift = to_spectral(e, grid) * (-0.5 * p.alpha);
    auto f = phi.coeffs();
    const auto d = drift.coeffs();
    const auto w = white.coeffs();
    if (config.scheme == Scheme::exponential_euler) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = tables.decay[i] * f[i] + tables.etd[i] * d[i] + tables.cutoff[i] * (tables.noise_sd[i] * w[i]);
      }
    } else {
      const double sq = std::sqrt(dt);
      for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = tables.implicit[i] * (f[i] + dt * d[i] + tables.cutoff[i] * (sq * w[i]));
      }
    }

    if (decompose) {
      const auto chi = wick_exp_projected(scaled(x, tables.cutoff), p);
      guard_exponent(chi.max_exponent);
      y = shifted_step(y, chi.values, dt, config, path.max_stiffness);
      auto xc = x.coeffs();
      for (std::size_t i = 0; i < xc.size(); ++i) xc[i] = tables.decay[i] * xc[i] + tables.noise_sd[i] * w[i];
    }
    if (should_record(j + 1, steps, config.record_stride)) record_all(times[j + 1]);
  }
  return path;
}

SolutionPath solve_sqe_projected(const SpectralField& phi0, const SqeConfig& config, const RngStream& stream) {
  config.validate();
  const auto& grid = phi0.grid();
  const auto& p = config.params;
  const auto& psi = config.psi;
  const auto times = uniform_times(config.horizon, config.dt);
  const std::size_t steps = times.size() - 1;

  apply_PN(phi0, psi, p.level);  // rejects unresolved levels
  SolutionPath path;
  SpectralField phi = phi0;
  StepTables tables;
  record(path, 0.0, phi, config);
  for (std::size_t j = 0; j < steps; ++j) {
    const double dt = times[j + 1] - times[j];
    const SpectralField white = white_modes(grid, stream.substream(j));
    tables.prepare(grid, dt, psi, p.level);
    const auto ex = wick_exp_projected(scaled(phi, tables.cutoff), p);
    guard_exponent(ex.max_exponent);
    const double max_rate = *std::max_element(ex.values.begin(), ex.values.end());
    path.max_stiffness = std::max(path.max_stiffness, guard_stiffness(config, dt, max_rate));
    const SpectralField drift = scaled(ex.field, tables.cutoff) * (-0.5 * p.alpha);
    auto f = phi.coeffs();
    const auto d = drift.coeffs();
    const auto w = white.coeffs();
    if (config.scheme == Scheme::exponential_euler) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = tables.decay[i] * f[i] + tables.noise_sd[i] * w[i] + tables.etd[i] * d[i];
      }
    } else {
      const double sq = std::sqrt(dt);
      for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = tables.implicit[i] * (f[i] + dt * d[i] + sq * w[i]);
      }
    }
    if (should_record(j + 1, steps, config.record_stride)) record(path, times[j + 1], phi, config);
  }
  return path;
}

double decomposition_residual(const SolutionPath& path, double s) {
  if (!path.decomposition) throw std::invalid_argument("path carries no decomposition");
  const auto& d = *path.decomposition;
  double worst = 0.0;
  for (std::size_t i = 0; i < path.states.size(); ++i) {
    worst = std::max(worst, sobolev_norm(path.states[i] - (d.x_part[i] + d.y_part[i]), s));
  }
  return worst;
}

double sup_distance(const SolutionPath& a, const SolutionPath& b, double s) {
  if (a.states.size() != b.states.size()) throw std::invalid_argument("paths have different lengths");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    worst = std::max(worst, sobolev_distance(a.states[i], b.states[i], s));
  }
  return worst;
}

ContractionReport contraction_check(const SpectralField& upsilon1, const SpectralField& upsilon2,
                                    const FieldPath& chi_path, const SqeConfig& config,
                                    double tolerance_per_unit_time) {
  const auto a = solve_shifted(upsilon1, chi_path, config);
  const auto b = solve_shifted(upsilon2, chi_path, config);
  ContractionReport rep;
  rep.times = a.times;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    const double g = sobolev_distance(a.states[i], b.states[i], 0.0);
    rep.gaps.push_back(g);
    rep.scaled_gaps.push_back(std::exp(0.5 * a.times[i]) * g);
  }
  for (std::size_t i = 1; i < rep.scaled_gaps.size(); ++i) {
    const double prev = rep.scaled_gaps[i - 1];
    if (prev == 0.0) {
      if (rep.scaled_gaps[i] > 0.0) rep.worst_growth_rate = std::numeric_limits<double>::infinity();
      continue;
    }
    const double rate = (rep.scaled_gaps[i] / prev - 1.0) / (rep.times[i] - rep.times[i - 1]);
    rep.worst_growth_rate = std::max(rep.worst_growth_rate, rate);
  }
  rep.nonincreasing = rep.worst_growth_rate <= tolerance_per_unit_time;
  return rep;
}

}  // namespace expphi
