#pragma once

// Seeded Monte Carlo sweeps over SINR or sample count. Each trial owns a
// random stream derived from (master seed, sweep index, trial index), so the
// results do not depend on how trials are scheduled across workers.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cmmi/beamform.hpp"
#include "cmmi/estimators.hpp"
#include "cmmi/numerics.hpp"
#include "cmmi/rank_detect.hpp"
#include "cmmi/system.hpp"

namespace cmmi {

enum class ExperimentKind { NmseVsSinr, NmseVsSamples, SrVsSinr, RankDetection };
enum class RankMode { Oracle, Aic };
enum class ScmConvention { Raw, KnownNoise };

inline std::string_view kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::NmseVsSinr: return "nmse-sinr";
    case ExperimentKind::NmseVsSamples: return "nmse-samples";
    case ExperimentKind::SrVsSinr: return "sr-sinr";
    case ExperimentKind::RankDetection: return "rank-detect";
  }
  return "?";
}

inline ExperimentKind parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::NmseVsSinr, ExperimentKind::NmseVsSamples,
                 ExperimentKind::SrVsSinr, ExperimentKind::RankDetection})
    if (kind_name(k) == s) return k;
  throw std::invalid_argument("unknown experiment kind '" + std::string(s) + "'");
}

inline bool sweeps_sinr(ExperimentKind k) { return k != ExperimentKind::NmseVsSamples; }

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-trial seed. Injective in (sweep, trial) for sweep, trial < 2^32 since
/// the packed index is a bijection and mix64 is a bijection of 64-bit words.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t sweep_index,
                                    std::uint64_t trial_index) {
  return mix64(master ^ mix64((sweep_index << 32) | (trial_index & 0xffffffffULL)));
}

inline std::vector<double> default_sweep(ExperimentKind kind) {
  if (kind == ExperimentKind::NmseVsSamples) return {4, 6, 8, 12, 16};
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(-10.0 + 2.5 * i);
  return grid;
}

inline std::size_t default_trials(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SrVsSinr: return 500;
    case ExperimentKind::RankDetection: return 1000;
    default: return 2000;
  }
}

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::NmseVsSinr;
  std::vector<double> sweep = default_sweep(ExperimentKind::NmseVsSinr);
  std::size_t trials = 2000;
  std::uint64_t master_seed = 1;
  SystemConfig config;
  std::vector<Method> methods{Method::Scm, Method::Evd, Method::PcaEvd, Method::Jd, Method::Ideal};
  RankMode rank_mode = RankMode::Oracle;
  SinrConvention sinr_convention = SinrConvention::JammingToNoise;
  ScmConvention scm_convention = ScmConvention::Raw;
  double fixed_sinr_db = -5.0;  // operating point of sample-count sweeps
  std::size_t mi_draws = kDefaultMiDraws;
  std::size_t workers = 1;

  bool has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

  /// Rejects inconsistent specs before any trial runs.
  void validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("experiment: " + msg); };
    config.validate();
    if (trials == 0) fail("trials must be >= 1");
    if (sweep.empty()) fail("sweep values must not be empty");
    if (methods.empty()) fail("method list must not be empty");
    if (workers == 0) fail("workers must be >= 1");
    if (config.nb < 3) fail("need at least 3 receive antennas");
    if (config.nm_prime >= config.nb) fail("nm_prime must be below nb for rank-r estimators");
    if (kind == ExperimentKind::SrVsSinr && mi_draws == 0) fail("mi_draws must be >= 1");
    for (double v : sweep) {
      if (!std::isfinite(v)) fail("non-finite sweep value");
      if (sweeps_sinr(kind)) {
        (void)jamming_power_for(config, v, sinr_convention);  // throws if unreachable
      } else {
        if (v < 2 || v != std::floor(v)) fail("sample counts must be integers >= 2");
        if (rank_mode == RankMode::Oracle && has(Method::Jd) &&
            static_cast<std::size_t>(v) <= config.nm_prime) {
          fail("JD needs more samples than the rank; got L = " + std::to_string(v));
        }
      }
    }
    if (!sweeps_sinr(kind)) (void)jamming_power_for(config, fixed_sinr_db, sinr_convention);
  }
};

struct MethodMetrics {
  double nmse = std::numeric_limits<double>::quiet_NaN();
  double sjnr = std::numeric_limits<double>::quiet_NaN();
  double secrecy_rate = std::numeric_limits<double>::quiet_NaN();
  double flops = std::numeric_limits<double>::quiet_NaN();
};

struct TrialRecord {
  std::size_t sweep_index = 0;
  double sweep_value = 0.0;
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  std::size_t true_rank = 0;      // jamming streams in the scenario
  std::size_t detected_rank = 0;  // AIC decision, always recorded
  std::size_t rank_used = 0;      // rank handed to the estimators
  bool jd_converged = true;
  std::map<Method, MethodMetrics> metrics;
};

/// Scenario for one sweep point.
inline SystemConfig config_for(const ExperimentSpec& spec, double sweep_value) {
  SystemConfig cfg = spec.config;
  if (sweeps_sinr(spec.kind)) {
    cfg.pm = jamming_power_for(cfg, sweep_value, spec.sinr_convention);
  } else {
    cfg.samples = static_cast<std::size_t>(sweep_value);
    cfg.pm = jamming_power_for(cfg, spec.fixed_sinr_db, spec.sinr_convention);
  }
  return cfg;
}

inline TrialRecord run_trial(const ExperimentSpec& spec, std::size_t sweep_index,
                             std::size_t trial_index) {
  const double value = spec.sweep[sweep_index];
  const SystemConfig cfg = config_for(spec, value);

  TrialRecord rec;
  rec.sweep_index = sweep_index;
  rec.sweep_value = value;
  rec.trial_index = trial_index;
  rec.seed = derive_seed(spec.master_seed, sweep_index, trial_index);

  Rng rng(rec.seed);
  const ChannelSet ch = draw_channels(cfg, rng);
  const HermitianMatrix rjj = population_interference_cov(cfg, ch);
  const auto samples = jamming_only_samples(cfg, ch, cfg.samples, rng);
  const std::size_t antenna = std::uniform_int_distribution<std::size_t>(0, cfg.nt - 1)(rng);
  const CVector h_eff = ch.hs.col(antenna);

  const CovarianceEstimate raw_scm = scm(samples);
  const EigenDecomposition scm_evd = hermitian_evd(raw_scm.matrix);
  rec.true_rank = cfg.nm_prime;
  rec.detected_rank = detect_rank_from_eigenvalues(scm_evd.values, samples.size());
  std::size_t r = spec.rank_mode == RankMode::Oracle ? cfg.nm_prime : rec.detected_rank;
  r = std::clamp<std::size_t>(r, 1, std::min(cfg.nb - 1, samples.size() - 1));
  rec.rank_used = r;

  const bool truth_nonzero = frobenius_norm_sq(rjj.matrix()) > 0.0;
  const FlopCounts flops = flop_counts(static_cast<std::int64_t>(cfg.samples),
                                       static_cast<std::int64_t>(cfg.nb),
                                       static_cast<std::int64_t>(r),
                                       static_cast<std::int64_t>(cfg.nb));

  const bool want_sr = spec.kind == ExperimentKind::SrVsSinr;
  const std::uint64_t mi_seed = mix64(rec.seed ^ 0x5eed5eed5eed5eedULL);
  double mallory_mi = 0.0;
  if (want_sr) {
    Rng mi_rng(mi_seed);
    mallory_mi = mallory_mutual_information(cfg, ch, spec.mi_draws, mi_rng);
  }

  for (Method m : spec.methods) {
    CovarianceEstimate est;
    double cost = 0.0;
    switch (m) {
      case Method::Scm:
        est = spec.scm_convention == ScmConvention::Raw ? raw_scm
                                                        : scm_noise_corrected(raw_scm, cfg.sigma_b2);
        cost = static_cast<double>(flops.scm);
        break;
      case Method::Evd:
        est = evd_truncate(scm_evd, r);
        cost = static_cast<double>(flops.pca_evd);
        break;
      case Method::PcaEvd:
        est = pca_evd(scm_evd, r);
        cost = static_cast<double>(flops.pca_evd);
        break;
      case Method::Jd:
        est = jd(samples, r);
        rec.jd_converged = est.converged;
        cost = static_cast<double>(flops.jd);
        break;
      case Method::Ideal:
        est.matrix = rjj;
        est.method = Method::Ideal;
        est.rank_used = cfg.nm_prime;
        break;
    }
    MethodMetrics mm;
    mm.flops = cost;
    if (truth_nonzero) mm.nmse = nmse(est.matrix, rjj);
    const Beamformer bf = zfc_rbf(est, h_eff);
    mm.sjnr = sjnr(bf, cfg, h_eff, rjj);
    if (want_sr) {
      // Common random numbers across methods: every method sees the same
      // noise draws in the MI estimate.
      Rng mi_rng(mix64(mi_seed + 1));
      const double bob_mi = bob_mutual_information(cfg, ch, bf, rjj, spec.mi_draws, mi_rng);
      mm.secrecy_rate = std::max(0.0, bob_mi - mallory_mi);
    }
    rec.metrics[m] = mm;
  }
  return rec;
}

/// Runs every (sweep point, trial) cell on `spec.workers` threads and returns
/// records ordered by (sweep index, trial index).
inline std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t total = spec.sweep.size() * spec.trials;
  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      try {
        records[idx] = run_trial(spec, idx / spec.trials, idx % spec.trials);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  const std::size_t n_threads = std::min(spec.workers, total);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

struct CellStats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

/// Mean and standard error of the finite entries.
inline CellStats summarize(std::span<const double> xs) {
  CellStats s;
  double sum = 0.0;
  for (double x : xs)
    if (std::isfinite(x)) {
      sum += x;
      ++s.count;
    }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count == 1) {
    s.stderr_ = 0.0;
    return s;
  }
  double ss = 0.0;
  for (double x : xs)
    if (std::isfinite(x)) ss += (x - s.mean) * (x - s.mean);
  s.stderr_ = std::sqrt(ss / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
  return s;
}

/// Metric values of one method at one sweep index, in trial order.
inline std::vector<double> column(std::span<const TrialRecord> records, std::size_t sweep_index,
                                  Method m, double MethodMetrics::*field) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.sweep_index != sweep_index) continue;
    auto it = r.metrics.find(m);
    if (it != r.metrics.end()) out.push_back(it->second.*field);
  }
  return out;
}

/// Paired comparison a - b over the same trials.
inline CellStats paired_difference(std::span<const TrialRecord> records, std::size_t sweep_index,
                                   Method a, Method b, double MethodMetrics::*field) {
  const auto xa = column(records, sweep_index, a, field);
  const auto xb = column(records, sweep_index, b, field);
  std::vector<double> d(xa.size());
  for (std::size_t i = 0; i < xa.size(); ++i) d[i] = xa[i] - xb[i];
  return summarize(d);
}

}  // namespace cmmi
