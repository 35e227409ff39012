#pragma once

// Interference-rank selection with the Akaike information criterion over
// the eigenvalues of the sample covariance.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmmi/matrix.hpp"
#include "cmmi/numerics.hpp"

namespace cmmi {

struct AicScore {
  std::size_t k = 0;         // hypothesized rank
  double score = 0.0;
  double sigma2_hat = 0.0;   // noise power estimate under rank k
  double log_lik = 0.0;      // ln L with constant terms dropped
};

/// Mean of the trailing eigenvalues, indices k..n-1. Requires 1 <= k < n.
inline double tail_noise_estimate(std::span<const double> eigenvalues, std::size_t k) {
  const std::size_t n = eigenvalues.size();
  if (k < 1 || k >= n) {
    throw std::invalid_argument("tail_noise_estimate: need 1 <= k < " + std::to_string(n) +
                                ", got k = " + std::to_string(k));
  }
  double acc = 0.0;
  for (std::size_t i = k; i < n; ++i) acc += eigenvalues[i];
  return acc / static_cast<double>(n - k);
}

/// Floor applied before logarithms: max(lambda, 1e-12 * lambda_max).
inline std::vector<double> floor_eigenvalues(std::span<const double> eigenvalues) {
  std::vector<double> out(eigenvalues.begin(), eigenvalues.end());
  if (out.empty()) return out;
  const double top = *std::max_element(out.begin(), out.end());
  const double floor = 1e-12 * top;
  for (auto& v : out) v = std::max(v, floor);
  return out;
}

/// AIC(k) = 2N ln(prod_{i<=k} lambda_i * sigma2^(n-k)) + 2(k+1), evaluated in
/// the log domain. Eigenvalues are expected descending and already floored.
inline AicScore aic_score(std::span<const double> eigenvalues, std::size_t k,
                          std::size_t sample_count) {
  const std::size_t n = eigenvalues.size();
  const double sigma2 = tail_noise_estimate(eigenvalues, k);
  double log_det = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(eigenvalues[i] > 0.0)) {
      throw std::invalid_argument("aic_score: nonpositive eigenvalue; floor the spectrum first");
    }
    log_det += std::log(eigenvalues[i]);
  }
  if (!(sigma2 > 0.0)) throw std::invalid_argument("aic_score: nonpositive noise estimate");
  log_det += static_cast<double>(n - k) * std::log(sigma2);
  const double big_n = static_cast<double>(sample_count);
  AicScore s;
  s.k = k;
  s.sigma2_hat = sigma2;
  s.log_lik = -big_n * log_det;
  s.score = -2.0 * s.log_lik + 2.0 * static_cast<double>(k + 1);
  return s;
}

/// Largest hypothesis: keep at least two tail eigenvalues.
inline std::size_t max_rank_hypothesis(std::size_t dim) { return dim >= 3 ? dim - 2 : 1; }

/// All scores for k = 1..dim-2 on the floored spectrum.
inline std::vector<AicScore> aic_profile(std::span<const double> eigenvalues,
                                         std::size_t sample_count) {
  const auto floored = floor_eigenvalues(eigenvalues);
  std::vector<AicScore> out;
  const std::size_t kmax = max_rank_hypothesis(floored.size());
  for (std::size_t k = 1; k <= kmax; ++k) out.push_back(aic_score(floored, k, sample_count));
  return out;
}

inline std::size_t detect_rank_from_eigenvalues(std::span<const double> eigenvalues,
                                                std::size_t sample_count) {
  const auto profile = aic_profile(eigenvalues, sample_count);
  std::size_t best = 0;
  for (std::size_t i = 1; i < profile.size(); ++i)
    if (profile[i].score < profile[best].score) best = i;  // ties keep smaller k
  return profile[best].k;
}

inline HermitianMatrix sample_covariance(std::span<const CVector> samples) {
  if (samples.empty()) throw std::invalid_argument("sample_covariance: no samples");
  const std::size_t n = samples.front().size();
  HermitianMatrix acc(n);
  for (const auto& y : samples) {
    if (y.size() != n) throw std::invalid_argument("sample_covariance: ragged samples");
    acc.add_outer(y);
  }
  return acc * (1.0 / static_cast<double>(samples.size()));
}

/// AIC rank of the interference from jamming-slot samples.
inline std::size_t detect_rank(std::span<const CVector> samples) {
  if (samples.size() < 2) throw std::invalid_argument("detect_rank: need at least 2 samples");
  if (samples.front().size() < 3) {
    throw std::invalid_argument("detect_rank: need at least 3 receive antennas");
  }
  const auto evd = hermitian_evd(sample_covariance(samples));
  return detect_rank_from_eigenvalues(evd.values, samples.size());
}

}  // namespace cmmi
