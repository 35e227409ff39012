#pragma once

// Interference-covariance estimators working on jamming-slot samples:
//   SCM      plain sample covariance
//   EVD      rank-r truncation of the SCM
//   PCA-EVD  rank-r truncation with the tail-mean noise power removed
//   JD       joint diagonalization of the cumulative SCM sequence

#include <algorithm>
#include <array>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cmmi/matrix.hpp"
#include "cmmi/numerics.hpp"
#include "cmmi/rank_detect.hpp"

namespace cmmi {

enum class Method { Scm, Evd, PcaEvd, Jd, Ideal };

inline constexpr std::array<Method, 5> kAllMethods = {Method::Scm, Method::Evd, Method::PcaEvd,
                                                      Method::Jd, Method::Ideal};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::Scm: return "SCM";
    case Method::Evd: return "EVD";
    case Method::PcaEvd: return "PCA-EVD";
    case Method::Jd: return "JD";
    case Method::Ideal: return "ideal";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : kAllMethods)
    if (method_name(m) == s) return m;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

struct CovarianceEstimate {
  HermitianMatrix matrix;
  Method method = Method::Scm;
  std::size_t rank_used = 0;
  double noise_var_hat = 0.0;
  bool converged = true;  // only meaningful for JD
  int sweeps = 0;
};

namespace detail {

inline void check_rank(std::size_t r, std::size_t dim, const char* who) {
  if (r < 1 || r >= dim) {
    throw std::invalid_argument(std::string(who) + ": rank " + std::to_string(r) +
                                " outside [1, " + std::to_string(dim - 1) + "]");
  }
}

// Sum_{k < r} w_k u_k u_k^H for the leading columns of an eigenbasis.
inline HermitianMatrix weighted_projection(const ComplexMatrix& vectors,
                                           std::span<const double> weights,
                                           std::span<const std::size_t> columns) {
  const std::size_t n = vectors.rows();
  ComplexMatrix out(n, n);
  for (std::size_t t = 0; t < columns.size(); ++t) {
    const double w = weights[t];
    if (w == 0.0) continue;
    const std::size_t k = columns[t];
    for (std::size_t i = 0; i < n; ++i) {
      const cplx ui = w * vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += ui * std::conj(vectors(j, k));
    }
  }
  return HermitianMatrix::symmetrized(out);
}

inline std::vector<std::size_t> leading(std::size_t r) {
  std::vector<std::size_t> idx(r);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace detail

/// (1/L) sum y_k y_k^H. This estimates R_JJ + sigma_B^2 I.
inline CovarianceEstimate scm(std::span<const CVector> samples) {
  if (samples.empty()) throw std::invalid_argument("scm: empty sample list");
  CovarianceEstimate e;
  e.matrix = sample_covariance(samples);
  e.method = Method::Scm;
  e.rank_used = std::min(samples.size(), e.matrix.dim());
  return e;
}

/// SCM with a known noise power removed and negative eigenvalues clipped.
inline CovarianceEstimate scm_noise_corrected(const CovarianceEstimate& raw, double sigma2) {
  const auto evd = hermitian_evd(raw.matrix.shifted(sigma2));
  std::vector<double> w(evd.values.size());
  std::size_t positive = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = std::max(evd.values[k], 0.0);
    if (w[k] > 0.0) ++positive;
  }
  CovarianceEstimate e = raw;
  e.matrix = detail::weighted_projection(evd.vectors, w, detail::leading(w.size()));
  e.noise_var_hat = sigma2;
  e.rank_used = std::min(raw.rank_used, positive);
  return e;
}

/// Top-r eigen-terms of a covariance, no noise removal.
inline CovarianceEstimate evd_truncate(const EigenDecomposition& evd, std::size_t r) {
  detail::check_rank(r, evd.dim(), "evd_truncate");
  CovarianceEstimate e;
  e.matrix = evd.reconstruct(r);
  e.method = Method::Evd;
  e.rank_used = r;
  return e;
}

inline CovarianceEstimate evd_truncate(std::span<const CVector> samples, std::size_t r) {
  if (samples.empty()) throw std::invalid_argument("evd_truncate: empty sample list");
  return evd_truncate(hermitian_evd(sample_covariance(samples)), r);
}

/// sum_{i<r} (lambda_i - sigma2_hat)_+ u_i u_i^H, sigma2_hat the mean of the
/// trailing dim - r eigenvalues.
inline CovarianceEstimate pca_evd(const EigenDecomposition& evd, std::size_t r) {
  detail::check_rank(r, evd.dim(), "pca_evd");
  const double sigma2 = tail_noise_estimate(evd.values, r);
  std::vector<double> w(r);
  for (std::size_t k = 0; k < r; ++k) w[k] = std::max(evd.values[k] - sigma2, 0.0);
  CovarianceEstimate e;
  e.matrix = detail::weighted_projection(evd.vectors, w, detail::leading(r));
  e.method = Method::PcaEvd;
  e.rank_used = r;
  e.noise_var_hat = sigma2;
  return e;
}

inline CovarianceEstimate pca_evd(const HermitianMatrix& data_covariance, std::size_t r) {
  return pca_evd(hermitian_evd(data_covariance), r);
}

inline CovarianceEstimate pca_evd(std::span<const CVector> samples, std::size_t r) {
  if (samples.empty()) throw std::invalid_argument("pca_evd: empty sample list");
  return pca_evd(sample_covariance(samples), r);
}

/// R_k = (1/k) sum_{i<=k} y_i y_i^H - sigma2_hat I for k = r+1 .. L.
struct ScmSequence {
  std::size_t first_k = 0;  // sample count behind matrices.front()
  std::vector<HermitianMatrix> matrices;
};

inline ScmSequence cumulative_scms(std::span<const CVector> samples, std::size_t r,
                                   double sigma2_hat) {
  const std::size_t big_l = samples.size();
  if (big_l <= r) {
    throw std::invalid_argument("cumulative_scms: need more samples (" + std::to_string(big_l) +
                                ") than the rank (" + std::to_string(r) + ")");
  }
  const std::size_t n = samples.front().size();
  ScmSequence seq;
  seq.first_k = r + 1;
  seq.matrices.reserve(big_l - r);
  HermitianMatrix running(n);
  for (std::size_t k = 1; k <= big_l; ++k) {
    running.add_outer(samples[k - 1]);
    if (k >= r + 1) {
      seq.matrices.push_back((running * (1.0 / static_cast<double>(k))).shifted(sigma2_hat));
    }
  }
  return seq;
}

struct JdOptions {
  double relative_tolerance = 1e-10;  // stop when a sweep improves less than this
  int max_sweeps = 50;
};

struct JdResult {
  std::vector<HermitianMatrix> rotated;  // W R_k W^H
  ComplexMatrix w;                       // accumulated rotation product
  std::vector<double> objective;         // summed off-diagonal energy, [0] = initial
  bool converged = false;
  int sweeps = 0;

  ComplexMatrix transform() const { return w.adjoint(); }  // T, with T^H R_k T diagonalized
};

/// Accumulator G = (1/K) sum_k g(R_k) g(R_k)^T for the pair (i, j).
inline RealMatrix pair_accumulator(std::span<const HermitianMatrix> family, std::size_t i,
                                   std::size_t j) {
  RealMatrix g(3, 3);
  for (const auto& r : family) {
    const auto v = pair_statistic(r, i, j);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) g(a, b) += v[a] * v[b];
  }
  g *= 1.0 / static_cast<double>(family.size());
  return g;
}

/// Cyclic Givens sweeps minimizing sum_k off(W R_k W^H) over unitary W. Each
/// pair visit rebuilds the accumulator from the current rotated matrices.
inline JdResult joint_diagonalize(std::vector<HermitianMatrix> family,
                                  const JdOptions& opts = {}) {
  if (family.empty()) throw std::invalid_argument("joint_diagonalize: empty family");
  const std::size_t n = family.front().dim();
  for (const auto& r : family)
    if (r.dim() != n) throw std::invalid_argument("joint_diagonalize: dimension mismatch");

  auto objective = [&] {
    double acc = 0.0;
    for (const auto& r : family) acc += off_diagonal_energy(r);
    return acc;
  };

  JdResult res;
  res.w = ComplexMatrix::identity(n);
  res.objective.push_back(objective());
  double prev = res.objective.back();

  while (prev > 0.0 && res.sweeps < opts.max_sweeps) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto [c, s] = givens_from_stats(pair_accumulator(family, i, j));
        const GivensRotation rot{i, j, c, s};
        if (rot.is_identity()) continue;
        for (auto& r : family) apply_givens_inplace(r, rot);
        left_multiply_givens(res.w, rot);
      }
    }
    ++res.sweeps;
    const double cur = objective();
    res.objective.push_back(cur);
    if (prev - cur < opts.relative_tolerance * prev) {
      res.converged = true;
      break;
    }
    prev = cur;
  }
  if (prev == 0.0) res.converged = true;
  res.rotated = std::move(family);
  return res;
}

/// Lambda from the sorted diagonal of T^H R_L T (top r, clipped at zero),
/// returns T Lambda T^H.
inline HermitianMatrix jd_reconstruct(const JdResult& res, std::size_t r) {
  const HermitianMatrix& last = res.rotated.back();  // W R_L W^H
  const std::size_t n = last.dim();
  detail::check_rank(r, n, "jd_reconstruct");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return last.diag(a) > last.diag(b); });
  order.resize(r);
  std::vector<double> w(r);
  for (std::size_t k = 0; k < r; ++k) w[k] = std::max(last.diag(order[k]), 0.0);
  return detail::weighted_projection(res.transform(), w, order);
}

/// JD estimate: T from the cumulative SCM sequence, then jd_reconstruct.
inline CovarianceEstimate jd(std::span<const CVector> samples, std::size_t r,
                             const JdOptions& opts = {}) {
  if (samples.empty()) throw std::invalid_argument("jd: empty sample list");
  const std::size_t n = samples.front().size();
  detail::check_rank(r, n, "jd");
  if (samples.size() <= r) {
    throw std::invalid_argument("jd: need L > r (L = " + std::to_string(samples.size()) +
                                ", r = " + std::to_string(r) + ")");
  }
  const auto evd = hermitian_evd(sample_covariance(samples));
  const double sigma2 = tail_noise_estimate(evd.values, r);
  ScmSequence seq = cumulative_scms(samples, r, sigma2);
  const JdResult res = joint_diagonalize(std::move(seq.matrices), opts);

  CovarianceEstimate e;
  e.matrix = jd_reconstruct(res, r);
  e.method = Method::Jd;
  e.rank_used = r;
  e.noise_var_hat = sigma2;
  e.converged = res.converged;
  e.sweeps = res.sweeps;
  return e;
}

}  // namespace cmmi
