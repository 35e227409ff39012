#pragma once

// Interference-nulling receive beamformer and the evaluation metrics:
// SJNR, NMSE, secrecy rate of the spatial-modulation alphabet, FLOP counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmmi/estimators.hpp"
#include "cmmi/matrix.hpp"
#include "cmmi/numerics.hpp"
#include "cmmi/system.hpp"

namespace cmmi {

struct Beamformer {
  CVector u;              // unit norm
  bool degraded = false;  // desired channel fell inside the interference subspace
  std::size_t nulled = 0; // dimension of the nulled subspace
};

/// Zero-forcing-constrained receive beamformer: h_eff projected onto the
/// orthogonal complement of the estimate's principal subspace (dimension =
/// rank_used, counting only eigenvalues above 1e-10 * lambda_max), then
/// normalized. If nothing of h_eff survives, the eigenvector with the
/// smallest eigenvalue is returned and the result is flagged degraded.
inline Beamformer zfc_rbf(const CovarianceEstimate& estimate, std::span<const cplx> h_eff) {
  const std::size_t n = estimate.matrix.dim();
  if (h_eff.size() != n) throw std::invalid_argument("zfc_rbf: channel length mismatch");
  const double h_norm = norm(h_eff);
  if (h_norm == 0.0) throw std::invalid_argument("zfc_rbf: zero desired channel");

  const auto evd = hermitian_evd(estimate.matrix);
  const double top = evd.values.front();
  std::size_t nulled = 0;
  if (top > 0.0) {
    while (nulled < std::min(estimate.rank_used, n) && evd.values[nulled] > 1e-10 * top) {
      ++nulled;
    }
  }

  Beamformer bf;
  bf.nulled = nulled;
  bf.u.assign(h_eff.begin(), h_eff.end());
  for (std::size_t k = 0; k < nulled; ++k) {
    const CVector uk = evd.vectors.col(k);
    const cplx coef = inner(uk, bf.u);
    for (std::size_t i = 0; i < n; ++i) bf.u[i] -= coef * uk[i];
  }
  const double remaining = norm(bf.u);
  if (remaining < 1e-10 * h_norm) {
    bf.u = evd.vectors.col(n - 1);
    bf.degraded = true;
    return bf;
  }
  for (auto& x : bf.u) x /= remaining;
  return bf;
}

/// SJNR for the desired column h_eff = H S e_n and unit-modulus symbol:
///   beta P |u^H h_eff|^2 / u^H (R_JJ + sigma_B^2 I) u,
/// always scored against the true interference covariance.
inline double sjnr(const Beamformer& bf, const SystemConfig& cfg, std::span<const cplx> h_eff,
                   const HermitianMatrix& true_rjj) {
  const double num = cfg.beta * cfg.p * std::norm(inner(bf.u, h_eff));
  const double den = quadratic_form(true_rjj.matrix(), bf.u) + cfg.sigma_b2 * norm_sq(bf.u);
  if (den <= 0.0) return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return num / den;
}

inline double sjnr(const Beamformer& bf, const SystemConfig& cfg, const ChannelSet& ch,
                   std::size_t antenna, const HermitianMatrix& true_rjj) {
  const CVector h = ch.hs.col(antenna);
  return sjnr(bf, cfg, h, true_rjj);
}

/// ||estimate - truth||_F^2 / ||truth||_F^2.
inline double nmse(const HermitianMatrix& estimate, const HermitianMatrix& truth) {
  const double den = frobenius_norm_sq(truth.matrix());
  if (den == 0.0) throw std::invalid_argument("nmse: truth is the zero matrix");
  return frobenius_norm_sq((estimate - truth).matrix()) / den;
}

/// Mutual information (bits) of K equiprobable points x_k observed through
/// y = x_k + w, w ~ CN(0, I) (points already whitened), by Monte Carlo over
/// `draws` noise realizations cycling through the transmitted index.
inline double discrete_input_mi(const std::vector<CVector>& points, std::size_t draws, Rng& rng) {
  const std::size_t k_count = points.size();
  if (k_count == 0) throw std::invalid_argument("discrete_input_mi: empty alphabet");
  if (k_count == 1) return 0.0;
  const std::size_t dim = points.front().size();
  const double log2k = std::log2(static_cast<double>(k_count));
  double acc = 0.0;
  std::vector<double> expo(k_count);
  for (std::size_t d = 0; d < draws; ++d) {
    const std::size_t k = d % k_count;
    const CVector w = sample_complex_gaussian(dim, 1.0, rng);
    const double wn = norm_sq(w);
    double top = 0.0;  // j = k contributes exponent 0
    for (std::size_t j = 0; j < k_count; ++j) {
      double dist = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dist += std::norm(points[k][i] - points[j][i] + w[i]);
      expo[j] = wn - dist;
      top = std::max(top, expo[j]);
    }
    double sum = 0.0;
    for (double e : expo) sum += std::exp(e - top);
    acc += (top + std::log(sum)) / std::numbers::ln2;
  }
  return std::clamp(log2k - acc / static_cast<double>(draws), 0.0, log2k);
}

// Number of pairwise-distinguishable points (used when noise vanishes).
inline std::size_t distinct_points(const std::vector<CVector>& points, double tol) {
  std::size_t count = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    bool dup = false;
    for (std::size_t j = 0; j < k && !dup; ++j) {
      double d = 0.0;
      for (std::size_t i = 0; i < points[k].size(); ++i) d += std::norm(points[k][i] - points[j][i]);
      dup = std::sqrt(d) <= tol;
    }
    if (!dup) ++count;
  }
  return count;
}

/// The K = Nt * M noiseless received points sqrt(beta P) * channel column n * s_m.
inline std::vector<CVector> sm_alphabet(const SystemConfig& cfg, const ComplexMatrix& eff) {
  const CVector syms = constellation(cfg.mod_order);
  const double amp = std::sqrt(cfg.beta * cfg.p);
  std::vector<CVector> pts;
  pts.reserve(cfg.nt * cfg.mod_order);
  for (std::size_t n = 0; n < cfg.nt; ++n) {
    const CVector col = eff.col(n);
    for (const cplx s : syms) {
      CVector p(col.size());
      for (std::size_t i = 0; i < col.size(); ++i) p[i] = amp * s * col[i];
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

/// MI of the SM alphabet over `eff` (rows = receive dims) under Gaussian
/// disturbance with covariance `noise_cov`, after whitening.
inline double sm_mutual_information(const SystemConfig& cfg, const ComplexMatrix& eff,
                                    const HermitianMatrix& noise_cov, std::size_t draws,
                                    Rng& rng) {
  const auto evd = hermitian_evd(noise_cov);
  const std::size_t dim = noise_cov.dim();
  auto pts = sm_alphabet(cfg, eff);
  const double top = std::max(evd.values.front(), 0.0);
  if (top <= 1e-300) {
    // Noiseless: information is the entropy of the distinct points.
    return std::log2(static_cast<double>(distinct_points(pts, 1e-12)));
  }
  // W = Lambda^{-1/2} U^H, with directions of vanishing noise floored.
  ComplexMatrix wht(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const double lam = std::max(evd.values[k], 1e-15 * top);
    for (std::size_t i = 0; i < dim; ++i) wht(k, i) = std::conj(evd.vectors(i, k)) / std::sqrt(lam);
  }
  for (auto& p : pts) p = wht * p;
  return discrete_input_mi(pts, draws, rng);
}

inline constexpr std::size_t kDefaultMiDraws = 2000;

/// Bob's information after combining with `bob`: a scalar channel whose
/// residual jamming, noise and AN leakage are treated as Gaussian.
inline double bob_mutual_information(const SystemConfig& cfg, const ChannelSet& ch,
                                     const Beamformer& bob, const HermitianMatrix& true_rjj,
                                     std::size_t draws, Rng& rng) {
  ComplexMatrix uh(1, cfg.nb);
  for (std::size_t i = 0; i < cfg.nb; ++i) uh(0, i) = std::conj(bob.u[i]);
  const ComplexMatrix eff = uh * ch.hs;
  const ComplexMatrix an_leak = eff * ch.t_an;
  const double var = quadratic_form(true_rjj.matrix(), bob.u) + cfg.sigma_b2 * norm_sq(bob.u) +
                     (1.0 - cfg.beta) * cfg.p * cfg.sigma_a2 * frobenius_norm_sq(an_leak);
  const auto noise = HermitianMatrix::symmetrized(ComplexMatrix{{cplx(std::max(var, 0.0), 0.0)}});
  return sm_mutual_information(cfg, eff, noise, draws, rng);
}

/// Mallory's information: full Nm-dimensional observation whitened by its AN
/// + self-interference + thermal-noise covariance.
inline double mallory_mutual_information(const SystemConfig& cfg, const ChannelSet& ch,
                                         std::size_t draws, Rng& rng) {
  return sm_mutual_information(cfg, ch.gs, mallory_disturbance_cov(cfg, ch), draws, rng);
}

struct SecrecyResult {
  double bob_mi = 0.0;
  double mallory_mi = 0.0;
  double rate = 0.0;  // max(0, bob - mallory), bits per channel use
};

inline SecrecyResult secrecy_rate(const SystemConfig& cfg, const ChannelSet& ch,
                                  const Beamformer& bob, const HermitianMatrix& true_rjj,
                                  Rng& rng, std::size_t draws = kDefaultMiDraws) {
  SecrecyResult out;
  out.bob_mi = bob_mutual_information(cfg, ch, bob, true_rjj, draws, rng);
  out.mallory_mi = mallory_mutual_information(cfg, ch, draws, rng);
  out.rate = std::max(0.0, out.bob_mi - out.mallory_mi);
  return out;
}

struct FlopCounts {
  std::int64_t scm = 0;
  std::int64_t pca_evd = 0;
  std::int64_t jd = 0;
};

/// Closed-form FLOP counts with sample count K, covariance dimension Nr,
/// rank r and Bob array size Nb:
///   SCM      6 K Nr^2
///   PCA-EVD  126 Nr^3 + (8K + 6r - 2) Nr^2
///   JD       (158 + 8K - 8r) Nr^3 + ((Nb-1)^2 / 2)(126 * 2^3 + 24 (K - r))
///            + (8r + 4K - 8) Nr^2
inline FlopCounts flop_counts(std::int64_t k, std::int64_t nr, std::int64_t r, std::int64_t nb) {
  if (k <= 0 || nr <= 0 || r <= 0 || nb <= 0) {
    throw std::invalid_argument("flop_counts: arguments must be positive");
  }
  if (r >= nr) throw std::invalid_argument("flop_counts: rank must be below Nr");
  const std::int64_t nr2 = nr * nr;
  const std::int64_t nr3 = nr2 * nr;
  FlopCounts c;
  c.scm = 6 * k * nr2;
  c.pca_evd = 126 * nr3 + (8 * k + 6 * r - 2) * nr2;
  // (126 * 8 + 24 (K - r)) is even, so the halving is exact.
  const std::int64_t rotations_term = (nb - 1) * (nb - 1) * ((126 * 8 + 24 * (k - r)) / 2);
  c.jd = (158 + 8 * k - 8 * r) * nr3 + rotations_term + (8 * r + 4 * k - 8) * nr2;
  return c;
}

}  // namespace cmmi
