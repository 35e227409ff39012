#pragma once

// Hermitian eigensolver, unitary plane rotations, null-space projectors and
// complex Gaussian sampling.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cmmi/matrix.hpp"

namespace cmmi {

using Rng = std::mt19937_64;

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Sum of squared magnitudes of the off-diagonal entries, ||A - diag(A)||_F^2.
inline double off_diagonal_energy(const ComplexMatrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) acc += std::norm(a(i, j));
  return acc;
}

inline double off_diagonal_energy(const HermitianMatrix& a) {
  return off_diagonal_energy(a.matrix());
}

struct EigenDecomposition {
  std::vector<double> values;  // descending
  ComplexMatrix vectors;       // column k pairs with values[k]

  std::size_t dim() const noexcept { return values.size(); }

  // U diag(values) U^H, optionally restricted to the leading `terms` pairs.
  HermitianMatrix reconstruct(std::size_t terms) const {
    const std::size_t n = vectors.rows();
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < std::min(terms, values.size()); ++k) {
      const double lam = values[k];
      if (lam == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const cplx ui = lam * vectors(i, k);
        for (std::size_t j = 0; j < n; ++j) out(i, j) += ui * std::conj(vectors(j, k));
      }
    }
    return HermitianMatrix::symmetrized(out);
  }
  HermitianMatrix reconstruct() const { return reconstruct(values.size()); }
};

struct JacobiOptions {
  double relative_tolerance = 1e-24;  // on off-diagonal energy / ||A||_F^2
  int max_sweeps = 100;
};

namespace detail {

// Make the first component of each column with magnitude above `eps` real and
// positive. Columns are unit norm so an absolute threshold is fine.
inline void normalize_phases(ComplexMatrix& v, double eps = 1e-12) {
  for (std::size_t k = 0; k < v.cols(); ++k) {
    for (std::size_t i = 0; i < v.rows(); ++i) {
      const double mag = std::abs(v(i, k));
      if (mag > eps) {
        const cplx phase = std::conj(v(i, k)) / mag;
        for (std::size_t r = 0; r < v.rows(); ++r) v(r, k) *= phase;
        v(i, k) = cplx(v(i, k).real(), 0.0);
        break;
      }
    }
  }
}

}  // namespace detail

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// sweeps. Eigenvalues are returned in descending order and every
/// eigenvector has its first nonzero component real and positive.
inline EigenDecomposition hermitian_evd(const HermitianMatrix& input,
                                        const JacobiOptions& opts = {}) {
  const std::size_t n = input.dim();
  ComplexMatrix a = input.matrix();
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double total = frobenius_norm_sq(a);
  const double target = opts.relative_tolerance * total;
  double off = off_diagonal_energy(a);
  int sweep = 0;

  while (off > target && total > 0.0) {
    if (sweep == opts.max_sweeps) {
      std::ostringstream msg;
      msg << "hermitian_evd: no convergence after " << opts.max_sweeps
          << " sweeps, residual off-diagonal energy " << off << " (relative "
          << off / total << ")";
      throw ConvergenceError(msg.str(), off);
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Skip entries already negligible next to both diagonal entries.
        const double g = 100.0 * mag;
        if (mag < 1e-300 ||
            (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        // Phase-strip the pair to a real symmetric 2x2, then rotate.
        const cplx eph = apq / mag;  // e^{i phi}
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
        const cplx jpp = c;
        const cplx jpq = s;
        const cplx jqp = -s * std::conj(eph);
        const cplx jqq = c * std::conj(eph);

        for (std::size_t k = 0; k < n; ++k) {  // A <- A J
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- J^H A
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {  // V <- V J
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
    ++sweep;
    off = off_diagonal_energy(a);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x).real() > a(y, y).real();
  });

  EigenDecomposition out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  detail::normalize_phases(out.vectors);
  return out;
}

/// Plane rotation N(i, j): identity except
///   N_ii = c, N_ij = s, N_ji = -conj(s), N_jj = c,
/// with c real. Unitary whenever c^2 + |s|^2 = 1.
struct GivensRotation {
  std::size_t i = 0;
  std::size_t j = 1;
  double c = 1.0;
  cplx s = 0.0;

  bool is_identity() const noexcept { return c == 1.0 && s == cplx(0.0); }

  ComplexMatrix full(std::size_t n) const {
    ComplexMatrix m = ComplexMatrix::identity(n);
    m(i, i) = c;
    m(i, j) = s;
    m(j, i) = -std::conj(s);
    m(j, j) = c;
    return m;
  }
};

namespace detail {

inline void check_rotation(const GivensRotation& rot, std::size_t n) {
  if (!(rot.i < rot.j) || rot.j >= n) {
    throw std::out_of_range("GivensRotation: indices (" + std::to_string(rot.i) + "," +
                            std::to_string(rot.j) + ") invalid for dimension " +
                            std::to_string(n));
  }
}

}  // namespace detail

/// A <- N A N^H in place. Only rows and columns i, j change.
inline void apply_givens_inplace(HermitianMatrix& h, const GivensRotation& rot) {
  ComplexMatrix& a = HermitianAccess::raw(h);
  const std::size_t n = a.rows();
  detail::check_rotation(rot, n);
  const std::size_t i = rot.i, j = rot.j;
  const double c = rot.c;
  const cplx s = rot.s;
  for (std::size_t k = 0; k < n; ++k) {  // rows: N A
    const cplx aik = a(i, k);
    const cplx ajk = a(j, k);
    a(i, k) = c * aik + s * ajk;
    a(j, k) = -std::conj(s) * aik + c * ajk;
  }
  for (std::size_t k = 0; k < n; ++k) {  // columns: (N A) N^H
    const cplx aki = a(k, i);
    const cplx akj = a(k, j);
    a(k, i) = c * aki + std::conj(s) * akj;
    a(k, j) = -s * aki + c * akj;
  }
  a(i, i) = a(i, i).real();
  a(j, j) = a(j, j).real();
  a(j, i) = std::conj(a(i, j));
}

inline HermitianMatrix apply_givens(HermitianMatrix a, const GivensRotation& rot) {
  apply_givens_inplace(a, rot);
  return a;
}

/// W <- N W (accumulate a rotation from the left).
inline void left_multiply_givens(ComplexMatrix& w, const GivensRotation& rot) {
  detail::check_rotation(rot, w.rows());
  for (std::size_t k = 0; k < w.cols(); ++k) {
    const cplx wik = w(rot.i, k);
    const cplx wjk = w(rot.j, k);
    w(rot.i, k) = rot.c * wik + rot.s * wjk;
    w(rot.j, k) = -std::conj(rot.s) * wik + rot.c * wjk;
  }
}

/// Pair statistic g(R) for rotation index pair (i, j):
///   [r_ii - r_jj, r_ij + r_ji, i (r_ji - r_ij)]
/// which is real for Hermitian R. The diagonal spread of the rotated matrix is
/// r'_ii - r'_jj = g . [c^2 - |s|^2, 2c Re s, 2c Im s].
inline std::array<double, 3> pair_statistic(const HermitianMatrix& r, std::size_t i,
                                            std::size_t j) {
  const cplx rij = r(i, j);
  return {r.diag(i) - r.diag(j), 2.0 * rij.real(), 2.0 * rij.imag()};
}

/// Maps a unit vector v = [x, y, z] to rotation parameters
///   c = sqrt((x + 1) / 2),  s = (y + i z) / sqrt(2 (x + 1)),
/// so that [c^2 - |s|^2, 2c Re s, 2c Im s] = v. x = -1 is the quarter turn
/// c = 0, s = 1.
inline std::pair<double, cplx> givens_from_vector(double x, double y, double z = 0.0) {
  const double len = std::sqrt(x * x + y * y + z * z);
  if (!(len > 0.0)) throw std::invalid_argument("givens_from_vector: zero vector");
  x /= len;
  y /= len;
  z /= len;
  if (x + 1.0 <= 1e-15) return {0.0, cplx(1.0, 0.0)};
  const double c = std::sqrt((x + 1.0) / 2.0);
  const double denom = std::sqrt(2.0 * (x + 1.0));
  cplx s(y / denom, z / denom);
  // Renormalize against rounding so c^2 + |s|^2 = 1 to machine precision.
  const double scale = std::sqrt(c * c + std::norm(s));
  return {c / scale, s / scale};
}

/// Rotation parameters maximizing v^T G v over the unit sphere, where G is the
/// 2x2 (real) or 3x3 (complex extension) accumulator of pair statistics.
/// The principal eigenvector is taken with its first nonzero component
/// positive, so the rotation angle never exceeds 45 degrees.
inline std::pair<double, cplx> givens_from_stats(const RealMatrix& gacc) {
  const std::size_t n = gacc.rows();
  if (!gacc.square() || (n != 2 && n != 3)) {
    throw std::invalid_argument("givens_from_stats: accumulator must be 2x2 or 3x3");
  }
  const auto evd = hermitian_evd(HermitianMatrix::symmetrized(to_complex(gacc)));
  // Real symmetric input: the phase convention leaves the eigenvector real.
  return givens_from_vector(evd.vectors(0, 0).real(), evd.vectors(1, 0).real(),
                            n == 3 ? evd.vectors(2, 0).real() : 0.0);
}

struct NullSpace {
  ComplexMatrix projector;  // n x n, Hermitian, idempotent
  ComplexMatrix basis;      // n x (n - rank) orthonormal columns; 1x1 zero if empty
  std::size_t row_rank = 0;
  std::size_t dimension() const noexcept { return projector.rows() - row_rank; }
};

/// Orthogonal projector onto the null space of A (m x n). The effective row
/// rank is the number of eigenvalues of A^H A above 1e-10 * the largest one,
/// so rank-deficient inputs are handled.
inline NullSpace null_space_projector(const ComplexMatrix& a) {
  const std::size_t n = a.cols();
  const auto gram = HermitianMatrix::symmetrized(a.adjoint() * a);
  const auto evd = hermitian_evd(gram);
  const double top = evd.values.front();
  std::size_t rank = 0;
  if (top > 0.0) {
    while (rank < n && evd.values[rank] > 1e-10 * top) ++rank;
  }
  NullSpace ns{ComplexMatrix(n, n), ComplexMatrix(n, std::max<std::size_t>(1, n - rank)),
               rank};
  if (rank == n) {
    ns.basis = ComplexMatrix(n, 1);
    return ns;
  }
  for (std::size_t k = rank; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      ns.basis(i, k - rank) = evd.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j)
        ns.projector(i, j) += evd.vectors(i, k) * std::conj(evd.vectors(j, k));
    }
  }
  ns.projector = HermitianMatrix::symmetrized(ns.projector).matrix();
  return ns;
}

/// n i.i.d. CN(0, variance) draws; real and imaginary parts each have
/// variance / 2.
inline CVector sample_complex_gaussian(std::size_t n, double variance, Rng& rng) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("sample_complex_gaussian: variance must be finite and >= 0");
  }
  CVector out(n);
  if (variance == 0.0) return out;
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  for (auto& x : out) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    x = cplx(re, im);
  }
  return out;
}

inline ComplexMatrix sample_complex_gaussian_matrix(std::size_t rows, std::size_t cols,
                                                    double variance, Rng& rng) {
  ComplexMatrix m(rows, cols);
  const CVector draws = sample_complex_gaussian(rows * cols, variance, rng);
  std::copy(draws.begin(), draws.end(), m.data().begin());
  return m;
}

/// Orthonormalize the columns of A by modified Gram-Schmidt. Throws if the
/// columns are numerically dependent.
inline ComplexMatrix orthonormalize_columns(ComplexMatrix a) {
  for (std::size_t k = 0; k < a.cols(); ++k) {
    for (std::size_t p = 0; p < k; ++p) {
      cplx proj{};
      for (std::size_t i = 0; i < a.rows(); ++i) proj += std::conj(a(i, p)) * a(i, k);
      for (std::size_t i = 0; i < a.rows(); ++i) a(i, k) -= proj * a(i, p);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) nrm += std::norm(a(i, k));
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) throw std::runtime_error("orthonormalize_columns: dependent columns");
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, k) /= nrm;
  }
  return a;
}

/// Haar-like random n x k matrix with orthonormal columns (k <= n).
inline ComplexMatrix random_semi_unitary(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw std::invalid_argument("random_semi_unitary: more columns than rows");
  for (;;) {
    try {
      return orthonormalize_columns(sample_complex_gaussian_matrix(n, k, 1.0, rng));
    } catch (const std::runtime_error&) {
      // measure-zero event; redraw
    }
  }
}

}  // namespace cmmi
