#pragma once

#include <gtest/gtest.h>

#include "cmmi/cmmi.hpp"

namespace cmmi::testing {

inline HermitianMatrix random_hermitian(std::size_t n, Rng& rng, double scale = 1.0) {
  const ComplexMatrix a = sample_complex_gaussian_matrix(n, n, scale, rng);
  return HermitianMatrix::symmetrized(a + a.adjoint());
}

// Random PSD matrix of a given rank: B B^H with B n x r.
inline HermitianMatrix random_psd(std::size_t n, std::size_t r, Rng& rng) {
  const ComplexMatrix b = sample_complex_gaussian_matrix(n, r, 1.0, rng);
  return HermitianMatrix::symmetrized(b * b.adjoint());
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  EXPECT_EQ(a.rows(), b.rows());
  EXPECT_EQ(a.cols(), b.cols());
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

inline double rel_frob_error(const ComplexMatrix& a, const ComplexMatrix& ref) {
  return frobenius_norm(a - ref) / frobenius_norm(ref);
}

inline void expect_unitary_columns(const ComplexMatrix& u, double tol) {
  const ComplexMatrix g = u.adjoint() * u;
  EXPECT_LE(max_abs_diff(g, ComplexMatrix::identity(u.cols())), tol);
}

}  // namespace cmmi::testing
