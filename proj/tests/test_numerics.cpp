#include <Eigen/Dense>

#include <numbers>

#include "test_util.hpp"

using namespace cmmi;
using cmmi::testing::expect_unitary_columns;
using cmmi::testing::max_abs_diff;
using cmmi::testing::random_hermitian;
using cmmi::testing::rel_frob_error;

namespace {

// Roots of the characteristic polynomial of a 3x3 Hermitian matrix by the
// trigonometric solution of the depressed cubic, descending.
std::array<double, 3> cubic_eigenvalues(const HermitianMatrix& a) {
  const double tr = a.diag(0) + a.diag(1) + a.diag(2);
  const double m2 = a.diag(0) * a.diag(1) - std::norm(a(0, 1)) + a.diag(0) * a.diag(2) -
                    std::norm(a(0, 2)) + a.diag(1) * a.diag(2) - std::norm(a(1, 2));
  const cplx det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                   a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                   a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  // l^3 - tr l^2 + m2 l - det = 0; with l = t + q this is t^3 + p t + r = 0.
  const double q = tr / 3.0;
  const double p = m2 - tr * tr / 3.0;
  const double r = -2.0 * q * q * q + q * m2 - det.real();
  const double amp = 2.0 * std::sqrt(-p / 3.0);
  const double arg = std::clamp(3.0 * r / (p * amp), -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  std::array<double, 3> out;
  for (int k = 0; k < 3; ++k) out[k] = q + amp * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

Eigen::MatrixXcd to_eigen(const HermitianMatrix& a) {
  Eigen::MatrixXcd m(a.dim(), a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m(i, j) = a(i, j);
  return m;
}

}  // namespace

TEST(Matrix, RejectsEmptyShapes) {
  EXPECT_THROW(ComplexMatrix(0, 3), std::invalid_argument);
  EXPECT_THROW(ComplexMatrix(2, 0), std::invalid_argument);
  const ComplexMatrix m(2, 3);
  EXPECT_EQ(m.data().size(), 6u);
}

TEST(Matrix, HermitianConstructionForcesRealDiagonal) {
  ComplexMatrix a{{cplx(1, 0.3), cplx(2, 1)}, {cplx(2, -1), cplx(3, -0.2)}};
  const auto h = HermitianMatrix::symmetrized(a);
  EXPECT_EQ(h(0, 0).imag(), 0.0);
  EXPECT_EQ(h(1, 1).imag(), 0.0);
  EXPECT_EQ(h(0, 1), std::conj(h(1, 0)));
  a(0, 0) = 1.0;
  a(1, 1) = 3.0;
  a(1, 0) = cplx(2, 1);
  EXPECT_THROW(HermitianMatrix::checked(a), std::invalid_argument);
}

TEST(HermitianEvd, IdentityHasUnitEigenvalues) {
  const auto evd = hermitian_evd(HermitianMatrix::identity(3));
  for (double v : evd.values) EXPECT_DOUBLE_EQ(v, 1.0);
  expect_unitary_columns(evd.vectors, 1e-12);
}

TEST(HermitianEvd, DiagonalInputReturnsPermutedBasis) {
  const std::vector<double> d{1.0, 5.0, 2.0};
  const auto evd = hermitian_evd(HermitianMatrix::symmetrized(ComplexMatrix::diagonal(d)));
  EXPECT_EQ(evd.values, (std::vector<double>{5.0, 2.0, 1.0}));
  const std::array<std::size_t, 3> expected_row{1, 2, 0};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      EXPECT_EQ(evd.vectors(i, k), cplx(i == expected_row[k] ? 1.0 : 0.0));
}

TEST(HermitianEvd, RandomEightByEightReconstructs) {
  Rng rng(11);
  const auto a = random_hermitian(8, rng);
  const auto evd = hermitian_evd(a);
  EXPECT_TRUE(std::is_sorted(evd.values.begin(), evd.values.end(), std::greater<>()));
  EXPECT_LE(rel_frob_error(evd.reconstruct().matrix(), a.matrix()), 1e-10);
  expect_unitary_columns(evd.vectors, 1e-10);
}

TEST(HermitianEvd, ThreeByThreeMatchesCharacteristicPolynomial) {
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_hermitian(3, rng);
    const auto evd = hermitian_evd(a);
    const auto oracle = cubic_eigenvalues(a);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(evd.values[k], oracle[k], 1e-9);
  }
}

TEST(HermitianEvd, MatchesEigenSelfAdjointSolver) {
  Rng rng(13);
  for (std::size_t n : {2u, 5u, 8u, 16u}) {
    const auto a = random_hermitian(n, rng);
    const auto evd = hermitian_evd(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_eigen(a));
    ASSERT_EQ(es.info(), Eigen::Success);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(evd.values[k], es.eigenvalues()(static_cast<Eigen::Index>(n - 1 - k)), 1e-10);
    }
  }
}

TEST(HermitianEvd, EigenvectorsHavePositiveRealLeadingComponent) {
  Rng rng(14);
  const auto evd = hermitian_evd(random_hermitian(6, rng));
  for (std::size_t k = 0; k < 6; ++k) {
    std::size_t i = 0;
    while (std::abs(evd.vectors(i, k)) <= 1e-12) ++i;
    EXPECT_GT(evd.vectors(i, k).real(), 0.0);
    EXPECT_EQ(evd.vectors(i, k).imag(), 0.0);
  }
}

TEST(HermitianEvd, RankDeficientAndZeroInputs) {
  Rng rng(15);
  const auto psd = cmmi::testing::random_psd(8, 3, rng);
  const auto evd = hermitian_evd(psd);
  for (std::size_t k = 3; k < 8; ++k) EXPECT_NEAR(evd.values[k], 0.0, 1e-10 * evd.values[0]);
  EXPECT_LE(rel_frob_error(evd.reconstruct().matrix(), psd.matrix()), 1e-10);

  const auto zero = hermitian_evd(HermitianMatrix(4));
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  expect_unitary_columns(zero.vectors, 0.0);
}

TEST(HermitianEvd, SweepCapReportsResidual) {
  Rng rng(16);
  const auto a = random_hermitian(8, rng);
  try {
    (void)hermitian_evd(a, JacobiOptions{1e-24, 0});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(HermitianEvd, ReconstructionProperty) {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 15;
    const auto a = random_hermitian(n, rng, 0.1 + rep);
    const auto evd = hermitian_evd(a);
    EXPECT_LE(rel_frob_error(evd.reconstruct().matrix(), a.matrix()), 1e-10) << "n = " << n;
    expect_unitary_columns(evd.vectors, 1e-10);
  }
}

TEST(OffDiagonalEnergy, Examples) {
  const std::vector<double> d{3.0, -1.0};
  EXPECT_EQ(off_diagonal_energy(HermitianMatrix::symmetrized(ComplexMatrix::diagonal(d))), 0.0);
  const ComplexMatrix a{{0.0, cplx(1, 1)}, {cplx(1, -1), 0.0}};
  EXPECT_DOUBLE_EQ(off_diagonal_energy(HermitianMatrix::checked(a)), 4.0);
}

TEST(OffDiagonalEnergy, PlusDiagonalEqualsFrobenius) {
  Rng rng(18);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_hermitian(7, rng);
    double diag = 0.0;
    for (std::size_t i = 0; i < 7; ++i) diag += std::norm(a(i, i));
    const double total = frobenius_norm_sq(a.matrix());
    EXPECT_NEAR(off_diagonal_energy(a) + diag, total, 1e-12 * total);
  }
}

TEST(GivensFromStats, DiagonalPairNeedsNoRotation) {
  const RealMatrix g{{4.0, 0.0}, {0.0, 0.0}};
  const auto [c, s] = givens_from_stats(g);
  EXPECT_DOUBLE_EQ(c, 1.0);
  EXPECT_EQ(s, cplx(0.0));
}

TEST(GivensFromStats, PureOffDiagonalGivesFortyFiveDegrees) {
  const RealMatrix g{{0.0, 0.0}, {0.0, 9.0}};
  const auto [c, s] = givens_from_stats(g);
  EXPECT_NEAR(c, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(s.real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(s.imag(), 0.0, 1e-15);
}

TEST(GivensFromStats, QuarterTurnWhenLeadingComponentIsMinusOne) {
  const auto [c, s] = givens_from_vector(-1.0, 0.0, 0.0);
  EXPECT_EQ(c, 0.0);
  EXPECT_DOUBLE_EQ(std::abs(s), 1.0);
  EXPECT_THROW(givens_from_stats(RealMatrix(4, 4)), std::invalid_argument);
  EXPECT_THROW(givens_from_vector(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST(GivensFromStats, VectorMapIsInvertedByRotationSpread) {
  // [c^2 - |s|^2, 2c Re s, 2c Im s] reproduces the unit input vector.
  Rng rng(31);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 50; ++rep) {
    double v[3] = {nd(rng), nd(rng), nd(rng)};
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& x : v) x /= len;
    const auto [c, s] = givens_from_vector(v[0], v[1], v[2]);
    EXPECT_NEAR(c * c + std::norm(s), 1.0, 1e-12);
    EXPECT_NEAR(c * c - std::norm(s), v[0], 1e-12);
    EXPECT_NEAR(2 * c * s.real(), v[1], 1e-12);
    EXPECT_NEAR(2 * c * s.imag(), v[2], 1e-12);
  }
}

TEST(GivensFromStats, SingleRealMatrixZeroesPairAsClosedFormJacobi) {
  Rng rng(19);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 50; ++rep) {
    const double a = nd(rng), b = nd(rng), d = nd(rng);
    const ComplexMatrix m{{a, b}, {b, d}};
    const auto h = HermitianMatrix::checked(m);
    const auto st = pair_statistic(h, 0, 1);
    RealMatrix g(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) g(i, j) = st[i] * st[j];
    const auto [c, s] = givens_from_stats(g);
    const auto out = apply_givens(h, GivensRotation{0, 1, c, s});
    EXPECT_NEAR(std::abs(out(0, 1)), 0.0, 1e-12 * (1 + frobenius_norm(m)));

    // Closed-form smallest-angle Jacobi rotation: tan 2t = 2b / (a - d),
    // |t| <= 45 deg, with rotated diagonal a + tan(t) b, d - tan(t) b.
    const double t = 0.5 * std::atan(2.0 * b / (a - d));
    EXPECT_NEAR(c, std::cos(t), 1e-12);
    EXPECT_NEAR(s.real(), std::sin(t), 1e-12);
    EXPECT_NEAR(s.imag(), 0.0, 1e-12);
    const double scale = 1 + std::abs(a) + std::abs(b) + std::abs(d);
    EXPECT_NEAR(out.diag(0), a + std::tan(t) * b, 1e-12 * scale);
    EXPECT_NEAR(out.diag(1), d - std::tan(t) * b, 1e-12 * scale);
  }
}

TEST(GivensFromStats, ComplexPairIsZeroed) {
  Rng rng(20);
  for (int rep = 0; rep < 20; ++rep) {
    const auto h = random_hermitian(4, rng);
    const auto st = pair_statistic(h, 1, 3);
    RealMatrix g(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) g(i, j) = st[i] * st[j];
    const auto [c, s] = givens_from_stats(g);
    EXPECT_NEAR(c * c + std::norm(s), 1.0, 1e-12);
    const auto out = apply_givens(h, GivensRotation{1, 3, c, s});
    EXPECT_NEAR(std::abs(out(1, 3)), 0.0, 1e-12 * frobenius_norm(h.matrix()));
  }
}

TEST(ApplyGivens, IdentityRotationIsNoOp) {
  Rng rng(21);
  const auto a = random_hermitian(5, rng);
  const auto out = apply_givens(a, GivensRotation{1, 4, 1.0, 0.0});
  EXPECT_EQ(out.matrix(), a.matrix());
}

TEST(ApplyGivens, FortyFiveDegreesOnAllOnes) {
  const ComplexMatrix m{{1.0, 1.0}, {1.0, 1.0}};
  const double h = std::sqrt(0.5);
  const auto out = apply_givens(HermitianMatrix::checked(m), GivensRotation{0, 1, h, h});
  EXPECT_LE(max_abs_diff(out.matrix(), ComplexMatrix{{2.0, 0.0}, {0.0, 0.0}}), 1e-15);
}

TEST(ApplyGivens, MatchesExplicitProductAndPreservesNorm) {
  Rng rng(22);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  for (int rep = 0; rep < 30; ++rep) {
    const auto a = random_hermitian(6, rng);
    const double theta = ang(rng), phi = ang(rng);
    const GivensRotation rot{static_cast<std::size_t>(rep % 3), 3 + static_cast<std::size_t>(rep % 3),
                             std::cos(theta) >= 0 ? std::cos(theta) : -std::cos(theta),
                             std::polar(std::sin(theta), phi)};
    const ComplexMatrix n = rot.full(6);
    expect_unitary_columns(n, 1e-12);
    const auto out = apply_givens(a, rot);
    EXPECT_LE(max_abs_diff(out.matrix(), n * a.matrix() * n.adjoint()), 1e-12);
    EXPECT_NEAR(frobenius_norm(out.matrix()), frobenius_norm(a.matrix()),
                1e-12 * frobenius_norm(a.matrix()));
  }
}

TEST(ApplyGivens, ConservesPairEnergy) {
  // f restricted to the (i, j) block plus squared diagonals is invariant.
  Rng rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    const auto r = random_hermitian(5, rng);
    const double c = 0.3 + 0.02 * rep;
    const GivensRotation rot{0, 2, c, std::polar(std::sqrt(1 - c * c), 0.1 * rep)};
    const auto r2 = apply_givens(r, rot);
    auto block = [](const HermitianMatrix& m) {
      return 2.0 * std::norm(m(0, 2)) + m.diag(0) * m.diag(0) + m.diag(2) * m.diag(2);
    };
    EXPECT_NEAR(block(r2), block(r), 1e-10 * block(r));
  }
}

TEST(ApplyGivens, RejectsBadIndices) {
  HermitianMatrix a(3);
  EXPECT_THROW(apply_givens(a, GivensRotation{0, 3, 1.0, 0.0}), std::out_of_range);
  EXPECT_THROW(apply_givens(a, GivensRotation{2, 1, 1.0, 0.0}), std::out_of_range);
}

TEST(NullSpaceProjector, SingleRowExample) {
  const ComplexMatrix a{{1.0, 0.0, 0.0}};
  const auto ns = null_space_projector(a);
  const std::vector<double> d{0.0, 1.0, 1.0};
  EXPECT_LE(max_abs_diff(ns.projector, ComplexMatrix::diagonal(d)), 1e-14);
  EXPECT_EQ(ns.row_rank, 1u);
  EXPECT_EQ(ns.dimension(), 2u);
}

TEST(NullSpaceProjector, InvertibleGivesZero) {
  Rng rng(24);
  const auto a = sample_complex_gaussian_matrix(4, 4, 1.0, rng);
  const auto ns = null_space_projector(a);
  EXPECT_EQ(ns.dimension(), 0u);
  EXPECT_EQ(frobenius_norm(ns.projector), 0.0);
}

TEST(NullSpaceProjector, RandomWideMatrixMatchesGramSchmidt) {
  Rng rng(25);
  const auto a = sample_complex_gaussian_matrix(2, 5, 1.0, rng);
  const auto ns = null_space_projector(a);
  EXPECT_EQ(ns.dimension(), 3u);
  EXPECT_LE(frobenius_norm(a * ns.projector), 1e-10);
  EXPECT_LE(max_abs_diff(ns.projector * ns.projector, ns.projector), 1e-10);
  EXPECT_LE(max_abs_diff(ns.projector, ns.projector.adjoint()), 1e-14);

  // Oracle: Gram-Schmidt on [rows of A^H, e_1..e_5]; the vectors surviving
  // after the row space is removed span the null space.
  std::vector<CVector> basis;
  auto try_add = [&](CVector v) {
    for (const auto& b : basis) {
      const cplx p = inner(b, v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
    }
    const double nv = norm(v);
    if (nv < 1e-8) return false;
    for (auto& x : v) x /= nv;
    basis.push_back(std::move(v));
    return true;
  };
  const ComplexMatrix ah = a.adjoint();
  for (std::size_t k = 0; k < 2; ++k) try_add(ah.col(k));
  std::vector<CVector> null_basis;
  for (std::size_t k = 0; k < 5 && null_basis.size() < 3; ++k) {
    CVector e(5);
    e[k] = 1.0;
    if (try_add(e)) null_basis.push_back(basis.back());
  }
  ASSERT_EQ(null_basis.size(), 3u);
  ComplexMatrix oracle(5, 5);
  for (const auto& v : null_basis) oracle += outer(v);
  EXPECT_LE(max_abs_diff(ns.projector, oracle), 1e-10);
}

TEST(NullSpaceProjector, RankDeficientReportsEffectiveRank) {
  Rng rng(26);
  const auto b = sample_complex_gaussian_matrix(3, 1, 1.0, rng);
  const auto c = sample_complex_gaussian_matrix(1, 6, 1.0, rng);
  const ComplexMatrix a = b * c;  // 3 x 6, rank 1
  const auto ns = null_space_projector(a);
  EXPECT_EQ(ns.row_rank, 1u);
  EXPECT_EQ(ns.dimension(), 5u);
  EXPECT_LE(frobenius_norm(a * ns.projector), 1e-10 * frobenius_norm(a));
}

TEST(SampleComplexGaussian, ZeroVarianceAndInvalid) {
  Rng rng(27);
  for (const auto& x : sample_complex_gaussian(10, 0.0, rng)) EXPECT_EQ(x, cplx(0.0));
  EXPECT_THROW(sample_complex_gaussian(3, -1.0, rng), std::invalid_argument);
  EXPECT_THROW(sample_complex_gaussian(3, std::nan(""), rng), std::invalid_argument);
}

TEST(SampleComplexGaussian, LawOfLargeNumbers) {
  Rng rng(28);
  const auto v = sample_complex_gaussian(1'000'000, 2.0, rng);
  double power = 0.0, re2 = 0.0, im2 = 0.0, reim = 0.0;
  for (const auto& x : v) {
    power += std::norm(x);
    re2 += x.real() * x.real();
    im2 += x.imag() * x.imag();
    reim += x.real() * x.imag();
  }
  const double n = static_cast<double>(v.size());
  EXPECT_GE(power / n, 1.99);
  EXPECT_LE(power / n, 2.01);
  EXPECT_NEAR(re2 / n, 1.0, 0.01);
  EXPECT_NEAR(im2 / n, 1.0, 0.01);
  EXPECT_NEAR(reim / n, 0.0, 0.01);  // circular symmetry
}

TEST(SampleComplexGaussian, SeedDeterminism) {
  Rng a(29), b(29);
  EXPECT_EQ(sample_complex_gaussian(64, 1.5, a), sample_complex_gaussian(64, 1.5, b));
}

TEST(RandomSemiUnitary, OrthonormalColumns) {
  Rng rng(30);
  const auto q = random_semi_unitary(6, 3, rng);
  expect_unitary_columns(q, 1e-12);
  EXPECT_THROW(random_semi_unitary(2, 3, rng), std::invalid_argument);
  EXPECT_THROW(orthonormalize_columns(ComplexMatrix{{1.0, 2.0}, {1.0, 2.0}}), std::runtime_error);
}
