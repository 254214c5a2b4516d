#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace medli;
using medli::testing::diag2;

namespace {

CMatrix random_pd(Index d, std::uint64_t seed) {
  Rng rng(seed);
  const CMatrix g = ginibre(d, d, rng);
  return g * g.adjoint() + 0.1 * CMatrix::Identity(d, d);
}

HermitianMatrix h(const CMatrix& m) { return HermitianMatrix(m); }

}  // namespace

TEST(HermitianMatrix, RejectsNonHermitianInput) {
  CMatrix m = diag2(1, 1);
  m(0, 1) = 1e-6;
  try {
    HermitianMatrix bad(m);
    FAIL() << "accepted a non-Hermitian matrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
  }
}

TEST(HermitianMatrix, RejectsNonSquareInput) {
  try {
    HermitianMatrix bad(CMatrix::Zero(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(HermitianMatrix, SymmetrizedRemovesRoundOff) {
  CMatrix m = diag2(1, 2);
  m(0, 1) = Complex(0.3, 1e-13);
  m(1, 0) = Complex(0.3, 0.0);
  const HermitianMatrix s = HermitianMatrix::symmetrized(m);
  EXPECT_EQ(frobenius(s.matrix() - s.matrix().adjoint()), 0.0);
}

TEST(PsdSqrt, IdentityAndDiagonal) {
  EXPECT_LT(frobenius(psd_sqrt(HermitianMatrix::identity(3)).matrix() - CMatrix::Identity(3, 3)), 1e-14);
  EXPECT_LT(frobenius(psd_sqrt(h(diag2(4, 1))).matrix() - diag2(2, 1)), 1e-14);
}

TEST(PsdSqrt, SquaresBackToInput) {
  CMatrix m(2, 2);
  m << 2, 1, 1, 2;
  const CMatrix s = psd_sqrt(h(m)).matrix();
  EXPECT_LT(frobenius(s * s - m), 1e-10);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CMatrix p = random_pd(5, seed);
    const CMatrix r = psd_sqrt(h(p)).matrix();
    EXPECT_LT(frobenius(r * r - p), 1e-10 * frobenius(p));
    EXPECT_GT(min_eigenvalue(r), 0.0);
  }
}

TEST(PsdSqrt, NegativeEigenvalueIsNotPsd) {
  try {
    (void)psd_sqrt(h(diag2(1, -1e-3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPSD);
  }
}

TEST(PsdInvSqrt, DiagonalAndReconstruction) {
  EXPECT_LT(frobenius(psd_inv_sqrt(HermitianMatrix::identity(2)).matrix() - CMatrix::Identity(2, 2)), 1e-14);
  EXPECT_LT(frobenius(psd_inv_sqrt(h(diag2(4, 1))).matrix() - diag2(0.5, 1)), 1e-14);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CMatrix m = random_pd(4, 100 + seed);
    const CMatrix t = psd_inv_sqrt(h(m)).matrix();
    EXPECT_LT(frobenius(t * m * t - CMatrix::Identity(4, 4)), 1e-9);
  }
}

TEST(PsdInvSqrt, SingularIsNotPd) {
  try {
    (void)psd_inv_sqrt(h(diag2(1, 0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPD);
  }
}

TEST(RankEps, Examples) {
  EXPECT_EQ(rank_eps(h(CMatrix::Zero(3, 3))), 0);
  CMatrix p = CMatrix::Zero(4, 4);
  p(2, 2) = 1;
  EXPECT_EQ(rank_eps(h(p)), 1);
  Tolerances tol;
  tol.tol_rank = 1e-10;
  EXPECT_EQ(rank_eps(h(diag2(1, 1e-14)), tol), 1);
  EXPECT_EQ(rank_eps(h(diag2(1, 1e-6)), tol), 2);
}

TEST(Definiteness, Thresholds) {
  EXPECT_TRUE(is_pd(HermitianMatrix::identity(2)));
  EXPECT_FALSE(is_pd(h(diag2(1, 0))));
  EXPECT_TRUE(is_psd(h(diag2(1, 0))));
  EXPECT_FALSE(is_psd(h(diag2(1, -1e-6))));
  EXPECT_TRUE(is_psd(h(diag2(1, -1e-12))));
}

TEST(BlockDecompose, AlreadyDiagonal) {
  const BlockDecomposition bd = block_decompose(h(diag2(5, 7)), h(diag2(1, 0)));
  ASSERT_EQ(bd.range_dim(), 1);
  EXPECT_NEAR(bd.a_block(0, 0).real(), 5.0, 1e-14);
  EXPECT_NEAR(std::abs(bd.b_block(0, 0)), 0.0, 1e-14);
  EXPECT_NEAR(bd.c_block(0, 0).real(), 7.0, 1e-14);
}

TEST(BlockDecompose, RotatedBasis) {
  CMatrix m(2, 2);
  m << 2, 1, 1, 2;
  CVector v(2);
  v << 1, 1;
  v /= std::sqrt(2.0);
  const BlockDecomposition bd = block_decompose(h(m), h(medli::testing::outer(v)));
  // (1,1)/sqrt2 is the eigenvector for 3, its complement for 1
  EXPECT_NEAR(bd.a_block(0, 0).real(), 3.0, 1e-12);
  EXPECT_NEAR(bd.c_block(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(bd.b_block(0, 0)), 0.0, 1e-12);
  EXPECT_LT(frobenius(bd.reassemble() - m), 1e-12);
}

TEST(BlockDecompose, CommutingMatrixHasNoCoupling) {
  Rng rng(3);
  const CMatrix u = haar_unitary(4, rng);
  RVector ev(4);
  ev << 1, 2, 3, 4;
  const CMatrix m = u * ev.cast<Complex>().asDiagonal() * u.adjoint();
  const CMatrix p = u.leftCols(2) * u.leftCols(2).adjoint();
  const BlockDecomposition bd = block_decompose(h(hermitian_part(m)), h(hermitian_part(p)));
  EXPECT_LT(bd.b_block.norm(), 1e-12);
}

TEST(BlockDecompose, ReassemblesRandomInput) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CMatrix m = random_pd(5, 200 + seed);
    Rng rng(seed);
    const CMatrix u = haar_unitary(5, rng);
    const CMatrix p = hermitian_part(u.leftCols(2) * u.leftCols(2).adjoint());
    const BlockDecomposition bd = block_decompose(h(hermitian_part(m)), h(p));
    EXPECT_EQ(bd.range_dim(), 2);
    EXPECT_LT(frobenius(bd.reassemble() - m), 1e-10);
  }
}

TEST(BlockDecompose, RejectsNonProjector) {
  try {
    (void)block_decompose(HermitianMatrix::identity(2), h(diag2(1, 0.5)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotProjector);
  }
}

TEST(SchurComplement, ScalarArithmetic) {
  CMatrix m(2, 2);
  m << 2, 1, 1, 1;
  const HermitianMatrix delta = schur_complement(block_decompose(h(m), h(diag2(1, 0))));
  EXPECT_NEAR(delta.matrix()(0, 0).real(), 0.5, 1e-14);
}

TEST(SchurComplement, UncoupledGivesC) {
  const HermitianMatrix delta = schur_complement(block_decompose(h(diag2(5, 7)), h(diag2(1, 0))));
  EXPECT_NEAR(delta.matrix()(0, 0).real(), 7.0, 1e-14);
}

TEST(SchurComplement, PositiveForPdSource) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CMatrix m = random_pd(5, 300 + seed);
    Rng rng(seed + 1);
    const CMatrix u = haar_unitary(5, rng);
    const CMatrix p = hermitian_part(u.leftCols(3) * u.leftCols(3).adjoint());
    const HermitianMatrix delta = schur_complement(block_decompose(h(hermitian_part(m)), h(p)));
    EXPECT_EQ(delta.dim(), 2);
    EXPECT_GT(min_eigenvalue(delta), 0.0);
  }
}

TEST(SchurComplement, SingularRangeBlockIsNotPd) {
  CMatrix m(2, 2);
  m << 0, 1, 1, 1;
  try {
    (void)schur_complement(block_decompose(h(m), h(diag2(1, 0))));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPD);
  }
}

TEST(Unitaries, ExpOfSkewHermitianMatchesGeneralExponential) {
  Rng rng(11);
  const CMatrix g = ginibre(4, 4, rng);
  const CMatrix x = 0.5 * (g - g.adjoint());
  const CMatrix u = exp_skew_hermitian(x);
  EXPECT_LT(frobenius(u.adjoint() * u - CMatrix::Identity(4, 4)), 1e-13);
  // second-order Taylor check on a small generator
  const CMatrix small = 1e-4 * x;
  const CMatrix taylor = CMatrix::Identity(4, 4) + small + 0.5 * small * small;
  EXPECT_LT(frobenius(exp_skew_hermitian(small) - taylor), 1e-11);
}

TEST(Unitaries, LowdinRestoresOrthonormality) {
  Rng rng(5);
  CMatrix u = haar_unitary(5, rng);
  u += 1e-6 * ginibre(5, 5, rng);
  const CMatrix w = lowdin_orthonormalize(u);
  EXPECT_LT(frobenius(w.adjoint() * w - CMatrix::Identity(5, 5)), 1e-13);
  EXPECT_LT(frobenius(w - u), 1e-5);
}

TEST(Tolerances, Validity) {
  Tolerances t;
  EXPECT_TRUE(t.valid());
  t.tol_psd = -1.0;
  EXPECT_FALSE(t.valid());
  t.tol_psd = std::nan("");
  EXPECT_FALSE(t.valid());
}
