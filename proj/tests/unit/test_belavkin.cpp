#include <gtest/gtest.h>

#include <numbers>

#include "test_support.hpp"

using namespace medli;
using medli::testing::diag2;

namespace {

/// Projector onto eigenvectors with eigenvalue above cutoff * largest.
CMatrix range_projector(const CMatrix& m, double cutoff = 1e-8) {
  const Spectrum s = eigh(m);
  const double top = s.values.cwiseAbs().maxCoeff();
  CMatrix p = CMatrix::Zero(m.rows(), m.cols());
  for (Index k = 0; k < s.values.size(); ++k) {
    if (s.values(k) > cutoff * top) p += s.vectors.col(k) * s.vectors.col(k).adjoint();
  }
  return p;
}

/// Optimal measurement for a real qubit pair from the one-dimensional oracle.
ProjectiveMeasurement angle_optimum(const Ensemble& e) {
  double phi = 0.0;
  (void)medli::testing::angle_oracle(e, &phi);
  return medli::testing::real_basis(phi);
}

}  // namespace

TEST(DualOperator, OrthogonalPair) {
  const DualCertificate c = dual_operator(medli::testing::orthogonal_pair(), medli::testing::support_projectors());
  EXPECT_LT(frobenius(c.z.matrix() - 0.5 * CMatrix::Identity(2, 2)), 1e-15);
  EXPECT_NEAR(c.dual_value, 1.0, 1e-15);
  EXPECT_TRUE(c.valid({}));
}

TEST(DualOperator, ArityGuard) {
  const ProjectiveMeasurement single = validate_projective({CMatrix::Identity(2, 2)});
  try {
    (void)dual_operator(medli::testing::orthogonal_pair(), single);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(DualOperator, ThetaPairAtOracleOptimum) {
  const Ensemble e = medli::testing::pure_pair(std::numbers::pi / 6);
  const DualCertificate c = dual_operator(e, angle_optimum(e));
  EXPECT_NEAR(c.dual_value, 0.75, 1e-6);
  EXPECT_GE(c.min_slack(), -1e-9);
}

TEST(ForwardMap, OrthogonalPairIsFixed) {
  const Ensemble p = medli::testing::orthogonal_pair();
  const ProjectiveMeasurement m = medli::testing::support_projectors();
  const Ensemble q = forward_map(p, m, dual_operator(p, m));
  EXPECT_LT(max_weighted_deviation(p, q), 1e-15);
}

TEST(ForwardMap, FixedPointsReturnTheirInput) {
  const std::vector<RankSignature> sigs = {{1, 1}, {2, 1}, {1, 1, 1}, {2, 2}, {2, 1, 2}};
  for (const auto& sig : sigs) {
    Index d = 0;
    for (int r : sig) d += r;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Ensemble p = generate_fixed_point(d, sig, seed);
      const ProjectiveMeasurement m = pgm(p);
      const Ensemble q = forward_map(p, m, dual_operator(p, m));
      EXPECT_LT(max_weighted_deviation(p, q), 1e-8) << signature_string(sig) << " seed " << seed;
    }
  }
}

TEST(ForwardMap, ThetaQuarterPiImage) {
  const Ensemble p = medli::testing::pure_pair(std::numbers::pi / 4);
  const ProjectiveMeasurement m = angle_optimum(p);
  const DualCertificate c = dual_operator(p, m);
  const Ensemble q = forward_map(p, m, c);
  // symmetric under the swap that exchanges the two states
  EXPECT_NEAR(q.priors()[0], 0.5, 1e-9);
  EXPECT_NEAR(q.priors()[1], 0.5, 1e-9);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GE(min_eigenvalue(q.states()[i]), -1e-12);
    EXPECT_NEAR(q.states()[i].trace(), 1.0, 1e-12);
    const CMatrix rq = range_projector(q.weighted(i));
    const CMatrix rp = range_projector(p.weighted(i));
    // Range(q_i sigma_i) inside Range(p_i rho_i)
    EXPECT_LT(frobenius(rp * rq - rq), 1e-6);
  }
}

TEST(ForwardMap, RefusesNonOptimalPair) {
  const Ensemble p = random_ensemble(3, {1, 1, 1}, 2);
  const ProjectiveMeasurement m = medli::testing::random_projective(3, {1, 1, 1}, 5);
  try {
    (void)forward_map(p, m, dual_operator(p, m));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotOptimalPair);
  }
}

TEST(ForwardMap, OptimalMeasurementIsPgmOfImage) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Ensemble p = random_ensemble(4, {2, 1, 1}, seed);
    const SolveResult r = solve(p);
    ASSERT_TRUE(r.certified);
    const Ensemble q = forward_map(p, r.measurement, r.certificate);
    EXPECT_LT(medli::testing::max_projector_deviation(pgm(q), r.measurement), 1e-7);
  }
}

TEST(InverseMap, OrthogonalPair) {
  const Ensemble q = medli::testing::orthogonal_pair();
  const InverseMapResult r = inverse_map(q);
  EXPECT_LT(max_weighted_deviation(r.ensemble, q), 1e-14);
  EXPECT_LT(frobenius(r.measurement[0].matrix() - diag2(1, 0)), 1e-14);
  EXPECT_NEAR(r.certificate.dual_value, 1.0, 1e-14);
}

TEST(InverseMap, ThetaQuarterPiRangesAgree) {
  const Ensemble q = medli::testing::pure_pair(std::numbers::pi / 4);
  const InverseMapResult r = inverse_map(q);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LT(frobenius(range_projector(q.weighted(i)) - range_projector(r.ensemble.weighted(i))), 1e-8);
  }
}

TEST(InverseMap, SelfCertifiesOnRandomInput) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Ensemble q = random_ensemble(5, {2, 2, 1}, seed);
    const InverseMapResult r = inverse_map(q);
    for (double s : r.certificate.slack_min_eigs) EXPECT_GE(s, -1e-9);
    EXPECT_LT(stationarity_residual(r.ensemble, r.measurement), 1e-8);
    EXPECT_LT(r.certificate.hermiticity_residual, 1e-8);
    EXPECT_NEAR(success_probability(r.ensemble, r.measurement), r.certificate.dual_value, 1e-10);
  }
}

TEST(InverseMap, ArtifactsAreConsistent) {
  const Ensemble q = random_ensemble(4, {1, 2, 1}, 6);
  const InverseMapResult r = inverse_map(q);
  ASSERT_EQ(r.artifacts.x_ops.size(), 3u);
  double total = 0.0;
  for (const auto& x : r.artifacts.x_ops) total += x.trace();
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LT(max_abs_entry(r.artifacts.x_ops[i].matrix() / total - r.ensemble.weighted(i)), 1e-14);
    EXPECT_EQ(r.artifacts.deltas[i].dim(), 4 - q.signature()[i]);
    EXPECT_GT(min_eigenvalue(r.artifacts.deltas[i]), 0.0);
  }
}

TEST(Roundtrip, OrthogonalPair) {
  const RoundtripReport rt = roundtrip_check(medli::testing::orthogonal_pair(), [](const Ensemble& e) { return solve(e); });
  EXPECT_LT(rt.inverse_after_forward, 1e-10);
  EXPECT_LT(rt.forward_after_inverse, 1e-10);
}

TEST(Roundtrip, PureTripleWithBruteForceSolver) {
  const Ensemble p = random_ensemble(3, {1, 1, 1}, 12);
  const RoundtripReport rt = roundtrip_check(p, [](const Ensemble& e) { return solve_oracle(e); });
  EXPECT_LT(rt.inverse_after_forward, 1e-7);
  EXPECT_LT(rt.forward_after_inverse, 1e-7);
}

TEST(Roundtrip, MixedQuadrupleWithSearchSolver) {
  const Ensemble p = random_ensemble(4, {2, 1, 1}, 12);
  const RoundtripReport rt = roundtrip_check(p, [](const Ensemble& e) { return solve(e); });
  EXPECT_LT(rt.inverse_after_forward, 1e-7);
  EXPECT_LT(rt.forward_after_inverse, 1e-7);
}

TEST(Roundtrip, UncertifiedSolverIsReported) {
  auto never = [](const Ensemble& e) {
    SolveResult r = solve(e);
    r.certified = false;
    return r;
  };
  try {
    (void)roundtrip_check(medli::testing::orthogonal_pair(), never);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SolverFailed);
  }
}
