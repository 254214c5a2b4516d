#ifndef MEDLI_BELAVKIN_HPP
#define MEDLI_BELAVKIN_HPP

// The map R sending an LI ensemble P with optimal dual pair (Pi, Z) to
// Q = {q_i, sigma_i}, q_i sigma_i = Z Pi_i Z / Tr Z^2, and its explicit inverse
// built from Schur complements of sigma^{1/2}.

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "medli/pgm.hpp"

namespace medli {

/// Candidate dual operator Z with its trace and the smallest eigenvalue of
/// each slack Z - p_i rho_i.
struct DualCertificate {
  HermitianMatrix z;
  double dual_value = 0.0;
  std::vector<double> slack_min_eigs;
  /// ||K - K^H||_F for K = sum_i p_i rho_i Pi_i; nonzero means the
  /// measurement is not stationary. Zero when Z was built directly.
  double hermiticity_residual = 0.0;

  [[nodiscard]] double min_slack() const {
    return slack_min_eigs.empty() ? 0.0 : *std::min_element(slack_min_eigs.begin(), slack_min_eigs.end());
  }

  [[nodiscard]] bool valid(const Tolerances& tol = {}) const { return min_slack() >= -tol.tol_psd; }
};

/// By-products of the inverse construction: X_i, the Schur complements Delta_i
/// and sigma^{1/2}.
struct MapArtifacts {
  std::vector<HermitianMatrix> x_ops;
  std::vector<HermitianMatrix> deltas;
  HermitianMatrix sigma_sqrt;
};

namespace detail {

inline void check_arity(const Ensemble& p, std::span<const HermitianMatrix> elements) {
  if (elements.size() != p.size() || p.size() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "measurement has " + std::to_string(elements.size()) +
                                                  " elements for " + std::to_string(p.size()) + " states");
  }
  for (const auto& e : elements) {
    if (e.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "measurement dimension differs");
  }
}

/// K = sum_i p_i rho_i E_i
inline CMatrix weighted_product_sum(const Ensemble& p, std::span<const HermitianMatrix> elements) {
  CMatrix k = CMatrix::Zero(p.dim(), p.dim());
  for (std::size_t i = 0; i < p.size(); ++i) k += p.weighted(i) * elements[i].matrix();
  return k;
}

inline std::vector<double> slack_spectrum(const Ensemble& p, const CMatrix& z) {
  std::vector<double> out;
  out.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back(min_eigenvalue(CMatrix(z - p.weighted(i))));
  return out;
}

}  // namespace detail

/// max over i, j of ||E_j (p_j rho_j - p_i rho_i) E_i||_F
inline double stationarity_residual(const Ensemble& p, std::span<const HermitianMatrix> elements) {
  detail::check_arity(p, elements);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (i == j) continue;
      const CMatrix r = elements[j].matrix() * (p.weighted(j) - p.weighted(i)) * elements[i].matrix();
      worst = std::max(worst, frobenius(r));
    }
  }
  return worst;
}

inline double stationarity_residual(const Ensemble& p, const ProjectiveMeasurement& m) {
  return stationarity_residual(p, std::span<const HermitianMatrix>(m.projectors()));
}

/// Z = (K + K^H)/2 with K = sum_i p_i rho_i E_i. This is the true dual
/// operator only when the measurement is stationary; callers gate on the
/// slacks and the hermiticity diagnostic.
inline DualCertificate dual_operator(const Ensemble& p, std::span<const HermitianMatrix> elements) {
  detail::check_arity(p, elements);
  const CMatrix k = detail::weighted_product_sum(p, elements);
  DualCertificate c;
  c.z = HermitianMatrix::symmetrized(k);
  c.dual_value = c.z.trace();
  c.slack_min_eigs = detail::slack_spectrum(p, c.z.matrix());
  c.hermiticity_residual = frobenius(k - k.adjoint());
  return c;
}

inline DualCertificate dual_operator(const Ensemble& p, const ProjectiveMeasurement& m) {
  return dual_operator(p, std::span<const HermitianMatrix>(m.projectors()));
}

/// R: requires (m, c) to be an optimal dual pair for p and refuses to run otherwise.
inline Ensemble forward_map(const Ensemble& p, const ProjectiveMeasurement& m, const DualCertificate& c,
                            const Tolerances& tol = {}) {
  const std::span<const HermitianMatrix> pis(m.projectors());
  detail::check_arity(p, pis);
  if (c.z.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "certificate dimension differs");
  const double stat = stationarity_residual(p, pis);
  if (stat > tol.tol_recon) {
    throw Error(ErrorCode::NotOptimalPair, "stationarity residual " + std::to_string(stat));
  }
  const std::vector<double> slacks = detail::slack_spectrum(p, c.z.matrix());
  const double worst = *std::min_element(slacks.begin(), slacks.end());
  if (worst < -tol.tol_psd) {
    throw Error(ErrorCode::NotOptimalPair, "slack eigenvalue " + std::to_string(worst));
  }
  const CMatrix& z = c.z.matrix();
  const CMatrix z2 = z * z;
  const double tr_z2 = z2.trace().real();
  std::vector<CMatrix> image;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double mass = (z2 * pis[i].matrix()).trace().real();
    if (mass < tol.tol_psd) {
      throw Error(ErrorCode::NotOptimalPair, "Tr(Z^2 Pi_" + std::to_string(i) + ") vanishes");
    }
    image.push_back(hermitian_part(z * pis[i].matrix() * z) / tr_z2);
  }
  return Ensemble::from_weighted(image, tol);
}

struct InverseMapResult {
  Ensemble ensemble;
  ProjectiveMeasurement measurement;
  DualCertificate certificate;
  MapArtifacts artifacts;
};

/// R': the ensemble P whose optimal measurement is pgm(q), together with that
/// measurement, its dual certificate Z = sigma^{1/2} / sum_j Tr X_j, and the
/// intermediate blocks.
inline InverseMapResult inverse_map(const Ensemble& q, const Tolerances& tol = {}) {
  InverseMapResult out;
  out.measurement = pgm(q, tol);
  const HermitianMatrix sigma_sqrt = psd_sqrt(average_state(q), tol);
  out.artifacts.sigma_sqrt = sigma_sqrt;

  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const BlockDecomposition bd = block_decompose(sigma_sqrt, out.measurement[i], tol);
    HermitianMatrix delta = schur_complement(bd, tol);
    // sigma^{1/2} - (0 (+) Delta_i) keeps A, B and puts B^H A^{-1} B in the corner
    CMatrix x_adapted = bd.assembled();
    const Index r = bd.range_dim();
    const Index rest = x_adapted.rows() - r;
    if (rest > 0) x_adapted.bottomRightCorner(rest, rest) -= delta.matrix();
    HermitianMatrix x = HermitianMatrix::symmetrized(bd.basis * x_adapted * bd.basis.adjoint());
    total += x.trace();
    out.artifacts.x_ops.push_back(std::move(x));
    out.artifacts.deltas.push_back(std::move(delta));
  }

  std::vector<CMatrix> weighted;
  for (const auto& x : out.artifacts.x_ops) weighted.push_back(x.matrix() / total);
  out.ensemble = Ensemble::from_weighted(weighted, tol);

  DualCertificate& c = out.certificate;
  c.z = HermitianMatrix::symmetrized(sigma_sqrt.matrix() / total);
  c.dual_value = c.z.trace();
  c.slack_min_eigs = detail::slack_spectrum(out.ensemble, c.z.matrix());
  const CMatrix k =
      detail::weighted_product_sum(out.ensemble, std::span<const HermitianMatrix>(out.measurement.projectors()));
  c.hermiticity_residual = frobenius(k - k.adjoint());
  return out;
}

/// max over i and entries of |p_i rho_i - p'_i rho'_i|
inline double max_weighted_deviation(const Ensemble& a, const Ensemble& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "ensembles differ in shape");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, max_abs_entry(a.weighted(i) - b.weighted(i)));
  }
  return worst;
}

struct RoundtripReport {
  double inverse_after_forward = 0.0;  ///< deviation of R'(R(P)) from P
  double forward_after_inverse = 0.0;  ///< deviation of R(R'(P)) from P
};

/// Composes R and R' in both orders starting from p. The solver supplies the
/// certified optimum that R needs; it must return an object with
/// `certified`, `measurement` and `certificate` members.
template <typename Solver>
RoundtripReport roundtrip_check(const Ensemble& p, Solver&& solver, const Tolerances& tol = {}) {
  auto apply_r = [&](const Ensemble& e) {
    const auto result = solver(e);
    if (!result.certified) throw Error(ErrorCode::SolverFailed, "no certified optimum found");
    return forward_map(e, result.measurement, result.certificate, tol);
  };
  RoundtripReport report;
  const Ensemble q = apply_r(p);
  report.inverse_after_forward = max_weighted_deviation(inverse_map(q, tol).ensemble, p);
  const Ensemble pre = inverse_map(p, tol).ensemble;
  report.forward_after_inverse = max_weighted_deviation(apply_r(pre), p);
  return report;
}

}  // namespace medli

#endif  // MEDLI_BELAVKIN_HPP
