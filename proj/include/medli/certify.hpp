#ifndef MEDLI_CERTIFY_HPP
#define MEDLI_CERTIFY_HPP

// Optimality certificates for minimum-error discrimination.
//
// certify_full checks the general conditions: the pairwise stationarity
// E_j (p_j rho_j - p_i rho_i) E_i = 0 and Z >= p_i rho_i for every i.
// certify_simplified is the shortcut valid for LI ensembles with a
// rank-matched projective candidate: sum_i p_i rho_i Pi_i Hermitian and
// positive definite. fixpoint_check tests sum_i Pi_i rho^{1/2} Pi_i = c Id with
// Pi the PGM of the ensemble itself.

#include <string_view>
#include <vector>

#include "medli/belavkin.hpp"

namespace medli {

enum class Verdict { Optimal, NotOptimal, Inconclusive };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Optimal: return "Optimal";
    case Verdict::NotOptimal: return "NotOptimal";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

/// Residuals beyond tolerance but within this factor of it give an
/// Inconclusive verdict instead of NotOptimal.
inline constexpr double kInconclusiveBand = 10.0;

struct CertificationReport {
  double stationarity_residual = 0.0;
  double min_slack_eig = 0.0;
  double positivity_min_eig = 0.0;
  double hermiticity_residual = 0.0;
  Verdict verdict = Verdict::NotOptimal;
  double dual_value = 0.0;
};

namespace detail {

inline CertificationReport measure(const Ensemble& p, std::span<const HermitianMatrix> elements) {
  const DualCertificate c = dual_operator(p, elements);
  CertificationReport rep;
  rep.stationarity_residual = stationarity_residual(p, elements);
  rep.min_slack_eig = c.min_slack();
  rep.positivity_min_eig = min_eigenvalue(c.z);
  rep.hermiticity_residual = c.hermiticity_residual;
  rep.dual_value = c.dual_value;
  return rep;
}

/// Optimal within tol, Inconclusive within the band, NotOptimal beyond it.
inline Verdict banded(double residual, double tol) {
  if (residual <= tol) return Verdict::Optimal;
  if (residual <= kInconclusiveBand * tol) return Verdict::Inconclusive;
  return Verdict::NotOptimal;
}

}  // namespace detail

inline CertificationReport certify_full(const Ensemble& p, const GeneralPOVM& povm, const Tolerances& tol = {}) {
  CertificationReport rep = detail::measure(p, std::span<const HermitianMatrix>(povm.elements()));
  if (rep.min_slack_eig < -tol.tol_psd) {
    rep.verdict = Verdict::NotOptimal;
  } else {
    rep.verdict = detail::banded(rep.stationarity_residual, tol.tol_recon);
  }
  return rep;
}

inline CertificationReport certify_full(const Ensemble& p, const ProjectiveMeasurement& m,
                                        const Tolerances& tol = {}) {
  return certify_full(p, GeneralPOVM::from(m), tol);
}

/// Hermiticity plus strict positivity of sum_i p_i rho_i Pi_i. The
/// stationarity and slack fields are filled in for reporting only.
inline CertificationReport certify_simplified(const Ensemble& p, const ProjectiveMeasurement& m,
                                              const Tolerances& tol = {}) {
  if (m.size() != p.size() || m.dim() != p.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measurement does not match the ensemble");
  }
  for (const auto& pi : m.projectors()) {
    if (!is_projector(pi.matrix(), tol)) throw Error(ErrorCode::NotProjective, "element is not a projector");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (rank_eps(m[i], tol) != p.signature()[i]) {
      throw Error(ErrorCode::RankSignatureMismatch,
                  "projector " + std::to_string(i) + " rank differs from state rank " +
                      std::to_string(p.signature()[i]));
    }
  }
  CertificationReport rep = detail::measure(p, std::span<const HermitianMatrix>(m.projectors()));
  if (rep.positivity_min_eig <= tol.tol_psd) {
    rep.verdict = Verdict::NotOptimal;
  } else {
    rep.verdict = detail::banded(rep.hermiticity_residual, tol.tol_recon);
  }
  return rep;
}

struct FixpointResult {
  bool is_fixed = false;
  double c_estimate = 0.0;
  double residual = 0.0;
};

/// F = sum_i Pi_i rho^{1/2} Pi_i with Pi = pgm(p); c is the trace mean of F.
inline FixpointResult fixpoint_check(const Ensemble& p, const Tolerances& tol = {}) {
  const ProjectiveMeasurement m = pgm(p, tol);
  const CMatrix root = psd_sqrt(average_state(p), tol).matrix();
  const Index d = p.dim();
  CMatrix f = CMatrix::Zero(d, d);
  for (const auto& pi : m.projectors()) f += pi.matrix() * root * pi.matrix();
  FixpointResult out;
  out.c_estimate = f.trace().real() / static_cast<double>(d);
  out.residual = frobenius(f - out.c_estimate * CMatrix::Identity(d, d));
  out.is_fixed = out.residual <= tol.tol_fixpoint;
  return out;
}

/// (p_i Tr(Pi_i rho_i))_i
inline std::vector<double> detection_profile(const Ensemble& p, const ProjectiveMeasurement& m) {
  detail::check_arity(p, std::span<const HermitianMatrix>(m.projectors()));
  std::vector<double> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.push_back(p.priors()[i] * (m[i].matrix() * p.states()[i].matrix()).trace().real());
  }
  return out;
}

}  // namespace medli

#endif  // MEDLI_CERTIFY_HPP
