#ifndef MEDLI_ENSEMBLES_HPP
#define MEDLI_ENSEMBLES_HPP

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "medli/linalg.hpp"
#include "medli/random.hpp"

namespace medli {

using RankSignature = std::vector<int>;

inline std::string signature_string(const RankSignature& sig) {
  std::string out;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sig[i]);
  }
  return out;
}

class Ensemble;
class ProjectiveMeasurement;

Ensemble validate_ensemble(const std::vector<double>& priors, const std::vector<CMatrix>& states,
                           const Tolerances& tol);
ProjectiveMeasurement validate_projective(const std::vector<CMatrix>& projectors,
                                          const Tolerances& tol);

/// Prior-weighted linearly independent states {p_i, rho_i}. Instances only
/// come out of validate_ensemble, so every invariant holds by construction.
class Ensemble {
 public:
  Ensemble() = default;

  [[nodiscard]] Index dim() const { return states_.empty() ? 0 : states_.front().dim(); }
  [[nodiscard]] std::size_t size() const { return states_.size(); }
  [[nodiscard]] const std::vector<double>& priors() const { return priors_; }
  [[nodiscard]] const std::vector<HermitianMatrix>& states() const { return states_; }
  [[nodiscard]] const RankSignature& signature() const { return signature_; }

  /// p_i rho_i
  [[nodiscard]] CMatrix weighted(std::size_t i) const { return priors_[i] * states_[i].matrix(); }

  /// Builds an ensemble from the unnormalized operators p_i rho_i.
  static Ensemble from_weighted(const std::vector<CMatrix>& weighted, const Tolerances& tol = {}) {
    std::vector<double> priors;
    std::vector<CMatrix> states;
    double total = 0.0;
    for (const auto& w : weighted) total += w.trace().real();
    for (const auto& w : weighted) {
      const double tr = w.trace().real();
      if (!(tr > 0.0)) throw Error(ErrorCode::PriorsInvalid, "weighted state with nonpositive trace");
      priors.push_back(tr / total);
      states.push_back(hermitian_part(w) / tr);
    }
    return validate_ensemble(priors, states, tol);
  }

 private:
  friend Ensemble validate_ensemble(const std::vector<double>&, const std::vector<CMatrix>&,
                                    const Tolerances&);
  std::vector<double> priors_;
  std::vector<HermitianMatrix> states_;
  RankSignature signature_;
};

/// Mutually orthogonal projectors summing to the identity.
class ProjectiveMeasurement {
 public:
  ProjectiveMeasurement() = default;

  [[nodiscard]] Index dim() const { return projectors_.empty() ? 0 : projectors_.front().dim(); }
  [[nodiscard]] std::size_t size() const { return projectors_.size(); }
  [[nodiscard]] const std::vector<HermitianMatrix>& projectors() const { return projectors_; }
  [[nodiscard]] const RankSignature& signature() const { return signature_; }
  [[nodiscard]] const HermitianMatrix& operator[](std::size_t i) const { return projectors_[i]; }

  /// Projectors onto consecutive column blocks of a unitary. The result is
  /// exact to machine precision, so no validation is run.
  static ProjectiveMeasurement from_unitary(const CMatrix& u, const RankSignature& sig) {
    ProjectiveMeasurement pm;
    Index col = 0;
    for (int r : sig) {
      const CMatrix block = u.middleCols(col, r);
      pm.projectors_.push_back(HermitianMatrix::symmetrized(block * block.adjoint()));
      col += r;
    }
    pm.signature_ = sig;
    return pm;
  }

  /// A unitary whose consecutive column blocks span the ranges of the projectors.
  [[nodiscard]] CMatrix basis() const {
    const Index d = dim();
    CMatrix w(d, d);
    Index col = 0;
    for (std::size_t i = 0; i < projectors_.size(); ++i) {
      const Index r = signature_[i];
      w.middleCols(col, r) = adapted_basis(projectors_[i].matrix()).leftCols(r);
      col += r;
    }
    return lowdin_orthonormalize(w);
  }

 private:
  friend ProjectiveMeasurement validate_projective(const std::vector<CMatrix>&, const Tolerances&);
  std::vector<HermitianMatrix> projectors_;
  RankSignature signature_;
};

/// PSD operators summing to the identity; the input type for certification
/// of candidates that may not be projective.
class GeneralPOVM {
 public:
  GeneralPOVM() = default;

  static GeneralPOVM validate(const std::vector<CMatrix>& elements, const Tolerances& tol = {}) {
    if (elements.empty()) throw Error(ErrorCode::DimensionMismatch, "empty POVM");
    const Index d = elements.front().rows();
    GeneralPOVM povm;
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& e : elements) {
      if (e.rows() != d || e.cols() != d) {
        throw Error(ErrorCode::DimensionMismatch, "POVM elements differ in dimension");
      }
      HermitianMatrix h(e, tol.tol_herm);
      if (!is_psd(h, tol)) throw Error(ErrorCode::NotPSD, "POVM element is not PSD");
      sum += h.matrix();
      povm.elements_.push_back(std::move(h));
    }
    if (frobenius(sum - CMatrix::Identity(d, d)) > tol.tol_recon) {
      throw Error(ErrorCode::NotComplete, "POVM elements do not sum to the identity");
    }
    return povm;
  }

  static GeneralPOVM from(const ProjectiveMeasurement& pm) {
    GeneralPOVM povm;
    povm.elements_ = pm.projectors();
    return povm;
  }

  [[nodiscard]] Index dim() const { return elements_.empty() ? 0 : elements_.front().dim(); }
  [[nodiscard]] std::size_t size() const { return elements_.size(); }
  [[nodiscard]] const std::vector<HermitianMatrix>& elements() const { return elements_; }
  [[nodiscard]] const HermitianMatrix& operator[](std::size_t i) const { return elements_[i]; }

 private:
  std::vector<HermitianMatrix> elements_;
};

inline Ensemble validate_ensemble(const std::vector<double>& priors, const std::vector<CMatrix>& states,
                                  const Tolerances& tol = {}) {
  if (!tol.valid()) throw Error(ErrorCode::InvalidTolerances, "tolerances must be finite and >= 0");
  const std::size_t m = states.size();
  if (m < 2) throw Error(ErrorCode::DimensionMismatch, "an ensemble needs at least two states");
  if (priors.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "number of priors differs from number of states");
  }
  const Index d = states.front().rows();
  for (const auto& s : states) {
    if (s.rows() != d || s.cols() != d || d < 1) {
      throw Error(ErrorCode::DimensionMismatch, "states must be square and of equal dimension");
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(priors[i]) || priors[i] <= 0.0) {
      throw Error(ErrorCode::PriorsInvalid, "prior " + std::to_string(i) + " is not positive");
    }
    total += priors[i];
  }
  if (std::abs(total - 1.0) > tol.tol_recon) {
    throw Error(ErrorCode::PriorsInvalid, "priors sum to " + std::to_string(total));
  }

  Ensemble ens;
  ens.priors_ = priors;
  Index rank_sum = 0;
  std::vector<CMatrix> supports;
  for (std::size_t i = 0; i < m; ++i) {
    const std::string which = "state " + std::to_string(i);
    if (!states[i].allFinite() || max_abs_entry(states[i] - states[i].adjoint()) > tol.tol_herm) {
      throw Error(ErrorCode::StateNotDensity, which + " is not Hermitian");
    }
    HermitianMatrix rho = HermitianMatrix::symmetrized(states[i]);
    const Spectrum s = eigh(rho);
    if (s.values(0) < -tol.tol_psd) {
      throw Error(ErrorCode::StateNotDensity, which + " has a negative eigenvalue");
    }
    if (std::abs(rho.trace() - 1.0) > tol.tol_recon) {
      throw Error(ErrorCode::StateNotDensity, which + " does not have unit trace");
    }
    const double cutoff = tol.tol_rank * s.values.cwiseAbs().maxCoeff();
    Index r = 0;
    for (Index k = 0; k < d; ++k) {
      if (std::abs(s.values(k)) > cutoff) ++r;
    }
    // eigenvalues ascend, so the support is the trailing block
    supports.push_back(s.vectors.rightCols(r));
    rank_sum += r;
    ens.signature_.push_back(static_cast<int>(r));
    ens.states_.push_back(std::move(rho));
  }
  if (rank_sum != d) {
    throw Error(ErrorCode::RankSumMismatch, "state ranks (" + signature_string(ens.signature_) +
                                                ") do not sum to dim " + std::to_string(d));
  }
  CMatrix stacked(d, d);
  Index col = 0;
  for (const auto& v : supports) {
    stacked.middleCols(col, v.cols()) = v;
    col += v.cols();
  }
  const RVector sv = Eigen::JacobiSVD<CMatrix>(stacked).singularValues();
  if (sv(d - 1) <= tol.tol_rank) {
    throw Error(ErrorCode::NotLinearlyIndependent,
                "smallest singular value of the stacked supports is " + std::to_string(sv(d - 1)));
  }
  return ens;
}

inline ProjectiveMeasurement validate_projective(const std::vector<CMatrix>& projectors,
                                                 const Tolerances& tol = {}) {
  if (projectors.empty()) throw Error(ErrorCode::DimensionMismatch, "empty measurement");
  const Index d = projectors.front().rows();
  ProjectiveMeasurement pm;
  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const CMatrix& p = projectors[i];
    if (p.rows() != d || p.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "projectors differ in dimension");
    }
    if (!p.allFinite() || !is_projector(p, tol)) {
      throw Error(ErrorCode::NotProjector, "element " + std::to_string(i) + " is not a projector");
    }
    pm.projectors_.push_back(HermitianMatrix::symmetrized(p));
    pm.signature_.push_back(rank_eps(pm.projectors_.back(), tol));
    sum += p;
  }
  if (frobenius(sum - CMatrix::Identity(d, d)) > tol.tol_recon) {
    throw Error(ErrorCode::NotComplete, "projectors do not sum to the identity");
  }
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    for (std::size_t j = i + 1; j < projectors.size(); ++j) {
      if (frobenius(projectors[i] * projectors[j]) > tol.tol_recon) {
        throw Error(ErrorCode::NotOrthogonal,
                    "elements " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
  }
  return pm;
}

/// sum_i p_i Tr(rho_i E_i)
inline double success_probability(const Ensemble& ens, std::span<const HermitianMatrix> elements,
                                  const Tolerances& tol = {}) {
  if (elements.size() != ens.size()) {
    throw Error(ErrorCode::DimensionMismatch, "measurement and ensemble sizes differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].dim() != ens.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "measurement and ensemble dimensions differ");
    }
    total += ens.priors()[i] * (ens.states()[i].matrix() * elements[i].matrix()).trace().real();
  }
  if (total < 0.0 && total >= -tol.tol_recon) total = 0.0;
  if (total > 1.0 && total <= 1.0 + tol.tol_recon) total = 1.0;
  return total;
}

inline double success_probability(const Ensemble& ens, const ProjectiveMeasurement& pm,
                                  const Tolerances& tol = {}) {
  return success_probability(ens, std::span<const HermitianMatrix>(pm.projectors()), tol);
}

inline double success_probability(const Ensemble& ens, const GeneralPOVM& povm,
                                  const Tolerances& tol = {}) {
  return success_probability(ens, std::span<const HermitianMatrix>(povm.elements()), tol);
}

/// sum_i p_i rho_i
inline HermitianMatrix average_state(const Ensemble& ens) {
  CMatrix sum = CMatrix::Zero(ens.dim(), ens.dim());
  for (std::size_t i = 0; i < ens.size(); ++i) sum += ens.weighted(i);
  return HermitianMatrix::symmetrized(sum);
}

inline void check_signature(Index d, const RankSignature& sig) {
  if (sig.size() < 2) throw Error(ErrorCode::InvalidSignature, "need at least two ranks");
  long total = 0;
  for (int r : sig) {
    if (r < 1) throw Error(ErrorCode::InvalidSignature, "ranks must be positive");
    total += r;
  }
  if (d < 1 || total != d) {
    throw Error(ErrorCode::InvalidSignature,
                "ranks (" + signature_string(sig) + ") do not sum to dim " + std::to_string(d));
  }
}

/// Seeded random LI ensemble with the given rank signature. Each state is
/// supported on a column block of a random well-conditioned complex matrix,
/// so the states are generically non-orthogonal.
inline Ensemble random_ensemble(Index d, const RankSignature& sig, std::uint64_t seed,
                                const Tolerances& tol = {}) {
  check_signature(d, sig);
  Rng rng(seed);
  std::uniform_real_distribution<double> eig_dist(0.2, 1.0);
  constexpr double kMaxBasisCondition = 30.0;
  constexpr double kMaxAverageCondition = 1e4;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const CMatrix g = ginibre(d, d, rng);
    const RVector sv = Eigen::JacobiSVD<CMatrix>(g).singularValues();
    if (sv(0) > kMaxBasisCondition * sv(d - 1)) continue;

    std::vector<CMatrix> states;
    Index col = 0;
    for (int r : sig) {
      Eigen::HouseholderQR<CMatrix> qr(g.middleCols(col, r));
      const CMatrix q = qr.householderQ() * CMatrix::Identity(d, r);
      RVector lambda(r);
      for (Index k = 0; k < r; ++k) lambda(k) = eig_dist(rng);
      lambda /= lambda.sum();
      states.push_back(hermitian_part(q * lambda.asDiagonal() * q.adjoint()));
      col += r;
    }
    const std::vector<double> priors = flat_simplex(sig.size(), rng);
    Ensemble ens = validate_ensemble(priors, states, tol);
    const RVector avg = eigh(average_state(ens)).values;
    if (avg(d - 1) > kMaxAverageCondition * avg(0)) continue;
    return ens;
  }
  throw Error(ErrorCode::InvalidSignature, "could not draw a well-conditioned ensemble");
}

}  // namespace medli

#endif  // MEDLI_ENSEMBLES_HPP
