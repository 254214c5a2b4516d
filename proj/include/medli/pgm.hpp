#ifndef MEDLI_PGM_HPP
#define MEDLI_PGM_HPP

// Pretty good measurement E_i = sigma^{-1/2} (q_i sigma_i) sigma^{-1/2},
// sigma being the average state of the ensemble.

#include <string>
#include <vector>

#include "medli/ensembles.hpp"

namespace medli {

/// Average states with a condition number above this are treated as singular.
inline constexpr double kMaxSigmaCondition = 1e12;

namespace detail {

inline std::vector<CMatrix> pgm_elements(const Ensemble& q, const Tolerances& tol) {
  const HermitianMatrix sigma = average_state(q);
  const RVector lambda = eigh(sigma).values;
  const double lo = lambda(0);
  const double hi = lambda(lambda.size() - 1);
  if (lo <= tol.tol_psd || hi > kMaxSigmaCondition * lo) {
    throw Error(ErrorCode::SigmaSingular,
                "average state eigenvalues span [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const CMatrix t = psd_inv_sqrt(sigma, tol).matrix();
  std::vector<CMatrix> elements;
  elements.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    elements.push_back(hermitian_part(t * q.weighted(i) * t));
  }
  return elements;
}

}  // namespace detail

/// PGM as a general POVM, without promoting it to a projective measurement.
inline GeneralPOVM pgm_general(const Ensemble& q, const Tolerances& tol = {}) {
  return GeneralPOVM::validate(detail::pgm_elements(q, tol), tol);
}

/// PGM of a linearly independent ensemble. Each element is checked to be a
/// projector of the state's rank, then the ranges are jointly re-orthonormalized
/// so the returned projectors are orthogonal and complete to machine precision.
inline ProjectiveMeasurement pgm(const Ensemble& q, const Tolerances& tol = {}) {
  const std::vector<CMatrix> elements = detail::pgm_elements(q, tol);
  const Index d = q.dim();
  CMatrix ranges(d, d);
  Index col = 0;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const double idem = idempotency_residual(elements[i]);
    const int r = q.signature()[i];
    if (idem > tol.tol_recon) {
      throw Error(ErrorCode::NotProjectiveAfterPGM,
                  "element " + std::to_string(i) + " has ||E^2 - E||_F = " + std::to_string(idem));
    }
    if (rank_eps(HermitianMatrix::symmetrized(elements[i]), tol) != r) {
      throw Error(ErrorCode::NotProjectiveAfterPGM, "element " + std::to_string(i) + " has the wrong rank");
    }
    ranges.middleCols(col, r) = adapted_basis(elements[i]).leftCols(r);
    col += r;
  }
  return ProjectiveMeasurement::from_unitary(lowdin_orthonormalize(ranges), q.signature());
}

}  // namespace medli

#endif  // MEDLI_PGM_HPP
