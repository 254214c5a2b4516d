#ifndef MEDLI_FIXED_POINT_HPP
#define MEDLI_FIXED_POINT_HPP

// Ensembles whose PGM is their optimal measurement. With S > 0 whose diagonal
// blocks are c Id and coordinate projectors Pi_i, setting p_i rho_i = S Pi_i S
// gives average state S^2, PGM {Pi_i}, and sum_i Pi_i S Pi_i = c Id.

#include <cstdint>
#include <vector>

#include "medli/ensembles.hpp"
#include "medli/random.hpp"

namespace medli {

/// p_i rho_i = S Pi_i S / Tr(S^2), Pi_i the coordinate projector onto the i-th block.
inline Ensemble fixed_point_from_root(const CMatrix& s, const RankSignature& sig, const Tolerances& tol = {}) {
  check_signature(s.rows(), sig);
  const HermitianMatrix root(s, tol.tol_herm);
  if (!is_pd(root, tol)) throw Error(ErrorCode::PDConstructionFailed, "S is not positive definite");
  std::vector<CMatrix> weighted;
  Index col = 0;
  for (int r : sig) {
    const auto block = root.matrix().middleCols(col, r);
    weighted.push_back(block * block.adjoint());
    col += r;
  }
  return Ensemble::from_weighted(weighted, tol);
}

/// Seeded fixed point: S = Id + off-block Hermitian noise scaled to keep
/// S positive definite, normalized to Tr S^2 = 1, then the whole ensemble is
/// conjugated by a Haar-random unitary.
inline Ensemble generate_fixed_point(Index d, const RankSignature& sig, std::uint64_t seed,
                                     const Tolerances& tol = {}) {
  check_signature(d, sig);
  Rng rng(seed);
  std::uniform_real_distribution<double> scale_dist(0.2, 0.7);
  CMatrix noise = ginibre(d, d, rng);
  Index col = 0;
  for (int r : sig) {
    noise.block(col, col, r, r).setZero();
    col += r;
  }
  noise = hermitian_part(noise);
  const double spectral = eigh(noise).values.cwiseAbs().maxCoeff();
  double scale = scale_dist(rng);
  const CMatrix rotation = haar_unitary(d, rng);
  for (int attempt = 0; attempt < 8; ++attempt, scale *= 0.5) {
    CMatrix s = CMatrix::Identity(d, d);
    if (spectral > 0.0) s += (scale / spectral) * noise;
    if (min_eigenvalue(s) <= 1e-3) continue;
    s /= std::sqrt((s * s).trace().real());
    const Ensemble base = fixed_point_from_root(s, sig, tol);
    std::vector<CMatrix> rotated;
    for (std::size_t i = 0; i < base.size(); ++i) {
      rotated.push_back(rotation * base.weighted(i) * rotation.adjoint());
    }
    return Ensemble::from_weighted(rotated, tol);
  }
  throw Error(ErrorCode::PDConstructionFailed, "could not keep S positive definite");
}

}  // namespace medli

#endif  // MEDLI_FIXED_POINT_HPP
