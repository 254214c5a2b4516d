#ifndef MEDLI_LINALG_HPP
#define MEDLI_LINALG_HPP

// Dense complex Hermitian linear algebra used by every other module.
// The eigendecomposition is the single primitive behind square roots,
// inverse square roots, ranks and positivity tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "medli/error.hpp"
#include "medli/tolerances.hpp"

namespace medli {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline double frobenius(const CMatrix& m) { return m.norm(); }

/// (K + K^H) / 2
inline CMatrix hermitian_part(const CMatrix& k) { return (k + k.adjoint()) * 0.5; }

inline double max_abs_entry(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// A dense square complex matrix that is Hermitian within tol_herm. The stored
/// entries are exactly Hermitian (the input is symmetrized after the check).
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const CMatrix& m, double tol_herm = Tolerances{}.tol_herm) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw Error(ErrorCode::DimensionMismatch, "Hermitian matrix must be square with dim >= 1");
    }
    if (!m.allFinite()) {
      throw Error(ErrorCode::NotHermitian, "matrix has non-finite entries");
    }
    const double asym = max_abs_entry(m - m.adjoint());
    if (asym > tol_herm) {
      throw Error(ErrorCode::NotHermitian,
                  "max |M - M^H| entry " + std::to_string(asym) + " exceeds tolerance");
    }
    m_ = hermitian_part(m);
  }

  /// Takes the Hermitian part without checking.
  static HermitianMatrix symmetrized(const CMatrix& m) {
    HermitianMatrix h;
    h.m_ = hermitian_part(m);
    return h;
  }

  static HermitianMatrix identity(Index d) {
    return symmetrized(CMatrix::Identity(d, d));
  }

  [[nodiscard]] Index dim() const { return m_.rows(); }
  [[nodiscard]] const CMatrix& matrix() const { return m_; }
  [[nodiscard]] Complex operator()(Index r, Index c) const { return m_(r, c); }
  [[nodiscard]] double trace() const { return m_.trace().real(); }

  friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
    return symmetrized(a.m_ + b.m_);
  }
  friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
    return symmetrized(a.m_ - b.m_);
  }
  friend HermitianMatrix operator*(double s, const HermitianMatrix& a) {
    return symmetrized(s * a.m_);
  }

 private:
  CMatrix m_;
};

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
struct Spectrum {
  RVector values;
  CMatrix vectors;
};

inline Spectrum eigh(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotHermitian, "eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Spectrum eigh(const HermitianMatrix& m) { return eigh(m.matrix()); }

inline double min_eigenvalue(const CMatrix& m) {
  return m.rows() == 0 ? 0.0 : eigh(m).values(0);
}

inline double min_eigenvalue(const HermitianMatrix& m) { return min_eigenvalue(m.matrix()); }

/// V diag(f(lambda)) V^H
template <typename F>
CMatrix spectral_apply(const Spectrum& s, F&& f) {
  RVector mapped(s.values.size());
  for (Index k = 0; k < s.values.size(); ++k) mapped(k) = f(s.values(k));
  return s.vectors * mapped.asDiagonal() * s.vectors.adjoint();
}

/// Principal square root. Eigenvalues in [-tol_psd, 0) are clamped to zero.
inline HermitianMatrix psd_sqrt(const HermitianMatrix& m, const Tolerances& tol = {}) {
  const Spectrum s = eigh(m);
  if (s.values(0) < -tol.tol_psd) {
    throw Error(ErrorCode::NotPSD,
                "smallest eigenvalue " + std::to_string(s.values(0)) + " below -tol_psd");
  }
  return HermitianMatrix::symmetrized(
      spectral_apply(s, [](double v) { return std::sqrt(std::max(v, 0.0)); }));
}

inline HermitianMatrix psd_inv_sqrt(const HermitianMatrix& m, const Tolerances& tol = {}) {
  const Spectrum s = eigh(m);
  if (s.values(0) <= tol.tol_psd) {
    throw Error(ErrorCode::NotPD,
                "smallest eigenvalue " + std::to_string(s.values(0)) + " not above tol_psd");
  }
  return HermitianMatrix::symmetrized(spectral_apply(s, [](double v) { return 1.0 / std::sqrt(v); }));
}

/// Number of eigenvalues whose magnitude exceeds tol_rank times the largest
/// magnitude (or times 1 for the zero matrix).
inline int rank_eps(const HermitianMatrix& m, const Tolerances& tol = {}) {
  const RVector mags = eigh(m).values.cwiseAbs();
  const double scale = mags.maxCoeff() > 0.0 ? mags.maxCoeff() : 1.0;
  int rank = 0;
  for (Index k = 0; k < mags.size(); ++k) {
    if (mags(k) > tol.tol_rank * scale) ++rank;
  }
  return rank;
}

inline bool is_pd(const HermitianMatrix& m, const Tolerances& tol = {}) {
  return min_eigenvalue(m) > tol.tol_psd;
}

inline bool is_psd(const HermitianMatrix& m, const Tolerances& tol = {}) {
  return min_eigenvalue(m) > -tol.tol_psd;
}

/// ||P^2 - P||_F, or infinity when P is not square.
inline double idempotency_residual(const CMatrix& p) {
  if (p.rows() != p.cols()) return INFINITY;
  return frobenius(p * p - p);
}

inline bool is_projector(const CMatrix& p, const Tolerances& tol = {}) {
  return idempotency_residual(p) <= tol.tol_recon && frobenius(p - p.adjoint()) <= tol.tol_recon;
}

/// Rotates the phase of each column so that its largest-magnitude entry
/// (first one on ties) is real and positive.
inline void fix_column_phases(CMatrix& v) {
  for (Index c = 0; c < v.cols(); ++c) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index r = 0; r < v.rows(); ++r) {
      const double a = std::abs(v(r, c));
      if (a > best_abs + 1e-12) {
        best_abs = a;
        best = r;
      }
    }
    if (best_abs > 0.0) v.col(c) *= std::conj(v(best, c)) / best_abs;
  }
}

/// Orthonormalizes the columns of a full-rank square matrix with the
/// symmetric (Lowdin) procedure W (W^H W)^{-1/2}, the unitary closest to W.
inline CMatrix lowdin_orthonormalize(const CMatrix& w) {
  const Spectrum s = eigh(CMatrix(w.adjoint() * w));
  if (s.values(0) <= 0.0) {
    throw Error(ErrorCode::NotLinearlyIndependent, "columns are linearly dependent");
  }
  return w * spectral_apply(s, [](double v) { return 1.0 / std::sqrt(v); });
}

/// exp(E) for skew-Hermitian E, computed through the Hermitian matrix iE so
/// the result is unitary to machine precision.
inline CMatrix exp_skew_hermitian(const CMatrix& e) {
  const Spectrum s = eigh(CMatrix(Complex(0.0, 1.0) * e));
  CVector phases(s.values.size());
  for (Index k = 0; k < s.values.size(); ++k) phases(k) = std::polar(1.0, -s.values(k));
  return s.vectors * phases.asDiagonal() * s.vectors.adjoint();
}

/// Blocks of a Hermitian matrix in a basis adapted to an orthogonal projector:
/// basis^H M basis = [[A, B], [B^H, C]], A living on the range of the projector.
struct BlockDecomposition {
  CMatrix a_block;
  CMatrix b_block;
  CMatrix c_block;
  CMatrix basis;

  [[nodiscard]] Index range_dim() const { return a_block.rows(); }

  /// Block matrix [[A, B], [B^H, C]] in the adapted basis.
  [[nodiscard]] CMatrix assembled() const {
    const Index r = a_block.rows();
    const Index d = basis.rows();
    CMatrix out(d, d);
    out.topLeftCorner(r, r) = a_block;
    out.topRightCorner(r, d - r) = b_block;
    out.bottomLeftCorner(d - r, r) = b_block.adjoint();
    out.bottomRightCorner(d - r, d - r) = c_block;
    return out;
  }

  /// The source matrix, rotated back to the ambient basis.
  [[nodiscard]] CMatrix reassemble() const { return basis * assembled() * basis.adjoint(); }
};

/// Eigenbasis of a projector, range vectors first. Columns are ordered by
/// descending eigenvalue with canonical phases, so the output is deterministic.
inline CMatrix adapted_basis(const CMatrix& projector) {
  const Spectrum s = eigh(projector);
  CMatrix basis = s.vectors.rowwise().reverse();
  fix_column_phases(basis);
  return basis;
}

inline BlockDecomposition block_decompose(const HermitianMatrix& m, const HermitianMatrix& projector,
                                          const Tolerances& tol = {}) {
  if (m.dim() != projector.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix and projector dimensions differ");
  }
  const double idem = idempotency_residual(projector.matrix());
  if (idem > tol.tol_recon) {
    throw Error(ErrorCode::NotProjector, "||P^2 - P||_F = " + std::to_string(idem));
  }
  const Index d = m.dim();
  const Spectrum s = eigh(projector);
  Index r = 0;
  for (Index k = 0; k < d; ++k) {
    if (s.values(k) > 0.5) ++r;
  }
  BlockDecomposition bd;
  bd.basis = adapted_basis(projector.matrix());
  const CMatrix rotated = bd.basis.adjoint() * m.matrix() * bd.basis;
  bd.a_block = hermitian_part(rotated.topLeftCorner(r, r));
  bd.b_block = rotated.topRightCorner(r, d - r);
  bd.c_block = hermitian_part(rotated.bottomRightCorner(d - r, d - r));
  return bd;
}

/// C - B^H A^{-1} B
inline HermitianMatrix schur_complement(const BlockDecomposition& bd, const Tolerances& tol = {}) {
  if (bd.a_block.rows() == 0) {
    return HermitianMatrix::symmetrized(bd.c_block);
  }
  if (min_eigenvalue(bd.a_block) <= tol.tol_psd) {
    throw Error(ErrorCode::NotPD, "leading block is not positive definite");
  }
  if (bd.c_block.rows() == 0) {
    HermitianMatrix empty;
    return empty;
  }
  const Eigen::LLT<CMatrix> llt(bd.a_block);
  return HermitianMatrix::symmetrized(bd.c_block - bd.b_block.adjoint() * llt.solve(bd.b_block));
}

}  // namespace medli

#endif  // MEDLI_LINALG_HPP
