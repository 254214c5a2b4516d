#ifndef MEDLI_TOLERANCES_HPP
#define MEDLI_TOLERANCES_HPP

#include <cmath>
#include <initializer_list>

namespace medli {

/// Numerical thresholds shared by every operation. Defaults leave headroom
/// for chained products (sqrt, Schur complement, reassembly) in double precision.
struct Tolerances {
  double tol_herm = 1e-10;     ///< max |M - M^H| entry for Hermiticity
  double tol_psd = 1e-9;       ///< eigenvalue cutoff for positivity tests
  double tol_rank = 1e-8;      ///< relative eigenvalue cutoff for ranks
  double tol_recon = 1e-8;     ///< Frobenius budget for reconstructions
  double tol_fixpoint = 1e-7;  ///< residual budget for the fixed-point test

  [[nodiscard]] bool valid() const {
    for (double t : {tol_herm, tol_psd, tol_rank, tol_recon, tol_fixpoint}) {
      if (!std::isfinite(t) || t < 0.0) return false;
    }
    return true;
  }
};

}  // namespace medli

#endif  // MEDLI_TOLERANCES_HPP
