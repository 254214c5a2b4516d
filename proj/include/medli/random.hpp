#ifndef MEDLI_RANDOM_HPP
#define MEDLI_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "medli/linalg.hpp"

namespace medli {

using Rng = std::mt19937_64;

/// d x d matrix of i.i.d. standard complex Gaussian entries.
inline CMatrix ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0));
  CMatrix g(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = Complex(re, im);
    }
  }
  return g;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal folded back into Q.
inline CMatrix haar_unitary(Index d, Rng& rng) {
  const CMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < d; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0.0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

/// Point drawn uniformly from the open probability simplex with m vertices.
inline std::vector<double> flat_simplex(std::size_t m, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(m);
  double total = 0.0;
  for (auto& x : w) {
    x = expo(rng);
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace medli

#endif  // MEDLI_RANDOM_HPP
