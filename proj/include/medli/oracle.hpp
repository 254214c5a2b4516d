#ifndef MEDLI_ORACLE_HPP
#define MEDLI_ORACLE_HPP

// Independent references for small instances. solve_oracle sweeps a dense
// grid over the exponential coordinates of the measurement manifold and
// refines the best cells with derivative-free and finite-difference steps;
// it shares no search code with solve. helstrom_comparator handles two
// states by a spectral construction.

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "medli/solver.hpp"

namespace medli {

struct OracleConfig {
  /// Maximum number of grid evaluations.
  long budget = 50000;
  /// Number of best grid cells refined locally.
  int refine_candidates = 4;
  Tolerances tol{};
};

namespace detail {

/// Objective on coordinates x of X = sum_a x_a E_a, U = exp(X), evaluated
/// from scratch with the general matrix exponential.
class CoordinateObjective {
 public:
  explicit CoordinateObjective(const Ensemble& p)
      : sig_(p.signature()), gens_(off_block_generators(p.signature())), d_(p.dim()) {
    for (std::size_t i = 0; i < p.size(); ++i) weighted_.push_back(p.weighted(i));
  }

  [[nodiscard]] Index size() const { return static_cast<Index>(gens_.size()); }

  [[nodiscard]] CMatrix unitary(const RVector& x) const {
    const CMatrix gen = generator_matrix(gens_, x, d_);
    return gen.exp();
  }

  double operator()(const RVector& x) {
    ++evaluations;
    const CMatrix u = unitary(x);
    double total = 0.0;
    Index col = 0;
    for (std::size_t i = 0; i < sig_.size(); ++i) {
      for (Index c = col; c < col + sig_[i]; ++c) {
        total += (u.col(c).adjoint() * weighted_[i] * u.col(c))(0, 0).real();
      }
      col += sig_[i];
    }
    return total;
  }

  long evaluations = 0;

 private:
  RankSignature sig_;
  std::vector<Generator> gens_;
  std::vector<CMatrix> weighted_;
  Index d_;
};

inline RVector fd_gradient(CoordinateObjective& f, const RVector& x, double h) {
  RVector g(x.size());
  for (Index a = 0; a < x.size(); ++a) {
    RVector xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    g(a) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Compass search: probe +/- step along each axis, halve on failure.
inline RVector compass_search(CoordinateObjective& f, RVector x, double step, double min_step) {
  double fx = f(x);
  while (step > min_step) {
    bool improved = false;
    for (Index a = 0; a < x.size(); ++a) {
      for (double sign : {1.0, -1.0}) {
        RVector trial = x;
        trial(a) += sign * step;
        const double ft = f(trial);
        if (ft > fx) {
          x = std::move(trial);
          fx = ft;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return x;
}

/// Newton iterations on central-difference derivatives.
inline RVector fd_newton(CoordinateObjective& f, RVector x, int iterations) {
  constexpr double kGradStep = 1e-5;
  constexpr double kHessStep = 1e-4;
  RVector g = fd_gradient(f, x, kGradStep);
  for (int it = 0; it < iterations; ++it) {
    const Index n = x.size();
    Eigen::MatrixXd h(n, n);
    for (Index a = 0; a < n; ++a) {
      RVector xp = x, xm = x;
      xp(a) += kHessStep;
      xm(a) -= kHessStep;
      h.col(a) = (fd_gradient(f, xp, kGradStep) - fd_gradient(f, xm, kGradStep)) / (2.0 * kHessStep);
    }
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
    if (!lu.isInvertible()) break;
    const RVector step = -lu.solve(g);
    const RVector trial = x + step;
    const RVector gt = fd_gradient(f, trial, kGradStep);
    if (!(gt.norm() < g.norm())) break;
    x = trial;
    g = gt;
    if (step.norm() < 1e-12) break;
  }
  return x;
}

}  // namespace detail

/// Exhaustive reference solver for d <= 4 and m <= 3.
inline SolveResult solve_oracle(const Ensemble& p, const OracleConfig& cfg = {}) {
  if (p.dim() > 4 || p.size() > 3) {
    throw Error(ErrorCode::BudgetExceeded, "oracle handles d <= 4 and m <= 3 only");
  }
  detail::CoordinateObjective f(p);
  const Index n = f.size();
  long per_axis = 1;
  while (std::pow(static_cast<double>(per_axis + 1), static_cast<double>(n)) <= static_cast<double>(cfg.budget)) {
    ++per_axis;
  }
  if (per_axis < 3) {
    throw Error(ErrorCode::BudgetExceeded, "budget " + std::to_string(cfg.budget) + " allows fewer than 3 grid points per axis");
  }

  // cell centers of [-pi/2, pi/2] per axis
  const double width = std::numbers::pi / static_cast<double>(per_axis);
  auto coordinate = [&](long idx) { return -0.5 * std::numbers::pi + (static_cast<double>(idx) + 0.5) * width; };

  std::vector<std::pair<double, RVector>> top;
  std::vector<long> odometer(static_cast<std::size_t>(n), 0);
  RVector x(n);
  const std::size_t keep = static_cast<std::size_t>(std::max(1, cfg.refine_candidates));
  while (true) {
    for (Index a = 0; a < n; ++a) x(a) = coordinate(odometer[static_cast<std::size_t>(a)]);
    const double v = f(x);
    if (top.size() < keep || v > top.back().first) {
      top.emplace_back(v, x);
      std::sort(top.begin(), top.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
      if (top.size() > keep) top.pop_back();
    }
    std::size_t a = 0;
    while (a < odometer.size() && ++odometer[a] == per_axis) odometer[a++] = 0;
    if (a == odometer.size()) break;
  }

  SolveResult best;
  bool have_best = false;
  for (const auto& [value, start] : top) {
    RVector refined = detail::compass_search(f, start, 0.5 * width, 1e-4);
    refined = detail::fd_newton(f, refined, 20);
    const CMatrix u = f.unitary(refined);
    SolveResult candidate = finalize_result(
        p, ProjectiveMeasurement::from_unitary(lowdin_orthonormalize(u), p.signature()), cfg.tol);
    if (!have_best || candidate.success_prob > best.success_prob) {
      best = std::move(candidate);
      have_best = true;
    }
  }
  best.iterations = static_cast<int>(std::min<long>(f.evaluations, std::numeric_limits<int>::max()));
  best.restarts_run = static_cast<int>(top.size());
  return best;
}

/// Two-state optimum: measure the projector onto the nonnegative eigenspace
/// of p_1 rho_1 - p_2 rho_2, giving p_2 plus the sum of positive eigenvalues.
inline double helstrom_comparator(const Ensemble& p) {
  if (p.size() != 2) throw Error(ErrorCode::NotTwoState, "ensemble has " + std::to_string(p.size()) + " states");
  const RVector lambda = eigh(CMatrix(p.weighted(0) - p.weighted(1))).values;
  double positive = 0.0;
  for (Index k = 0; k < lambda.size(); ++k) positive += std::max(lambda(k), 0.0);
  return p.priors()[1] + positive;
}

}  // namespace medli

#endif  // MEDLI_ORACLE_HPP
