#ifndef MEDLI_SOLVER_HPP
#define MEDLI_SOLVER_HPP

// Certified search for the optimal projective measurement of an LI ensemble.
//
// A measurement in P(r_1, ..., r_m) is the column-block partition of a unitary
// U: Pi_i = U_i U_i^H. The search moves U <- U exp(X) with X skew-Hermitian
// and supported on the off-block-diagonal entries (block-diagonal rotations
// leave every Pi_i unchanged). In those coordinates the objective
// sum_i Tr(p_i rho_i Pi_i) has closed-form gradient and Hessian, so every
// restart runs a safeguarded Newton ascent followed by a short Newton polish
// on the stationarity equations. The verdict of certify_simplified, not the
// optimizer's own convergence, decides whether a result is certified.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "medli/certify.hpp"
#include "medli/random.hpp"

namespace medli {

struct SolveConfig {
  int restarts = 16;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  int polish_iterations = 20;
  double gradient_tol = 1e-13;
  double armijo = 1e-4;
  /// Always start one restart from the PGM of the ensemble.
  bool pgm_warm_start = true;
  /// The optimum is unique, so the first certified restart ends the search.
  bool stop_at_first_certified = true;
  /// Throw NoConvergenceError instead of returning an uncertified result.
  bool require_certified = false;
  Tolerances tol{};
};

struct SolveResult {
  ProjectiveMeasurement measurement;
  DualCertificate certificate;
  CertificationReport report;
  double success_prob = 0.0;
  int iterations = 0;
  bool certified = false;
  /// Restarts actually run and the index of the one returned.
  int restarts_run = 0;
  int restart_index = 0;
  /// Objective after each accepted ascent step of the returned restart,
  /// starting with the initial value.
  std::vector<double> objective_history;
};

/// Raised when a certified result is required but not found; carries the
/// best uncertified result.
class NoConvergenceError : public Error {
 public:
  explicit NoConvergenceError(SolveResult best)
      : Error(ErrorCode::NoConvergence, "no restart produced a certified optimum"), best_(std::move(best)) {}

  [[nodiscard]] const SolveResult& best() const { return best_; }

 private:
  SolveResult best_;
};

/// Attaches the measurement's certificate, certification report and value.
inline SolveResult finalize_result(const Ensemble& p, ProjectiveMeasurement m, const Tolerances& tol) {
  SolveResult out;
  out.measurement = std::move(m);
  out.certificate = dual_operator(p, out.measurement);
  out.report = certify_simplified(p, out.measurement, tol);
  out.success_prob = success_probability(p, out.measurement, tol);
  out.certified = out.report.verdict == Verdict::Optimal &&
                  std::abs(out.success_prob - out.certificate.dual_value) <= 1e-8;
  return out;
}

namespace detail {

/// One sparse skew-Hermitian generator: value at (row, col) and at (col, row).
struct Generator {
  Index row;
  Index col;
  Complex upper;  // X(row, col)
  Complex lower;  // X(col, row)
};

/// Off-block generators for a rank signature: for every pair of columns in
/// different blocks, the real direction e_jk - e_kj and the imaginary i(e_jk + e_kj).
inline std::vector<Generator> off_block_generators(const RankSignature& sig) {
  std::vector<int> block;
  for (std::size_t i = 0; i < sig.size(); ++i) block.insert(block.end(), sig[i], static_cast<int>(i));
  std::vector<Generator> gens;
  const Index d = static_cast<Index>(block.size());
  for (Index j = 0; j < d; ++j) {
    for (Index k = j + 1; k < d; ++k) {
      if (block[j] == block[k]) continue;
      gens.push_back({j, k, Complex(1.0, 0.0), Complex(-1.0, 0.0)});
      gens.push_back({j, k, Complex(0.0, 1.0), Complex(0.0, 1.0)});
    }
  }
  return gens;
}

inline CMatrix generator_matrix(const std::vector<Generator>& gens, const RVector& x, Index d) {
  CMatrix out = CMatrix::Zero(d, d);
  for (std::size_t a = 0; a < gens.size(); ++a) {
    out(gens[a].row, gens[a].col) += x(static_cast<Index>(a)) * gens[a].upper;
    out(gens[a].col, gens[a].row) += x(static_cast<Index>(a)) * gens[a].lower;
  }
  return out;
}

/// Objective, gradient and Hessian of sum_i Tr(W_i Pi_i) in the frame of the
/// current unitary, with Pi_i the i-th column block.
class FrameObjective {
 public:
  FrameObjective(const Ensemble& p)
      : weighted_(), sig_(p.signature()), gens_(off_block_generators(p.signature())) {
    for (std::size_t i = 0; i < p.size(); ++i) weighted_.push_back(p.weighted(i));
    for (std::size_t i = 0; i < sig_.size(); ++i) block_.insert(block_.end(), sig_[i], static_cast<int>(i));
  }

  [[nodiscard]] const std::vector<Generator>& generators() const { return gens_; }
  [[nodiscard]] Index dim() const { return static_cast<Index>(block_.size()); }

  [[nodiscard]] double value(const CMatrix& u) const {
    double total = 0.0;
    Index col = 0;
    for (std::size_t i = 0; i < sig_.size(); ++i) {
      const auto block = u.middleCols(col, sig_[i]);
      total += (block.adjoint() * weighted_[i] * block).trace().real();
      col += sig_[i];
    }
    return total;
  }

  /// Frame matrix entry: M^{(block(p))}_{pq}, where M^{(i)} = U^H W_i U.
  void set_frame(const CMatrix& u) {
    frames_.clear();
    for (const auto& w : weighted_) frames_.push_back(u.adjoint() * w * u);
  }

  [[nodiscard]] RVector gradient() const {
    // G_pq = M^{(b(p))}_pq - M^{(b(q))}_pq and g(X) = Tr(G X)
    const Index n = static_cast<Index>(gens_.size());
    RVector g(n);
    for (Index a = 0; a < n; ++a) {
      const Generator& e = gens_[static_cast<std::size_t>(a)];
      g(a) = (e.upper * big_g(e.col, e.row) + e.lower * big_g(e.row, e.col)).real();
    }
    return g;
  }

  /// H(X, Y) = sum_i Tr(S_i (XY + YX)) / 2 - Tr(M_i X P_i Y) - Tr(M_i Y P_i X),
  /// S_i = P_i M_i + M_i P_i.
  [[nodiscard]] Eigen::MatrixXd hessian() const {
    const Index n = static_cast<Index>(gens_.size());
    Eigen::MatrixXd h(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = a; b < n; ++b) {
        const auto xa = entries(gens_[static_cast<std::size_t>(a)]);
        const auto xb = entries(gens_[static_cast<std::size_t>(b)]);
        const double v = 0.5 * (trace_s_xy(xa, xb) + trace_s_xy(xb, xa)).real() -
                         trace_m_xpy(xa, xb).real() - trace_m_xpy(xb, xa).real();
        h(a, b) = v;
        h(b, a) = v;
      }
    }
    return h;
  }

 private:
  struct Entry {
    Index row;
    Index col;
    Complex value;
  };

  static std::array<Entry, 2> entries(const Generator& e) {
    return {Entry{e.row, e.col, e.upper}, Entry{e.col, e.row, e.lower}};
  }

  [[nodiscard]] Complex frame(Index p, Index q) const { return frames_[static_cast<std::size_t>(block_[p])](p, q); }

  [[nodiscard]] Complex frame_of(int block, Index p, Index q) const {
    return frames_[static_cast<std::size_t>(block)](p, q);
  }

  [[nodiscard]] Complex big_g(Index p, Index q) const { return frame(p, q) - frame_of(block_[q], p, q); }

  [[nodiscard]] Complex s_total(Index p, Index q) const { return frame(p, q) + frame_of(block_[q], p, q); }

  /// Tr(S X Y) = sum S_pq X_qr Y_rp
  [[nodiscard]] Complex trace_s_xy(const std::array<Entry, 2>& x, const std::array<Entry, 2>& y) const {
    Complex t = 0.0;
    for (const Entry& ex : x) {
      for (const Entry& ey : y) {
        if (ex.col == ey.row) t += s_total(ey.col, ex.row) * ex.value * ey.value;
      }
    }
    return t;
  }

  /// sum_i Tr(M_i X P_i Y) = sum X_qr Y_rp M^{(b(r))}_pq
  [[nodiscard]] Complex trace_m_xpy(const std::array<Entry, 2>& x, const std::array<Entry, 2>& y) const {
    Complex t = 0.0;
    for (const Entry& ex : x) {
      for (const Entry& ey : y) {
        if (ex.col == ey.row) t += frame_of(block_[ex.col], ey.col, ex.row) * ex.value * ey.value;
      }
    }
    return t;
  }

  std::vector<CMatrix> weighted_;
  RankSignature sig_;
  std::vector<Generator> gens_;
  std::vector<int> block_;
  std::vector<CMatrix> frames_;
};

struct RestartOutcome {
  CMatrix unitary;
  int iterations = 0;
  std::vector<double> history;
};

inline RestartOutcome ascend(FrameObjective& obj, CMatrix u, const SolveConfig& cfg) {
  RestartOutcome out;
  const Index d = obj.dim();
  const auto& gens = obj.generators();
  double f = obj.value(u);
  out.history.push_back(f);

  auto step_to = [&](const RVector& x, double t) {
    return CMatrix(u * exp_skew_hermitian(generator_matrix(gens, t * x, d)));
  };

  for (int it = 0; it < cfg.max_iterations; ++it) {
    obj.set_frame(u);
    const RVector g = obj.gradient();
    if (g.norm() <= cfg.gradient_tol) break;
    const Eigen::MatrixXd h = obj.hessian();
    Eigen::LLT<Eigen::MatrixXd> llt(-h);
    RVector dir;
    double t = 1.0;
    if (llt.info() == Eigen::Success) {
      dir = llt.solve(g);
      // cap the rotation at about one radian
      if (dir.norm() > 1.0) t = 1.0 / dir.norm();
    } else {
      dir = g;
      t = 1.0 / std::max(1.0, g.norm());
    }
    const double slope = g.dot(dir);
    bool accepted = false;
    for (; t > 1e-14; t *= 0.5) {
      const CMatrix trial = step_to(dir, t);
      const double ft = obj.value(trial);
      if (ft >= f + cfg.armijo * t * slope) {
        u = lowdin_orthonormalize(trial);
        f = obj.value(u);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++out.iterations;
    out.history.push_back(f);
  }

  // Newton on the stationarity equations; a step is kept only when it
  // shrinks the gradient.
  for (int it = 0; it < cfg.polish_iterations; ++it) {
    obj.set_frame(u);
    const RVector g = obj.gradient();
    if (g.norm() <= cfg.gradient_tol) break;
    const Eigen::MatrixXd h = obj.hessian();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
    if (!lu.isInvertible()) break;
    const RVector dir = -lu.solve(g);
    const CMatrix trial = lowdin_orthonormalize(step_to(dir, 1.0));
    obj.set_frame(trial);
    if (!(obj.gradient().norm() < g.norm())) break;
    u = trial;
    ++out.iterations;
  }
  out.unitary = std::move(u);
  return out;
}

inline std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart + 1));
}

}  // namespace detail

inline SolveResult solve(const Ensemble& p, const SolveConfig& cfg = {}) {
  detail::FrameObjective obj(p);
  SolveResult best;
  bool have_best = false;
  const int total = std::max(cfg.restarts, 1);
  int run = 0;
  for (int k = 0; k < total; ++k) {
    CMatrix start;
    if (k == 0 && cfg.pgm_warm_start) {
      start = pgm(p, cfg.tol).basis();
    } else {
      Rng rng(detail::restart_seed(cfg.seed, k));
      start = haar_unitary(p.dim(), rng);
    }
    detail::RestartOutcome outcome = detail::ascend(obj, std::move(start), cfg);
    ++run;
    SolveResult candidate =
        finalize_result(p, ProjectiveMeasurement::from_unitary(outcome.unitary, p.signature()), cfg.tol);
    candidate.iterations = outcome.iterations;
    candidate.restart_index = k;
    candidate.objective_history = std::move(outcome.history);
    // certified beats uncertified, then higher value; ties keep the earlier restart
    const bool better = !have_best || (candidate.certified && !best.certified) ||
                        (candidate.certified == best.certified && candidate.success_prob > best.success_prob);
    if (better) {
      best = std::move(candidate);
      have_best = true;
    }
    if (best.certified && cfg.stop_at_first_certified) break;
  }
  best.restarts_run = run;
  if (!best.certified && cfg.require_certified) throw NoConvergenceError(best);
  return best;
}

}  // namespace medli

#endif  // MEDLI_SOLVER_HPP
