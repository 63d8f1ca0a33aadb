#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dirikit/core.hpp"
#include "dirikit/error.hpp"
#include "dirikit/feasibility.hpp"

namespace dirikit {

struct SpectralData {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns, orthonormal in <.,.>_m
};

/// Eigen-decomposition of L through the symmetric matrix M^{1/2} L M^{-1/2}.
inline SpectralData spectral_data(const Generator& G) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(G.symmetrized());
  const Vector inv_sqrt_m = G.space().measure().cwiseSqrt().cwiseInverse();
  return {solver.eigenvalues(), inv_sqrt_m.asDiagonal() * solver.eigenvectors()};
}

/// T_t = exp(-tL).
inline Matrix semigroup(const Generator& G, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::NegativeTime, "semigroup time must be >= 0");
  const Eigen::Index n = G.dim();
  if (t == 0.0) return Matrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(G.symmetrized());
  const Vector decay = (-t * solver.eigenvalues().array()).exp();
  const Matrix& V = solver.eigenvectors();
  const Vector sqrt_m = G.space().measure().cwiseSqrt();
  Matrix S = V * decay.asDiagonal() * V.transpose();
  return sqrt_m.cwiseInverse().asDiagonal() * S * sqrt_m.asDiagonal();
}

inline bool is_irreducible(const GraphForm& Q) { return detail::connected(Q.conductance()); }

inline bool is_irreducible(const Generator& G) { return detail::connected(G.matrix()); }

/// On a finite space 1 is in the domain, so recurrence is Q(1) = 0, i.e. c == 0.
inline bool is_recurrent(const GraphForm& Q) { return (Q.killing().array() == 0.0).all(); }

/// h >= 0 is excessive iff Lh >= 0. If Lh >= 0 then d/dt T_t h = -T_t L h <= 0
/// because T_t is positivity preserving, so T_t h <= T_0 h = h; conversely
/// Lh = lim (h - T_t h)/t >= 0.
inline bool is_excessive(const Generator& G, const Vector& h, const Tolerance& tol = {}) {
  G.space().require_dim(h);
  if ((h.array() < 0.0).any()) throw Error(ErrorCode::NegativeInput, "excessive candidates must be >= 0");
  const Vector Lh = G.matrix() * h;
  const double scale = G.matrix().cwiseAbs().maxCoeff() * h.cwiseAbs().maxCoeff();
  return (Lh.array() >= -tol.bound(scale)).all();
}

/// Searches the excessive cone for a non-constant member by linear
/// programming over ordered vertex pairs (x0, x1):
///
///   minimize sum h  s.t.  Lh >= 0,  h >= 1,  h(x0) = 1,  h(x1) >= 1 + delta.
///
/// The feasible solution of least total mass is returned (ties: first pair in
/// vertex order). None exists exactly when the form is recurrent.
inline std::optional<Vector> find_nonconstant_excessive(const Generator& G, double delta = 1e-3) {
  if (!is_irreducible(G)) throw Error(ErrorCode::NotIrreducible, "generator is not irreducible");
  const Eigen::Index n = G.dim();
  if (n < 2) return std::nullopt;

  // Rows scaled by m(x) so the constraints read in conductance units.
  const Matrix B = G.space().measure().asDiagonal() * G.matrix();
  const Vector B1 = B.rowwise().sum();

  std::optional<Vector> best;
  double best_mass = 0.0;
  for (Eigen::Index x0 = 0; x0 < n; ++x0) {
    for (Eigen::Index x1 = 0; x1 < n; ++x1) {
      if (x1 == x0) continue;
      // h = 1 + u with u >= 0 and u(x0) = 0; drop the x0 column.
      Matrix A = Matrix::Zero(n + 1, n - 1);
      Vector rhs(n + 1);
      auto col = [&](Eigen::Index y) { return y < x0 ? y : y - 1; };
      for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) {
          if (y != x0) A(x, col(y)) = B(x, y);
        }
        rhs(x) = -B1(x);
      }
      A(n, col(x1)) = 1.0;
      rhs(n) = delta;
      const auto sol = lp::minimize(A, rhs, Vector::Ones(n - 1));
      if (!sol) continue;
      if (!best || sol->objective < best_mass - 1e-12) {
        Vector h = Vector::Ones(n);
        for (Eigen::Index y = 0; y < n; ++y) {
          if (y != x0) h(y) += sol->x(col(y));
        }
        best = std::move(h);
        best_mass = sol->objective;
      }
    }
  }
  return best;
}

struct TruncationResult {
  double q_min = 0.0;  // Q(f ∧ h)
  double q_pos = 0.0;  // Q((f - h)_+)
  bool pass = false;   // Q(f ∧ h) <= Q(f) and Q((f - h)_+) <= 4 Q(f)
};

inline TruncationResult check_truncation(const GraphForm& Q, const Vector& f, const Vector& h,
                                         const Tolerance& tol = {}) {
  Q.space().require_dim(f);
  if (!is_excessive(generator(Q), h, tol)) throw Error(ErrorCode::NotExcessive, "h is not excessive");
  const Vector lower = f.cwiseMin(h);
  const Vector excess = (f - h).cwiseMax(0.0);
  TruncationResult r;
  r.q_min = evaluate(Q, lower);
  r.q_pos = evaluate(Q, excess);
  const double qf = evaluate(Q, f);
  r.pass = r.q_min <= qf + tol.bound(qf) && r.q_pos <= 4.0 * qf + tol.bound(qf);
  return r;
}

/// Dimension of {phi : [diag(phi), L] = 0}, from the linear system
/// (phi(x) - phi(y)) L(x,y) = 0 over all off-diagonal entries.
inline Eigen::Index commutant_dimension(const Generator& G) {
  const Eigen::Index n = G.dim();
  const Matrix& L = G.matrix();
  std::vector<Eigen::RowVectorXd> rows;
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y || L(x, y) == 0.0) continue;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row(x) = L(x, y);
      row(y) = -L(x, y);
      rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) return n;
  Matrix system(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) system.row(static_cast<Eigen::Index>(r)) = rows[r];
  Eigen::JacobiSVD<Matrix> svd(system);
  const Vector& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv.maxCoeff();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff ? 1 : 0;
  return n - rank;
}

/// True iff only scalar multiplication operators commute with the semigroup.
inline bool commutant_is_trivial(const Generator& G) { return G.dim() <= 1 || commutant_dimension(G) == 1; }

}  // namespace dirikit
