#pragma once

// Order isomorphisms between finite L^2 spaces. Every such map is a weighted
// composition operator
//
//   (Uf)(y) = h(y) f(tau(y)),   tau: X2 -> X1 a bijection, h > 0,
//
// with adjoint (U*g)(x) = m2(tau^-1 x)/m1(x) * h(tau^-1 x) g(tau^-1 x).
// If U intertwines two irreducible semigroups then U*U = UU* = beta and
// h^2 m2 = beta m1∘tau for a single constant beta = ||U||^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dirikit/core.hpp"
#include "dirikit/error.hpp"
#include "dirikit/report.hpp"
#include "dirikit/spectral.hpp"

namespace dirikit {

class OrderIso {
 public:
  OrderIso(MeasureSpace source, MeasureSpace target, std::vector<std::size_t> tau, Vector h,
           std::optional<double> beta = std::nullopt)
      : source_(std::move(source)), target_(std::move(target)), tau_(std::move(tau)), h_(std::move(h)),
        beta_(beta) {
    const std::size_t n = target_.size();
    if (source_.size() != n) {
      throw Error(ErrorCode::SpaceMismatch, "order isomorphisms need spaces of equal size");
    }
    if (tau_.size() != n || static_cast<std::size_t>(h_.size()) != n) {
      throw Error(ErrorCode::DimensionMismatch, "tau and h must be defined on every target vertex");
    }
    std::vector<bool> hit(n, false);
    for (std::size_t y = 0; y < n; ++y) {
      if (tau_[y] >= n) throw Error(ErrorCode::UnknownVertex, "tau maps outside the source space");
      if (hit[tau_[y]]) throw Error(ErrorCode::SpaceMismatch, "tau is not injective");
      hit[tau_[y]] = true;
      if (!std::isfinite(h_(static_cast<Eigen::Index>(y))) || !(h_(static_cast<Eigen::Index>(y)) > 0.0)) {
        throw Error(ErrorCode::NonPositive, "scaling h must be finite and > 0");
      }
    }
  }

  const MeasureSpace& source() const { return source_; }
  const MeasureSpace& target() const { return target_; }
  const std::vector<std::size_t>& tau() const { return tau_; }
  std::size_t tau(std::size_t y) const { return tau_.at(y); }
  const Vector& h() const { return h_; }
  std::size_t size() const { return tau_.size(); }
  std::optional<double> beta() const { return beta_; }

  OrderIso with_beta(double beta) const {
    OrderIso copy = *this;
    copy.beta_ = beta;
    return copy;
  }

  std::vector<std::size_t> tau_inverse() const {
    std::vector<std::size_t> inv(tau_.size());
    for (std::size_t y = 0; y < tau_.size(); ++y) inv[tau_[y]] = y;
    return inv;
  }

  /// |X2| x |X1| matrix with the single nonzero h(y) at (y, tau(y)) in row y.
  Matrix matrix() const {
    const auto n = static_cast<Eigen::Index>(size());
    Matrix U = Matrix::Zero(n, n);
    for (Eigen::Index y = 0; y < n; ++y) U(y, static_cast<Eigen::Index>(tau_[y])) = h_(y);
    return U;
  }

  /// tau as target-id -> source-id pairs.
  std::map<std::string, std::string> tau_ids() const {
    std::map<std::string, std::string> out;
    for (std::size_t y = 0; y < size(); ++y) out[target_.vertex(y)] = source_.vertex(tau_[y]);
    return out;
  }

 private:
  MeasureSpace source_;
  MeasureSpace target_;
  std::vector<std::size_t> tau_;
  Vector h_;
  std::optional<double> beta_;
};

inline OrderIso identity_iso(const MeasureSpace& space) {
  std::vector<std::size_t> tau(space.size());
  std::iota(tau.begin(), tau.end(), std::size_t{0});
  return OrderIso(space, space, std::move(tau), Vector::Ones(space.dim()));
}

/// Builds an isomorphism from vertex-id keyed tau (target -> source) and h.
inline OrderIso make_iso(const MeasureSpace& source, const MeasureSpace& target,
                         const std::map<std::string, std::string, std::less<>>& tau,
                         const std::map<std::string, double, std::less<>>& h) {
  const std::size_t n = target.size();
  if (tau.size() != n || h.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "tau and h must list every target vertex exactly once");
  }
  std::vector<std::size_t> t(n);
  Vector hv(static_cast<Eigen::Index>(n));
  for (std::size_t y = 0; y < n; ++y) {
    const auto& id = target.vertex(y);
    auto ti = tau.find(id);
    auto hi = h.find(id);
    if (ti == tau.end() || hi == h.end()) {
      throw Error(ErrorCode::UnknownVertex, "tau/h missing target vertex '" + id + "'");
    }
    t[y] = source.require_index(ti->second);
    hv(static_cast<Eigen::Index>(y)) = hi->second;
  }
  return OrderIso(source, target, std::move(t), std::move(hv));
}

/// (Uf)(y) = h(y) f(tau(y)).
inline Vector apply(const OrderIso& U, const Vector& f) {
  U.source().require_dim(f);
  Vector out(static_cast<Eigen::Index>(U.size()));
  for (std::size_t y = 0; y < U.size(); ++y) {
    const auto yi = static_cast<Eigen::Index>(y);
    out(yi) = U.h()(yi) * f(static_cast<Eigen::Index>(U.tau(y)));
  }
  return out;
}

/// (U*g)(x) = [m2(y)/m1(x)] h(y) g(y) with y = tau^-1(x).
inline Vector apply_adjoint(const OrderIso& U, const Vector& g) {
  U.target().require_dim(g);
  Vector out(static_cast<Eigen::Index>(U.size()));
  for (std::size_t y = 0; y < U.size(); ++y) {
    const std::size_t x = U.tau(y);
    const auto yi = static_cast<Eigen::Index>(y);
    out(static_cast<Eigen::Index>(x)) = U.target().m(y) / U.source().m(x) * U.h()(yi) * g(yi);
  }
  return out;
}

/// |X1| x |X2| matrix of U*.
inline Matrix adjoint_matrix(const OrderIso& U) {
  const auto n = static_cast<Eigen::Index>(U.size());
  Matrix A = Matrix::Zero(n, n);
  for (Eigen::Index y = 0; y < n; ++y) {
    const auto x = static_cast<Eigen::Index>(U.tau(static_cast<std::size_t>(y)));
    A(x, y) = U.target().m(static_cast<std::size_t>(y)) / U.source().m(static_cast<std::size_t>(x)) * U.h()(y);
  }
  return A;
}

/// Composition outer∘inner for inner: X1 -> X2 and outer: X2 -> X3.
inline OrderIso compose(const OrderIso& outer, const OrderIso& inner) {
  if (!(outer.source() == inner.target())) {
    throw Error(ErrorCode::SpaceMismatch, "composition needs matching middle spaces");
  }
  std::vector<std::size_t> tau(outer.size());
  Vector h(static_cast<Eigen::Index>(outer.size()));
  for (std::size_t z = 0; z < outer.size(); ++z) {
    const std::size_t y = outer.tau(z);
    tau[z] = inner.tau(y);
    h(static_cast<Eigen::Index>(z)) = outer.h()(static_cast<Eigen::Index>(z)) * inner.h()(static_cast<Eigen::Index>(y));
  }
  std::optional<double> beta;
  if (outer.beta() && inner.beta()) beta = *outer.beta() * *inner.beta();
  return OrderIso(inner.source(), outer.target(), std::move(tau), std::move(h), beta);
}

namespace detail {

inline void require_spaces(const OrderIso& U, const MeasureSpace& s1, const MeasureSpace& s2) {
  if (!(U.source() == s1) || !(U.target() == s2)) {
    throw Error(ErrorCode::SpaceMismatch, "isomorphism spaces do not match the given forms");
  }
}

}  // namespace detail

/// max |U L1 - L2 U| entrywise.
inline double intertwining_residual(const OrderIso& U, const Generator& G1, const Generator& G2) {
  detail::require_spaces(U, G1.space(), G2.space());
  const Matrix Um = U.matrix();
  return (Um * G1.matrix() - G2.matrix() * Um).cwiseAbs().maxCoeff();
}

/// Magnitude against which the intertwining residual is judged.
inline double intertwining_scale(const OrderIso& U, const Generator& G1, const Generator& G2) {
  return U.h().maxCoeff() * std::max(G1.matrix().cwiseAbs().maxCoeff(), G2.matrix().cwiseAbs().maxCoeff());
}

inline bool intertwines(const OrderIso& U, const Generator& G1, const Generator& G2, const Tolerance& tol = {}) {
  return tol.accepts(intertwining_residual(U, G1, G2), intertwining_scale(U, G1, G2));
}

/// beta fitted from the measure identity: sum h^2 m2 / m1(X1).
inline double measure_beta(const OrderIso& U) {
  return (U.h().array().square() * U.target().measure().array()).sum() / U.source().total_mass();
}

/// Checks every rigidity statement for an intertwining isomorphism:
///   unitarity        U*U = beta I and UU* = beta I,
///   measure_identity h^2 m2 = beta m1∘tau,
///   form_scaling     Q2(Uf,Ug) = beta Q1(f,g) on basis pairs,
///   h_excessive      L2 h >= 0,
/// and, when both forms are recurrent, constancy of h with tau_# m2 = alpha m1.
inline VerificationReport certify(const OrderIso& U, const GraphForm& Q1, const GraphForm& Q2,
                                  const Tolerance& tol = {}) {
  const Generator G1 = generator(Q1);
  const Generator G2 = generator(Q2);
  const double residual = intertwining_residual(U, G1, G2);
  const double scale = intertwining_scale(U, G1, G2);
  if (!tol.accepts(residual, scale)) {
    std::ostringstream msg;
    msg << "max|U L1 - L2 U| = " << residual;
    throw Error(ErrorCode::NotIntertwining, msg.str());
  }
  if (!is_irreducible(Q1) || !is_irreducible(Q2)) {
    throw Error(ErrorCode::NotIrreducible, "certification needs irreducible forms");
  }

  VerificationReport report;
  report.add("intertwining", residual, tol.bound(scale));

  const auto n = static_cast<Eigen::Index>(U.size());
  const Matrix Um = U.matrix();
  const Matrix Ua = adjoint_matrix(U);
  const Matrix UaU = Ua * Um;
  const Matrix UUa = Um * Ua;
  const Vector diag = UaU.diagonal();
  const double beta = 0.5 * (diag.maxCoeff() + diag.minCoeff());
  const Matrix I = Matrix::Identity(n, n);
  const double unitary_res =
      std::max((UaU - beta * I).cwiseAbs().maxCoeff(), (UUa - beta * I).cwiseAbs().maxCoeff());
  report.add("unitarity", unitary_res, tol.bound(beta));
  report.set_value("beta", beta);

  double measure_res = 0.0;
  for (Eigen::Index y = 0; y < n; ++y) {
    const double pushed = beta * U.source().m(U.tau(static_cast<std::size_t>(y)));
    const double lhs = U.h()(y) * U.h()(y) * U.target().m(static_cast<std::size_t>(y));
    measure_res = std::max(measure_res, std::abs(lhs - pushed) / pushed);
  }
  report.add("measure_identity", measure_res, tol.bound(1.0));

  const double beta_measure = measure_beta(U);
  report.add("beta_coherence", std::abs(beta - beta_measure), tol.bound(beta));

  double form_res = 0.0;
  double form_scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector ei = Vector::Unit(n, i);
    const Vector Uei = apply(U, ei);
    for (Eigen::Index j = i; j < n; ++j) {
      const Vector ej = Vector::Unit(n, j);
      const double q1 = evaluate(Q1, ei, ej);
      form_res = std::max(form_res, std::abs(evaluate(Q2, Uei, apply(U, ej)) - beta * q1));
      form_scale = std::max(form_scale, std::abs(beta * q1));
    }
  }
  report.add("form_scaling", form_res, tol.bound(form_scale));

  const Vector L2h = G2.matrix() * U.h();
  const double excess_scale = G2.matrix().cwiseAbs().maxCoeff() * U.h().maxCoeff();
  report.add("h_excessive", std::max(0.0, -L2h.minCoeff()), tol.bound(excess_scale));

  const double hmin = U.h().minCoeff();
  const double hmax = U.h().maxCoeff();
  report.set_value("h_min", hmin);
  report.set_value("h_max", hmax);
  report.set_value("h_ratio", hmax / hmin);

  if (is_recurrent(Q1) && is_recurrent(Q2)) {
    report.add("h_constant", hmax / hmin - 1.0, tol.bound(1.0));
    const double hbar = U.h().mean();
    const double alpha = beta / (hbar * hbar);
    double push_res = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      const double expected = alpha * U.source().m(U.tau(static_cast<std::size_t>(y)));
      push_res = std::max(push_res, std::abs(U.target().m(static_cast<std::size_t>(y)) - expected) / expected);
    }
    report.add("measure_pushforward", push_res, tol.bound(1.0));
    report.set_value("pushforward_alpha", alpha);
  }
  return report;
}

struct DoobPair {
  GraphForm form;
  OrderIso iso;
};

/// Doob transform by a strictly positive excessive h: the form on h^2 m whose
/// generator is M_{1/h} L M_h, together with U f = f / h (tau = id, beta = 1).
inline DoobPair doob_pair(const GraphForm& Q, const Vector& h, const Tolerance& tol = {}) {
  Q.space().require_dim(h);
  if ((h.array() <= 0.0).any() || !h.allFinite()) {
    throw Error(ErrorCode::NonPositive, "Doob transform needs a strictly positive h");
  }
  if (!is_excessive(generator(Q), h, tol)) throw Error(ErrorCode::NotExcessive, "h is not excessive");

  const Eigen::Index n = Q.dim();
  const Matrix& b = Q.conductance();
  const Vector m2 = h.array().square() * Q.space().measure().array();
  Matrix b2 = Matrix::Zero(n, n);
  Vector c2(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double flux = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x) continue;
      b2(x, y) = h(x) * h(y) * b(x, y);
      flux += b(x, y) * (h(x) - h(y));
    }
    // Diagonal remainder m2(x) L2(x,x) - sum_y b2(x,y), written without the
    // cancelling terms: h(x) [sum_y b(x,y)(h(x)-h(y)) + c(x) h(x)] = m(x) h(x) (Lh)(x).
    double kill = h(x) * (flux + Q.killing()(x) * h(x));
    const double bound = tol.bound(h(x) * h(x) * (b.row(x).sum() + Q.killing()(x)));
    if (kill < 0.0) {
      if (kill < -bound) throw Error(ErrorCode::NotExcessive, "Doob transform produced negative killing");
      kill = 0.0;
    }
    c2(x) = kill;
  }
  GraphForm Q2(MeasureSpace(Q.space().vertices(), m2), std::move(b2), std::move(c2));

  std::vector<std::size_t> tau(Q.size());
  std::iota(tau.begin(), tau.end(), std::size_t{0});
  OrderIso U(Q.space(), Q2.space(), std::move(tau), h.cwiseInverse(), 1.0);
  return {std::move(Q2), std::move(U)};
}

}  // namespace dirikit
