#pragma once

// Beurling-Deny data of a finite form. The strongly local part vanishes on a
// finite space, so Q splits into a jump measure J on ordered pairs x != y and
// a killing measure k:
//
//   Q(f) = sum_{x != y} J(x,y) (f(x) - f(y))^2 + sum_x k(x) f(x)^2.
//
// The sum runs over ORDERED pairs, so J(x,y) = b(x,y) / 2, not b(x,y).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include "dirikit/core.hpp"
#include "dirikit/error.hpp"
#include "dirikit/orderiso.hpp"
#include "dirikit/report.hpp"
#include "dirikit/spectral.hpp"

namespace dirikit {

struct JumpKilling {
  MeasureSpace space;
  Matrix J;  // J(x,y) for x != y, symmetric, zero diagonal
  Vector k;

  /// sum_{x != y} J(x,y)(f(x)-f(y))^2 + sum k f^2.
  double energy(const Vector& f) const {
    space.require_dim(f);
    double jump = 0.0;
    for (Eigen::Index x = 0; x < J.rows(); ++x) {
      for (Eigen::Index y = 0; y < J.cols(); ++y) {
        if (x != y) jump += J(x, y) * (f(x) - f(y)) * (f(x) - f(y));
      }
    }
    return jump + (k.array() * f.array().square()).sum();
  }

  friend bool operator==(const JumpKilling& a, const JumpKilling& b) {
    return a.space == b.space && a.J == b.J && a.k == b.k;
  }
};

inline JumpKilling decompose(const GraphForm& Q) {
  return {Q.space(), 0.5 * Q.conductance(), Q.killing()};
}

/// Inverse of decompose.
inline GraphForm reconstruct(const JumpKilling& jk) {
  for (Eigen::Index x = 0; x < jk.J.rows(); ++x) {
    for (Eigen::Index y = x + 1; y < jk.J.cols(); ++y) {
      if (jk.J(x, y) != jk.J(y, x)) throw Error(ErrorCode::DimensionMismatch, "jump measure is not symmetric");
    }
  }
  return GraphForm(jk.space, 2.0 * jk.J, jk.k);
}

/// Q_phi(f) = Q(phi f) - Q(phi f^2, phi).
inline double truncated_form(const GraphForm& Q, const Vector& phi, const Vector& f) {
  Q.space().require_dim(phi);
  Q.space().require_dim(f);
  const Vector phi_f = phi.cwiseProduct(f);
  const Vector phi_f2 = phi_f.cwiseProduct(f);
  return evaluate(Q, phi_f) - evaluate(Q, phi_f2, phi);
}

/// sum_{x != y} phi(x) phi(y) (f(x)-f(y))^2 J(x,y); equals Q_phi(f) on a
/// finite space.
inline double truncated_jump_energy(const JumpKilling& jk, const Vector& phi, const Vector& f) {
  jk.space.require_dim(phi);
  jk.space.require_dim(f);
  double sum = 0.0;
  for (Eigen::Index x = 0; x < jk.J.rows(); ++x) {
    for (Eigen::Index y = 0; y < jk.J.cols(); ++y) {
      if (x != y) sum += phi(x) * phi(y) * (f(x) - f(y)) * (f(x) - f(y)) * jk.J(x, y);
    }
  }
  return sum;
}

namespace detail {

// Q(f) - jump(f) - killing(f) over the basis and the constant function; any
// nonzero value would be a strongly local part.
inline double local_part_residual(const GraphForm& Q, const JumpKilling& jk) {
  const Eigen::Index n = Q.dim();
  double res = std::abs(evaluate(Q, Vector::Ones(n)) - jk.energy(Vector::Ones(n)));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector e = Vector::Unit(n, i);
    res = std::max(res, std::abs(evaluate(Q, e) - jk.energy(e)));
  }
  return res;
}

}  // namespace detail

/// beta J1(tau x, tau y) = h(x) h(y) J2(x,y) over ordered pairs of X2.
inline VerificationReport verify_jump_transform(const OrderIso& U, const GraphForm& Q1, const GraphForm& Q2,
                                                const Tolerance& tol = {}) {
  const Generator G1 = generator(Q1);
  const Generator G2 = generator(Q2);
  if (!intertwines(U, G1, G2, tol)) throw Error(ErrorCode::NotIntertwining, "U does not intertwine the forms");

  const JumpKilling jk1 = decompose(Q1);
  const JumpKilling jk2 = decompose(Q2);
  const double beta = measure_beta(U);
  const auto n = static_cast<Eigen::Index>(U.size());

  VerificationReport report;
  report.set_value("beta", beta);
  double res = 0.0;
  double scale = 0.0;
  std::string worst;
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      const auto tx = static_cast<Eigen::Index>(U.tau(static_cast<std::size_t>(x)));
      const auto ty = static_cast<Eigen::Index>(U.tau(static_cast<std::size_t>(y)));
      const double lhs = beta * jk1.J(tx, ty);
      const double r = std::abs(lhs - U.h()(x) * U.h()(y) * jk2.J(x, y));
      scale = std::max(scale, lhs);
      if (r > res) {
        res = r;
        worst = Q2.space().vertex(static_cast<std::size_t>(x)) + "," + Q2.space().vertex(static_cast<std::size_t>(y));
      }
    }
  }
  auto& jump = report.add("jump_transform", res, tol.bound(scale));
  if (!worst.empty()) jump.detail = "largest residual at (" + worst + ")";

  const double local1 = detail::local_part_residual(Q1, jk1);
  const double local2 = detail::local_part_residual(Q2, jk2);
  const double local_scale = std::max(Q1.conductance().maxCoeff() + Q1.killing().maxCoeff(),
                                      Q2.conductance().maxCoeff() + Q2.killing().maxCoeff());
  report.add("local_part_zero", std::max(local1, local2), tol.bound(local_scale));
  return report;
}

/// Killing of the intertwined form, read off L2 = U L1 U^{-1} = (1/beta) U L1 U*
/// on the target measure: c2(y) = m2(y) * (L2 1)(y).
inline Vector induced_killing(const OrderIso& U, const GraphForm& Q1, const Tolerance& tol = {}) {
  detail::require_spaces(U, Q1.space(), U.target());
  const Generator G1 = generator(Q1);
  const double beta = U.beta().value_or(measure_beta(U));
  const Matrix L2 = U.matrix() * G1.matrix() * adjoint_matrix(U) / beta;
  const Vector& m2 = U.target().measure();
  Vector c2 = m2.cwiseProduct(L2.rowwise().sum());
  for (Eigen::Index y = 0; y < c2.size(); ++y) {
    const double bound = tol.bound(m2(y) * L2.row(y).cwiseAbs().sum());
    if (c2(y) < -bound) {
      std::ostringstream msg;
      msg << "conjugated generator has killing " << c2(y) << " at '" << U.target().vertex(static_cast<std::size_t>(y))
          << "'";
      throw Error(ErrorCode::NotMarkovian, msg.str());
    }
    if (std::abs(c2(y)) <= bound) c2(y) = 0.0;
  }
  return c2;
}

}  // namespace dirikit
