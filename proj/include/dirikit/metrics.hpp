#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dirikit/core.hpp"
#include "dirikit/error.hpp"
#include "dirikit/orderiso.hpp"
#include "dirikit/report.hpp"
#include "dirikit/spectral.hpp"

namespace dirikit {

/// Symmetric, nonnegative, zero on the diagonal, triangle inequality up to
/// a relative slack.
class PseudoMetric {
 public:
  explicit PseudoMetric(Matrix d, const Tolerance& tol = {}) : d_(std::move(d)) {
    if (d_.rows() != d_.cols()) throw Error(ErrorCode::InvalidMetric, "metric matrix must be square");
    if (!d_.allFinite()) throw Error(ErrorCode::InvalidMetric, "metric entries must be finite");
    const Eigen::Index n = d_.rows();
    const double scale = n > 0 ? d_.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index x = 0; x < n; ++x) {
      if (d_(x, x) != 0.0) throw Error(ErrorCode::InvalidMetric, "metric must vanish on the diagonal");
      for (Eigen::Index y = 0; y < n; ++y) {
        if (d_(x, y) < 0.0) throw Error(ErrorCode::InvalidMetric, "metric entries must be >= 0");
        if (d_(x, y) != d_(y, x)) throw Error(ErrorCode::InvalidMetric, "metric must be symmetric");
      }
    }
    for (Eigen::Index x = 0; x < n; ++x) {
      for (Eigen::Index y = 0; y < n; ++y) {
        for (Eigen::Index z = 0; z < n; ++z) {
          if (d_(x, z) > d_(x, y) + d_(y, z) + tol.bound(scale)) {
            std::ostringstream msg;
            msg << "triangle inequality fails at (" << x << "," << y << "," << z << ")";
            throw Error(ErrorCode::InvalidMetric, msg.str());
          }
        }
      }
    }
  }

  static PseudoMetric zero(Eigen::Index n) { return PseudoMetric(Matrix::Zero(n, n)); }

  const Matrix& matrix() const { return d_; }
  Eigen::Index dim() const { return d_.rows(); }
  double operator()(Eigen::Index x, Eigen::Index y) const { return d_(x, y); }

  PseudoMetric scaled(double s) const {
    if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidMetric, "metric scale must be finite and >= 0");
    return PseudoMetric(s * d_);
  }

 private:
  Matrix d_;
};

namespace detail {

inline void require_resistance_form(const GraphForm& Q) {
  if (!is_irreducible(Q)) throw Error(ErrorCode::NotConnected, "resistance needs a connected graph");
  if (!is_recurrent(Q)) throw Error(ErrorCode::HasKilling, "resistance is defined for forms without killing");
}

// Pseudoinverse of B = diag(deg) - b, the matrix of E(f) = 1/2 sum b (df)^2.
inline Matrix laplacian_pinv(const GraphForm& Q) {
  const Matrix B = Matrix(Q.degree().asDiagonal()) - Q.conductance();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(B);
  const Vector& lambda = solver.eigenvalues();
  const double cutoff = 1e-12 * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
  Vector inv = Vector::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff) inv(i) = 1.0 / lambda(i);
  }
  const Matrix& V = solver.eigenvectors();
  return V * inv.asDiagonal() * V.transpose();
}

inline Matrix resistance_from_pinv(const Matrix& P) {
  const Eigen::Index n = P.rows();
  Matrix R(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x; y < n; ++y) {
      const double r = x == y ? 0.0 : std::max(0.0, P(x, x) + P(y, y) - 2.0 * P(x, y));
      R(x, y) = r;
      R(y, x) = r;
    }
  }
  return R;
}

}  // namespace detail

/// (e_x - e_y)^T B^+ (e_x - e_y).
inline double effective_resistance(const GraphForm& Q, std::size_t x, std::size_t y) {
  detail::require_resistance_form(Q);
  if (x >= Q.size() || y >= Q.size()) throw Error(ErrorCode::UnknownVertex, "vertex index out of range");
  if (x == y) return 0.0;
  const Matrix P = detail::laplacian_pinv(Q);
  const auto xi = static_cast<Eigen::Index>(x);
  const auto yi = static_cast<Eigen::Index>(y);
  return P(xi, xi) + P(yi, yi) - 2.0 * P(xi, yi);
}

inline double effective_resistance(const GraphForm& Q, std::string_view x, std::string_view y) {
  return effective_resistance(Q, Q.space().require_index(x), Q.space().require_index(y));
}

inline PseudoMetric resistance_matrix(const GraphForm& Q) {
  detail::require_resistance_form(Q);
  return PseudoMetric(detail::resistance_from_pinv(detail::laplacian_pinv(Q)));
}

/// For U intertwining recurrent forms h is a constant alpha and
/// Q2(Uf) = beta Q1(f) gives E2(f∘tau) = (beta/alpha^2) E1(f), hence
///
///   alpha^2 R1(tau y, tau z) = beta R2(y, z).
///
/// Summing h^2 m2 = beta m1∘tau gives alpha^2 m2(X2) = beta m1(X1), so with
/// equal total masses tau is an isometry of the resistance metrics.
inline VerificationReport verify_resistance_isometry(const OrderIso& U, const GraphForm& Q1, const GraphForm& Q2,
                                                     const Tolerance& tol = {}) {
  if (!is_recurrent(Q1) || !is_recurrent(Q2)) {
    throw Error(ErrorCode::NotRecurrent, "resistance isometry needs recurrent forms");
  }
  const Generator G1 = generator(Q1);
  const Generator G2 = generator(Q2);
  if (!intertwines(U, G1, G2, tol)) throw Error(ErrorCode::NotIntertwining, "U does not intertwine the forms");

  const Matrix R1 = resistance_matrix(Q1).matrix();
  const Matrix R2 = resistance_matrix(Q2).matrix();
  const double beta = measure_beta(U);
  const double alpha = U.h().mean();
  const auto n = static_cast<Eigen::Index>(U.size());

  VerificationReport report;
  report.set_value("alpha", alpha);
  report.set_value("beta", beta);
  report.set_value("mass_ratio", Q2.space().total_mass() / Q1.space().total_mass());

  double res = 0.0;
  double scale = 0.0;
  double plain = 0.0;
  double plain_scale = 0.0;
  for (Eigen::Index y = 0; y < n; ++y) {
    const auto ty = static_cast<Eigen::Index>(U.tau(static_cast<std::size_t>(y)));
    for (Eigen::Index z = 0; z < n; ++z) {
      const auto tz = static_cast<Eigen::Index>(U.tau(static_cast<std::size_t>(z)));
      const double lhs = alpha * alpha * R1(ty, tz);
      res = std::max(res, std::abs(lhs - beta * R2(y, z)));
      scale = std::max(scale, lhs);
      plain = std::max(plain, std::abs(R1(ty, tz) - R2(y, z)));
      plain_scale = std::max(plain_scale, R1(ty, tz));
    }
  }
  report.add("resistance_scaling", res, tol.bound(scale));

  const double m1 = Q1.space().total_mass();
  const double m2 = Q2.space().total_mass();
  if (tol.accepts(std::abs(m1 - m2), std::max(m1, m2))) {
    report.add("equal_mass_alpha", std::abs(alpha * alpha - beta), tol.bound(beta));
    report.add("equal_mass_isometry", plain, tol.bound(plain_scale));
  }
  return report;
}

struct IntrinsicResult {
  bool intrinsic = false;
  Vector slack;  // m(x) - sum_y b(x,y) d(x,y)^2
};

/// Membership in I(Q): sum_y b(x,y) d(x,y)^2 <= m(x) at every vertex.
inline IntrinsicResult is_intrinsic(const GraphForm& Q, const PseudoMetric& d, const Tolerance& tol = {}) {
  if (d.dim() != Q.dim()) throw Error(ErrorCode::DimensionMismatch, "metric does not match the vertex set");
  const Matrix& D = d.matrix();
  IntrinsicResult r;
  r.slack = Q.space().measure() - (Q.conductance().array() * D.array().square()).rowwise().sum().matrix();
  r.intrinsic = true;
  for (Eigen::Index x = 0; x < Q.dim(); ++x) {
    if (r.slack(x) < -tol.bound(Q.space().m(static_cast<std::size_t>(x)))) r.intrinsic = false;
  }
  return r;
}

/// Path metric with edge lengths min(sqrt(m/Deg)) over the two endpoints.
inline PseudoMetric canonical_intrinsic_metric(const GraphForm& Q) {
  if (!is_irreducible(Q)) throw Error(ErrorCode::NotConnected, "canonical metric needs a connected graph");
  const Eigen::Index n = Q.dim();
  const Vector deg = Q.degree();
  const double inf = std::numeric_limits<double>::infinity();
  Matrix D = Matrix::Constant(n, n, inf);
  for (Eigen::Index x = 0; x < n; ++x) {
    D(x, x) = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y || Q.conductance()(x, y) <= 0.0) continue;
      const double sx = std::sqrt(Q.space().measure()(x) / deg(x));
      const double sy = std::sqrt(Q.space().measure()(y) / deg(y));
      D(x, y) = std::min(sx, sy);
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index x = 0; x < n; ++x) {
      for (Eigen::Index y = 0; y < n; ++y) D(x, y) = std::min(D(x, y), D(x, k) + D(k, y));
    }
  }
  // Floyd-Warshall can leave last-bit asymmetry.
  const Matrix sym = D.cwiseMin(D.transpose());
  return PseudoMetric(sym);
}

/// result(y,z) = d(tau y, tau z).
inline PseudoMetric pushforward_metric(const PseudoMetric& d, const std::vector<std::size_t>& tau) {
  if (static_cast<Eigen::Index>(tau.size()) != d.dim()) {
    throw Error(ErrorCode::SpaceMismatch, "tau and metric sizes differ");
  }
  std::vector<bool> hit(tau.size(), false);
  for (std::size_t x : tau) {
    if (x >= tau.size() || hit[x]) throw Error(ErrorCode::SpaceMismatch, "tau is not a bijection");
    hit[x] = true;
  }
  const auto n = d.dim();
  Matrix out(n, n);
  for (Eigen::Index y = 0; y < n; ++y) {
    for (Eigen::Index z = 0; z < n; ++z) {
      out(y, z) = d(static_cast<Eigen::Index>(tau[static_cast<std::size_t>(y)]),
                    static_cast<Eigen::Index>(tau[static_cast<std::size_t>(z)]));
    }
  }
  return PseudoMetric(std::move(out));
}

inline PseudoMetric pushforward_metric(const PseudoMetric& d, const OrderIso& U) {
  if (d.dim() != U.source().dim()) throw Error(ErrorCode::SpaceMismatch, "metric does not live on the source");
  return pushforward_metric(d, U.tau());
}

struct MetricSample {
  std::string name;
  PseudoMetric d;
};

/// Largest s with s*d still intrinsic; some vertex then has zero slack.
/// Returns 0 when d vanishes on every edge.
inline double boundary_scale(const GraphForm& Q, const PseudoMetric& d) {
  const Vector energy = (Q.conductance().array() * d.matrix().array().square()).rowwise().sum();
  double s = std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < Q.dim(); ++x) {
    if (energy(x) > 0.0) s = std::min(s, std::sqrt(Q.space().measure()(x) / energy(x)));
  }
  return std::isfinite(s) ? s : 0.0;
}

/// zero, canonical, boundary rescalings of the canonical and resistance
/// metrics, and x2 inflations of the boundary ones.
inline std::vector<MetricSample> default_intrinsic_samples(const GraphForm& Q) {
  std::vector<MetricSample> out;
  out.push_back({"zero", PseudoMetric::zero(Q.dim())});
  const PseudoMetric canon = canonical_intrinsic_metric(Q);
  out.push_back({"canonical", canon});
  const PseudoMetric canon_edge = canon.scaled(boundary_scale(Q, canon));
  out.push_back({"canonical_boundary", canon_edge});
  out.push_back({"canonical_inflated", canon_edge.scaled(2.0)});
  if (is_recurrent(Q) && Q.dim() > 1) {
    const PseudoMetric R = resistance_matrix(Q);
    const PseudoMetric R_edge = R.scaled(boundary_scale(Q, R));
    out.push_back({"resistance_boundary", R_edge});
    out.push_back({"resistance_inflated", R_edge.scaled(2.0)});
  }
  return out;
}

namespace detail {

inline std::string format_vector(const Vector& v) {
  std::ostringstream s;
  s.precision(6);
  s << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v(i);
  s << "]";
  return s.str();
}

}  // namespace detail

/// For each sample d on X1: d intrinsic for Q1 iff d∘(tau x tau) intrinsic for
/// Q2. With constant h = alpha the slacks transport exactly,
/// slack2(y) = (beta/alpha^2) slack1(tau y); that identity is checked too.
inline VerificationReport verify_intrinsic_bijection(const OrderIso& U, const GraphForm& Q1, const GraphForm& Q2,
                                                     const std::vector<MetricSample>& samples,
                                                     const Tolerance& tol = {}) {
  if (!is_recurrent(Q1) || !is_recurrent(Q2)) {
    throw Error(ErrorCode::NotRecurrent, "intrinsic bijection needs recurrent forms");
  }
  if (!intertwines(U, generator(Q1), generator(Q2), tol)) {
    throw Error(ErrorCode::NotIntertwining, "U does not intertwine the forms");
  }
  const double beta = measure_beta(U);
  const double alpha = U.h().mean();
  const double ratio = beta / (alpha * alpha);

  VerificationReport report;
  report.set_value("slack_ratio", ratio);
  for (const auto& sample : samples) {
    const auto r1 = is_intrinsic(Q1, sample.d, tol);
    const auto r2 = is_intrinsic(Q2, pushforward_metric(sample.d, U), tol);

    auto& eq = report.add("membership:" + sample.name, r1.intrinsic == r2.intrinsic ? 0.0 : 1.0, 0.0);
    if (!eq.pass) {
      eq.detail = "slack1 " + detail::format_vector(r1.slack) + " slack2 " + detail::format_vector(r2.slack);
    }
    report.set_value("intrinsic:" + sample.name, r1.intrinsic ? 1.0 : 0.0);

    double res = 0.0;
    for (Eigen::Index y = 0; y < Q2.dim(); ++y) {
      const auto ty = static_cast<Eigen::Index>(U.tau(static_cast<std::size_t>(y)));
      res = std::max(res, std::abs(r2.slack(y) - ratio * r1.slack(ty)));
    }
    report.add("slack_transport:" + sample.name, res, tol.bound(Q2.space().measure().maxCoeff()));
  }
  return report;
}

}  // namespace dirikit
