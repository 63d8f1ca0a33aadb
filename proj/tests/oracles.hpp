#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical routines; inputs are read through the
// plain accessors (b, c, m) and everything else is recomputed from scratch.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "dirikit/core.hpp"
#include "dirikit/random.hpp"

namespace oracle {

using dirikit::GraphForm;
using dirikit::Matrix;
using dirikit::Vector;

/// Form matrix A with Q(f,g) = f^T A g.
inline Matrix form_matrix(const GraphForm& Q) {
  const Eigen::Index n = Q.dim();
  Matrix A = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      const double b = Q.conductance()(x, y);
      A(x, x) += b;
      A(x, y) -= b;
    }
    A(x, x) += Q.killing()(x);
  }
  return A;
}

inline double form(const GraphForm& Q, const Vector& f, const Vector& g) { return f.dot(oracle::form_matrix(Q) * g); }

/// L = M^{-1} A.
inline Matrix generator(const GraphForm& Q) {
  return Q.space().measure().cwiseInverse().asDiagonal() * oracle::form_matrix(Q);
}

/// exp(-tL) by Pade/scaling-squaring on the non-symmetric matrix.
inline Matrix semigroup(const GraphForm& Q, double t) {
  const Matrix X = -t * oracle::generator(Q);
  return X.exp();
}

/// Defining property T_t h <= h at t = 2^k, k = -10..4.
inline bool excessive_by_semigroup(const GraphForm& Q, const Vector& h, double rel = 1e-9) {
  const double slack = rel * std::max(1.0, h.cwiseAbs().maxCoeff());
  for (int k = -10; k <= 4; ++k) {
    const Vector Th = oracle::semigroup(Q, std::ldexp(1.0, k)) * h;
    if (((Th - h).array() > slack).any()) return false;
  }
  return true;
}

/// No nonempty proper A with Q(f) = Q(1_A f) + Q(1_{A^c} f) for every f. The
/// cross term Q(1_A f, 1_{A^c} f) vanishes for all f iff it vanishes on basis
/// pairs e_i + e_j, read off by polarization.
inline bool irreducible_by_subsets(const GraphForm& Q) {
  const Eigen::Index n = Q.dim();
  if (n <= 1) return true;
  const Matrix A = oracle::form_matrix(Q);
  auto q = [&](const Vector& f) { return f.dot(A * f); };
  for (unsigned long mask = 1; mask + 1 < (1UL << n); ++mask) {
    Vector ind(n);
    for (Eigen::Index i = 0; i < n; ++i) ind(i) = (mask >> i) & 1UL ? 1.0 : 0.0;
    bool decomposes = true;
    for (Eigen::Index i = 0; i < n && decomposes; ++i) {
      for (Eigen::Index j = i; j < n && decomposes; ++j) {
        Vector f = Vector::Unit(n, i) + Vector::Unit(n, j);
        const Vector fa = ind.cwiseProduct(f);
        const Vector fb = f - fa;
        const double cross = 0.25 * (q(fa + fb) - q(fa - fb));
        if (std::abs(cross) > 1e-14 * (1.0 + A.cwiseAbs().maxCoeff())) decomposes = false;
      }
    }
    if (decomposes) return false;
  }
  return true;
}

/// Potential v with v(x) = 1, v(y) = 0, harmonic elsewhere for the measure-free
/// Laplacian, and R(x,y) = 1 / (current leaving x).
struct Potential {
  Vector v;
  double resistance = 0.0;
};

inline Potential unit_potential(const GraphForm& Q, Eigen::Index x, Eigen::Index y) {
  const Eigen::Index n = Q.dim();
  const Matrix& b = Q.conductance();
  std::vector<Eigen::Index> interior;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != x && i != y) interior.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(interior.size());
  Vector v = Vector::Zero(n);
  v(x) = 1.0;
  if (k > 0) {
    Matrix K = Matrix::Zero(k, k);
    Vector rhs = Vector::Zero(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const Eigen::Index i = interior[static_cast<std::size_t>(r)];
      for (Eigen::Index j = 0; j < n; ++j) K(r, r) += b(i, j);
      for (Eigen::Index s = 0; s < k; ++s) {
        if (s != r) K(r, s) = -b(i, interior[static_cast<std::size_t>(s)]);
      }
      rhs(r) = b(i, x);
    }
    const Vector sol = K.fullPivLu().solve(rhs);
    for (Eigen::Index r = 0; r < k; ++r) v(interior[static_cast<std::size_t>(r)]) = sol(r);
  }
  double current = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) current += b(x, j) * (v(x) - v(j));
  return {v, 1.0 / current};
}

/// E(f) = 1/2 sum b (f(x) - f(y))^2.
inline double energy(const GraphForm& Q, const Vector& f) {
  double e = 0.0;
  for (Eigen::Index x = 0; x < Q.dim(); ++x) {
    for (Eigen::Index y = 0; y < Q.dim(); ++y) e += 0.5 * Q.conductance()(x, y) * (f(x) - f(y)) * (f(x) - f(y));
  }
  return e;
}

/// Largest |f(x) - f(y)|^2 seen over `samples` random E-unit functions, and
/// over `steps` random ascent moves started from the normalized potential.
struct SupProbe {
  double at_maximizer = 0.0;
  double best_random = 0.0;
  double best_ascent = 0.0;
};

inline SupProbe probe_sup(const GraphForm& Q, Eigen::Index x, Eigen::Index y, dirikit::SplitMix64& rng,
                          int samples = 1000, int steps = 200) {
  const Eigen::Index n = Q.dim();
  SupProbe out;
  const Potential p = oracle::unit_potential(Q, x, y);
  const Vector fstar = p.v / std::sqrt(oracle::energy(Q, p.v));
  out.at_maximizer = (fstar(x) - fstar(y)) * (fstar(x) - fstar(y));

  auto value = [&](const Vector& f) {
    const double e = oracle::energy(Q, f);
    if (e <= 0.0) return 0.0;
    const double d = f(x) - f(y);
    return d * d / e;
  };
  for (int s = 0; s < samples; ++s) {
    Vector f(n);
    for (Eigen::Index i = 0; i < n; ++i) f(i) = rng.uniform(-1.0, 1.0);
    out.best_random = std::max(out.best_random, value(f));
  }
  Vector f = fstar;
  double best = value(f);
  for (int s = 0; s < steps; ++s) {
    Vector g = f;
    for (Eigen::Index i = 0; i < n; ++i) g(i) += 1e-3 * rng.uniform(-1.0, 1.0);
    const double vg = value(g);
    if (vg > best) {
      best = vg;
      f = g;
    }
  }
  out.best_ascent = best;
  return out;
}

/// Every bijection tau: X2 -> X1 with h = sqrt(m1∘tau / m2) whose generator
/// residual max|U L1 - L2 U| is within rel * max(h) * max|L| + abs. Listed in
/// lexicographic order of the source-id sequence.
inline std::vector<std::vector<std::size_t>> brute_force_intertwiners(const GraphForm& Q1, const GraphForm& Q2,
                                                                      double rel = 1e-9, double abs = 1e-12) {
  std::vector<std::vector<std::size_t>> out;
  if (Q1.size() != Q2.size()) return out;
  const Eigen::Index n = Q1.dim();
  const Matrix L1 = oracle::generator(Q1);
  const Matrix L2 = oracle::generator(Q2);
  const double lmax = std::max(L1.cwiseAbs().maxCoeff(), L2.cwiseAbs().maxCoeff());

  std::vector<std::size_t> perm(Q1.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto by_id = [&](std::size_t a, std::size_t b) { return Q1.space().vertex(a) < Q1.space().vertex(b); };
  std::sort(perm.begin(), perm.end(), by_id);
  do {
    Matrix U = Matrix::Zero(n, n);
    for (Eigen::Index y = 0; y < n; ++y) {
      const auto x = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(y)]);
      U(y, x) = std::sqrt(Q1.space().measure()(x) / Q2.space().measure()(y));
    }
    const double hmax = U.rowwise().sum().maxCoeff();
    const double res = (U * L1 - L2 * U).cwiseAbs().maxCoeff();
    if (res <= rel * hmax * lmax + abs) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end(), by_id));
  return out;
}

}  // namespace oracle
