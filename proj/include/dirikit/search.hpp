#pragma once

// Enumeration of all order isomorphisms intertwining two finite forms.
//
// With beta normalized to 1 the measure identity fixes the scaling,
// h(y) = sqrt(m1(tau y) / m2(y)), so only the bijection tau is searched.
// Branches are cut by
//   - equal generator spectra (U/sqrt(beta) is unitary),
//   - vertex signatures: L(x,x) and the sorted off-diagonal magnitudes of
//     M^{1/2} L M^{-1/2}, both invariant under an intertwiner,
//   - entries of U L1 - L2 U already fixed by the partial assignment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dirikit/core.hpp"
#include "dirikit/error.hpp"
#include "dirikit/orderiso.hpp"
#include "dirikit/spectral.hpp"

namespace dirikit {

struct SearchOptions {
  Tolerance tol{};
  std::size_t max_solutions = 100000;
  double spectral_tol = 1e-8;
  unsigned jobs = 1;
};

/// Sorted eigenvalue lists compared pairwise: |l_i - u_i| <= tol (1 + |l_i|).
inline bool spectra_match(const Generator& G1, const Generator& G2, double spectral_tol) {
  if (G1.dim() != G2.dim()) return false;
  const Vector a = spectral_data(G1).eigenvalues;
  const Vector b = spectral_data(G2).eigenvalues;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > spectral_tol * (1.0 + std::abs(a(i)))) return false;
  }
  return true;
}

/// Upper bound for intertwining_scale over every bijection, so partial
/// residual entries can be judged before h is fully known.
inline double search_scale(const Generator& G1, const Generator& G2) {
  const double hmax = std::sqrt(G1.space().measure().maxCoeff() / G2.space().measure().minCoeff());
  return hmax * std::max(G1.matrix().cwiseAbs().maxCoeff(), G2.matrix().cwiseAbs().maxCoeff());
}

namespace detail {

struct VertexSignature {
  double diagonal = 0.0;
  std::vector<double> couplings;  // sorted |S(x,y)|, y != x, nonzero
};

inline std::vector<VertexSignature> signatures(const Generator& G) {
  const Matrix S = G.symmetrized();
  std::vector<VertexSignature> out(G.size());
  for (Eigen::Index x = 0; x < G.dim(); ++x) {
    auto& sig = out[static_cast<std::size_t>(x)];
    sig.diagonal = G(x, x);
    for (Eigen::Index y = 0; y < G.dim(); ++y) {
      if (y != x && G(x, y) != 0.0) sig.couplings.push_back(std::abs(S(x, y)));
    }
    std::sort(sig.couplings.begin(), sig.couplings.end());
  }
  return out;
}

inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

inline bool compatible(const VertexSignature& a, const VertexSignature& b, double tol) {
  if (!close(a.diagonal, b.diagonal, tol) || a.couplings.size() != b.couplings.size()) return false;
  for (std::size_t i = 0; i < a.couplings.size(); ++i) {
    if (!close(a.couplings[i], b.couplings[i], tol)) return false;
  }
  return true;
}

class IntertwinerSearch {
 public:
  IntertwinerSearch(const GraphForm& Q1, const GraphForm& Q2, const SearchOptions& opts)
      : Q1_(Q1), Q2_(Q2), G1_(generator(Q1)), G2_(generator(Q2)), opts_(opts) {
    n_ = Q1.size();
    entry_bound_ = opts.tol.bound(search_scale(G1_, G2_));
    const double sig_tol = std::max(opts.spectral_tol, 1e3 * opts.tol.rel);
    const auto s1 = signatures(G1_);
    const auto s2 = signatures(G2_);
    allowed_.assign(n_, std::vector<bool>(n_, false));
    for (std::size_t y = 0; y < n_; ++y) {
      for (std::size_t x = 0; x < n_; ++x) allowed_[y][x] = compatible(s2[y], s1[x], sig_tol);
    }
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return Q1.space().vertex(a) < Q1.space().vertex(b);
    });
  }

  const Generator& g1() const { return G1_; }
  const Generator& g2() const { return G2_; }

  /// Candidates for tau(first target vertex), in lexicographic id order.
  const std::vector<std::size_t>& root_candidates() const { return order_; }

  /// Solutions in the subtree tau(0) = root (or the whole tree when root is
  /// empty), lexicographically ordered.
  std::vector<std::vector<std::size_t>> run(std::optional<std::size_t> root) const {
    State st;
    st.tau.assign(n_, kUnset);
    st.used.assign(n_, false);
    st.h.assign(n_, 0.0);
    std::vector<std::vector<std::size_t>> found;
    if (n_ == 0) return found;
    if (root) {
      if (assign(st, 0, *root)) descend(st, 1, found);
    } else {
      descend(st, 0, found);
    }
    return found;
  }

 private:
  static constexpr std::size_t kUnset = static_cast<std::size_t>(-1);

  struct State {
    std::vector<std::size_t> tau;
    std::vector<bool> used;
    std::vector<double> h;
  };

  double scaling(std::size_t y, std::size_t x) const {
    return std::sqrt(Q1_.space().m(x) / Q2_.space().m(y));
  }

  // Places tau(y) = x if every residual entry it completes is within bound.
  bool assign(State& st, std::size_t y, std::size_t x) const {
    if (st.used[x] || !allowed_[y][x]) return false;
    const double hy = scaling(y, x);
    const auto yi = static_cast<Eigen::Index>(y);
    const auto xi = static_cast<Eigen::Index>(x);
    if (std::abs(hy * (G1_(xi, xi) - G2_(yi, yi))) > entry_bound_) return false;
    for (std::size_t z = 0; z < n_; ++z) {
      if (st.tau[z] == kUnset) continue;
      const auto zi = static_cast<Eigen::Index>(z);
      const auto tz = static_cast<Eigen::Index>(st.tau[z]);
      // (U L1 - L2 U)(y, tau z) and (z, tau y)
      if (std::abs(hy * G1_(xi, tz) - G2_(yi, zi) * st.h[z]) > entry_bound_) return false;
      if (std::abs(st.h[z] * G1_(tz, xi) - G2_(zi, yi) * hy) > entry_bound_) return false;
    }
    st.tau[y] = x;
    st.used[x] = true;
    st.h[y] = hy;
    return true;
  }

  void unassign(State& st, std::size_t y) const {
    st.used[st.tau[y]] = false;
    st.tau[y] = kUnset;
  }

  void descend(State& st, std::size_t y, std::vector<std::vector<std::size_t>>& found) const {
    if (found.size() >= opts_.max_solutions) return;
    if (y == n_) {
      found.push_back(st.tau);
      return;
    }
    for (std::size_t x : order_) {
      if (!assign(st, y, x)) continue;
      descend(st, y + 1, found);
      unassign(st, y);
      if (found.size() >= opts_.max_solutions) return;
    }
  }

  const GraphForm& Q1_;
  const GraphForm& Q2_;
  Generator G1_;
  Generator G2_;
  SearchOptions opts_;
  std::size_t n_ = 0;
  double entry_bound_ = 0.0;
  std::vector<std::vector<bool>> allowed_;
  std::vector<std::size_t> order_;
};

inline OrderIso induced_iso(const GraphForm& Q1, const GraphForm& Q2, std::vector<std::size_t> tau) {
  Vector h(Q2.dim());
  for (std::size_t y = 0; y < tau.size(); ++y) {
    h(static_cast<Eigen::Index>(y)) = std::sqrt(Q1.space().m(tau[y]) / Q2.space().m(y));
  }
  return OrderIso(Q1.space(), Q2.space(), std::move(tau), std::move(h));
}

inline void require_irreducible(const GraphForm& Q1, const GraphForm& Q2) {
  if (!is_irreducible(Q1) || !is_irreducible(Q2)) {
    throw Error(ErrorCode::NotIrreducible, "intertwiner search needs irreducible forms");
  }
}

}  // namespace detail

/// The isomorphism with beta = 1 induced by a bijection tau: X2 -> X1.
inline OrderIso induced_iso(const GraphForm& Q1, const GraphForm& Q2, std::vector<std::size_t> tau) {
  return detail::induced_iso(Q1, Q2, std::move(tau));
}

/// All intertwining isomorphisms (beta = 1), certified, ordered
/// lexicographically by the source ids (tau(y_0), tau(y_1), ...).
inline std::vector<OrderIso> find_intertwiners(const GraphForm& Q1, const GraphForm& Q2,
                                               const SearchOptions& opts = {}) {
  if (Q1.size() != Q2.size()) return {};
  detail::require_irreducible(Q1, Q2);
  detail::IntertwinerSearch search(Q1, Q2, opts);
  if (!spectra_match(search.g1(), search.g2(), opts.spectral_tol)) return {};

  std::vector<std::vector<std::size_t>> taus;
  if (opts.jobs <= 1) {
    taus = search.run(std::nullopt);
  } else {
    // Root branches are independent; concatenating them in root order keeps
    // the lexicographic order of the serial search.
    const auto& roots = search.root_candidates();
    std::vector<std::vector<std::vector<std::size_t>>> branch(roots.size());
    for (std::size_t start = 0; start < roots.size(); start += opts.jobs) {
      std::vector<std::future<std::vector<std::vector<std::size_t>>>> pending;
      const std::size_t stop = std::min(roots.size(), start + opts.jobs);
      for (std::size_t i = start; i < stop; ++i) {
        pending.push_back(std::async(std::launch::async, [&search, r = roots[i]] { return search.run(r); }));
      }
      for (std::size_t i = start; i < stop; ++i) branch[i] = pending[i - start].get();
    }
    for (auto& b : branch) {
      for (auto& t : b) taus.push_back(std::move(t));
    }
    if (taus.size() > opts.max_solutions) taus.resize(opts.max_solutions);
  }

  std::vector<OrderIso> out;
  for (auto& tau : taus) {
    OrderIso U = detail::induced_iso(Q1, Q2, std::move(tau));
    if (!intertwines(U, search.g1(), search.g2(), opts.tol)) continue;
    const auto report = certify(U, Q1, Q2, opts.tol);
    out.push_back(U.with_beta(report.value("beta")));
  }
  return out;
}

enum class InequivalenceReason { Size, Spectrum, Exhausted };

constexpr std::string_view to_string(InequivalenceReason r) {
  switch (r) {
    case InequivalenceReason::Size: return "size";
    case InequivalenceReason::Spectrum: return "spectrum";
    case InequivalenceReason::Exhausted: return "exhausted";
  }
  return "unknown";
}

struct EquivalenceVerdict {
  std::optional<OrderIso> witness;  // set iff equivalent
  std::optional<InequivalenceReason> reason;

  bool equivalent() const { return witness.has_value(); }
};

inline EquivalenceVerdict equivalence_verdict(const GraphForm& Q1, const GraphForm& Q2,
                                              const SearchOptions& opts = {}) {
  if (Q1.size() != Q2.size()) return {std::nullopt, InequivalenceReason::Size};
  detail::require_irreducible(Q1, Q2);
  if (!spectra_match(generator(Q1), generator(Q2), opts.spectral_tol)) {
    return {std::nullopt, InequivalenceReason::Spectrum};
  }
  SearchOptions first = opts;
  first.max_solutions = 1;
  auto found = find_intertwiners(Q1, Q2, first);
  if (found.empty()) return {std::nullopt, InequivalenceReason::Exhausted};
  return {std::move(found.front()), std::nullopt};
}

}  // namespace dirikit
