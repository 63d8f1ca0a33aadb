#pragma once

// Seeded generators for randomized forms and intertwined pairs. Everything is
// driven by SplitMix64 so that a seed fixes the output on every platform.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dirikit/core.hpp"
#include "dirikit/orderiso.hpp"

namespace dirikit {

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent child stream; advances this one by a single draw.
  SplitMix64 split() { return SplitMix64((*this)() ^ 0x6A09E667F3BCC909ULL); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in [0, n), n > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>((*this)() % n); }

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t state_;
};

struct RandomFormOptions {
  double extra_edge_prob = 0.3;
  double weight_lo = 0.5;
  double weight_hi = 2.0;
  bool killing = false;  // kill a random nonempty subset
};

/// Random spanning tree plus independent extra edges; ids "v0", "v1", ...
inline GraphForm random_connected_form(SplitMix64& rng, int n, const RandomFormOptions& opts = {}) {
  if (n < 1) throw Error(ErrorCode::InvalidSize, "random forms need n >= 1");
  const auto N = static_cast<Eigen::Index>(n);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
  Vector m(N);
  for (Eigen::Index i = 0; i < N; ++i) m(i) = rng.uniform(opts.weight_lo, opts.weight_hi);
  Matrix b = Matrix::Zero(N, N);
  for (Eigen::Index i = 1; i < N; ++i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(i)));
    b(i, j) = b(j, i) = rng.uniform(opts.weight_lo, opts.weight_hi);
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      if (b(i, j) == 0.0 && rng.bernoulli(opts.extra_edge_prob)) {
        b(i, j) = b(j, i) = rng.uniform(opts.weight_lo, opts.weight_hi);
      }
    }
  }
  Vector c = Vector::Zero(N);
  if (opts.killing) {
    for (Eigen::Index i = 0; i < N; ++i) {
      if (rng.bernoulli(0.5)) c(i) = rng.uniform(opts.weight_lo, opts.weight_hi);
    }
    if ((c.array() == 0.0).all()) c(static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n)))) = 1.0;
  }
  return GraphForm(MeasureSpace(std::move(ids), std::move(m)), std::move(b), std::move(c));
}

struct IntertwinedPair {
  GraphForm q1;
  GraphForm q2;
  OrderIso iso;
};

/// Q2 is Q on ids "w0", "w1", ... with w_i carrying vertex perm[i] of Q;
/// U f = f∘tau with tau = perm, h = 1.
inline IntertwinedPair relabel(const GraphForm& Q, SplitMix64& rng) {
  const std::size_t n = Q.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm);
  const auto N = Q.dim();
  std::vector<std::string> ids;
  Vector m(N);
  Vector c(N);
  Matrix b(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto pi = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
    ids.push_back("w" + std::to_string(i));
    m(i) = Q.space().measure()(pi);
    c(i) = Q.killing()(pi);
    for (Eigen::Index j = 0; j < N; ++j) b(i, j) = Q.conductance()(pi, static_cast<Eigen::Index>(perm[j]));
  }
  GraphForm Q2(MeasureSpace(std::move(ids), std::move(m)), std::move(b), std::move(c));
  OrderIso U(Q.space(), Q2.space(), std::move(perm), Vector::Ones(N), 1.0);
  return {Q, std::move(Q2), std::move(U)};
}

/// Doob pair with genuinely nonconstant scaling: h in [1,2] attaining both
/// ends, killing chosen so that h is excessive, then a relabeling. The
/// resulting U has h ranging over [1/2, 1].
inline IntertwinedPair random_doob_pair(SplitMix64& rng, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidSize, "Doob pairs need n >= 2");
  const GraphForm base = random_connected_form(rng, n);
  const auto N = base.dim();
  Vector h(N);
  for (Eigen::Index i = 0; i < N; ++i) h(i) = rng.uniform(1.0, 2.0);
  const auto lo = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n)));
  auto hi = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n - 1)));
  if (hi >= lo) ++hi;
  h(lo) = 1.0;
  h(hi) = 2.0;

  // (m Lh)(x) = sum_y b(x,y)(h(x)-h(y)) + c(x) h(x) >= 0.
  Vector c(N);
  for (Eigen::Index x = 0; x < N; ++x) {
    double flux = 0.0;
    for (Eigen::Index y = 0; y < N; ++y) flux += base.conductance()(x, y) * (h(x) - h(y));
    c(x) = (std::max(0.0, -flux) + rng.uniform(0.0, 0.5)) / h(x);
  }
  const GraphForm q1(base.space(), base.conductance(), c);
  const DoobPair doob = doob_pair(q1, h);
  IntertwinedPair rel = relabel(doob.form, rng);
  return {q1, std::move(rel.q2), compose(rel.iso, doob.iso)};
}

/// Recurrent pair related by a constant rescaling k in [1/2, 2] of both b and
/// m, then relabeled; U = 1/k, so total masses differ by k^2.
inline IntertwinedPair random_recurrent_pair(SplitMix64& rng, int n, bool rescale = true) {
  const GraphForm q1 = random_connected_form(rng, n);
  if (!rescale) return relabel(q1, rng);
  const double k = rng.uniform(0.5, 2.0);
  const DoobPair doob = doob_pair(q1, Vector::Constant(q1.dim(), k));
  IntertwinedPair rel = relabel(doob.form, rng);
  return {q1, std::move(rel.q2), compose(rel.iso, doob.iso)};
}

}  // namespace dirikit
