#pragma once

// Finite Dirichlet spaces: a vertex measure m, symmetric conductances b and a
// killing weight c. The form is
//
//   Q(f,g) = 1/2 sum_{x,y} b(x,y) (f(x)-f(y)) (g(x)-g(y)) + sum_x c(x) f(x) g(x)
//
// and its generator on L^2(m) is L(x,y) = -b(x,y)/m(x), L(x,x) = (deg(x)+c(x))/m(x).
// m, b and c are kept separate; the generator is materialized on demand.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dirikit/error.hpp"

namespace dirikit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class MeasureSpace {
 public:
  MeasureSpace() = default;

  MeasureSpace(std::vector<std::string> vertices, Vector m)
      : vertices_(std::move(vertices)), m_(std::move(m)) {
    if (static_cast<std::size_t>(m_.size()) != vertices_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "measure has " + std::to_string(m_.size()) +
                                                    " entries for " + std::to_string(vertices_.size()) +
                                                    " vertices");
    }
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (!index_.emplace(vertices_[i], i).second) {
        throw Error(ErrorCode::DuplicateVertex, "vertex '" + vertices_[i] + "' listed twice");
      }
      if (!std::isfinite(m_(i))) {
        throw Error(ErrorCode::NonFinite, "measure of '" + vertices_[i] + "' is not finite");
      }
      if (!(m_(i) > 0.0)) {
        throw Error(ErrorCode::NonPositiveMeasure, "measure of '" + vertices_[i] + "' must be > 0");
      }
    }
  }

  std::size_t size() const { return vertices_.size(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(vertices_.size()); }
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::string& vertex(std::size_t i) const { return vertices_.at(i); }
  const Vector& measure() const { return m_; }
  double m(std::size_t i) const { return m_(static_cast<Eigen::Index>(i)); }
  double total_mass() const { return m_.sum(); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_index(std::string_view id) const {
    auto idx = index_of(id);
    if (!idx) throw Error(ErrorCode::UnknownVertex, "unknown vertex '" + std::string(id) + "'");
    return *idx;
  }

  /// m-weighted inner product <f,g>_m.
  double inner(const Vector& f, const Vector& g) const {
    require_dim(f);
    require_dim(g);
    return (m_.array() * f.array() * g.array()).sum();
  }

  void require_dim(const Vector& f) const {
    if (f.size() != dim()) {
      throw Error(ErrorCode::DimensionMismatch, "function has " + std::to_string(f.size()) +
                                                    " values on a space of " + std::to_string(size()) +
                                                    " vertices");
    }
  }

  bool same_vertices(const MeasureSpace& other) const { return vertices_ == other.vertices_; }

  friend bool operator==(const MeasureSpace& a, const MeasureSpace& b) {
    return a.vertices_ == b.vertices_ && a.m_ == b.m_;
  }

 private:
  std::vector<std::string> vertices_;
  Vector m_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct EdgeSpec {
  std::string u;
  std::string v;
  double b = 1.0;
};

class GraphForm {
 public:
  GraphForm() = default;

  /// `b` must be symmetric with zero diagonal; `c` nonnegative.
  GraphForm(MeasureSpace space, Matrix b, Vector c)
      : space_(std::move(space)), b_(std::move(b)), c_(std::move(c)) {
    const Eigen::Index n = space_.dim();
    if (b_.rows() != n || b_.cols() != n || c_.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "conductance/killing shape does not match vertex count");
    }
    for (Eigen::Index x = 0; x < n; ++x) {
      if (!std::isfinite(c_(x))) throw Error(ErrorCode::NonFinite, "killing is not finite");
      if (c_(x) < 0.0) throw Error(ErrorCode::NegativeWeight, "negative killing at '" + space_.vertex(x) + "'");
      if (b_(x, x) != 0.0) throw Error(ErrorCode::SelfLoop, "self-loop at '" + space_.vertex(x) + "'");
      for (Eigen::Index y = x + 1; y < n; ++y) {
        if (!std::isfinite(b_(x, y)) || !std::isfinite(b_(y, x))) {
          throw Error(ErrorCode::NonFinite, "conductance is not finite");
        }
        if (b_(x, y) < 0.0 || b_(y, x) < 0.0) {
          throw Error(ErrorCode::NegativeWeight,
                      "negative conductance on {" + space_.vertex(x) + "," + space_.vertex(y) + "}");
        }
        if (b_(x, y) != b_(y, x)) {
          throw Error(ErrorCode::DimensionMismatch, "conductance matrix is not symmetric");
        }
      }
    }
  }

  const MeasureSpace& space() const { return space_; }
  std::size_t size() const { return space_.size(); }
  Eigen::Index dim() const { return space_.dim(); }
  const Matrix& conductance() const { return b_; }
  const Vector& killing() const { return c_; }
  double b(std::size_t x, std::size_t y) const {
    return b_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }
  double c(std::size_t x) const { return c_(static_cast<Eigen::Index>(x)); }
  Vector degree() const { return b_.rowwise().sum(); }

  /// Edges with positive conductance, u < v in vertex order.
  std::vector<EdgeSpec> edges() const {
    std::vector<EdgeSpec> out;
    for (Eigen::Index x = 0; x < dim(); ++x) {
      for (Eigen::Index y = x + 1; y < dim(); ++y) {
        if (b_(x, y) > 0.0) out.push_back({space_.vertex(x), space_.vertex(y), b_(x, y)});
      }
    }
    return out;
  }

  friend bool operator==(const GraphForm& a, const GraphForm& b) {
    return a.space_ == b.space_ && a.b_ == b.b_ && a.c_ == b.c_;
  }

 private:
  MeasureSpace space_;
  Matrix b_;
  Vector c_;
};

/// Self-adjoint generator of the form on L^2(m); stored as a dense matrix.
class Generator {
 public:
  Generator(Matrix L, MeasureSpace space) : L_(std::move(L)), space_(std::move(space)) {
    if (L_.rows() != space_.dim() || L_.cols() != space_.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "generator shape does not match vertex count");
    }
  }

  const Matrix& matrix() const { return L_; }
  const MeasureSpace& space() const { return space_; }
  std::size_t size() const { return space_.size(); }
  Eigen::Index dim() const { return space_.dim(); }
  double operator()(Eigen::Index x, Eigen::Index y) const { return L_(x, y); }

  Vector apply(const Vector& f) const {
    space_.require_dim(f);
    return L_ * f;
  }

  /// M^{1/2} L M^{-1/2}; symmetric because L is m-symmetric.
  Matrix symmetrized() const {
    const Vector s = space_.measure().cwiseSqrt();
    Matrix S = s.asDiagonal() * L_ * s.cwiseInverse().asDiagonal();
    return 0.5 * (S + S.transpose());
  }

 private:
  Matrix L_;
  MeasureSpace space_;
};

/// Validating constructor from vertex ids and keyed weights. Absent killing
/// entries default to 0; every vertex needs a measure.
inline GraphForm build_form(const std::vector<std::string>& vertices,
                            const std::map<std::string, double, std::less<>>& m,
                            const std::vector<EdgeSpec>& edges,
                            const std::map<std::string, double, std::less<>>& killing = {}) {
  Vector mv(static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    auto it = m.find(vertices[i]);
    if (it == m.end()) {
      throw Error(ErrorCode::NonPositiveMeasure, "no measure given for '" + vertices[i] + "'");
    }
    mv(static_cast<Eigen::Index>(i)) = it->second;
  }
  MeasureSpace space(vertices, std::move(mv));
  for (const auto& [id, value] : m) space.require_index(id);

  const Eigen::Index n = space.dim();
  Matrix b = Matrix::Zero(n, n);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  for (const auto& e : edges) {
    const auto x = static_cast<Eigen::Index>(space.require_index(e.u));
    const auto y = static_cast<Eigen::Index>(space.require_index(e.v));
    if (x == y) throw Error(ErrorCode::SelfLoop, "edge (" + e.u + "," + e.v + ") is a self-loop");
    if (!std::isfinite(e.b)) throw Error(ErrorCode::NonFinite, "edge weight is not finite");
    if (e.b < 0.0) throw Error(ErrorCode::NegativeWeight, "edge (" + e.u + "," + e.v + ") has negative weight");
    if (seen(x, y)) throw Error(ErrorCode::DuplicateEdge, "edge {" + e.u + "," + e.v + "} given twice");
    seen(x, y) = seen(y, x) = true;
    b(x, y) = b(y, x) = e.b;
  }

  Vector c = Vector::Zero(n);
  for (const auto& [id, value] : killing) {
    c(static_cast<Eigen::Index>(space.require_index(id))) = value;
  }
  return GraphForm(std::move(space), std::move(b), std::move(c));
}

/// Positional variant: `m` and `killing` are aligned with `vertices`
/// (`killing` may be empty for c = 0).
inline GraphForm build_form(const std::vector<std::string>& vertices, const std::vector<double>& m,
                            const std::vector<EdgeSpec>& edges, const std::vector<double>& killing = {}) {
  if (m.size() != vertices.size() || (!killing.empty() && killing.size() != vertices.size())) {
    throw Error(ErrorCode::DimensionMismatch, "weights not aligned with vertices");
  }
  std::map<std::string, double, std::less<>> mm;
  std::map<std::string, double, std::less<>> km;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!mm.emplace(vertices[i], m[i]).second) {
      throw Error(ErrorCode::DuplicateVertex, "vertex '" + vertices[i] + "' listed twice");
    }
    if (!killing.empty()) km.emplace(vertices[i], killing[i]);
  }
  return build_form(vertices, mm, edges, km);
}

/// Q(f,g) by direct summation over vertex pairs (no generator involved).
inline double evaluate(const GraphForm& Q, const Vector& f, const Vector& g) {
  Q.space().require_dim(f);
  Q.space().require_dim(g);
  const Matrix& b = Q.conductance();
  double jump = 0.0;
  for (Eigen::Index x = 0; x < Q.dim(); ++x) {
    for (Eigen::Index y = x + 1; y < Q.dim(); ++y) {
      jump += b(x, y) * (f(x) - f(y)) * (g(x) - g(y));
    }
  }
  return jump + (Q.killing().array() * f.array() * g.array()).sum();
}

inline double evaluate(const GraphForm& Q, const Vector& f) { return evaluate(Q, f, f); }

inline Generator generator(const GraphForm& Q) {
  const Eigen::Index n = Q.dim();
  const Vector& m = Q.space().measure();
  const Vector deg = Q.degree();
  Matrix L(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      L(x, y) = x == y ? (deg(x) + Q.killing()(x)) / m(x) : -Q.conductance()(x, y) / m(x);
    }
  }
  return Generator(std::move(L), Q.space());
}

/// (Q(f) + ||f||_2^2)^{1/2}.
inline double form_norm(const GraphForm& Q, const Vector& f) {
  return std::sqrt(evaluate(Q, f) + Q.space().inner(f, f));
}

namespace detail {

/// Connected components of the graph whose edges are the nonzero
/// off-diagonal entries of `weights`; returns a component label per vertex.
inline std::vector<int> components(const Matrix& weights) {
  const Eigen::Index n = weights.rows();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::queue<Eigen::Index> todo;
    todo.push(s);
    label[s] = next;
    while (!todo.empty()) {
      const Eigen::Index x = todo.front();
      todo.pop();
      for (Eigen::Index y = 0; y < n; ++y) {
        if (y != x && label[y] < 0 && (weights(x, y) != 0.0 || weights(y, x) != 0.0)) {
          label[y] = next;
          todo.push(y);
        }
      }
    }
    ++next;
  }
  return label;
}

inline bool connected(const Matrix& weights) {
  const auto label = components(weights);
  return std::all_of(label.begin(), label.end(), [](int l) { return l == 0; });
}

}  // namespace detail

enum class Family { Path, Cycle, Complete, Sierpinski };

inline std::optional<Family> parse_family(std::string_view name) {
  if (name == "path") return Family::Path;
  if (name == "cycle") return Family::Cycle;
  if (name == "complete") return Family::Complete;
  if (name == "sierpinski") return Family::Sierpinski;
  return std::nullopt;
}

struct FamilyParams {
  double conductance = 1.0;
  double measure = 1.0;
};

namespace detail {

// Level-n Sierpinski gasket graph. Cells are words w over {0,1,2}; the corner i
// of cell w is F_w(p_i) with F_j(z) = (z + p_j)/2. Points are located on an
// integer lattice scaled by 2^n so coincident corners are identified exactly;
// each point is named by its lexicographically smallest "w.i" address.
inline GraphForm sierpinski(int level, const FamilyParams& params) {
  const long scale = 1L << level;
  const std::array<std::array<long, 2>, 3> corner = {{{0, 0}, {scale, 0}, {0, scale}}};

  std::map<std::array<long, 2>, std::string> name;
  std::vector<std::array<long, 2>> order;
  std::vector<std::array<std::array<long, 2>, 3>> cells;

  const long cell_count = [&] {
    long c = 1;
    for (int i = 0; i < level; ++i) c *= 3;
    return c;
  }();
  for (long code = 0; code < cell_count; ++code) {
    std::string word(static_cast<std::size_t>(level), '0');
    long rest = code;
    for (int k = level - 1; k >= 0; --k) {
      word[static_cast<std::size_t>(k)] = static_cast<char>('0' + rest % 3);
      rest /= 3;
    }
    // F_w(z) = sum_k p_{w_k} / 2^{k+1} + z / 2^level, on the 2^level lattice.
    std::array<long, 2> origin = {0, 0};
    for (int k = 0; k < level; ++k) {
      const auto& p = corner[static_cast<std::size_t>(word[static_cast<std::size_t>(k)] - '0')];
      origin[0] += p[0] >> (k + 1);
      origin[1] += p[1] >> (k + 1);
    }
    std::array<std::array<long, 2>, 3> cell{};
    for (std::size_t i = 0; i < 3; ++i) {
      cell[i] = {origin[0] + (corner[i][0] >> level), origin[1] + (corner[i][1] >> level)};
      const std::string address = word + "." + std::to_string(i);
      auto [it, inserted] = name.emplace(cell[i], address);
      if (inserted) {
        order.push_back(cell[i]);
      } else if (address < it->second) {
        it->second = address;
      }
    }
    cells.push_back(cell);
  }

  std::vector<std::string> vertices;
  vertices.reserve(order.size());
  for (const auto& p : order) vertices.push_back(name.at(p));
  std::vector<EdgeSpec> edges;
  for (const auto& cell : cells) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i + 1; j < 3; ++j) {
        edges.push_back({name.at(cell[i]), name.at(cell[j]), params.conductance});
      }
    }
  }
  return build_form(vertices, std::vector<double>(vertices.size(), params.measure), edges);
}

}  // namespace detail

/// Id of the i-th outer corner (i in {0,1,2}) of the level-n gasket.
inline std::string sierpinski_corner(int level, int i) {
  return std::string(static_cast<std::size_t>(level), static_cast<char>('0' + i)) + "." + std::to_string(i);
}

/// Graph families with uniform conductance and measure. `n` is the vertex
/// count, except for Sierpinski where it is the approximation level.
inline GraphForm generate(Family family, int n, const FamilyParams& params = {}) {
  if (family == Family::Sierpinski) {
    if (n < 0 || n > 12) throw Error(ErrorCode::InvalidSize, "sierpinski level must be in [0,12]");
    return detail::sierpinski(n, params);
  }
  if (n < 1) throw Error(ErrorCode::InvalidSize, "graph size must be >= 1");
  if (family == Family::Cycle && n < 3) throw Error(ErrorCode::InvalidSize, "cycle needs n >= 3");

  std::vector<std::string> vertices;
  for (int i = 0; i < n; ++i) vertices.push_back("v" + std::to_string(i));
  std::vector<EdgeSpec> edges;
  auto link = [&](int i, int j) { edges.push_back({vertices[i], vertices[j], params.conductance}); };
  switch (family) {
    case Family::Path:
      for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
      break;
    case Family::Cycle:
      for (int i = 0; i < n; ++i) link(i, (i + 1) % n);
      break;
    case Family::Complete:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) link(i, j);
      break;
    case Family::Sierpinski:
      break;
  }
  return build_form(vertices, std::vector<double>(static_cast<std::size_t>(n), params.measure), edges);
}

}  // namespace dirikit
