#pragma once

// JSON encodings. Keys that map vertex ids to values are emitted in vertex
// order; doubles use the shortest representation that round-trips.
//
//   graph       {"vertices":[...], "m":{v:x}, "edges":[{"u":v,"v":w,"b":x}], "killing":{v:x}}
//   iso         {"tau":{y:x}, "h":{y:x}, "beta":x?}
//   metric      {"d":[[...], ...]}
//   jump        {"vertices":[...], "J":[{"u":v,"v":w,"J":x}], "k":{v:x}}
//   report      {"verdict":bool, "checks":[{name,residual,tol,pass,detail?}], "values":{...}}

#include <cstddef>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirikit/beurling.hpp"
#include "dirikit/core.hpp"
#include "dirikit/error.hpp"
#include "dirikit/metrics.hpp"
#include "dirikit/orderiso.hpp"
#include "dirikit/report.hpp"

namespace dirikit::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

template <class T>
T get(const Json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ParseError, std::string("missing field \"") + key + "\"");
  return *it;
}

inline std::map<std::string, double, std::less<>> keyed(const Json& j, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an object");
  std::map<std::string, double, std::less<>> out;
  for (const auto& [k, v] : j.items()) out.emplace(k, get<double>(v, what));
  return out;
}

inline Json keyed(const MeasureSpace& space, const Vector& values) {
  Json out = Json::object();
  for (std::size_t i = 0; i < space.size(); ++i) out[space.vertex(i)] = values(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace detail

inline std::string read_source(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---- graph ----

inline Json to_json(const GraphForm& Q) {
  Json j;
  j["vertices"] = Q.space().vertices();
  j["m"] = detail::keyed(Q.space(), Q.space().measure());
  Json edges = Json::array();
  for (const auto& e : Q.edges()) edges.push_back({{"u", e.u}, {"v", e.v}, {"b", e.b}});
  j["edges"] = std::move(edges);
  j["killing"] = detail::keyed(Q.space(), Q.killing());
  return j;
}

inline GraphForm graph_from_json(const Json& j) {
  const auto vertices = detail::get<std::vector<std::string>>(detail::field(j, "vertices"), "vertices");
  const auto m = detail::keyed(detail::field(j, "m"), "m");
  std::vector<EdgeSpec> edges;
  if (auto it = j.find("edges"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::ParseError, "edges must be an array");
    for (const auto& e : *it) {
      edges.push_back({detail::get<std::string>(detail::field(e, "u"), "edge u"),
                       detail::get<std::string>(detail::field(e, "v"), "edge v"),
                       detail::get<double>(detail::field(e, "b"), "edge b")});
    }
  }
  std::map<std::string, double, std::less<>> killing;
  if (auto it = j.find("killing"); it != j.end()) killing = detail::keyed(*it, "killing");
  return build_form(vertices, m, edges, killing);
}

inline GraphForm parse_graph(const std::string& text) { return graph_from_json(detail::parse_text(text)); }

// ---- order isomorphism ----

inline Json to_json(const OrderIso& U) {
  Json j;
  Json tau = Json::object();
  for (std::size_t y = 0; y < U.size(); ++y) tau[U.target().vertex(y)] = U.source().vertex(U.tau(y));
  j["tau"] = std::move(tau);
  j["h"] = detail::keyed(U.target(), U.h());
  if (U.beta()) j["beta"] = *U.beta();
  return j;
}

inline OrderIso iso_from_json(const Json& j, const MeasureSpace& source, const MeasureSpace& target) {
  const Json& tau_j = detail::field(j, "tau");
  if (!tau_j.is_object()) throw Error(ErrorCode::ParseError, "tau must be an object");
  std::map<std::string, std::string, std::less<>> tau;
  for (const auto& [k, v] : tau_j.items()) tau.emplace(k, detail::get<std::string>(v, "tau"));
  const auto h = detail::keyed(detail::field(j, "h"), "h");
  OrderIso U = make_iso(source, target, tau, h);
  if (auto it = j.find("beta"); it != j.end()) U = U.with_beta(detail::get<double>(*it, "beta"));
  return U;
}

inline OrderIso parse_iso(const std::string& text, const MeasureSpace& source, const MeasureSpace& target) {
  return iso_from_json(detail::parse_text(text), source, target);
}

// ---- metric ----

inline Json to_json(const PseudoMetric& d) {
  Json rows = Json::array();
  for (Eigen::Index x = 0; x < d.dim(); ++x) {
    Json row = Json::array();
    for (Eigen::Index y = 0; y < d.dim(); ++y) row.push_back(d(x, y));
    rows.push_back(std::move(row));
  }
  return Json{{"d", std::move(rows)}};
}

inline PseudoMetric metric_from_json(const Json& j) {
  const auto rows = detail::get<std::vector<std::vector<double>>>(detail::field(j, "d"), "d");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix d(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(x)].size()) != n) {
      throw Error(ErrorCode::ParseError, "metric matrix must be square");
    }
    for (Eigen::Index y = 0; y < n; ++y) d(x, y) = rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
  }
  return PseudoMetric(std::move(d));
}

inline PseudoMetric parse_metric(const std::string& text) { return metric_from_json(detail::parse_text(text)); }

// ---- jump/killing ----

inline Json to_json(const JumpKilling& jk) {
  Json j;
  j["vertices"] = jk.space.vertices();
  Json pairs = Json::array();
  for (Eigen::Index x = 0; x < jk.J.rows(); ++x) {
    for (Eigen::Index y = 0; y < jk.J.cols(); ++y) {
      if (x == y || jk.J(x, y) == 0.0) continue;
      pairs.push_back({{"u", jk.space.vertex(static_cast<std::size_t>(x))},
                       {"v", jk.space.vertex(static_cast<std::size_t>(y))},
                       {"J", jk.J(x, y)}});
    }
  }
  j["J"] = std::move(pairs);
  j["k"] = detail::keyed(jk.space, jk.k);
  return j;
}

// ---- report ----

inline Json to_json(const VerificationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks()) {
    Json cj{{"name", c.name}, {"residual", c.residual}, {"tol", c.tol}, {"pass", c.pass}};
    if (c.detail) cj["detail"] = *c.detail;
    checks.push_back(std::move(cj));
  }
  Json values = Json::object();
  for (const auto& [k, v] : r.values()) values[k] = v;
  return Json{{"verdict", r.verdict()}, {"checks", std::move(checks)}, {"values", std::move(values)}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace dirikit::io
