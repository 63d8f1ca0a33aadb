#pragma once

// Command-line front end. Exit codes: 0 success or true verdict, 1 false
// verdict, 2 usage or input error (one diagnostic line on stderr).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dirikit/beurling.hpp"
#include "dirikit/core.hpp"
#include "dirikit/error.hpp"
#include "dirikit/io.hpp"
#include "dirikit/metrics.hpp"
#include "dirikit/orderiso.hpp"
#include "dirikit/random.hpp"
#include "dirikit/search.hpp"
#include "dirikit/spectral.hpp"

namespace dirikit::cli {

enum ExitCode { kOk = 0, kFalse = 1, kUsage = 2 };

struct GlobalOptions {
  std::optional<double> tol;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
  unsigned jobs = 1;
};

namespace detail {

using io::Json;

struct Output {
  Json json;
  std::string text;
  int code = kOk;
};

inline Tolerance tolerance(const GlobalOptions& g) {
  Tolerance t;
  if (g.tol) {
    t.rel = *g.tol;
  } else if (const char* env = std::getenv("DIRIKIT_TOL"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (*end != '\0' || !(v >= 0.0)) throw Error(ErrorCode::ParseError, "DIRIKIT_TOL is not a nonnegative number");
    t.rel = v;
  }
  return t;
}

inline GraphForm load_graph(const std::string& path) { return io::parse_graph(io::read_source(path)); }

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

inline std::string report_text(const VerificationReport& r) {
  std::ostringstream s;
  for (const auto& c : r.checks()) {
    s << (c.pass ? "PASS " : "FAIL ") << c.name << "  residual=" << fmt(c.residual) << "  tol=" << fmt(c.tol);
    if (c.detail) s << "  (" << *c.detail << ")";
    s << "\n";
  }
  for (const auto& [k, v] : r.values()) s << k << " = " << fmt(v) << "\n";
  s << "verdict: " << (r.verdict() ? "true" : "false") << "\n";
  return s.str();
}

inline std::string matrix_text(const MeasureSpace& space, const Matrix& d) {
  std::ostringstream s;
  for (Eigen::Index x = 0; x < d.rows(); ++x) {
    s << space.vertex(static_cast<std::size_t>(x)) << ":";
    for (Eigen::Index y = 0; y < d.cols(); ++y) s << " " << fmt(d(x, y));
    s << "\n";
  }
  return s.str();
}

inline std::string iso_text(const OrderIso& U) {
  std::ostringstream s;
  for (std::size_t y = 0; y < U.size(); ++y) {
    s << U.target().vertex(y) << " -> " << U.source().vertex(U.tau(y))
      << "  h=" << fmt(U.h()(static_cast<Eigen::Index>(y))) << "\n";
  }
  return s.str();
}

inline Output cmd_check(const GlobalOptions&, const std::string& path) {
  const GraphForm Q = load_graph(path);
  const Generator G = generator(Q);
  const Vector spectrum = spectral_data(G).eigenvalues;
  Output o;
  o.json["vertices"] = Q.size();
  o.json["edges"] = Q.edges().size();
  o.json["irreducible"] = is_irreducible(Q);
  o.json["recurrent"] = is_recurrent(Q);
  o.json["commutant_trivial"] = commutant_is_trivial(G);
  o.json["total_mass"] = Q.space().total_mass();
  o.json["spectrum"] = std::vector<double>(spectrum.data(), spectrum.data() + spectrum.size());
  std::ostringstream s;
  s << "vertices: " << Q.size() << "\nedges: " << Q.edges().size()
    << "\nirreducible: " << (is_irreducible(Q) ? "yes" : "no") << "\nrecurrent: " << (is_recurrent(Q) ? "yes" : "no")
    << "\nspectrum:";
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) s << " " << fmt(spectrum(i));
  s << "\n";
  o.text = s.str();
  return o;
}

inline Output cmd_search(const GlobalOptions& g, const std::string& p1, const std::string& p2,
                         std::size_t max_solutions) {
  const GraphForm Q1 = load_graph(p1);
  const GraphForm Q2 = load_graph(p2);
  SearchOptions opts;
  opts.tol = tolerance(g);
  opts.jobs = g.jobs;
  opts.max_solutions = max_solutions;

  Output o;
  std::vector<OrderIso> found;
  std::optional<InequivalenceReason> reason;
  if (Q1.size() != Q2.size()) {
    reason = InequivalenceReason::Size;
  } else {
    dirikit::detail::require_irreducible(Q1, Q2);
    if (!spectra_match(generator(Q1), generator(Q2), opts.spectral_tol)) {
      reason = InequivalenceReason::Spectrum;
    } else {
      found = find_intertwiners(Q1, Q2, opts);
      if (found.empty()) reason = InequivalenceReason::Exhausted;
    }
  }
  o.json["equivalent"] = !found.empty();
  if (reason) o.json["reason"] = std::string(to_string(*reason));
  o.json["count"] = found.size();
  Json list = Json::array();
  std::ostringstream s;
  s << "equivalent: " << (found.empty() ? "no" : "yes");
  if (reason) s << " (" << to_string(*reason) << ")";
  s << "\n";
  for (std::size_t i = 0; i < found.size(); ++i) {
    list.push_back(io::to_json(found[i]));
    s << "intertwiner " << i << "\n" << iso_text(found[i]);
  }
  o.json["intertwiners"] = std::move(list);
  o.text = s.str();
  o.code = found.empty() ? kFalse : kOk;
  return o;
}

inline Output cmd_certify(const GlobalOptions& g, const std::string& p1, const std::string& p2,
                          const std::string& pu) {
  const GraphForm Q1 = load_graph(p1);
  const GraphForm Q2 = load_graph(p2);
  const OrderIso U = io::parse_iso(io::read_source(pu), Q1.space(), Q2.space());
  const Tolerance tol = tolerance(g);

  VerificationReport report;
  const Generator G1 = generator(Q1);
  const Generator G2 = generator(Q2);
  if (!intertwines(U, G1, G2, tol)) {
    // Not a precondition failure from the user's side: the answer is "no".
    report.add("orderiso.intertwining", intertwining_residual(U, G1, G2),
               tol.bound(intertwining_scale(U, G1, G2)));
  } else {
    report.merge(certify(U, Q1, Q2, tol), "orderiso.");
    report.merge(verify_jump_transform(U, Q1, Q2, tol), "jump.");
    if (is_recurrent(Q1) && is_recurrent(Q2)) {
      report.merge(verify_resistance_isometry(U, Q1, Q2, tol), "resistance.");
      report.merge(verify_intrinsic_bijection(U, Q1, Q2, default_intrinsic_samples(Q1), tol), "intrinsic.");
    }
  }
  Output o;
  o.json = io::to_json(report);
  o.text = report_text(report);
  o.code = report.verdict() ? kOk : kFalse;
  return o;
}

inline Output cmd_resistance(const GlobalOptions&, const std::string& path) {
  const GraphForm Q = load_graph(path);
  const PseudoMetric R = resistance_matrix(Q);
  Output o;
  o.json["vertices"] = Q.space().vertices();
  o.json["d"] = io::to_json(R)["d"];
  o.text = matrix_text(Q.space(), R.matrix());
  return o;
}

inline Output cmd_intrinsic(const GlobalOptions& g, const std::string& path, const std::string& metric_path) {
  const GraphForm Q = load_graph(path);
  const Tolerance tol = tolerance(g);
  Output o;
  std::ostringstream s;
  if (metric_path.empty()) {
    const PseudoMetric d = canonical_intrinsic_metric(Q);
    const auto r = is_intrinsic(Q, d, tol);
    o.json["vertices"] = Q.space().vertices();
    o.json["d"] = io::to_json(d)["d"];
    o.json["slack"] = io::detail::keyed(Q.space(), r.slack);
    s << matrix_text(Q.space(), d.matrix());
  } else {
    const PseudoMetric d = io::parse_metric(io::read_source(metric_path));
    const auto r = is_intrinsic(Q, d, tol);
    o.json["intrinsic"] = r.intrinsic;
    o.json["slack"] = io::detail::keyed(Q.space(), r.slack);
    o.code = r.intrinsic ? kOk : kFalse;
    s << "intrinsic: " << (r.intrinsic ? "yes" : "no") << "\n";
    for (std::size_t x = 0; x < Q.size(); ++x) {
      s << "slack " << Q.space().vertex(x) << " = " << fmt(r.slack(static_cast<Eigen::Index>(x))) << "\n";
    }
  }
  o.text = s.str();
  return o;
}

inline Output cmd_decompose(const GlobalOptions&, const std::string& path) {
  const GraphForm Q = load_graph(path);
  const JumpKilling jk = decompose(Q);
  Output o;
  o.json = io::to_json(jk);
  std::ostringstream s;
  for (const auto& p : o.json["J"]) {
    s << "J(" << p["u"].get<std::string>() << "," << p["v"].get<std::string>() << ") = " << fmt(p["J"].get<double>())
      << "\n";
  }
  for (std::size_t x = 0; x < Q.size(); ++x) {
    s << "k(" << Q.space().vertex(x) << ") = " << fmt(jk.k(static_cast<Eigen::Index>(x))) << "\n";
  }
  o.text = s.str();
  return o;
}

inline Output graph_output(const GraphForm& Q) {
  Output o;
  o.json = io::to_json(Q);
  o.text = o.json.dump(2) + "\n";
  return o;
}

inline Output cmd_gen(const std::string& family, int n, const FamilyParams& params) {
  const auto f = parse_family(family);
  if (!f) throw Error(ErrorCode::ParseError, "unknown family '" + family + "'");
  return graph_output(generate(*f, n, params));
}

inline Output cmd_gen_pair(const GlobalOptions& g, const std::string& transform, int n, const std::string& out_dir) {
  SplitMix64 rng(g.seed);
  IntertwinedPair pair = transform == "doob" ? random_doob_pair(rng, n) : random_recurrent_pair(rng, n, false);
  Output o;
  o.json["g1"] = io::to_json(pair.q1);
  o.json["g2"] = io::to_json(pair.q2);
  o.json["iso"] = io::to_json(pair.iso);
  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    for (const auto& [file, key] : {std::pair{"G1.json", "g1"}, {"G2.json", "g2"}, {"U.json", "iso"}}) {
      std::ofstream f(dir / file, std::ios::binary);
      if (!f) throw Error(ErrorCode::ParseError, "cannot write '" + (dir / file).string() + "'");
      f << io::dump(o.json[key]);
    }
  }
  o.text = o.json.dump(2) + "\n";
  return o;
}

}  // namespace detail

/// Runs one invocation; args exclude the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite Dirichlet forms: intertwiners, certification and metrics", "dirikit"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions g;
  double tol_value = 0.0;
  auto* tol_opt = app.add_option("--tol", tol_value, "relative tolerance (default 1e-9, env DIRIKIT_TOL)")
                      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "seed for randomized generation")->capture_default_str();
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  app.add_option("--out", g.out, "write output to FILE instead of stdout");
  app.add_option("--jobs", g.jobs, "worker threads for search")->check(CLI::PositiveNumber)->capture_default_str();

  std::string g1, g2, iso, metric, family, transform = "relabel", out_dir;
  int n = 5;
  std::size_t max_solutions = SearchOptions{}.max_solutions;
  FamilyParams params;

  auto* check = app.add_subcommand("check", "structural predicates and spectrum");
  check->add_option("graph", g1)->required();

  auto* search = app.add_subcommand("search", "enumerate intertwining isomorphisms");
  search->add_option("graph1", g1)->required();
  search->add_option("graph2", g2)->required();
  search->add_option("--max", max_solutions, "stop after this many solutions")->capture_default_str();

  auto* certify_cmd = app.add_subcommand("certify", "verify an isomorphism against two forms");
  certify_cmd->add_option("graph1", g1)->required();
  certify_cmd->add_option("graph2", g2)->required();
  certify_cmd->add_option("iso", iso)->required();

  auto* resistance = app.add_subcommand("resistance", "effective resistance matrix");
  resistance->add_option("graph", g1)->required();

  auto* intrinsic = app.add_subcommand("intrinsic", "canonical intrinsic metric, or check --metric");
  intrinsic->add_option("graph", g1)->required();
  intrinsic->add_option("--metric", metric, "metric JSON to test");

  auto* decompose_cmd = app.add_subcommand("decompose", "jump and killing measures");
  decompose_cmd->add_option("graph", g1)->required();

  auto* gen = app.add_subcommand("gen", "emit a graph from a family");
  gen->add_option("--family", family)->required()->check(CLI::IsMember({"path", "cycle", "complete", "sierpinski"}));
  gen->add_option("--n", n, "vertex count (sierpinski: level)")->required();
  gen->add_option("--conductance", params.conductance)->capture_default_str();
  gen->add_option("--measure", params.measure)->capture_default_str();

  auto* gen_pair = app.add_subcommand("gen-pair", "emit an intertwined triple (G1, G2, U)");
  gen_pair->add_option("--transform", transform)->check(CLI::IsMember({"relabel", "doob"}))->capture_default_str();
  gen_pair->add_option("--n", n, "vertex count")->capture_default_str();
  gen_pair->add_option("--out-dir", out_dir, "also write G1.json, G2.json, U.json here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "dirikit: " << e.what() << "\n";
    return kUsage;
  }
  if (tol_opt->count() > 0) g.tol = tol_value;

  try {
    detail::Output o;
    if (*check) o = detail::cmd_check(g, g1);
    else if (*search) o = detail::cmd_search(g, g1, g2, max_solutions);
    else if (*certify_cmd) o = detail::cmd_certify(g, g1, g2, iso);
    else if (*resistance) o = detail::cmd_resistance(g, g1);
    else if (*intrinsic) o = detail::cmd_intrinsic(g, g1, metric);
    else if (*decompose_cmd) o = detail::cmd_decompose(g, g1);
    else if (*gen) o = detail::cmd_gen(family, n, params);
    else o = detail::cmd_gen_pair(g, transform, n, out_dir);

    const std::string body = g.format == "text" ? o.text : io::dump(o.json);
    if (g.out.empty()) {
      out << body;
    } else {
      std::ofstream f(g.out, std::ios::binary);
      if (!f) throw Error(ErrorCode::ParseError, "cannot write '" + g.out + "'");
      f << body;
    }
    return o.code;
  } catch (const Error& e) {
    err << "dirikit: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "dirikit: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace dirikit::cli
