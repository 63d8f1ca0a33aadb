// Acceptance run: one PASS/FAIL line per criterion at its pinned tolerance.
// Exit status is nonzero if any criterion fails that is not listed as a known
// discrepancy (those are still printed as FAIL).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dirikit/dirikit.hpp"
#include "oracles.hpp"

using namespace dirikit;

namespace {

struct Line {
  std::string id;
  std::string what;
  bool pass;
  std::string measured;
  bool known = false;
};

std::vector<Line> lines;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void record(std::string id, std::string what, bool pass, std::string measured, bool known = false) {
  std::printf("%s  %-4s %s  [%s]%s\n", pass ? "PASS" : "FAIL", id.c_str(), what.c_str(), measured.c_str(),
              !pass && known ? "  (known discrepancy, see README)" : "");
  lines.push_back({std::move(id), std::move(what), pass, std::move(measured), known});
}

void bound(std::string id, std::string what, double worst, double tol, bool known = false) {
  record(std::move(id), std::move(what), worst <= tol, "max " + num(worst) + " <= " + num(tol), known);
}

struct Certified {
  IntertwinedPair pair;
  VerificationReport report;
};

Vector random_vector(SplitMix64& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

int size_for(int i) { return 2 + i % 6; }

}  // namespace

int main() {
  SplitMix64 root(20261019);

  // ---- randomized pair families -------------------------------------------
  std::vector<Certified> relabel_pairs, doob_pairs, recurrent_pairs;
  {
    SplitMix64 rng = root.split();
    for (int i = 0; i < 100; ++i) {
      const GraphForm q = random_connected_form(rng, size_for(i), {0.3, 0.5, 2.0, i % 2 == 1});
      IntertwinedPair p = relabel(q, rng);
      auto r = certify(p.iso, p.q1, p.q2);
      relabel_pairs.push_back({std::move(p), std::move(r)});
    }
    for (int i = 0; i < 100; ++i) {
      IntertwinedPair p = random_doob_pair(rng, size_for(i));
      auto r = certify(p.iso, p.q1, p.q2);
      doob_pairs.push_back({std::move(p), std::move(r)});
    }
    for (int i = 0; i < 100; ++i) {
      IntertwinedPair p = random_recurrent_pair(rng, size_for(i), i % 4 != 0);
      auto r = certify(p.iso, p.q1, p.q2);
      recurrent_pairs.push_back({std::move(p), std::move(r)});
    }
  }
  std::vector<const Certified*> all;
  for (const auto* family : {&relabel_pairs, &doob_pairs, &recurrent_pairs}) {
    for (const auto& c : *family) all.push_back(&c);
  }
  std::vector<const Certified*> recurrent;
  for (const auto* c : all) {
    if (is_recurrent(c->pair.q1) && is_recurrent(c->pair.q2)) recurrent.push_back(c);
  }

  // ---- 1. unitarity rigidity ---------------------------------------------
  {
    double unit = 0.0, meas = 0.0;
    bool verdicts = true;
    for (const auto* family : {&relabel_pairs, &doob_pairs}) {
      for (const auto& c : *family) {
        verdicts = verdicts && c.report.verdict();
        const Matrix Um = c.pair.iso.matrix();
        const double beta = c.report.value("beta");
        unit = std::max(unit, (adjoint_matrix(c.pair.iso) * Um - beta * Matrix::Identity(Um.rows(), Um.cols()))
                                  .cwiseAbs()
                                  .maxCoeff());
        meas = std::max(meas, c.report.at("measure_identity").residual);
      }
    }
    bound("1a", "||U*U - beta I||_max on 200 pairs (100 relabel, 100 doob)", unit, 1e-9);
    bound("1b", "measure identity h^2 m2 = beta m1∘tau, max relative residual", meas, 1e-9);
    record("1c", "certify verdict true on all 200 pairs", verdicts, verdicts ? "200/200" : "some failed");
  }

  // ---- 2. recurrent scaling constancy ------------------------------------
  {
    double worst = 0.0;
    std::size_t isos = 0;
    for (const auto& c : recurrent_pairs) {
      for (const auto& U : find_intertwiners(c.pair.q1, c.pair.q2)) {
        worst = std::max(worst, U.h().maxCoeff() / U.h().minCoeff() - 1.0);
        ++isos;
      }
    }
    bound("2a", "max h / min h - 1 over all intertwiners of 100 recurrent pairs (" + std::to_string(isos) + ")",
          worst, 1e-9);
    double min_ratio = INFINITY;
    for (const auto& c : doob_pairs) min_ratio = std::min(min_ratio, c.report.value("h_ratio"));
    record("2b", "doob family with killing: h ratio >= 1.1", min_ratio >= 1.1, "min ratio " + num(min_ratio));
  }

  // ---- 3. form scaling ---------------------------------------------------
  {
    double worst = 0.0;
    for (const auto* c : all) worst = std::max(worst, c->report.at("form_scaling").residual);
    bound("3", "Q2(Ue_i,Ue_j) - beta Q1(e_i,e_j) on " + std::to_string(all.size()) + " certified pairs", worst, 1e-9);
  }

  // ---- 4. jump transformation --------------------------------------------
  {
    double worst = 0.0;
    for (const auto* c : all) {
      worst = std::max(worst, verify_jump_transform(c->pair.iso, c->pair.q1, c->pair.q2).at("jump_transform").residual);
    }
    bound("4a", "beta J1(tau x,tau y) - h(x)h(y) J2(x,y), per pair", worst, 1e-9);

    SplitMix64 rng = root.split();
    double trunc = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int n = size_for(i);
      const GraphForm q = random_connected_form(rng, n, {0.4, 0.5, 2.0, i % 2 == 0});
      const Vector phi = random_vector(rng, n, 0.0, 2.0);
      const Vector f = random_vector(rng, n, -1.0, 1.0);
      trunc = std::max(trunc, std::abs(truncated_form(q, phi, f) - truncated_jump_energy(decompose(q), phi, f)));
    }
    bound("4b", "truncated form Q(phi f) - Q(phi f^2, phi) vs weighted jump energy, 100 triples", trunc, 1e-10);
  }

  // ---- 5. search soundness / completeness --------------------------------
  {
    SplitMix64 rng = root.split();
    int agree = 0, nonempty = 0;
    for (int i = 0; i < 50; ++i) {
      const int n = 2 + i % 6;  // 2..7
      IntertwinedPair p = [&] {
        switch (i % 5) {
          case 0: return relabel(generate(Family::Cycle, std::max(3, n)), rng);
          case 1: return relabel(random_connected_form(rng, n), rng);
          case 2: return random_doob_pair(rng, n);
          case 3: return random_recurrent_pair(rng, n);
          default: {
            const GraphForm a = random_connected_form(rng, n);
            const GraphForm b = random_connected_form(rng, n);
            return IntertwinedPair{a, b, identity_iso(a.space())};
          }
        }
      }();
      std::vector<std::vector<std::size_t>> pruned;
      for (const auto& U : find_intertwiners(p.q1, p.q2)) pruned.push_back(U.tau());
      const auto brute = oracle::brute_force_intertwiners(p.q1, p.q2);
      agree += pruned == brute ? 1 : 0;
      nonempty += brute.empty() ? 0 : 1;
    }
    record("5", "pruned search == brute force over all bijections, 50 pairs |X| <= 7", agree == 50,
           std::to_string(agree) + "/50 equal, " + std::to_string(nonempty) + " with solutions");
  }

  // ---- 6. resistance isometry --------------------------------------------
  {
    double stated = 0.0, stated_equal = 0.0, corrected = 0.0;
    std::size_t equal_mass = 0;
    for (const auto* c : recurrent) {
      const auto& p = c->pair;
      const Matrix R1 = resistance_matrix(p.q1).matrix();
      const Matrix R2 = resistance_matrix(p.q2).matrix();
      const double beta = c->report.value("beta");
      const double alpha = p.iso.h().mean();
      const bool same_mass = std::abs(p.q1.space().total_mass() - p.q2.space().total_mass()) <=
                             1e-12 * p.q1.space().total_mass();
      double s = 0.0;
      for (Eigen::Index y = 0; y < R2.rows(); ++y) {
        for (Eigen::Index z = 0; z < R2.rows(); ++z) {
          const auto ty = static_cast<Eigen::Index>(p.iso.tau(static_cast<std::size_t>(y)));
          const auto tz = static_cast<Eigen::Index>(p.iso.tau(static_cast<std::size_t>(z)));
          s = std::max(s, std::abs(beta * R1(ty, tz) - alpha * alpha * R2(y, z)));
        }
      }
      stated = std::max(stated, s);
      if (same_mass) {
        stated_equal = std::max(stated_equal, s);
        ++equal_mass;
      }
      corrected = std::max(corrected, verify_resistance_isometry(p.iso, p.q1, p.q2).at("resistance_scaling").residual);
    }
    bound("6a", "beta R1(tau y,tau z) = alpha^2 R2(y,z) as stated, all " + std::to_string(recurrent.size()) +
                    " recurrent pairs",
          stated, 1e-9, true);
    bound("6b", "same identity restricted to equal-mass pairs (" + std::to_string(equal_mass) + ")", stated_equal,
          1e-9);
    bound("6c", "alpha^2 R1(tau y,tau z) = beta R2(y,z), all recurrent pairs", corrected, 1e-9);

    SplitMix64 rng = root.split();
    bool sup_ok = true;
    double worst_max = 0.0, worst_excess = 0.0;
    std::size_t instances = 0;
    for (const auto* c : recurrent) {
      const GraphForm& q = c->pair.q1;
      if (q.dim() > 6) continue;
      ++instances;
      const Matrix R = resistance_matrix(q).matrix();
      for (Eigen::Index x = 0; x < q.dim(); ++x) {
        for (Eigen::Index y = x + 1; y < q.dim(); ++y) {
          const auto probe = oracle::probe_sup(q, x, y, rng, 1000, 100);
          worst_max = std::max(worst_max, std::abs(probe.at_maximizer - R(x, y)) / R(x, y));
          const double excess = std::max(probe.best_random, probe.best_ascent) / R(x, y) - 1.0;
          worst_excess = std::max(worst_excess, excess);
          sup_ok = sup_ok && probe.best_random <= R(x, y) * (1 + 1e-9) && probe.best_ascent <= R(x, y) * (1 + 1e-9);
        }
      }
    }
    record("6d", "closed form vs sup formula on " + std::to_string(instances) +
                     " instances n <= 6 (maximizer + 1000 random unit-energy f)",
           sup_ok && worst_max <= 1e-9,
           "maximizer rel err " + num(worst_max) + ", best excess " + num(worst_excess));
  }

  // ---- 7. Sierpinski renormalization -------------------------------------
  {
    double worst = 0.0, oracle_gap = 0.0;
    auto corner_r = [&](int level) {
      const GraphForm s = generate(Family::Sierpinski, level);
      const auto a = static_cast<Eigen::Index>(s.space().require_index(sierpinski_corner(level, 0)));
      const auto b = static_cast<Eigen::Index>(s.space().require_index(sierpinski_corner(level, 1)));
      const double r = resistance_matrix(s)(a, b);
      oracle_gap = std::max(oracle_gap, std::abs(r - oracle::unit_potential(s, a, b).resistance) / r);
      return r;
    };
    for (int n = 0; n <= 2; ++n) worst = std::max(worst, std::abs(corner_r(n + 1) / corner_r(n) - 5.0 / 3.0));
    bound("7", "Sierpinski R_{n+1}/R_n - 5/3, n = 0,1,2 (boundary-solve gap " + num(oracle_gap) + ")", worst, 1e-9);
  }

  // ---- 8. intrinsic bijection --------------------------------------------
  {
    bool ok = true;
    double zero_slack = 0.0;
    std::size_t samples = 0;
    for (const auto* c : recurrent) {
      const auto& p = c->pair;
      const auto set = default_intrinsic_samples(p.q1);
      const auto r = verify_intrinsic_bijection(p.iso, p.q1, p.q2, set);
      ok = ok && r.verdict();
      samples += set.size();
      for (const auto& s : set) {
        if (s.name.find("boundary") == std::string::npos) continue;
        const Vector s1 = is_intrinsic(p.q1, s.d).slack.cwiseQuotient(p.q1.space().measure());
        const Vector s2 = is_intrinsic(p.q2, pushforward_metric(s.d, p.iso)).slack.cwiseQuotient(p.q2.space().measure());
        zero_slack = std::max({zero_slack, std::abs(s1.minCoeff()), std::abs(s2.minCoeff())});
      }
    }
    record("8a", "membership in I(Q) preserved by pushforward, " + std::to_string(samples) + " samples on " +
                     std::to_string(recurrent.size()) + " recurrent pairs",
           ok, ok ? "all equivalent" : "counterexample found");
    bound("8b", "boundary samples: min slack / m equals 0 on both sides", zero_slack, 1e-12);
  }

  // ---- 9. excessive functions, Liouville, truncation ---------------------
  {
    SplitMix64 rng = root.split();
    int agree = 0, excessive = 0;
    for (int i = 0; i < 200; ++i) {
      const int n = size_for(i);
      const GraphForm q = random_connected_form(rng, n, {0.3, 0.5, 2.0, i % 2 == 0});
      Vector h;
      if (i % 3 == 0) {
        h = random_vector(rng, n, 0.0, 2.0);
      } else if (is_recurrent(q)) {
        h = Vector::Constant(n, rng.uniform(0.5, 2.0));
      } else {
        Vector g(n);
        for (Eigen::Index k = 0; k < n; ++k) g(k) = rng.bernoulli(0.5) ? rng.uniform(0.0, 1.0) : 0.0;
        h = oracle::form_matrix(q).fullPivLu().solve(g);
      }
      const bool gen = is_excessive(generator(q), h);
      excessive += gen ? 1 : 0;
      agree += gen == oracle::excessive_by_semigroup(q, h) ? 1 : 0;
    }
    record("9a", "generator criterion Lh >= 0 vs sampled semigroup T_t h <= h, 200 (G,h)", agree == 200,
           std::to_string(agree) + "/200 agree, " + std::to_string(excessive) + " excessive");

    int liouville = 0;
    for (int i = 0; i < 100; ++i) {
      const GraphForm q = random_connected_form(rng, size_for(i), {0.3, 0.5, 2.0, i % 2 == 0});
      const auto h = find_nonconstant_excessive(generator(q));
      const bool witness_ok = !h || is_excessive(generator(q), *h);
      liouville += (!h == is_recurrent(q)) && witness_ok ? 1 : 0;
    }
    record("9b", "find_nonconstant_excessive none <=> recurrent, 100 irreducible forms", liouville == 100,
           std::to_string(liouville) + "/100");

    int trunc = 0;
    for (int i = 0; i < 200; ++i) {
      const int n = size_for(i);
      const GraphForm q = random_connected_form(rng, n, {0.3, 0.5, 2.0, i % 2 == 0});
      Vector h;
      if (is_recurrent(q)) {
        h = Vector::Constant(n, rng.uniform(0.0, 1.0));
      } else {
        Vector g(n);
        for (Eigen::Index k = 0; k < n; ++k) g(k) = rng.uniform(0.0, 1.0);
        h = oracle::form_matrix(q).fullPivLu().solve(g);
      }
      const Vector f = random_vector(rng, n, -1.0, 2.0);
      const auto r = check_truncation(q, f, h);
      const double qf = oracle::form(q, f, f);
      const Vector lower = f.cwiseMin(h);
      const Vector excess = (f - h).cwiseMax(0.0);
      const bool independent = oracle::form(q, lower, lower) <= qf * (1 + 1e-12) &&
                               oracle::form(q, excess, excess) <= 4 * qf * (1 + 1e-12);
      trunc += r.pass && independent ? 1 : 0;
    }
    record("9c", "Q(f^h) <= Q(f) and Q((f-h)+) <= 4Q(f), 200 triples", trunc == 200, std::to_string(trunc) + "/200");
  }

  int unexpected = 0, known = 0;
  for (const auto& l : lines) {
    if (!l.pass) (l.known ? known : unexpected) += 1;
  }
  std::printf("\n%zu criteria lines, %d unexpected failures, %d known discrepancies\n", lines.size(), unexpected,
              known);
  return unexpected == 0 ? 0 : 1;
}
