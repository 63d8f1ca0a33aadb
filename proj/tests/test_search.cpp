#include <gtest/gtest.h>

#include <cmath>

#include "dirikit/random.hpp"
#include "dirikit/search.hpp"
#include "oracles.hpp"

using namespace dirikit;

namespace {

GraphForm path3(std::vector<double> m) {
  return build_form({"a", "b", "c"}, m, {{"a", "b", 1}, {"b", "c", 1}});
}

std::vector<std::vector<std::size_t>> taus(const std::vector<OrderIso>& isos) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& U : isos) out.push_back(U.tau());
  return out;
}

// Both forms have generator spectrum {1, 3} but different diagonals.
std::pair<GraphForm, GraphForm> cospectral_pair() {
  const double s = std::sqrt(0.75);
  return {build_form({"a", "b"}, std::vector<double>{1, 1}, {{"a", "b", 1}}, {1, 1}),
          build_form({"a", "b"}, std::vector<double>{1, 1}, {{"a", "b", s}}, {1.5 - s, 2.5 - s})};
}

}  // namespace

TEST(FindIntertwiners, Examples) {
  const auto sym = find_intertwiners(path3({1, 1, 1}), path3({1, 1, 1}));
  ASSERT_EQ(sym.size(), 2u);
  EXPECT_EQ(sym[0].tau(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(sym[1].tau(), (std::vector<std::size_t>{2, 1, 0}));

  EXPECT_EQ(find_intertwiners(path3({1, 2, 3}), path3({1, 2, 3})).size(), 1u);

  const GraphForm q = build_form({"a", "b"}, std::vector<double>{1, 1}, {{"a", "b", 1}}, {1, 0});
  const DoobPair doob = doob_pair(q, (Vector(2) << 1, 2).finished());
  const auto found = find_intertwiners(q, doob.form);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].tau(), (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(found[0].h()(0), 1.0, 1e-15);
  EXPECT_NEAR(found[0].h()(1), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(*found[0].beta(), 1.0);
}

TEST(FindIntertwiners, SizeMismatchAndReducible) {
  EXPECT_TRUE(find_intertwiners(generate(Family::Complete, 2), generate(Family::Path, 3)).empty());
  const GraphForm split = build_form({"a", "b"}, std::vector<double>{1, 1}, {});
  EXPECT_THROW(find_intertwiners(split, split), Error);
}

TEST(FindIntertwiners, AutomorphismCounts) {
  EXPECT_EQ(find_intertwiners(generate(Family::Cycle, 5), generate(Family::Cycle, 5)).size(), 10u);
  EXPECT_EQ(find_intertwiners(generate(Family::Complete, 4), generate(Family::Complete, 4)).size(), 24u);
  EXPECT_EQ(find_intertwiners(generate(Family::Sierpinski, 1), generate(Family::Sierpinski, 1)).size(), 6u);
  SearchOptions capped;
  capped.max_solutions = 5;
  EXPECT_EQ(find_intertwiners(generate(Family::Complete, 4), generate(Family::Complete, 4), capped).size(), 5u);
}

TEST(FindIntertwiners, MatchesBruteForce) {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 6;
    const GraphForm q1 = trial % 4 == 0 ? generate(Family::Cycle, std::max(3, n))
                                        : random_connected_form(rng, n, {0.3, 0.5, 2.0, trial % 2 == 1});
    const IntertwinedPair pair = trial % 3 == 0 ? relabel(q1, rng) : random_doob_pair(rng, n);
    const auto found = find_intertwiners(pair.q1, pair.q2);
    EXPECT_EQ(taus(found), oracle::brute_force_intertwiners(pair.q1, pair.q2)) << "trial " << trial;
    EXPECT_FALSE(found.empty());
    const GraphForm& a = pair.q1;
    for (const auto& U : found) EXPECT_TRUE(certify(U, a, pair.q2).verdict());
  }
}

TEST(FindIntertwiners, ParallelMatchesSerial) {
  SearchOptions par;
  par.jobs = 4;
  const GraphForm c6 = generate(Family::Cycle, 6);
  const auto serial = find_intertwiners(c6, c6);
  const auto parallel = find_intertwiners(c6, c6, par);
  EXPECT_EQ(taus(serial), taus(parallel));
  EXPECT_EQ(serial.size(), 12u);
  par.max_solutions = 3;
  const auto all = taus(serial);
  EXPECT_EQ(taus(find_intertwiners(c6, c6, par)), std::vector<std::vector<std::size_t>>(all.begin(), all.begin() + 3));
}

TEST(FindIntertwiners, Deterministic) {
  SplitMix64 rng(5);
  const IntertwinedPair pair = relabel(generate(Family::Sierpinski, 1), rng);
  const auto a = find_intertwiners(pair.q1, pair.q2);
  const auto b = find_intertwiners(pair.q1, pair.q2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].tau(), b[i].tau());
    EXPECT_EQ(a[i].h(), b[i].h());
  }
}

TEST(EquivalenceVerdict, Reasons) {
  const auto size = equivalence_verdict(generate(Family::Complete, 2), generate(Family::Path, 3));
  EXPECT_FALSE(size.equivalent());
  EXPECT_EQ(*size.reason, InequivalenceReason::Size);

  // Perturbing one measure changes the spectrum, so the cheap check fires first.
  const auto perturbed = equivalence_verdict(path3({1, 1, 1}), path3({1, 1.1, 1}));
  EXPECT_FALSE(perturbed.equivalent());
  EXPECT_EQ(*perturbed.reason, InequivalenceReason::Spectrum);

  const auto [c1, c2] = cospectral_pair();
  const auto exhausted = equivalence_verdict(c1, c2);
  EXPECT_FALSE(exhausted.equivalent());
  EXPECT_EQ(*exhausted.reason, InequivalenceReason::Exhausted);
  EXPECT_EQ(to_string(InequivalenceReason::Exhausted), "exhausted");
}

TEST(EquivalenceVerdict, RelabeledWitness) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const IntertwinedPair pair = relabel(random_connected_form(rng, 6), rng);
    const auto v = equivalence_verdict(pair.q1, pair.q2);
    ASSERT_TRUE(v.equivalent());
    EXPECT_EQ(v.witness->tau(), pair.iso.tau());
  }
}

TEST(SpectraMatch, ScaleAware) {
  const GraphForm a = generate(Family::Path, 4);
  const GraphForm b = generate(Family::Path, 4, {1.0 + 1e-12, 1.0});
  EXPECT_TRUE(spectra_match(generator(a), generator(b), 1e-8));
  EXPECT_FALSE(spectra_match(generator(a), generator(generate(Family::Cycle, 4)), 1e-8));
}
