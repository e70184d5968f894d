#include <doctest.h>

#include <algorithm>
#include <set>

#include "emdm/usersim.hpp"
#include "fixtures.hpp"

using namespace emdm;
using fixture::aid;
using fixture::vid;

namespace {

bool contains(const Observation& o, ValueId v) {
  return std::any_of(o.candidates.begin(), o.candidates.end(), [&](const Candidate& c) { return c.value == v; });
}

Catalog skewed_catalog(std::size_t card, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_goals = 5000;
  spec.cardinalities = {card};
  spec.skew = 1.0;
  return generate_synthetic(spec, seed);
}

}  // namespace

TEST_SUITE("usersim") {

TEST_CASE("cooperative answers read the catalog") {
  auto f = fixture::f1();
  CHECK(cooperative_answer(f, 2, aid(f, "B")) == vid(f, "B", "r"));
  CHECK(cooperative_answer(f, 2, aid(f, "B")) == cooperative_answer(f, 2, aid(f, "B")));
  auto gap = fixture::build({"Singer", "Style"}, {{"Amy", std::nullopt}});
  CHECK_FALSE(cooperative_answer(gap, 0, 1).has_value());
  SimulatedUser user(gap, 0, 3);
  CHECK(user.observe(1, 1).unknown);
  CHECK(user.observe(0, 1) == Observation::exact(0, 0));
}

TEST_CASE("perfect channel ranks the truth first with the largest confidence") {
  auto c = skewed_catalog(19, 1);
  DistractorTable table(c);
  NoiseSpec n;
  n.error_rate = 0.0;
  for (std::uint64_t k = 0; k < 500; ++k) {
    ValueId truth = c.value(0, static_cast<GoalId>(k));
    auto o = corrupt(truth, 0, table, n, k);
    REQUIRE_FALSE(o.candidates.empty());
    CHECK(o.candidates[0].value == truth);
    for (const auto& cand : o.candidates) CHECK(cand.confidence <= o.candidates[0].confidence);
  }
}

TEST_CASE("fully wrong single-candidate channel never lists the truth") {
  auto c = skewed_catalog(19, 2);
  DistractorTable table(c);
  NoiseSpec n;
  n.error_rate = 1.0 - 1e-12;
  n.inclusion_rate = 0.0;
  n.top_n = 1;
  for (std::uint64_t k = 0; k < 500; ++k) {
    ValueId truth = c.value(0, static_cast<GoalId>(k));
    auto o = corrupt(truth, 0, table, n, k);
    CHECK(o.candidates.size() == 1);
    CHECK_FALSE(contains(o, truth));
  }
}

TEST_CASE("empirical accuracy and inclusion match the channel parameters") {
  auto c = skewed_catalog(19, 3);
  REQUIRE(attribute_stats(c)[0].distinct == 19);
  DistractorTable table(c);
  NoiseSpec n;
  n.error_rate = 0.15;
  n.top_n = 5;
  n.inclusion_rate = 0.95;
  const int draws = 10000;
  int top1 = 0, included = 0;
  for (int k = 0; k < draws; ++k) {
    ValueId truth = c.value(0, static_cast<GoalId>(k % 5000));
    auto o = corrupt(truth, 0, table, n, derive_seed({99, static_cast<std::uint64_t>(k)}));
    top1 += o.candidates[0].value == truth;
    included += contains(o, truth);
  }
  CHECK(top1 / double(draws) == doctest::Approx(0.85).epsilon(0.02 / 0.85));
  CHECK(included / double(draws) == doctest::Approx(0.95).epsilon(0.02 / 0.95));
  CHECK(n.effective_inclusion() == 0.95);
  NoiseSpec one = n;
  one.top_n = 1;
  CHECK(one.effective_inclusion() == doctest::Approx(0.85));
}

TEST_CASE("observations always satisfy their invariants") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = fixture::random_catalog(rng, 30, 3, 8, 0.2);
    DistractorTable table(c);
    NoiseSpec n;
    n.error_rate = 0.9 * uniform01(rng);
    n.top_n = 1 + static_cast<int>(uniform_index(rng, 7));
    n.inclusion_rate = uniform01(rng);
    n.concentration = 0.05 + 3 * uniform01(rng);
    n.mass_beta = trial % 3 ? 2.0 : 0.0;
    for (GoalId g = 0; g < 30; ++g)
      for (AttrId a = 0; a < 3; ++a) {
        auto o = corrupt(cooperative_answer(c, g, a), a, table, n, derive_seed({static_cast<std::uint64_t>(trial), 7}));
        CHECK_NOTHROW(validate(o, c));
        CHECK(o.candidates.size() <= static_cast<std::size_t>(n.top_n));
        if (!o.unknown) {
          std::set<ValueId> distinct;
          for (const auto& cand : o.candidates) distinct.insert(cand.value);
          CHECK(distinct.size() == o.candidates.size());
          CHECK(std::is_sorted(o.candidates.begin(), o.candidates.end(),
                               [](const Candidate& x, const Candidate& y) { return x.confidence > y.confidence; }));
        }
      }
  }
}

TEST_CASE("single-valued attribute degenerates to the truth") {
  auto c = fixture::build({"Live"}, {{"no"}, {"no"}});
  NoiseSpec n;
  n.error_rate = 0.99;
  for (std::uint64_t k = 0; k < 50; ++k) {
    auto o = corrupt(0, 0, c, n, k);
    REQUIRE(o.candidates.size() == 1);
    CHECK(o.candidates[0].value == 0);
  }
}

TEST_CASE("corruption is a pure function of the nonce") {
  auto c = skewed_catalog(40, 4);
  DistractorTable table(c);
  NoiseSpec n;
  CHECK(corrupt(3, 0, table, n, 11) == corrupt(3, 0, table, n, 11));
  CHECK(corrupt(3, 0, table, n, 11) == corrupt(3, 0, c, n, 11));
  int differ = 0;
  for (std::uint64_t k = 0; k < 50; ++k) differ += !(corrupt(3, 0, table, n, k) == corrupt(3, 0, table, n, k + 1000));
  CHECK(differ > 40);
}

TEST_CASE("top-1 list is the head of the top-5 list") {
  auto c = skewed_catalog(40, 5);
  DistractorTable table(c);
  NoiseSpec five;
  five.error_rate = 0.3;
  NoiseSpec one = five;
  one.top_n = 1;
  for (std::uint64_t k = 0; k < 500; ++k) {
    ValueId truth = c.value(0, static_cast<GoalId>(k));
    CHECK(corrupt(truth, 0, table, five, k).candidates[0].value == corrupt(truth, 0, table, one, k).candidates[0].value);
  }
}

TEST_CASE("perfect single confident candidate composes to filtering") {
  auto f = fixture::f1();
  NoiseSpec n;
  n.error_rate = 0.0;
  n.top_n = 1;
  n.mass_beta = 0.0;
  auto s = init_state(f);
  for (GoalId g = 0; g < 4; ++g)
    for (AttrId a = 0; a < 2; ++a) {
      auto truth = cooperative_answer(f, g, a);
      auto o = corrupt(truth, a, f, n, 5);
      CHECK(o.candidates[0].confidence == 1.0);
      auto soft = soft_update(f, s, o);
      auto hard = exact_update(f, s, a, truth, MissingPolicy::Strict);
      REQUIRE(soft.size() == hard.size());
      for (std::size_t i = 0; i < soft.size(); ++i) CHECK(std::abs(soft.probs()[i] - hard.probs()[i]) <= 1e-9);
    }
}

TEST_CASE("confidence mass follows its beta parameters") {
  auto c = skewed_catalog(40, 6);
  DistractorTable table(c);
  NoiseSpec n;
  double sum = 0.0;
  for (std::uint64_t k = 0; k < 4000; ++k) {
    auto o = corrupt(1, 0, table, n, k);
    for (const auto& cand : o.candidates) sum += cand.confidence;
  }
  CHECK(sum / 4000 == doctest::Approx(n.mass_alpha / (n.mass_alpha + n.mass_beta)).epsilon(0.02));
}

TEST_CASE("paired users see identical corruption for the same attribute") {
  auto c = skewed_catalog(30, 7);
  NoiseModel noise;
  DistractorTable table(c);
  SimulatedUser a(c, 4, 123, &noise, &table), b(c, 4, 123, &noise);
  CHECK(a.observe(0, 1) == b.observe(0, 3));
  SimulatedUser other(c, 4, 124, &noise, &table);
  int same = 0;
  for (int t = 0; t < 1; ++t) same += a.observe(0, 1) == other.observe(0, 1);
  CHECK(same == 0);
}

TEST_CASE("per-attribute overrides") {
  NoiseModel m;
  NoiseSpec lang;
  lang.error_rate = 0.05;
  m.overrides["Language"] = lang;
  CHECK(m.for_attribute("Language").error_rate == 0.05);
  CHECK(m.for_attribute("Singer").error_rate == 0.15);
}

TEST_CASE("noise spec validation") {
  NoiseSpec n;
  CHECK_NOTHROW(n.validate());
  n.error_rate = 1.0;
  CHECK_THROWS_AS(n.validate(), std::invalid_argument);
  n = {};
  n.top_n = 0;
  CHECK_THROWS_AS(n.validate(), std::invalid_argument);
  n = {};
  n.inclusion_rate = 1.2;
  CHECK_THROWS_AS(n.validate(), std::invalid_argument);
  n = {};
  n.concentration = 0;
  CHECK_THROWS_AS(n.validate(), std::invalid_argument);
  auto f = fixture::f1();
  CHECK_THROWS_AS(SimulatedUser(f, 9, 0), std::out_of_range);
}

}
