#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "emdm/belief.hpp"
#include "fixtures.hpp"

using namespace emdm;
using fixture::aid;
using fixture::vid;

namespace {

double h2(std::vector<double> p) {
  double t = std::accumulate(p.begin(), p.end(), 0.0), h = 0.0;
  for (double x : p)
    if (x > 0) h -= x / t * std::log2(x / t);
  return h;
}

// Direct evaluation of sum_m P_m (H - H_m) from the goal rows, no library entropy code.
double oracle_reduction(const Catalog& c, const DSState& s, AttrId a) {
  std::vector<double> all(s.probs().begin(), s.probs().end());
  const double h = h2(all);
  std::map<ValueId, std::vector<double>> groups;
  for (std::size_t i = 0; i < s.size(); ++i) groups[c.value(a, s.goals()[i])].push_back(s.probs()[i]);
  double r = 0.0;
  for (auto& [v, ps] : groups) r += std::accumulate(ps.begin(), ps.end(), 0.0) * (h - h2(ps));
  return r;
}

double total(const DSState& s) { return std::accumulate(s.probs().begin(), s.probs().end(), 0.0); }

std::vector<double> dense(const DSState& s, std::size_t n) {
  std::vector<double> d(n);
  for (std::size_t i = 0; i < s.size(); ++i) d[static_cast<std::size_t>(s.goals()[i])] = s.probs()[i];
  return d;
}

}  // namespace

TEST_SUITE("belief") {

TEST_CASE("init_state") {
  auto f = fixture::f1();
  auto s = init_state(f);
  CHECK(s.size() == 4);
  for (double p : s.probs()) CHECK(p == 0.25);
  CHECK(s.turn() == 0);
  CHECK(s.asked().count() == 0);

  auto w = init_state(fixture::f1({0.5, 0.25, 0.25, 0}));
  CHECK(w.size() == 3);
  CHECK(w.prob(3) == 0.0);
  CHECK(std::find(w.goals().begin(), w.goals().end(), 3) == w.goals().end());

  auto one = init_state(fixture::build({"A"}, {{"x"}}));
  CHECK(one.size() == 1);
  CHECK(one.probs()[0] == 1.0);
  CHECK(state_entropy(one) == 0.0);
}

TEST_CASE("state_entropy") {
  auto f = fixture::f1();
  CHECK(state_entropy(init_state(f)) == doctest::Approx(2.0));
  CHECK(state_entropy(init_state(f), LogBase::Nats) == doctest::Approx(std::log(4.0)));
  AttributeSet none(2);
  CHECK(state_entropy(make_state({{2, 1.0}}, none, 0)) == 0.0);
  CHECK(state_entropy(make_state({{0, 0.5}, {1, 0.25}, {2, 0.25}}, none, 0)) == doctest::Approx(1.5));
}

TEST_CASE("attribute_marginal") {
  auto f = fixture::f1();
  auto s = init_state(f);
  auto a = attribute_marginal(f, s, aid(f, "A"));
  CHECK(a.mass(vid(f, "A", "x")) == 0.5);
  CHECK(a.mass(vid(f, "A", "y")) == 0.5);
  CHECK(a.missing == 0.0);
  auto b = attribute_marginal(f, s, aid(f, "B"));
  CHECK(b.mass(vid(f, "B", "p")) == 0.25);
  CHECK(b.mass(vid(f, "B", "q")) == 0.25);
  CHECK(b.mass(vid(f, "B", "r")) == 0.5);
  CHECK(std::is_sorted(b.values.begin(), b.values.end()));
  auto m = fixture::build({"A", "B"}, {{"x", std::nullopt}, {"y", std::nullopt}});
  auto mm = attribute_marginal(m, init_state(m), 1);
  CHECK(mm.missing == 1.0);
  CHECK(mm.values.empty());
}

TEST_CASE("attribute_entropy") {
  auto f = fixture::f1();
  auto s = init_state(f);
  CHECK(attribute_entropy(f, s, aid(f, "A")) == doctest::Approx(1.0));
  CHECK(attribute_entropy(f, s, aid(f, "B")) == doctest::Approx(1.5));
  auto m = fixture::build({"A", "B"}, {{"x", std::nullopt}, {"y", std::nullopt}});
  CHECK(attribute_entropy(m, init_state(m), 1) == 0.0);
  // half the mass missing, known part split evenly: W * H = 0.5 * 1
  auto half = fixture::build({"A"}, {{"x"}, {"y"}, {std::nullopt}, {std::nullopt}});
  CHECK(attribute_entropy(half, init_state(half), 0) == doctest::Approx(0.5));
}

TEST_CASE("conditional_entropy") {
  auto f = fixture::f1();
  auto s = init_state(f);
  CHECK(conditional_entropy(f, s, aid(f, "B"), vid(f, "B", "r")) == doctest::Approx(1.0));
  CHECK(conditional_entropy(f, s, aid(f, "B"), vid(f, "B", "p")) == doctest::Approx(0.0));
  CHECK(conditional_entropy(f, s, aid(f, "A"), vid(f, "A", "x")) == doctest::Approx(1.0));
  auto after = exact_update(f, s, aid(f, "A"), vid(f, "A", "x"));
  CHECK_THROWS_AS(conditional_entropy(f, after, aid(f, "B"), vid(f, "B", "r")), EmptyConditionError);
}

TEST_CASE("expected reduction equals attribute entropy on the fixture") {
  auto f = fixture::f1();
  auto s = init_state(f);
  CHECK(expected_reduction_bruteforce(f, s, aid(f, "A")) == doctest::Approx(1.0));
  CHECK(expected_reduction_bruteforce(f, s, aid(f, "B")) == doctest::Approx(1.5));
  CHECK(attribute_entropy(f, s, aid(f, "A")) == doctest::Approx(1.0));
  AttributeSet none(2);
  auto point = make_state({{1, 1.0}}, none, 0);
  for (AttrId a = 0; a < 2; ++a) CHECK(expected_reduction_bruteforce(f, point, a) == 0.0);
}

TEST_CASE("expected reduction identity on random complete catalogs") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    auto c = fixture::random_catalog(rng, 1 + uniform_index(rng, 12), 1 + uniform_index(rng, 4), 5);
    auto s = fixture::random_state(rng, c);
    for (AttrId a = 0; a < static_cast<AttrId>(c.num_attributes()); ++a) {
      const double hk = attribute_entropy(c, s, a);
      CHECK(std::abs(expected_reduction_bruteforce(c, s, a) - hk) <= 1e-9);
      CHECK(std::abs(oracle_reduction(c, s, a) - hk) <= 1e-9);
    }
  }
}

TEST_CASE("marginals and updates stay normalized on random states") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = fixture::random_catalog(rng, 1 + uniform_index(rng, 15), 1 + uniform_index(rng, 4), 4, 0.3);
    auto s = fixture::random_state(rng, c);
    CHECK(std::abs(total(s) - 1.0) <= kNormTolerance);
    for (AttrId a = 0; a < static_cast<AttrId>(c.num_attributes()); ++a) {
      auto m = attribute_marginal(c, s, a);
      double t = m.missing;
      for (auto& [v, p] : m.values) t += p;
      CHECK(std::abs(t - 1.0) <= kNormTolerance);
      for (auto& [v, p] : m.values) {
        for (auto policy : {MissingPolicy::Wildcard, MissingPolicy::Strict}) {
          auto next = exact_update(c, s, a, v, policy);
          CHECK(std::abs(total(next) - 1.0) <= kNormTolerance);
          CHECK(std::all_of(next.probs().begin(), next.probs().end(), [](double p) { return p > 0; }));
        }
      }
      if (c.schema()[a].cardinality() > 0) {
        Observation obs{a, {{0, 0.4 * uniform01(rng) + 0.01}}, false};
        if (c.schema()[a].cardinality() > 1) obs.candidates.push_back({1, 0.3});
        auto next = soft_update(c, s, obs);
        CHECK(std::abs(total(next) - 1.0) <= kNormTolerance);
      }
    }
  }
}

TEST_CASE("exact_update") {
  auto f = fixture::f1();
  auto s = init_state(f);
  auto ax = exact_update(f, s, aid(f, "A"), vid(f, "A", "x"));
  CHECK(ax.size() == 2);
  CHECK(ax.prob(0) == 0.5);
  CHECK(ax.prob(1) == 0.5);
  CHECK(ax.asked().contains(aid(f, "A")));
  CHECK(ax.asked().count() == 1);
  CHECK(ax.turn() == 1);

  auto br = exact_update(f, s, aid(f, "B"), vid(f, "B", "r"));
  CHECK(br.prob(2) == 0.5);
  CHECK(br.prob(3) == 0.5);
  CHECK(br.size() == 2);

  auto gap = fixture::build({"A", "B"}, {{"x", "p"}, {std::nullopt, "q"}, {"y", "r"}, {"y", "r"}});
  auto wild = exact_update(gap, init_state(gap), 0, vid(gap, "A", "y"));
  CHECK(wild.size() == 3);
  for (GoalId g : {1, 2, 3}) CHECK(wild.prob(g) == doctest::Approx(1.0 / 3));
  auto strict = exact_update(gap, init_state(gap), 0, vid(gap, "A", "y"), MissingPolicy::Strict);
  CHECK(strict.size() == 2);
  CHECK(strict.prob(1) == 0.0);
}

TEST_CASE("unknown answer marks the attribute asked and keeps the distribution") {
  auto f = fixture::f1({4, 3, 2, 1});
  auto s = init_state(f);
  auto u = exact_update(f, s, 1, std::nullopt);
  CHECK(u.turn() == 1);
  CHECK(u.asked().contains(1));
  CHECK(std::equal(u.probs().begin(), u.probs().end(), s.probs().begin(), s.probs().end()));
  auto su = soft_update(f, s, Observation::unknown_answer(1));
  CHECK(std::equal(su.probs().begin(), su.probs().end(), s.probs().begin(), s.probs().end()));
  CHECK(su.turn() == 1);
}

TEST_CASE("exact_update that eliminates everything raises") {
  auto f = fixture::f1();
  auto ax = exact_update(f, init_state(f), 0, vid(f, "A", "x"));
  CHECK_THROWS_AS(exact_update(f, ax, 1, vid(f, "B", "r")), EmptyGoalSetError);
  CHECK_THROWS_AS(exact_update(f, ax, 7, 0), std::out_of_range);
}

TEST_CASE("entropy never rises under exact conditioning") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = fixture::random_catalog(rng, 2 + uniform_index(rng, 14), 1 + uniform_index(rng, 4), 4, 0.25);
    auto s = init_state(c);
    for (AttrId a = 0; a < static_cast<AttrId>(c.num_attributes()); ++a) {
      auto m = attribute_marginal(c, s, a);
      for (auto& [v, p] : m.values) {
        auto strict = exact_update(c, s, a, v, MissingPolicy::Strict);
        CHECK(state_entropy(strict) <= state_entropy(s) + 1e-9);
        auto wild = exact_update(c, s, a, v, MissingPolicy::Wildcard);
        CHECK(std::log2(static_cast<double>(wild.size())) <= std::log2(static_cast<double>(s.size())) + 1e-9);
        CHECK(state_entropy(wild) <= state_entropy(s) + 1e-9);  // uniform start
      }
    }
  }
}

TEST_CASE("soft_update") {
  auto f = fixture::f1();
  auto s = init_state(f);
  const auto x = vid(f, "A", "x"), y = vid(f, "A", "y");
  auto two = soft_update(f, s, Observation{0, {{x, 0.6}, {y, 0.3}}, false});
  const double raw_sum = 0.7 + 0.7 + 0.475 + 0.475;
  CHECK(two.prob(0) == doctest::Approx(0.7 / raw_sum).epsilon(1e-12));
  CHECK(two.prob(2) == doctest::Approx(0.475 / raw_sum).epsilon(1e-12));
  CHECK(two.prob(0) == doctest::Approx(0.2979).epsilon(1e-3));
  CHECK(two.prob(3) == doctest::Approx(0.2021).epsilon(1e-3));
  CHECK(two.turn() == 1);
  CHECK(two.asked().contains(0));

  auto one = soft_update(f, s, Observation{0, {{x, 0.6}}, false});
  CHECK(one.prob(0) == doctest::Approx(0.4375));
  CHECK(one.prob(1) == doctest::Approx(0.4375));
  CHECK(one.prob(2) == doctest::Approx(0.0625));
  CHECK(one.prob(3) == doctest::Approx(0.0625));

  auto sure = soft_update(f, s, Observation::exact(1, vid(f, "B", "p")));
  CHECK(sure.size() == 1);
  CHECK(sure.prob(0) == 1.0);
}

TEST_CASE("soft_update is invariant to candidate order") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = fixture::random_catalog(rng, 2 + uniform_index(rng, 12), 2, 6, 0.2);
    auto s = fixture::random_state(rng, c);
    const auto card = c.schema()[0].cardinality();
    Observation obs{0, {}, false};
    double left = 1.0;
    for (ValueId v = 0; v < static_cast<ValueId>(card); ++v) {
      double conf = left * 0.5 * uniform01(rng) + 1e-3;
      obs.candidates.push_back({v, conf});
      left -= conf;
    }
    auto shuffled = obs;
    std::shuffle(shuffled.candidates.begin(), shuffled.candidates.end(), rng);
    auto a = soft_update(c, s, obs), b = soft_update(c, s, shuffled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.probs()[i] - b.probs()[i]) <= 1e-12);
  }
}

TEST_CASE("confidence-one soft update against strict filtering") {
  // The confidence-weighted rule lifts every matching goal to mass 1, so the
  // posterior is flat over the matches. It agrees with strict filtering when
  // the matching goals were already equally likely.
  auto f = fixture::f1();
  const auto x = vid(f, "A", "x");
  auto flat = init_state(f);
  auto soft = soft_update(f, flat, Observation::exact(0, x));
  auto hard = exact_update(f, flat, 0, x, MissingPolicy::Strict);
  for (GoalId g = 0; g < 4; ++g) CHECK(std::abs(soft.prob(g) - hard.prob(g)) <= 1e-9);

  auto skew = init_state(fixture::f1({0.6, 0.2, 0.1, 0.1}));
  auto soft2 = soft_update(f, skew, Observation::exact(0, x));
  auto hard2 = exact_update(f, skew, 0, x, MissingPolicy::Strict);
  CHECK(soft2.prob(0) == doctest::Approx(0.5));
  CHECK(soft2.prob(1) == doctest::Approx(0.5));
  CHECK(hard2.prob(0) == doctest::Approx(0.75));
  CHECK(hard2.prob(1) == doctest::Approx(0.25));

  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = fixture::random_catalog(rng, 2 + uniform_index(rng, 12), 2, 4, 0.3);
    auto s = init_state(c);
    auto m = attribute_marginal(c, s, 0);
    for (auto& [v, p] : m.values) {
      auto a = dense(soft_update(c, s, Observation::exact(0, v)), c.num_goals());
      auto b = dense(exact_update(c, s, 0, v, MissingPolicy::Strict), c.num_goals());
      for (std::size_t g = 0; g < a.size(); ++g) CHECK(std::abs(a[g] - b[g]) <= 1e-9);
    }
  }
}

TEST_CASE("soft_update drops goals below the subset floor") {
  auto c = fixture::build({"A"}, {{"x"}, {"y"}});
  auto s = make_state({{0, 0.5}, {1, 0.5}}, AttributeSet(1), 0);
  auto next = soft_update(c, s, Observation{0, {{0, 1.0 - 1e-14}}, false});
  CHECK(next.size() == 1);
  CHECK(next.prob(0) == 1.0);
}

TEST_CASE("soft_update empty result raises") {
  auto c = fixture::build({"A"}, {{"x"}, {"y"}, {"z"}});
  auto s = make_state({{0, 1.0}}, AttributeSet(1), 0);
  CHECK_THROWS_AS(soft_update(c, s, Observation::exact(0, 1)), EmptyGoalSetError);
}

TEST_CASE("observation validation") {
  auto f = fixture::f1();
  auto s = init_state(f);
  CHECK_THROWS_AS(soft_update(f, s, Observation{0, {{0, 0.7}, {1, 0.5}}, false}), InvalidObservationError);
  CHECK_THROWS_AS(soft_update(f, s, Observation{0, {{0, 0.3}, {0, 0.3}}, false}), InvalidObservationError);
  CHECK_THROWS_AS(soft_update(f, s, Observation{0, {{0, 0.0}}, false}), InvalidObservationError);
  CHECK_THROWS_AS(soft_update(f, s, Observation{0, {{9, 0.5}}, false}), InvalidObservationError);
  CHECK_THROWS_AS(soft_update(f, s, Observation{5, {{0, 0.5}}, false}), InvalidObservationError);
  CHECK_THROWS_AS(soft_update(f, s, Observation{0, {{0, 0.5}}, true}), InvalidObservationError);
  CHECK_NOTHROW(validate(Observation{0, {{0, 0.5}, {1, 0.5 + 1e-10}}, false}, f));
}

TEST_CASE("entropy base does not change the argmax attribute") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = fixture::random_catalog(rng, 2 + uniform_index(rng, 20), 2 + uniform_index(rng, 4), 6, 0.2);
    auto s = fixture::random_state(rng, c);
    auto best = [&](LogBase b) {
      AttrId arg = 0;
      for (AttrId a = 1; a < static_cast<AttrId>(c.num_attributes()); ++a)
        if (attribute_entropy(c, s, a, b) > attribute_entropy(c, s, arg, b) * (1 + 1e-12) + 1e-15) arg = a;
      return arg;
    };
    CHECK(best(LogBase::Bits) == best(LogBase::Nats));
    for (AttrId a = 0; a < static_cast<AttrId>(c.num_attributes()); ++a)
      CHECK(attribute_entropy(c, s, a, LogBase::Nats) ==
            doctest::Approx(attribute_entropy(c, s, a) * std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("argmax ties go to the lowest goal id") {
  auto s = make_state({{3, 0.4}, {1, 0.4}, {2, 0.2}}, AttributeSet(1), 0);
  CHECK(s.argmax() == 1);
}

TEST_CASE("state record round trip") {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = fixture::random_catalog(rng, 1 + uniform_index(rng, 20), 3, 4);
    auto s = fixture::random_state(rng, c);
    if (trial % 2) s = exact_update(c, s, 1, std::nullopt);
    auto text = serialize_state(s);
    CHECK(parse_state(text, 3) == s);
  }
  auto f = fixture::f1();
  auto ax = exact_update(f, init_state(f), 0, 0);
  CHECK(serialize_state(ax) == "turn=1;asked=0;probs=0:0.5,1:0.5");
  CHECK_THROWS(parse_state("turn=1;probs=0:1", 2));
  CHECK_THROWS(parse_state("turn=1;asked=4;probs=0:1", 2));
  CHECK_THROWS(parse_state("turn=1;asked=;probs=0:x", 2));
}

}
