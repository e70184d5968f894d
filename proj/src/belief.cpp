#include "emdm/belief.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace emdm {

void AttributeSet::insert(AttrId a) {
  auto i = static_cast<std::size_t>(a);
  if (!bits_.at(i)) {
    bits_[i] = true;
    ++count_;
  }
}

std::vector<AttrId> AttributeSet::members() const {
  std::vector<AttrId> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(static_cast<AttrId>(i));
  return out;
}

double DSState::prob(GoalId g) const {
  auto it = std::lower_bound(goals_.begin(), goals_.end(), g);
  if (it == goals_.end() || *it != g) return 0.0;
  return probs_[static_cast<std::size_t>(it - goals_.begin())];
}

GoalId DSState::argmax() const {
  if (goals_.empty()) throw EmptyGoalSetError("argmax of an empty goal set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i)
    if (probs_[i] > probs_[best]) best = i;
  return goals_[best];
}

double AttributeMarginal::mass(ValueId v) const {
  auto it = std::lower_bound(values.begin(), values.end(), v,
                             [](const auto& entry, ValueId key) { return entry.first < key; });
  return it != values.end() && it->first == v ? it->second : 0.0;
}

namespace {

double log_in(double x, LogBase base) { return base == LogBase::Bits ? std::log2(x) : std::log(x); }

/// Dense per-value accumulator reused across calls on one thread. Only the
/// touched entries are reset, so a 10k-value attribute costs O(subset).
struct MassScratch {
  std::vector<double> mass;
  std::vector<ValueId> touched;
};

thread_local MassScratch tls_scratch;

/// Accumulates the state's mass per value of `attr` into `sc` and returns the
/// missing mass. Caller must call `release` afterwards.
double accumulate(const Catalog& catalog, const DSState& state, AttrId attr, MassScratch& sc) {
  const auto card = catalog.schema()[attr].cardinality();
  if (sc.mass.size() < card) sc.mass.resize(card, 0.0);
  sc.touched.clear();
  auto column = catalog.column(attr);
  auto goals = state.goals();
  auto probs = state.probs();
  double missing = 0.0;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    ValueId v = column[static_cast<std::size_t>(goals[i])];
    if (v == kMissing) {
      missing += probs[i];
      continue;
    }
    double& slot = sc.mass[static_cast<std::size_t>(v)];
    if (slot == 0.0) sc.touched.push_back(v);
    slot += probs[i];
  }
  return missing;
}

void release(MassScratch& sc) {
  for (ValueId v : sc.touched) sc.mass[static_cast<std::size_t>(v)] = 0.0;
  sc.touched.clear();
}

void normalize_in_place(std::vector<double>& p, double total) {
  for (double& x : p) x /= total;
}

/// Drops entries below the floor and renormalizes.
void apply_floor(std::vector<GoalId>& goals, std::vector<double>& probs) {
  std::size_t out = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (probs[i] < kSubsetFloor) continue;
    goals[out] = goals[i];
    probs[out] = probs[i];
    total += probs[i];
    ++out;
  }
  goals.resize(out);
  probs.resize(out);
  if (out == 0) return;
  normalize_in_place(probs, total);
}

}  // namespace

DSState init_state(const Catalog& catalog) {
  DSState s;
  auto prior = catalog.prior();
  for (std::size_t g = 0; g < prior.size(); ++g) {
    if (prior[g] > 0.0) {
      s.goals_.push_back(static_cast<GoalId>(g));
      s.probs_.push_back(prior[g]);
    }
  }
  if (s.goals_.empty()) throw EmptyGoalSetError("catalog prior has no positive mass");
  double total = 0.0;
  for (double p : s.probs_) total += p;
  normalize_in_place(s.probs_, total);
  s.asked_ = AttributeSet(catalog.num_attributes());
  return s;
}

DSState make_state(std::vector<std::pair<GoalId, double>> weights, AttributeSet asked, int turn) {
  std::sort(weights.begin(), weights.end());
  DSState s;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& [g, w] = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("state weights must be finite and nonnegative");
    if (i > 0 && weights[i - 1].first == g) throw std::invalid_argument("duplicate goal id in state");
    if (w == 0.0) continue;
    s.goals_.push_back(g);
    s.probs_.push_back(w);
    total += w;
  }
  if (s.goals_.empty()) throw EmptyGoalSetError("state has no positive mass");
  if (std::abs(total - 1.0) > kNormTolerance) normalize_in_place(s.probs_, total);
  s.asked_ = std::move(asked);
  s.turn_ = turn;
  return s;
}

double state_entropy(const DSState& state, LogBase base) {
  double h = 0.0;
  for (double p : state.probs())
    if (p > 0.0) h -= p * log_in(p, base);
  return h;
}

AttributeMarginal attribute_marginal(const Catalog& catalog, const DSState& state, AttrId attr) {
  auto& sc = tls_scratch;
  AttributeMarginal out;
  out.missing = accumulate(catalog, state, attr, sc);
  out.values.reserve(sc.touched.size());
  for (ValueId v : sc.touched) out.values.emplace_back(v, sc.mass[static_cast<std::size_t>(v)]);
  release(sc);
  std::sort(out.values.begin(), out.values.end());
  return out;
}

double attribute_entropy(const Catalog& catalog, const DSState& state, AttrId attr, LogBase base) {
  auto& sc = tls_scratch;
  const double missing = accumulate(catalog, state, attr, sc);
  if (sc.touched.size() < 2) {
    release(sc);
    return 0.0;
  }
  double known = 0.0;
  for (ValueId v : sc.touched) known += sc.mass[static_cast<std::size_t>(v)];
  double h = 0.0;
  for (ValueId v : sc.touched) {
    double q = sc.mass[static_cast<std::size_t>(v)] / known;
    h -= q * log_in(q, base);
  }
  release(sc);
  return known / (known + missing) * h;
}

double conditional_entropy(const Catalog& catalog, const DSState& state, AttrId attr, ValueId value,
                           MissingPolicy policy) {
  auto column = catalog.column(attr);
  auto goals = state.goals();
  auto probs = state.probs();
  double value_mass = 0.0;
  double retained = 0.0;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    ValueId v = column[static_cast<std::size_t>(goals[i])];
    if (v == value) {
      value_mass += probs[i];
      retained += probs[i];
    } else if (v == kMissing && policy == MissingPolicy::Wildcard) {
      retained += probs[i];
    }
  }
  if (!(value_mass > 0.0)) throw EmptyConditionError("value has no probability mass in the current state");
  double h = 0.0;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    ValueId v = column[static_cast<std::size_t>(goals[i])];
    bool keep = v == value || (v == kMissing && policy == MissingPolicy::Wildcard);
    if (!keep || probs[i] <= 0.0) continue;
    double q = probs[i] / retained;
    h -= q * std::log2(q);
  }
  return h;
}

double expected_reduction_bruteforce(const Catalog& catalog, const DSState& state, AttrId attr,
                                     MissingPolicy policy) {
  const double h = state_entropy(state);
  double expected = 0.0;
  for (const auto& [value, mass] : attribute_marginal(catalog, state, attr).values) {
    if (!(mass > 0.0)) continue;
    expected += mass * (h - conditional_entropy(catalog, state, attr, value, policy));
  }
  return expected;
}

DSState exact_update(const Catalog& catalog, const DSState& state, AttrId attr, std::optional<ValueId> answer,
                     MissingPolicy policy) {
  if (attr < 0 || static_cast<std::size_t>(attr) >= catalog.num_attributes())
    throw std::out_of_range("attribute id out of range");
  DSState next;
  next.asked_ = state.asked_;
  next.asked_.insert(attr);
  next.turn_ = state.turn_ + 1;
  if (!answer) {
    next.goals_ = state.goals_;
    next.probs_ = state.probs_;
    return next;
  }
  auto column = catalog.column(attr);
  double total = 0.0;
  for (std::size_t i = 0; i < state.goals_.size(); ++i) {
    ValueId v = column[static_cast<std::size_t>(state.goals_[i])];
    if (v == *answer || (v == kMissing && policy == MissingPolicy::Wildcard)) {
      next.goals_.push_back(state.goals_[i]);
      next.probs_.push_back(state.probs_[i]);
      total += state.probs_[i];
    }
  }
  if (next.goals_.empty() || !(total > 0.0))
    throw EmptyGoalSetError("answer '" + catalog.schema()[attr].value_name(*answer) + "' for " +
                            catalog.schema()[attr].name() + " eliminates every goal");
  normalize_in_place(next.probs_, total);
  return next;
}

void validate(const Observation& obs, const Catalog& catalog) {
  if (obs.attribute < 0 || static_cast<std::size_t>(obs.attribute) >= catalog.num_attributes())
    throw InvalidObservationError("observation attribute out of range");
  if (obs.unknown && !obs.candidates.empty())
    throw InvalidObservationError("unknown observation must not carry candidates");
  const auto card = catalog.schema()[obs.attribute].cardinality();
  double sum = 0.0;
  for (std::size_t i = 0; i < obs.candidates.size(); ++i) {
    const auto& c = obs.candidates[i];
    if (c.value < 0 || static_cast<std::size_t>(c.value) >= card)
      throw InvalidObservationError("candidate value id out of dictionary range");
    if (!(c.confidence > 0.0 && c.confidence <= 1.0))
      throw InvalidObservationError("candidate confidence must lie in (0, 1]");
    for (std::size_t j = 0; j < i; ++j)
      if (obs.candidates[j].value == c.value) throw InvalidObservationError("duplicate candidate value");
    sum += c.confidence;
  }
  if (sum > 1.0 + kNormTolerance) throw InvalidObservationError("candidate confidences sum above 1");
}

DSState soft_update(const Catalog& catalog, const DSState& state, const Observation& obs) {
  validate(obs, catalog);
  DSState next;
  next.asked_ = state.asked_;
  next.asked_.insert(obs.attribute);
  next.turn_ = state.turn_ + 1;
  if (obs.unknown) {
    next.goals_ = state.goals_;
    next.probs_ = state.probs_;
    return next;
  }

  // Sorted lookup keeps the result independent of candidate order.
  std::vector<Candidate> by_value = obs.candidates;
  std::sort(by_value.begin(), by_value.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  double total_conf = 0.0;
  for (const auto& c : by_value) total_conf += c.confidence;
  const double rest = std::max(0.0, 1.0 - total_conf);

  auto column = catalog.column(obs.attribute);
  next.goals_ = state.goals_;
  next.probs_.resize(state.probs_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < state.goals_.size(); ++i) {
    const double p = state.probs_[i];
    ValueId v = column[static_cast<std::size_t>(state.goals_[i])];
    double raw = rest * p;
    if (v != kMissing) {
      auto it = std::lower_bound(by_value.begin(), by_value.end(), v,
                                 [](const Candidate& c, ValueId key) { return c.value < key; });
      if (it != by_value.end() && it->value == v) raw = 1.0 - (1.0 - p) * (1.0 - it->confidence);
    }
    next.probs_[i] = raw;
    total += raw;
  }
  if (!(total > 0.0)) throw EmptyGoalSetError("observation leaves no goal with positive mass");
  normalize_in_place(next.probs_, total);
  apply_floor(next.goals_, next.probs_);
  if (next.goals_.empty()) throw EmptyGoalSetError("observation leaves no goal above the subset floor");
  return next;
}

// ---- text record -----------------------------------------------------------

namespace {

void append_double(std::string& out, double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  out.append(buf, end);
}

template <class T>
T parse_number(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("bad number '" + std::string(s) + "' in state record");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  if (s.empty()) return out;
  while (true) {
    auto pos = s.find(delim);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

}  // namespace

std::string serialize_state(const DSState& state) {
  std::string out = "turn=" + std::to_string(state.turn()) + ";asked=";
  auto asked = state.asked().members();
  for (std::size_t i = 0; i < asked.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(asked[i]);
  }
  out += ";probs=";
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(state.goals()[i]);
    out.push_back(':');
    append_double(out, state.probs()[i]);
  }
  return out;
}

DSState parse_state(std::string_view text, std::size_t num_attributes) {
  int turn = -1;
  std::optional<AttributeSet> asked;
  std::vector<std::pair<GoalId, double>> weights;
  bool have_probs = false;
  for (auto field : split(text, ';')) {
    auto eq = field.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("state record field without '='");
    auto key = field.substr(0, eq);
    auto value = field.substr(eq + 1);
    if (key == "turn") {
      turn = parse_number<int>(value);
    } else if (key == "asked") {
      asked.emplace(num_attributes);
      for (auto a : split(value, ',')) {
        auto id = parse_number<AttrId>(a);
        if (id < 0 || static_cast<std::size_t>(id) >= num_attributes)
          throw std::invalid_argument("asked attribute out of range in state record");
        asked->insert(id);
      }
    } else if (key == "probs") {
      have_probs = true;
      for (auto entry : split(value, ',')) {
        auto colon = entry.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("bad probs entry in state record");
        weights.emplace_back(parse_number<GoalId>(entry.substr(0, colon)), parse_number<double>(entry.substr(colon + 1)));
      }
    } else {
      throw std::invalid_argument("unknown state record field '" + std::string(key) + "'");
    }
  }
  if (turn < 0 || !asked || !have_probs) throw std::invalid_argument("incomplete state record");
  return make_state(std::move(weights), std::move(*asked), turn);
}

}  // namespace emdm
