#include "emdm/dialog.hpp"

#include <algorithm>
#include <ostream>

#include <json.hpp>

namespace emdm {

std::string to_string(Mode mode) { return mode == Mode::Ideal ? "ideal" : "noisy"; }

Mode parse_mode(std::string_view text) {
  if (text == "ideal") return Mode::Ideal;
  if (text == "noisy") return Mode::Noisy;
  throw std::invalid_argument("unknown mode '" + std::string(text) + "' (expected ideal | noisy)");
}

MissingPolicy parse_policy(std::string_view text) {
  if (text == "wildcard") return MissingPolicy::Wildcard;
  if (text == "strict") return MissingPolicy::Strict;
  throw std::invalid_argument("unknown missing-value policy '" + std::string(text) + "' (expected wildcard | strict)");
}

std::string to_string(MissingPolicy policy) { return policy == MissingPolicy::Wildcard ? "wildcard" : "strict"; }

void SessionConfig::validate() const {
  if (!(theta > 0.5 && theta <= 1.0)) throw std::invalid_argument("dominance threshold must lie in (0.5, 1]");
  if (max_turns < 0) throw std::invalid_argument("max_turns must be positive (or 0 for the attribute count)");
}

int SessionConfig::turn_limit(const Catalog& catalog) const {
  return max_turns > 0 ? max_turns : static_cast<int>(catalog.num_attributes());
}

std::string to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::SingleCandidate:
      return "SingleCandidate";
    case TerminalStatus::ZeroEntropySet:
      return "ZeroEntropySet";
    case TerminalStatus::AttributesExhausted:
      return "AttributesExhausted";
    case TerminalStatus::Dominant:
      return "Dominant";
    case TerminalStatus::EmptyGoalSet:
      return "EmptyGoalSet";
  }
  return "?";
}

TerminalStatus parse_status(std::string_view text) {
  for (auto s : {TerminalStatus::SingleCandidate, TerminalStatus::ZeroEntropySet, TerminalStatus::AttributesExhausted,
                 TerminalStatus::Dominant, TerminalStatus::EmptyGoalSet})
    if (to_string(s) == text) return s;
  throw std::invalid_argument("unknown terminal status '" + std::string(text) + "'");
}

std::vector<double> Transcript::entropy_sequence() const {
  std::vector<double> out;
  out.reserve(turns.size() + 1);
  out.push_back(initial_entropy);
  for (const auto& t : turns) out.push_back(t.entropy);
  return out;
}

namespace {

/// True when at least two distinct known values of `attr` carry mass, which
/// is exactly when attribute_entropy is nonzero.
bool splits_subset(const Catalog& catalog, const DSState& state, AttrId attr) {
  auto column = catalog.column(attr);
  auto goals = state.goals();
  auto probs = state.probs();
  ValueId first = kMissing;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    ValueId v = column[static_cast<std::size_t>(goals[i])];
    if (v == kMissing || !(probs[i] > 0.0)) continue;
    if (first == kMissing) {
      first = v;
    } else if (v != first) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<TerminalStatus> check_termination(const Catalog& catalog, const DSState& state,
                                                const SessionConfig& cfg) {
  if (state.size() == 0) return TerminalStatus::EmptyGoalSet;
  const bool out_of_turns = state.asked().full() || state.turn() >= cfg.turn_limit(catalog);
  if (cfg.mode == Mode::Noisy) {
    for (double p : state.probs())
      if (p > cfg.theta) return TerminalStatus::Dominant;
    if (out_of_turns) return TerminalStatus::AttributesExhausted;
    return std::nullopt;
  }
  if (state.size() == 1) return TerminalStatus::SingleCandidate;
  if (out_of_turns) return TerminalStatus::AttributesExhausted;
  for (std::size_t a = 0; a < catalog.num_attributes(); ++a) {
    auto id = static_cast<AttrId>(a);
    if (!state.asked().contains(id) && splits_subset(catalog, state, id)) return std::nullopt;
  }
  return TerminalStatus::ZeroEntropySet;
}

DialogSession::DialogSession(const Catalog& catalog, SessionConfig cfg, std::uint64_t seed, bool keep_snapshots)
    : catalog_(&catalog), cfg_(cfg), selector_(cfg.strategy, seed), keep_snapshots_(keep_snapshots) {
  cfg_.validate();
  state_ = init_state(catalog);
  transcript_.mode = cfg_.mode;
  transcript_.initial_entropy = state_entropy(state_);
  transcript_.initial_support = state_.size();
  advance();
}

void DialogSession::answer(std::optional<ValueId> value) {
  if (finished() || !question_) throw std::logic_error("session is finished");
  const AttrId attr = *question_;
  Observation obs = value ? Observation::exact(attr, *value) : Observation::unknown_answer(attr);
  if (value && (*value < 0 || static_cast<std::size_t>(*value) >= catalog_->schema()[attr].cardinality()))
    throw InvalidObservationError("answer value id out of dictionary range");
  if (cfg_.mode == Mode::Noisy) {
    observe(obs);
    return;
  }
  DSState next;
  try {
    next = exact_update(*catalog_, state_, attr, value, cfg_.policy);
  } catch (const EmptyGoalSetError&) {
    transcript_.turns.push_back({attr, std::move(obs), true, {}, 0.0, 0});
    finish(TerminalStatus::EmptyGoalSet);
    return;
  }
  apply(std::move(next), std::move(obs), true);
}

void DialogSession::observe(const Observation& obs) {
  if (finished() || !question_) throw std::logic_error("session is finished");
  if (obs.attribute != *question_) throw InvalidObservationError("observation is not about the asked attribute");
  validate(obs, *catalog_);
  DSState next;
  try {
    next = soft_update(*catalog_, state_, obs);
  } catch (const EmptyGoalSetError&) {
    transcript_.turns.push_back({obs.attribute, obs, false, {}, 0.0, 0});
    finish(TerminalStatus::EmptyGoalSet);
    return;
  }
  apply(std::move(next), obs, false);
}

void DialogSession::abort(std::string reason) {
  transcript_.error = reason.empty() ? "aborted" : std::move(reason);
  question_.reset();
}

void DialogSession::apply(DSState next, Observation obs, bool exact) {
  state_ = std::move(next);
  TurnRecord rec;
  rec.attribute = obs.attribute;
  rec.observation = std::move(obs);
  rec.exact = exact;
  rec.entropy = state_entropy(state_);
  rec.support = state_.size();
  if (keep_snapshots_) rec.state = state_;
  transcript_.turns.push_back(std::move(rec));
  advance();
}

void DialogSession::advance() {
  if (auto status = check_termination(*catalog_, state_, cfg_)) {
    finish(*status);
    return;
  }
  question_ = selector_.next_question(state_, *catalog_);
  if (!question_) {
    // Nothing informative left to ask.
    finish(cfg_.mode == Mode::Ideal ? TerminalStatus::ZeroEntropySet : TerminalStatus::AttributesExhausted);
  }
}

void DialogSession::finish(TerminalStatus status) {
  question_.reset();
  transcript_.status = status;
  transcript_.returned.clear();
  if (status == TerminalStatus::EmptyGoalSet) return;
  const GoalId top = state_.argmax();
  transcript_.returned.push_back(top);
  const bool whole_set = cfg_.mode == Mode::Ideal && (status == TerminalStatus::ZeroEntropySet ||
                                                      status == TerminalStatus::AttributesExhausted);
  if (whole_set)
    for (GoalId g : state_.goals())
      if (g != top) transcript_.returned.push_back(g);
}

Transcript run_session(const SessionConfig& cfg, const Catalog& catalog, AnswerSource& source, std::uint64_t seed,
                       bool keep_snapshots) {
  DialogSession session(catalog, cfg, seed, keep_snapshots);
  while (!session.finished()) {
    const AttrId attr = *session.question();
    const int turn = session.state().turn() + 1;
    try {
      if (cfg.mode == Mode::Ideal) {
        session.answer(source.answer(attr, turn));
      } else {
        session.observe(source.observe(attr, turn));
      }
    } catch (const std::exception& e) {
      session.abort(std::string("answer source failed: ") + e.what());
    }
  }
  return session.transcript();
}

bool success(const Transcript& transcript, GoalId true_goal) {
  if (!transcript.finished()) throw std::logic_error("success() needs a finished transcript");
  if (*transcript.status == TerminalStatus::EmptyGoalSet || transcript.returned.empty()) return false;
  if (transcript.mode == Mode::Noisy) return transcript.returned.front() == true_goal;
  return std::find(transcript.returned.begin(), transcript.returned.end(), true_goal) != transcript.returned.end();
}

std::string question_text(const Catalog& catalog, AttrId attr) {
  return "What is the " + catalog.schema()[attr].name() + " of the goal?";
}

void write_transcript_jsonl(const Transcript& transcript, const Catalog& catalog, std::ostream& out) {
  using nlohmann::json;
  out << json{{"record", "start"},
              {"mode", to_string(transcript.mode)},
              {"entropy", transcript.initial_entropy},
              {"support", transcript.initial_support}}
             .dump()
      << '\n';
  for (std::size_t i = 0; i < transcript.turns.size(); ++i) {
    const auto& t = transcript.turns[i];
    const auto& attr = catalog.schema()[t.attribute];
    json answer;
    if (t.observation.unknown) {
      answer = {{"unknown", true}};
    } else {
      json cands = json::array();
      for (const auto& c : t.observation.candidates)
        cands.push_back({{"value", attr.value_name(c.value)}, {"confidence", c.confidence}});
      answer = {{"candidates", std::move(cands)}};
    }
    json rec{{"record", "turn"},
             {"turn", i + 1},
             {"attribute", t.attribute},
             {"attribute_name", attr.name()},
             {"question", question_text(catalog, t.attribute)},
             {"answer", std::move(answer)},
             {"update", t.exact ? "exact" : "soft"},
             {"entropy", t.entropy},
             {"support", t.support}};
    if (t.state.size() > 0) rec["state"] = serialize_state(t.state);
    out << rec.dump() << '\n';
  }
  json end{{"record", "end"}, {"turns", transcript.turns.size()}, {"returned", transcript.returned}};
  if (transcript.status) end["status"] = to_string(*transcript.status);
  if (transcript.aborted()) end["error"] = transcript.error;
  out << end.dump() << '\n';
}

}  // namespace emdm
