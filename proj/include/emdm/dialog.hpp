#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "emdm/belief.hpp"
#include "emdm/catalog.hpp"
#include "emdm/strategy.hpp"

namespace emdm {

enum class Mode { Ideal, Noisy };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);
MissingPolicy parse_policy(std::string_view text);
std::string to_string(MissingPolicy policy);

struct SessionConfig {
  Mode mode = Mode::Ideal;
  double theta = 0.8;  // noisy-mode dominance threshold, in (0.5, 1]
  MissingPolicy policy = MissingPolicy::Wildcard;
  StrategyKind strategy = StrategyKind::emdm();
  int max_turns = 0;  // 0 = number of attributes

  /// Throws std::invalid_argument on an out-of-range threshold or max_turns.
  void validate() const;
  int turn_limit(const Catalog& catalog) const;
};

enum class TerminalStatus { SingleCandidate, ZeroEntropySet, AttributesExhausted, Dominant, EmptyGoalSet };

std::string to_string(TerminalStatus status);
TerminalStatus parse_status(std::string_view text);

struct TurnRecord {
  AttrId attribute = 0;
  Observation observation;  // an ideal answer is stored as a single confidence-1 candidate
  bool exact = false;       // true when the update was exact filtering
  DSState state;            // post-update snapshot; empty when snapshots are off
  double entropy = 0.0;     // state entropy after the update, bits
  std::size_t support = 0;  // subset size after the update
};

struct Transcript {
  Mode mode = Mode::Ideal;
  double initial_entropy = 0.0;
  std::size_t initial_support = 0;
  std::vector<TurnRecord> turns;
  std::optional<TerminalStatus> status;
  /// Argmax first; in ideal mode the rest of an unresolved subset follows in id order.
  std::vector<GoalId> returned;
  std::string error;  // set when the session was aborted

  bool finished() const noexcept { return status.has_value(); }
  bool aborted() const noexcept { return !error.empty(); }
  /// Entropy before the first question followed by the entropy after each turn.
  std::vector<double> entropy_sequence() const;
};

/// Evaluates the stopping rules for the current state.
///
/// Ideal mode: one goal left; every attribute asked (or the turn limit hit);
/// every unasked attribute has zero entropy, so no remaining question can
/// split the subset. Noisy mode: one goal above `theta`; every attribute asked
/// (or the turn limit hit).
std::optional<TerminalStatus> check_termination(const Catalog& catalog, const DSState& state,
                                                const SessionConfig& cfg);

/// Supplies the user's side of a dialog. Implementations may block.
class AnswerSource {
 public:
  virtual ~AnswerSource() = default;
  /// Cooperative answer, std::nullopt for "don't know".
  virtual std::optional<ValueId> answer(AttrId attr, int turn) = 0;
  /// Understanding-channel output for the answer.
  virtual Observation observe(AttrId attr, int turn) = 0;
};

/// Step-wise session controller: owns the state, the question selector and
/// the transcript. run_session drives it from an AnswerSource; the HTTP
/// service drives it one posted answer at a time.
class DialogSession {
 public:
  DialogSession(const Catalog& catalog, SessionConfig cfg, std::uint64_t seed, bool keep_snapshots = true);

  const Catalog& catalog() const noexcept { return *catalog_; }
  const SessionConfig& config() const noexcept { return cfg_; }
  const DSState& state() const noexcept { return state_; }
  const Transcript& transcript() const noexcept { return transcript_; }
  bool finished() const noexcept { return transcript_.finished() || transcript_.aborted(); }

  /// Attribute currently asked, std::nullopt once finished.
  std::optional<AttrId> question() const noexcept { return question_; }

  /// Ideal mode applies exact filtering; noisy mode treats the value as a
  /// single confidence-1 candidate.
  void answer(std::optional<ValueId> value);
  /// Applies the confidence-weighted update. Throws InvalidObservationError
  /// (leaving the session untouched) for a malformed observation.
  void observe(const Observation& obs);
  void abort(std::string reason);

 private:
  void apply(DSState next, Observation obs, bool exact);
  void advance();
  void finish(TerminalStatus status);

  const Catalog* catalog_;
  SessionConfig cfg_;
  QuestionSelector selector_;
  DSState state_;
  Transcript transcript_;
  std::optional<AttrId> question_;
  bool keep_snapshots_;
};

/// Runs a full dialog. A throwing answer source aborts the session; the
/// returned transcript then carries the error and no terminal status.
Transcript run_session(const SessionConfig& cfg, const Catalog& catalog, AnswerSource& source, std::uint64_t seed,
                       bool keep_snapshots = true);

/// Ideal mode: the true goal is among the returned goals. Noisy mode: the
/// returned argmax is the true goal. EmptyGoalSet is always a failure.
/// Throws std::logic_error for an unfinished transcript.
bool success(const Transcript& transcript, GoalId true_goal);

std::string question_text(const Catalog& catalog, AttrId attr);

/// One JSON object per line: a start record, one record per turn, an end record.
void write_transcript_jsonl(const Transcript& transcript, const Catalog& catalog, std::ostream& out);

}  // namespace emdm
