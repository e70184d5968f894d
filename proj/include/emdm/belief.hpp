#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emdm/catalog.hpp"

namespace emdm {

/// Normalization tolerance for every distribution the engine produces.
inline constexpr double kNormTolerance = 1e-9;
/// Goals whose renormalized mass falls below this after a soft update leave the subset.
inline constexpr double kSubsetFloor = 1e-12;
/// Entropies at or below this are treated as zero when making decisions.
inline constexpr double kZeroEntropy = 1e-12;

class EmptyGoalSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditioning on a value that carries no probability mass.
class EmptyConditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidObservationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class MissingPolicy {
  Wildcard,  // a goal with no value for the asked attribute survives any answer
  Strict,    // such a goal is dropped once the attribute is answered
};

enum class LogBase { Bits, Nats };

/// Set of attribute ids that have been asked.
class AttributeSet {
 public:
  AttributeSet() = default;
  explicit AttributeSet(std::size_t k) : bits_(k, false) {}

  bool contains(AttrId a) const { return bits_.at(static_cast<std::size_t>(a)); }
  void insert(AttrId a);
  std::size_t count() const noexcept { return count_; }
  std::size_t universe() const noexcept { return bits_.size(); }
  bool full() const noexcept { return count_ == bits_.size(); }
  std::vector<AttrId> members() const;

  friend bool operator==(const AttributeSet&, const AttributeSet&) = default;

 private:
  std::vector<bool> bits_;
  std::size_t count_ = 0;
};

struct Observation;

/// The dynamic stochastic state: a distribution over a candidate subset of
/// the goals plus the attributes asked so far.
///
/// Goals outside the subset have probability exactly zero. The subset is kept
/// sorted by goal id. Values are immutable; every update returns a new state.
class DSState {
 public:
  DSState() = default;

  std::span<const GoalId> goals() const noexcept { return goals_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return goals_.size(); }
  const AttributeSet& asked() const noexcept { return asked_; }
  int turn() const noexcept { return turn_; }

  /// Probability of `g`, zero outside the subset.
  double prob(GoalId g) const;
  /// Highest-probability goal; ties go to the lowest id.
  GoalId argmax() const;

  friend bool operator==(const DSState&, const DSState&) = default;

 private:
  friend DSState init_state(const Catalog&);
  friend DSState make_state(std::vector<std::pair<GoalId, double>>, AttributeSet, int);
  friend DSState exact_update(const Catalog&, const DSState&, AttrId, std::optional<ValueId>, MissingPolicy);
  friend DSState soft_update(const Catalog&, const DSState&, const Observation&);

  std::vector<GoalId> goals_;
  std::vector<double> probs_;
  AttributeSet asked_;
  int turn_ = 0;
};

struct Candidate {
  ValueId value = 0;
  double confidence = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Top-N understanding of one answer: ranked (value, confidence) candidates,
/// or the unknown marker when the user could not answer.
struct Observation {
  AttrId attribute = 0;
  std::vector<Candidate> candidates;
  bool unknown = false;

  static Observation exact(AttrId attr, ValueId value) { return {attr, {{value, 1.0}}, false}; }
  static Observation unknown_answer(AttrId attr) { return {attr, {}, true}; }

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Throws InvalidObservationError unless the candidates are distinct,
/// confidences lie in (0,1] and sum to at most 1 (within tolerance), and the
/// attribute and values exist in the catalog.
void validate(const Observation& obs, const Catalog& catalog);

/// Per-value probability mass of one attribute, sorted by value id.
struct AttributeMarginal {
  std::vector<std::pair<ValueId, double>> values;
  double missing = 0.0;

  double mass(ValueId v) const;
};

DSState init_state(const Catalog& catalog);

/// Builds a state from explicit (goal, weight) pairs. Zero-weight goals are
/// dropped; weights are normalized unless they already sum to 1 within
/// kNormTolerance, so serialized states parse back bit-for-bit. Intended for tests and deserialization.
DSState make_state(std::vector<std::pair<GoalId, double>> weights, AttributeSet asked, int turn);

double state_entropy(const DSState& state, LogBase base = LogBase::Bits);

AttributeMarginal attribute_marginal(const Catalog& catalog, const DSState& state, AttrId attr);

/// Entropy of the attribute's known-value marginal scaled by the known mass.
/// Without missing values this is the plain marginal entropy.
double attribute_entropy(const Catalog& catalog, const DSState& state, AttrId attr, LogBase base = LogBase::Bits);

/// Entropy of the goals retained after learning attr = value.
double conditional_entropy(const Catalog& catalog, const DSState& state, AttrId attr, ValueId value,
                           MissingPolicy policy = MissingPolicy::Wildcard);

/// Expected entropy reduction of asking `attr`, evaluated literally as
/// sum_m P(m) * (H - H_m). Unknown answers contribute zero reduction.
double expected_reduction_bruteforce(const Catalog& catalog, const DSState& state, AttrId attr,
                                     MissingPolicy policy = MissingPolicy::Wildcard);

/// Deterministic filtering on a cooperative answer; std::nullopt is Unknown.
DSState exact_update(const Catalog& catalog, const DSState& state, AttrId attr, std::optional<ValueId> answer,
                     MissingPolicy policy = MissingPolicy::Wildcard);

/// Confidence-weighted update from a multi-candidate observation.
///
/// A goal whose value matches candidate v moves to 1 - (1 - p)(1 - c_v); every
/// other goal is scaled by (1 - C), C being the total confidence over the
/// distinct candidate values. The result is renormalized and goals below
/// kSubsetFloor are dropped.
DSState soft_update(const Catalog& catalog, const DSState& state, const Observation& obs);

/// Text record: `turn=<j>;asked=<a,b>;probs=<goal>:<p>,...` with
/// shortest round-trip formatting.
std::string serialize_state(const DSState& state);
DSState parse_state(std::string_view text, std::size_t num_attributes);

}  // namespace emdm
