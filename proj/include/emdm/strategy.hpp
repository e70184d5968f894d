#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emdm/belief.hpp"
#include "emdm/catalog.hpp"
#include "emdm/rng.hpp"

namespace emdm {

struct StrategyKind {
  enum class Type { Sequential, Random, Dsdm, Emdm };

  Type type = Type::Emdm;
  std::uint64_t seed = 0;  // meaningful for Random only

  static StrategyKind sequential() { return {Type::Sequential, 0}; }
  static StrategyKind random(std::uint64_t seed) { return {Type::Random, seed}; }
  static StrategyKind dsdm() { return {Type::Dsdm, 0}; }
  static StrategyKind emdm() { return {Type::Emdm, 0}; }

  friend bool operator==(const StrategyKind&, const StrategyKind&) = default;
};

/// Parses `sequential | random:<seed> | dsdm | emdm`.
StrategyKind parse_strategy(std::string_view text);
std::string to_string(const StrategyKind& kind);

struct AttributeEntropy {
  AttrId attribute = 0;
  double entropy = 0.0;
  bool asked = false;
};

/// Entropy of every attribute in the current state, highest first (ties by
/// id). Asked attributes are reported too, flagged, so a display can show
/// them dropping to zero.
std::vector<AttributeEntropy> informative_attributes(const DSState& state, const Catalog& catalog);

/// Number of distinct present values of `attr` among goals in the subset.
std::size_t distinct_values(const DSState& state, const Catalog& catalog, AttrId attr);

/// Chooses the next question for one session. Only the Random policy carries
/// state (its generator), so give each session its own selector.
class QuestionSelector {
 public:
  /// `session_seed` is mixed with the Random strategy's own seed.
  explicit QuestionSelector(StrategyKind kind, std::uint64_t session_seed = 0);

  const StrategyKind& kind() const noexcept { return kind_; }

  /// std::nullopt when no unasked attribute remains (or, for EMDM, when every
  /// unasked attribute has zero entropy).
  std::optional<AttrId> next_question(const DSState& state, const Catalog& catalog);

 private:
  StrategyKind kind_;
  Rng rng_;
};

}  // namespace emdm
