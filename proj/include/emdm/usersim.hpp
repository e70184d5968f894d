#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emdm/belief.hpp"
#include "emdm/catalog.hpp"
#include "emdm/dialog.hpp"

namespace emdm {

/// Synthetic understanding channel for one attribute.
///
/// Candidate confidences are a Dirichlet(concentration) split of a total
/// mass s ~ Beta(mass_alpha, mass_beta), sorted descending. Smaller
/// concentration gives a more peaked list. mass_beta = 0 pins s to 1.
/// Defaults: mean mass equals the inclusion rate, and the concentration
/// minimizes the squared gap between expected confidence and truth rate
/// per rank.
struct NoiseSpec {
  double error_rate = 0.15;      // probability that the top candidate is wrong
  int top_n = 5;
  double inclusion_rate = 0.89;  // probability that the true value is listed at all
  double concentration = 0.01;
  double mass_alpha = 8.9;
  double mass_beta = 1.1;

  /// Throws std::invalid_argument for out-of-range parameters.
  void validate() const;
  /// Listing probability actually realized: 1 - e when top_n = 1, and never
  /// below 1 - e (a correct top candidate is always listed).
  double effective_inclusion() const;
};

/// Default channel plus per-attribute overrides keyed by attribute name.
struct NoiseModel {
  NoiseSpec defaults;
  std::map<std::string, NoiseSpec> overrides;

  const NoiseSpec& for_attribute(const std::string& name) const;
};

/// The cooperative user's answer: the goal's value, std::nullopt when missing.
std::optional<ValueId> cooperative_answer(const Catalog& catalog, GoalId goal, AttrId attr);

/// Per-attribute value frequencies over the catalog, used to draw plausible
/// confusions. Build once per catalog and share.
class DistractorTable {
 public:
  explicit DistractorTable(const Catalog& catalog);

  /// Draws a present value of `attr` by catalog frequency, excluding `exclude`.
  /// std::nullopt when no other value exists.
  std::optional<ValueId> draw(AttrId attr, std::span<const ValueId> exclude, Rng& rng) const;
  std::size_t distinct(AttrId attr) const { return values_.at(static_cast<std::size_t>(attr)).size(); }

 private:
  std::vector<std::vector<ValueId>> values_;
  std::vector<std::vector<double>> cdf_;
};

/// Turns the true answer into a ranked candidate list. Pure in (inputs, nonce).
Observation corrupt(std::optional<ValueId> true_value, AttrId attr, const DistractorTable& table, const NoiseSpec& noise,
                    std::uint64_t nonce);

/// Convenience overload that builds the distractor table on the fly.
Observation corrupt(std::optional<ValueId> true_value, AttrId attr, const Catalog& catalog, const NoiseSpec& noise,
                    std::uint64_t nonce);

/// Knowledgeable, cooperative user holding one goal. In noisy use its answers
/// pass through the channel with nonce derived from (seed, attribute), so
/// paired runs that ask the same attribute see the same corruption.
class SimulatedUser : public AnswerSource {
 public:
  SimulatedUser(const Catalog& catalog, GoalId goal, std::uint64_t seed, const NoiseModel* noise = nullptr,
                const DistractorTable* table = nullptr);

  std::optional<ValueId> answer(AttrId attr, int turn) override;
  Observation observe(AttrId attr, int turn) override;

 private:
  const Catalog& catalog_;
  GoalId goal_;
  std::uint64_t seed_;
  const NoiseModel* noise_;
  std::optional<DistractorTable> own_table_;
  const DistractorTable* table_;
};

}  // namespace emdm
