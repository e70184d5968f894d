#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emdm/belief.hpp"
#include "emdm/catalog.hpp"
#include "emdm/rng.hpp"

namespace fixture {

using Row = std::vector<std::optional<std::string>>;

inline emdm::Catalog build(const std::vector<std::string>& names, const std::vector<Row>& rows,
                           std::vector<double> weights = {}, const std::vector<std::string>& labels = {}) {
  emdm::AttributeSchema schema;
  for (const auto& n : names) schema.add(n);
  std::vector<emdm::Goal> goals;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    emdm::Goal g;
    g.id = static_cast<emdm::GoalId>(i);
    g.label = i < labels.size() ? labels[i] : "";
    for (std::size_t a = 0; a < names.size(); ++a) {
      if (rows[i][a])
        g.values.push_back(schema[static_cast<emdm::AttrId>(a)].intern(*rows[i][a]));
      else
        g.values.push_back(std::nullopt);
    }
    goals.push_back(std::move(g));
  }
  return emdm::Catalog(std::move(schema), goals, std::move(weights));
}

// g1 (x,p) g2 (x,q) g3 (y,r) g4 (y,r)
inline emdm::Catalog f1(std::vector<double> weights = {}) {
  return build({"A", "B"}, {{"x", "p"}, {"x", "q"}, {"y", "r"}, {"y", "r"}}, std::move(weights),
               {"g1", "g2", "g3", "g4"});
}

inline emdm::ValueId vid(const emdm::Catalog& c, const char* attr, const char* value) {
  auto a = *c.schema().find(attr);
  return *c.schema()[a].find(value);
}

inline emdm::AttrId aid(const emdm::Catalog& c, const char* attr) { return *c.schema().find(attr); }

/// Random categorical catalog; `missing` is the per-cell missing probability.
inline emdm::Catalog random_catalog(emdm::Rng& rng, std::size_t goals, std::size_t attrs, std::size_t max_card,
                                    double missing = 0.0) {
  std::vector<std::string> names;
  for (std::size_t a = 0; a < attrs; ++a) names.push_back("a" + std::to_string(a));
  std::vector<std::size_t> card(attrs);
  for (auto& c : card) c = 1 + emdm::uniform_index(rng, max_card);
  std::vector<Row> rows(goals, Row(attrs));
  for (auto& r : rows)
    for (std::size_t a = 0; a < attrs; ++a)
      if (emdm::uniform01(rng) >= missing) r[a] = "v" + std::to_string(emdm::uniform_index(rng, card[a]));
  return build(names, rows);
}

/// Random non-uniform state over a random nonempty subset of the goals.
inline emdm::DSState random_state(emdm::Rng& rng, const emdm::Catalog& c, bool full_support = false) {
  std::vector<std::pair<emdm::GoalId, double>> w;
  for (std::size_t g = 0; g < c.num_goals(); ++g)
    if (full_support || emdm::uniform01(rng) < 0.7) w.emplace_back(static_cast<emdm::GoalId>(g), 0.05 + emdm::uniform01(rng));
  if (w.empty()) w.emplace_back(static_cast<emdm::GoalId>(emdm::uniform_index(rng, c.num_goals())), 1.0);
  return emdm::make_state(std::move(w), emdm::AttributeSet(c.num_attributes()), 0);
}

}  // namespace fixture
