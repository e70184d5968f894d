#include "emdm/strategy.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace emdm {

StrategyKind parse_strategy(std::string_view text) {
  if (text == "sequential") return StrategyKind::sequential();
  if (text == "dsdm") return StrategyKind::dsdm();
  if (text == "emdm") return StrategyKind::emdm();
  if (text.starts_with("random:")) {
    auto s = text.substr(7);
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (!s.empty() && ec == std::errc() && ptr == s.data() + s.size()) return StrategyKind::random(seed);
  }
  throw std::invalid_argument("unknown strategy '" + std::string(text) +
                              "' (expected sequential | random:<seed> | dsdm | emdm)");
}

std::string to_string(const StrategyKind& kind) {
  switch (kind.type) {
    case StrategyKind::Type::Sequential:
      return "sequential";
    case StrategyKind::Type::Random:
      return "random:" + std::to_string(kind.seed);
    case StrategyKind::Type::Dsdm:
      return "dsdm";
    case StrategyKind::Type::Emdm:
      return "emdm";
  }
  return "?";
}

std::vector<AttributeEntropy> informative_attributes(const DSState& state, const Catalog& catalog) {
  std::vector<AttributeEntropy> out;
  out.reserve(catalog.num_attributes());
  for (std::size_t a = 0; a < catalog.num_attributes(); ++a) {
    auto id = static_cast<AttrId>(a);
    out.push_back({id, attribute_entropy(catalog, state, id), state.asked().contains(id)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AttributeEntropy& x, const AttributeEntropy& y) { return x.entropy > y.entropy; });
  return out;
}

std::size_t distinct_values(const DSState& state, const Catalog& catalog, AttrId attr) {
  thread_local std::vector<std::uint32_t> stamp;
  thread_local std::uint32_t epoch = 0;
  const auto card = catalog.schema()[attr].cardinality();
  if (stamp.size() < card) stamp.resize(card, 0);
  if (++epoch == 0) {
    std::fill(stamp.begin(), stamp.end(), 0);
    epoch = 1;
  }
  auto column = catalog.column(attr);
  auto probs = state.probs();
  auto goals = state.goals();
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (!(probs[i] > 0.0)) continue;
    ValueId v = column[static_cast<std::size_t>(goals[i])];
    if (v == kMissing) continue;
    auto& s = stamp[static_cast<std::size_t>(v)];
    if (s != epoch) {
      s = epoch;
      ++distinct;
    }
  }
  return distinct;
}

QuestionSelector::QuestionSelector(StrategyKind kind, std::uint64_t session_seed)
    : kind_(kind), rng_(derive_seed({kind.seed, session_seed, 0x7e57ULL})) {}

std::optional<AttrId> QuestionSelector::next_question(const DSState& state, const Catalog& catalog) {
  std::vector<AttrId> open;
  for (std::size_t a = 0; a < catalog.num_attributes(); ++a)
    if (!state.asked().contains(static_cast<AttrId>(a))) open.push_back(static_cast<AttrId>(a));
  if (open.empty()) return std::nullopt;

  switch (kind_.type) {
    case StrategyKind::Type::Sequential:
      return open.front();
    case StrategyKind::Type::Random:
      return open[uniform_index(rng_, open.size())];
    case StrategyKind::Type::Dsdm: {
      AttrId best = open.front();
      std::size_t best_count = distinct_values(state, catalog, best);
      for (std::size_t i = 1; i < open.size(); ++i) {
        std::size_t c = distinct_values(state, catalog, open[i]);
        if (c > best_count) {
          best = open[i];
          best_count = c;
        }
      }
      return best;
    }
    case StrategyKind::Type::Emdm: {
      // Entropies within kZeroEntropy of each other count as tied.
      std::optional<AttrId> best;
      double best_h = 0.0;
      for (AttrId a : open) {
        double h = attribute_entropy(catalog, state, a);
        if (h > best_h + kZeroEntropy) {
          best = a;
          best_h = h;
        }
      }
      return best;
    }
  }
  return std::nullopt;
}

}  // namespace emdm
