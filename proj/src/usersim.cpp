#include "emdm/usersim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace emdm {

void NoiseSpec::validate() const {
  if (!(error_rate >= 0.0 && error_rate < 1.0)) throw std::invalid_argument("noise error_rate must lie in [0, 1)");
  if (top_n < 1) throw std::invalid_argument("noise top_n must be at least 1");
  if (!(inclusion_rate >= 0.0 && inclusion_rate <= 1.0))
    throw std::invalid_argument("noise inclusion_rate must lie in [0, 1]");
  if (!(concentration > 0.0) || !std::isfinite(concentration))
    throw std::invalid_argument("noise concentration must be positive");
  if (!(mass_alpha > 0.0) || !(mass_beta >= 0.0) || !std::isfinite(mass_alpha) || !std::isfinite(mass_beta))
    throw std::invalid_argument("noise confidence-mass parameters must be positive (mass_beta may be 0)");
}

double NoiseSpec::effective_inclusion() const {
  if (top_n == 1) return 1.0 - error_rate;
  return std::max(inclusion_rate, 1.0 - error_rate);
}

const NoiseSpec& NoiseModel::for_attribute(const std::string& name) const {
  auto it = overrides.find(name);
  return it == overrides.end() ? defaults : it->second;
}

std::optional<ValueId> cooperative_answer(const Catalog& catalog, GoalId goal, AttrId attr) {
  ValueId v = catalog.value(attr, goal);
  if (v == kMissing) return std::nullopt;
  return v;
}

DistractorTable::DistractorTable(const Catalog& catalog) {
  for (const auto& attr : catalog.schema()) {
    std::vector<double> counts(attr.cardinality(), 0.0);
    for (ValueId v : catalog.column(attr.id()))
      if (v != kMissing) counts[static_cast<std::size_t>(v)] += 1.0;
    std::vector<ValueId> vals;
    std::vector<double> cdf;
    double acc = 0.0;
    for (std::size_t v = 0; v < counts.size(); ++v) {
      if (counts[v] == 0.0) continue;
      acc += counts[v];
      vals.push_back(static_cast<ValueId>(v));
      cdf.push_back(acc);
    }
    values_.push_back(std::move(vals));
    cdf_.push_back(std::move(cdf));
  }
}

std::optional<ValueId> DistractorTable::draw(AttrId attr, std::span<const ValueId> exclude, Rng& rng) const {
  const auto& vals = values_.at(static_cast<std::size_t>(attr));
  const auto& cdf = cdf_[static_cast<std::size_t>(attr)];
  auto excluded = [&](ValueId v) { return std::find(exclude.begin(), exclude.end(), v) != exclude.end(); };

  std::size_t blocked = 0;
  for (ValueId v : exclude)
    if (std::binary_search(vals.begin(), vals.end(), v)) ++blocked;
  if (blocked >= vals.size()) return std::nullopt;

  // Rejection against the frequency table; fall back to an exact scan over
  // the remaining mass when the excluded values dominate it.
  for (int attempt = 0; attempt < 64; ++attempt) {
    double u = uniform01(rng) * cdf.back();
    auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    ValueId v = vals[std::min(idx, vals.size() - 1)];
    if (!excluded(v)) return v;
  }
  double remaining = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (!excluded(vals[i])) remaining += cdf[i] - (i ? cdf[i - 1] : 0.0);
  double u = uniform01(rng) * remaining;
  std::optional<ValueId> last;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (excluded(vals[i])) continue;
    last = vals[i];
    u -= cdf[i] - (i ? cdf[i - 1] : 0.0);
    if (u < 0.0) return vals[i];
  }
  return last;
}

namespace {

double draw_gamma(Rng& rng, double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

}  // namespace

Observation corrupt(std::optional<ValueId> true_value, AttrId attr, const DistractorTable& table, const NoiseSpec& noise,
                    std::uint64_t nonce) {
  noise.validate();
  if (!true_value) return Observation::unknown_answer(attr);

  Rng rng(derive_seed({nonce, static_cast<std::uint64_t>(attr), 0xc0ffeeULL}));
  const double u_first = uniform01(rng);
  const double u_include = uniform01(rng);
  const double u_rank = uniform01(rng);

  std::vector<ValueId> ranked;
  ranked.reserve(static_cast<std::size_t>(noise.top_n));
  const bool correct_first = u_first >= noise.error_rate;
  bool include_true = correct_first;
  if (correct_first) {
    ranked.push_back(*true_value);
  } else {
    // Given a wrong top candidate, list the true value lower down with the
    // probability that brings overall inclusion to inclusion_rate.
    const double e = noise.error_rate;
    const double lower = noise.top_n > 1 ? std::clamp((noise.inclusion_rate - (1.0 - e)) / e, 0.0, 1.0) : 0.0;
    include_true = u_include < lower;
  }

  std::vector<ValueId> exclude{*true_value};
  const auto slots = static_cast<std::size_t>(noise.top_n);
  const std::size_t distractor_slots = include_true && !correct_first ? slots - 1 : slots - ranked.size();
  std::vector<ValueId> distractors;
  while (distractors.size() < distractor_slots) {
    auto v = table.draw(attr, exclude, rng);
    if (!v) break;
    distractors.push_back(*v);
    exclude.push_back(*v);
  }
  if (!correct_first && distractors.empty()) {
    // Nothing to confuse with: degenerate to the true value alone.
    ranked.push_back(*true_value);
  } else {
    ranked.insert(ranked.end(), distractors.begin(), distractors.end());
    if (include_true && !correct_first) {
      std::size_t pos = 1 + static_cast<std::size_t>(u_rank * static_cast<double>(ranked.size()));
      pos = std::min(pos, ranked.size());
      ranked.insert(ranked.begin() + static_cast<std::ptrdiff_t>(pos), *true_value);
    }
  }

  std::vector<double> weights(ranked.size());
  double wsum = 0.0;
  for (double& w : weights) {
    w = std::max(draw_gamma(rng, noise.concentration), 1e-300);
    wsum += w;
  }
  std::sort(weights.begin(), weights.end(), std::greater<>());
  double mass = 1.0;
  if (noise.mass_beta > 0.0) {
    double a = draw_gamma(rng, noise.mass_alpha);
    double b = draw_gamma(rng, noise.mass_beta);
    mass = a + b > 0.0 ? a / (a + b) : 1.0;
  }
  // Keep every confidence strictly positive and the total at most 1.
  mass = std::clamp(mass, 1e-6, 1.0);

  Observation obs;
  obs.attribute = attr;
  for (std::size_t i = 0; i < ranked.size(); ++i)
    obs.candidates.push_back({ranked[i], std::max(mass * weights[i] / wsum, 1e-12)});
  double total = 0.0;
  for (const auto& c : obs.candidates) total += c.confidence;
  if (total > 1.0)
    for (auto& c : obs.candidates) c.confidence /= total;
  return obs;
}

Observation corrupt(std::optional<ValueId> true_value, AttrId attr, const Catalog& catalog, const NoiseSpec& noise,
                    std::uint64_t nonce) {
  return corrupt(true_value, attr, DistractorTable(catalog), noise, nonce);
}

SimulatedUser::SimulatedUser(const Catalog& catalog, GoalId goal, std::uint64_t seed, const NoiseModel* noise,
                             const DistractorTable* table)
    : catalog_(catalog), goal_(goal), seed_(seed), noise_(noise), table_(table) {
  if (goal < 0 || static_cast<std::size_t>(goal) >= catalog.num_goals())
    throw std::out_of_range("simulated user goal id out of range");
  if (noise_ && !table_) {
    own_table_.emplace(catalog);
    table_ = &*own_table_;
  }
}

std::optional<ValueId> SimulatedUser::answer(AttrId attr, int) { return cooperative_answer(catalog_, goal_, attr); }

Observation SimulatedUser::observe(AttrId attr, int) {
  auto truth = cooperative_answer(catalog_, goal_, attr);
  if (!noise_) return truth ? Observation::exact(attr, *truth) : Observation::unknown_answer(attr);
  const auto& spec = noise_->for_attribute(catalog_.schema()[attr].name());
  return corrupt(truth, attr, *table_, spec, seed_);
}

}  // namespace emdm
