#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace emdm {

using GoalId = std::int32_t;
using AttrId = std::int32_t;
using ValueId = std::int32_t;

/// Sentinel stored in catalog columns for a missing attribute value.
inline constexpr ValueId kMissing = -1;

/// Reserved header names. `__weight` carries explicit prior weights and
/// `__label` a human-readable goal label; neither is an attribute.
inline constexpr std::string_view kWeightColumn = "__weight";
inline constexpr std::string_view kLabelColumn = "__label";

class CatalogError : public std::runtime_error {
 public:
  enum class Kind { Parse, Empty, InvalidPrior, InvalidSpec, Io };

  CatalogError(Kind kind, const std::string& what, std::size_t row = 0)
      : std::runtime_error(what), kind_(kind), row_(row) {}

  Kind kind() const noexcept { return kind_; }
  /// 1-based file line of a parse error (header is line 1), 0 otherwise.
  std::size_t row() const noexcept { return row_; }

 private:
  Kind kind_;
  std::size_t row_;
};

/// One categorical attribute with its interned value dictionary.
class Attribute {
 public:
  Attribute(AttrId id, std::string name) : id_(id), name_(std::move(name)) {}

  AttrId id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t cardinality() const noexcept { return values_.size(); }
  const std::string& value_name(ValueId v) const { return values_.at(static_cast<std::size_t>(v)); }
  std::span<const std::string> values() const noexcept { return values_; }

  std::optional<ValueId> find(std::string_view text) const;
  ValueId intern(std::string_view text);

 private:
  AttrId id_;
  std::string name_;
  std::vector<std::string> values_;
  std::unordered_map<std::string, ValueId> index_;
};

class AttributeSchema {
 public:
  AttrId add(std::string name);

  std::size_t size() const noexcept { return attrs_.size(); }
  const Attribute& operator[](AttrId a) const { return attrs_.at(static_cast<std::size_t>(a)); }
  Attribute& operator[](AttrId a) { return attrs_.at(static_cast<std::size_t>(a)); }
  std::optional<AttrId> find(std::string_view name) const;

  auto begin() const noexcept { return attrs_.begin(); }
  auto end() const noexcept { return attrs_.end(); }

 private:
  std::vector<Attribute> attrs_;
};

struct Goal {
  GoalId id = 0;
  std::vector<std::optional<ValueId>> values;
  std::string label;
};

/// The goal database: schema, goals and a normalized prior.
///
/// Values are held column-major (one dense ValueId column per attribute,
/// kMissing for absent values) so the belief kernels stream a single column.
/// Immutable after construction; share freely across threads.
class Catalog {
 public:
  /// Validates the goals against the schema and normalizes `weights`
  /// (empty = uniform). Goal ids are reassigned to 0..I-1 in input order.
  Catalog(AttributeSchema schema, const std::vector<Goal>& goals, std::vector<double> weights = {});

  const AttributeSchema& schema() const noexcept { return schema_; }
  std::size_t num_goals() const noexcept { return labels_.size(); }
  std::size_t num_attributes() const noexcept { return schema_.size(); }

  ValueId value(AttrId a, GoalId g) const noexcept {
    return columns_[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)];
  }
  std::span<const ValueId> column(AttrId a) const noexcept { return columns_[static_cast<std::size_t>(a)]; }

  Goal goal(GoalId g) const;
  const std::string& label(GoalId g) const { return labels_.at(static_cast<std::size_t>(g)); }

  /// Normalized prior, sums to 1.
  std::span<const double> prior() const noexcept { return prior_; }
  bool uniform_prior() const noexcept { return uniform_; }

 private:
  friend Catalog with_prior(const Catalog&, std::vector<double>);

  AttributeSchema schema_;
  std::vector<std::vector<ValueId>> columns_;
  std::vector<std::string> labels_;
  std::vector<double> prior_;
  bool uniform_ = true;
};

// ---- ingestion -------------------------------------------------------------

/// Reads delimiter-separated text. Header row names the attributes; an empty
/// cell is a missing value. Double-quoted cells may contain the delimiter.
Catalog read_catalog(std::istream& in, char delimiter = ',');

/// Loads a catalog file. The delimiter is tab for `.tsv`, comma otherwise.
Catalog load_catalog(const std::filesystem::path& path);

void write_catalog(const Catalog& catalog, std::ostream& out, char delimiter = ',');
void save_catalog(const Catalog& catalog, const std::filesystem::path& path);

// ---- synthetic generation --------------------------------------------------

struct SyntheticSpec {
  std::size_t num_goals = 1;
  std::vector<std::size_t> cardinalities;
  std::vector<double> missing_rates;  // empty = no missing values
  double skew = 1.0;                  // Zipf exponent over value ranks
  std::vector<std::string> names;     // empty = a0, a1, ...
};

/// Twelve song attributes with their value counts and the three documented
/// missing rates (Composer 50%, Style 53%, Emotion 20%).
SyntheticSpec song_catalog_spec(std::size_t num_goals);

Catalog generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// ---- priors ----------------------------------------------------------------

struct UniformPrior {};
/// Popularity-skewed prior: weight 1/rank^exponent over a seeded random ranking of the goals.
struct ZipfPrior {
  double exponent = 1.0;
  std::uint64_t seed = 0;
};
struct ExplicitPrior {
  std::vector<double> weights;
};
using PriorSpec = std::variant<UniformPrior, ZipfPrior, ExplicitPrior>;

/// Accepts `uniform`, `zipf:<exponent>:<seed>` or `weights:w0,w1,...`.
PriorSpec parse_prior(std::string_view text);
std::string to_string(const PriorSpec& spec);

Catalog set_prior(const Catalog& catalog, const PriorSpec& spec);

// ---- statistics and views --------------------------------------------------

struct AttributeStats {
  std::size_t distinct = 0;
  double missing_fraction = 0.0;
};

std::vector<AttributeStats> attribute_stats(const Catalog& catalog);

/// Returns a catalog whose attribute i is `order[i]` of the input.
Catalog permute_attributes(const Catalog& catalog, std::span<const AttrId> order);

}  // namespace emdm
