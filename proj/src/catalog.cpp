#include "emdm/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "emdm/rng.hpp"

namespace emdm {

std::optional<ValueId> Attribute::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ValueId Attribute::intern(std::string_view text) {
  std::string key(text);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  auto id = static_cast<ValueId>(values_.size());
  values_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

AttrId AttributeSchema::add(std::string name) {
  if (find(name)) throw CatalogError(CatalogError::Kind::Parse, "duplicate attribute name '" + name + "'");
  auto id = static_cast<AttrId>(attrs_.size());
  attrs_.emplace_back(id, std::move(name));
  return id;
}

std::optional<AttrId> AttributeSchema::find(std::string_view name) const {
  for (const auto& a : attrs_)
    if (a.name() == name) return a.id();
  return std::nullopt;
}

namespace {

std::vector<double> normalize_weights(std::vector<double> w) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw CatalogError(CatalogError::Kind::InvalidPrior, "prior weights must be finite and nonnegative");
    total += x;
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw CatalogError(CatalogError::Kind::InvalidPrior, "prior weights must not all be zero");
  for (double& x : w) x /= total;
  return w;
}

bool all_equal(const std::vector<double>& w) {
  return std::adjacent_find(w.begin(), w.end(), std::not_equal_to<>()) == w.end();
}

}  // namespace

Catalog::Catalog(AttributeSchema schema, const std::vector<Goal>& goals, std::vector<double> weights)
    : schema_(std::move(schema)) {
  if (goals.empty()) throw CatalogError(CatalogError::Kind::Empty, "catalog has no goals");
  const std::size_t k = schema_.size();
  columns_.assign(k, std::vector<ValueId>(goals.size(), kMissing));
  labels_.reserve(goals.size());
  for (std::size_t g = 0; g < goals.size(); ++g) {
    const Goal& goal = goals[g];
    if (goal.values.size() != k)
      throw CatalogError(CatalogError::Kind::InvalidSpec,
                         "goal " + std::to_string(g) + " has " + std::to_string(goal.values.size()) +
                             " values, schema has " + std::to_string(k));
    for (std::size_t a = 0; a < k; ++a) {
      if (!goal.values[a]) continue;
      ValueId v = *goal.values[a];
      if (v < 0 || static_cast<std::size_t>(v) >= schema_[static_cast<AttrId>(a)].cardinality())
        throw CatalogError(CatalogError::Kind::InvalidSpec,
                           "goal " + std::to_string(g) + " value id out of dictionary range");
      columns_[a][g] = v;
    }
    labels_.push_back(goal.label.empty() ? "goal-" + std::to_string(g) : goal.label);
  }
  if (weights.empty()) {
    prior_.assign(goals.size(), 1.0 / static_cast<double>(goals.size()));
    uniform_ = true;
  } else {
    if (weights.size() != goals.size())
      throw CatalogError(CatalogError::Kind::InvalidPrior, "prior length does not match goal count");
    uniform_ = all_equal(weights);
    prior_ = normalize_weights(std::move(weights));
  }
}

Goal Catalog::goal(GoalId g) const {
  Goal out;
  out.id = g;
  out.label = label(g);
  out.values.reserve(num_attributes());
  for (std::size_t a = 0; a < num_attributes(); ++a) {
    ValueId v = columns_[a].at(static_cast<std::size_t>(g));
    out.values.push_back(v == kMissing ? std::nullopt : std::optional<ValueId>(v));
  }
  return out;
}

Catalog with_prior(const Catalog& catalog, std::vector<double> weights) {
  if (weights.size() != catalog.num_goals())
    throw CatalogError(CatalogError::Kind::InvalidPrior,
                       "prior has " + std::to_string(weights.size()) + " weights for " +
                           std::to_string(catalog.num_goals()) + " goals");
  Catalog out = catalog;
  out.uniform_ = all_equal(weights);
  out.prior_ = normalize_weights(std::move(weights));
  return out;
}

// ---- delimited text --------------------------------------------------------

namespace {

std::vector<std::string> split_record(std::string_view line, char delim, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && cell.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == delim) {
      cells.push_back(std::move(cell));
      cell.clear();
      was_quoted = false;
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw CatalogError(CatalogError::Kind::Parse, "unterminated quote on line " + std::to_string(line_no), line_no);
  cells.push_back(std::move(cell));
  return cells;
}

std::string quote_cell(const std::string& s, char delim) {
  if (s.find(delim) == std::string::npos && s.find('"') == std::string::npos &&
      (s.empty() || s.front() != ' '))
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double parse_weight(const std::string& cell, std::size_t line_no) {
  double w = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, w);
  if (ec != std::errc() || ptr != last)
    throw CatalogError(CatalogError::Kind::Parse,
                       "bad " + std::string(kWeightColumn) + " value '" + cell + "' on line " + std::to_string(line_no),
                       line_no);
  return w;
}

}  // namespace

Catalog read_catalog(std::istream& in, char delimiter) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty()) continue;
    header = split_record(line, delimiter, line_no);
    break;
  }
  if (header.empty()) throw CatalogError(CatalogError::Kind::Empty, "catalog has no header row");

  AttributeSchema schema;
  std::vector<int> column_attr(header.size(), -1);
  int weight_col = -1;
  int label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == kWeightColumn) {
      weight_col = static_cast<int>(c);
    } else if (header[c] == kLabelColumn) {
      label_col = static_cast<int>(c);
    } else {
      if (header[c].empty())
        throw CatalogError(CatalogError::Kind::Parse, "empty attribute name in header", line_no);
      column_attr[c] = schema.add(header[c]);
    }
  }

  std::vector<Goal> goals;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_record(line, delimiter, line_no);
    if (cells.size() != header.size())
      throw CatalogError(CatalogError::Kind::Parse,
                         "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " cells, found " + std::to_string(cells.size()),
                         line_no);
    Goal goal;
    goal.id = static_cast<GoalId>(goals.size());
    goal.values.assign(schema.size(), std::nullopt);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (column_attr[c] >= 0) {
        if (!cells[c].empty()) goal.values[static_cast<std::size_t>(column_attr[c])] = schema[column_attr[c]].intern(cells[c]);
      } else if (static_cast<int>(c) == weight_col) {
        weights.push_back(parse_weight(cells[c], line_no));
      } else {
        goal.label = cells[c];
      }
    }
    goals.push_back(std::move(goal));
  }
  if (goals.empty()) throw CatalogError(CatalogError::Kind::Empty, "catalog has no goals");
  (void)label_col;
  return Catalog(std::move(schema), goals, std::move(weights));
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError(CatalogError::Kind::Io, "cannot open catalog '" + path.string() + "'");
  return read_catalog(in, path.extension() == ".tsv" ? '\t' : ',');
}

void write_catalog(const Catalog& catalog, std::ostream& out, char delimiter) {
  bool custom_labels = false;
  for (std::size_t g = 0; g < catalog.num_goals(); ++g)
    if (catalog.label(static_cast<GoalId>(g)) != "goal-" + std::to_string(g)) custom_labels = true;
  const bool weights = !catalog.uniform_prior();

  bool first = true;
  auto sep = [&] {
    if (!first) out << delimiter;
    first = false;
  };
  if (custom_labels) {
    sep();
    out << kLabelColumn;
  }
  for (const auto& a : catalog.schema()) {
    sep();
    out << quote_cell(a.name(), delimiter);
  }
  if (weights) {
    sep();
    out << kWeightColumn;
  }
  out << '\n';

  char buf[32];
  for (std::size_t g = 0; g < catalog.num_goals(); ++g) {
    first = true;
    auto gid = static_cast<GoalId>(g);
    if (custom_labels) {
      sep();
      out << quote_cell(catalog.label(gid), delimiter);
    }
    for (const auto& a : catalog.schema()) {
      sep();
      ValueId v = catalog.value(a.id(), gid);
      if (v != kMissing) {
        out << quote_cell(a.value_name(v), delimiter);
      } else if (!custom_labels && !weights && catalog.num_attributes() == 1) {
        out << "\"\"";  // a bare empty line would read as no record
      }
    }
    if (weights) {
      sep();
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, catalog.prior()[g]);
      (void)ec;
      out.write(buf, end - buf);
    }
    out << '\n';
  }
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CatalogError(CatalogError::Kind::Io, "cannot write catalog '" + path.string() + "'");
  write_catalog(catalog, out, path.extension() == ".tsv" ? '\t' : ',');
  if (!out) throw CatalogError(CatalogError::Kind::Io, "write failed for '" + path.string() + "'");
}

// ---- synthetic generation --------------------------------------------------

SyntheticSpec song_catalog_spec(std::size_t num_goals) {
  SyntheticSpec spec;
  spec.num_goals = num_goals;
  spec.names = {"Singer", "Gender",   "Region",   "Album", "Company", "Language",
                "Lyricist", "Composer", "Live", "Time",  "Style",   "Emotion"};
  spec.cardinalities = {3021, 2, 19, 10322, 1193, 10, 5603, 5642, 2, 413, 346, 59};
  spec.missing_rates = {0, 0, 0, 0, 0, 0, 0, 0.50, 0, 0, 0.53, 0.20};
  spec.skew = 1.0;
  return spec;
}

namespace {

/// Cumulative Zipf weights over ranks 1..n.
std::vector<double> zipf_cdf(std::size_t n, double exponent) {
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -exponent);
    cdf[r] = acc;
  }
  for (double& c : cdf) c /= acc;
  cdf.back() = 1.0;
  return cdf;
}

}  // namespace

Catalog generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  const std::size_t k = spec.cardinalities.size();
  if (spec.num_goals < 1) throw CatalogError(CatalogError::Kind::InvalidSpec, "synthetic spec needs at least one goal");
  if (k < 1) throw CatalogError(CatalogError::Kind::InvalidSpec, "synthetic spec needs at least one attribute");
  if (!spec.missing_rates.empty() && spec.missing_rates.size() != k)
    throw CatalogError(CatalogError::Kind::InvalidSpec, "missing-rate list length does not match cardinalities");
  if (!spec.names.empty() && spec.names.size() != k)
    throw CatalogError(CatalogError::Kind::InvalidSpec, "name list length does not match cardinalities");
  if (!(spec.skew >= 0.0) || !std::isfinite(spec.skew))
    throw CatalogError(CatalogError::Kind::InvalidSpec, "skew exponent must be finite and nonnegative");
  for (std::size_t a = 0; a < k; ++a) {
    if (spec.cardinalities[a] < 1)
      throw CatalogError(CatalogError::Kind::InvalidSpec, "attribute cardinality must be at least 1");
    if (!spec.missing_rates.empty() && !(spec.missing_rates[a] >= 0.0 && spec.missing_rates[a] <= 1.0))
      throw CatalogError(CatalogError::Kind::InvalidSpec, "missing rate must lie in [0,1]");
  }

  AttributeSchema schema;
  std::vector<std::vector<double>> cdfs;
  for (std::size_t a = 0; a < k; ++a) {
    std::string name = spec.names.empty() ? "a" + std::to_string(a) : spec.names[a];
    AttrId id = schema.add(name);
    for (std::size_t m = 0; m < spec.cardinalities[a]; ++m) schema[id].intern(name + "_" + std::to_string(m));
    cdfs.push_back(zipf_cdf(spec.cardinalities[a], spec.skew));
  }

  Rng rng(derive_seed({seed, 0x5a17ULL}));
  std::vector<Goal> goals(spec.num_goals);
  for (std::size_t g = 0; g < spec.num_goals; ++g) {
    goals[g].id = static_cast<GoalId>(g);
    goals[g].values.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
      double rate = spec.missing_rates.empty() ? 0.0 : spec.missing_rates[a];
      double u_missing = uniform01(rng);
      double u_value = uniform01(rng);
      if (u_missing < rate) continue;
      auto it = std::upper_bound(cdfs[a].begin(), cdfs[a].end(), u_value);
      goals[g].values[a] = static_cast<ValueId>(std::min<std::ptrdiff_t>(it - cdfs[a].begin(), cdfs[a].size() - 1));
    }
  }
  return Catalog(std::move(schema), goals);
}

// ---- priors ----------------------------------------------------------------

namespace {

double to_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw CatalogError(CatalogError::Kind::InvalidPrior, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

PriorSpec parse_prior(std::string_view text) {
  if (text == "uniform") return UniformPrior{};
  if (text.starts_with("zipf")) {
    ZipfPrior z;
    std::string_view rest = text.substr(4);
    if (!rest.empty()) {
      if (rest.front() != ':') throw CatalogError(CatalogError::Kind::InvalidPrior, "bad prior '" + std::string(text) + "'");
      rest.remove_prefix(1);
      auto colon = rest.find(':');
      z.exponent = to_double(rest.substr(0, colon), "zipf exponent");
      if (colon != std::string_view::npos) {
        auto s = rest.substr(colon + 1);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), z.seed);
        if (ec != std::errc() || ptr != s.data() + s.size())
          throw CatalogError(CatalogError::Kind::InvalidPrior, "bad zipf seed '" + std::string(s) + "'");
      }
    }
    return z;
  }
  if (text.starts_with("weights:")) {
    ExplicitPrior e;
    std::string_view rest = text.substr(8);
    while (!rest.empty()) {
      auto comma = rest.find(',');
      e.weights.push_back(to_double(rest.substr(0, comma), "weight"));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return e;
  }
  throw CatalogError(CatalogError::Kind::InvalidPrior, "unknown prior '" + std::string(text) + "'");
}

std::string to_string(const PriorSpec& spec) {
  struct Visitor {
    std::string operator()(const UniformPrior&) const { return "uniform"; }
    std::string operator()(const ZipfPrior& z) const {
      std::ostringstream os;
      os << "zipf:" << z.exponent << ":" << z.seed;
      return os.str();
    }
    std::string operator()(const ExplicitPrior& e) const {
      std::ostringstream os;
      os << "weights:";
      for (std::size_t i = 0; i < e.weights.size(); ++i) os << (i ? "," : "") << e.weights[i];
      return os.str();
    }
  };
  return std::visit(Visitor{}, spec);
}

Catalog set_prior(const Catalog& catalog, const PriorSpec& spec) {
  const std::size_t n = catalog.num_goals();
  if (std::holds_alternative<UniformPrior>(spec)) return with_prior(catalog, std::vector<double>(n, 1.0));
  if (const auto* e = std::get_if<ExplicitPrior>(&spec)) return with_prior(catalog, e->weights);

  const auto& z = std::get<ZipfPrior>(spec);
  if (!(z.exponent >= 0.0) || !std::isfinite(z.exponent))
    throw CatalogError(CatalogError::Kind::InvalidPrior, "zipf exponent must be finite and nonnegative");
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  Rng rng(derive_seed({z.seed, 0x9a1fULL}));
  for (std::size_t i = n; i > 1; --i) std::swap(rank[i - 1], rank[uniform_index(rng, i)]);
  std::vector<double> w(n);
  for (std::size_t g = 0; g < n; ++g) w[g] = std::pow(static_cast<double>(rank[g] + 1), -z.exponent);
  return with_prior(catalog, std::move(w));
}

// ---- statistics and views --------------------------------------------------

std::vector<AttributeStats> attribute_stats(const Catalog& catalog) {
  std::vector<AttributeStats> out;
  out.reserve(catalog.num_attributes());
  for (const auto& attr : catalog.schema()) {
    std::vector<char> seen(attr.cardinality(), 0);
    AttributeStats s;
    std::size_t missing = 0;
    for (ValueId v : catalog.column(attr.id())) {
      if (v == kMissing) {
        ++missing;
      } else if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++s.distinct;
      }
    }
    s.missing_fraction = static_cast<double>(missing) / static_cast<double>(catalog.num_goals());
    out.push_back(s);
  }
  return out;
}

Catalog permute_attributes(const Catalog& catalog, std::span<const AttrId> order) {
  const std::size_t k = catalog.num_attributes();
  if (order.size() != k) throw CatalogError(CatalogError::Kind::InvalidSpec, "permutation length does not match schema");
  std::vector<char> used(k, 0);
  for (AttrId a : order) {
    if (a < 0 || static_cast<std::size_t>(a) >= k || used[static_cast<std::size_t>(a)])
      throw CatalogError(CatalogError::Kind::InvalidSpec, "attribute order is not a permutation");
    used[static_cast<std::size_t>(a)] = 1;
  }
  AttributeSchema schema;
  for (AttrId src : order) {
    const Attribute& from = catalog.schema()[src];
    AttrId id = schema.add(from.name());
    for (const auto& v : from.values()) schema[id].intern(v);
  }
  std::vector<Goal> goals(catalog.num_goals());
  for (std::size_t g = 0; g < goals.size(); ++g) {
    auto gid = static_cast<GoalId>(g);
    goals[g].id = gid;
    goals[g].label = catalog.label(gid);
    goals[g].values.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      ValueId v = catalog.value(order[i], gid);
      if (v != kMissing) goals[g].values[i] = v;
    }
  }
  std::vector<double> prior(catalog.prior().begin(), catalog.prior().end());
  return Catalog(std::move(schema), goals, catalog.uniform_prior() ? std::vector<double>{} : prior);
}

}  // namespace emdm
