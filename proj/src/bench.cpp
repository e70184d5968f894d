#include "emdm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace emdm {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw ConfigError("experiment needs at least one strategy");
  if (plan.kind == EvaluationPlan::Kind::Sampled && plan.samples < 1)
    throw ConfigError("sampled plan needs at least one dialog");
  if (random_repeats < 1) throw ConfigError("random.repeats must be at least 1");
  SessionConfig{mode, theta, policy, StrategyKind::emdm(), max_turns}.validate();
  noise.defaults.validate();
  for (const auto& [name, spec] : noise.overrides) spec.validate();
  std::vector<std::string> names;
  for (const auto& s : strategies) names.push_back(to_string(s));
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) throw ConfigError("duplicate strategy in list");
}

// ---- config parsing --------------------------------------------------------

SyntheticSpec parse_synthetic_spec(const KeyValueConfig& cfg, std::string_view prefix) {
  const std::string p(prefix);
  SyntheticSpec spec;
  auto preset = cfg.get_or(p + "preset", "");
  if (preset == "song") {
    spec = song_catalog_spec(10000);
  } else if (!preset.empty()) {
    throw ConfigError("unknown synthetic preset '" + preset + "'");
  }
  spec.num_goals = static_cast<std::size_t>(cfg.get_uint(p + "goals", spec.num_goals));
  if (cfg.has(p + "cardinalities")) spec.cardinalities = parse_size_list(cfg.get_list(p + "cardinalities"), p + "cardinalities");
  if (cfg.has(p + "missing_rates")) spec.missing_rates = parse_double_list(cfg.get_list(p + "missing_rates"), p + "missing_rates");
  if (cfg.has(p + "names")) spec.names = cfg.get_list(p + "names");
  spec.skew = cfg.get_double(p + "skew", spec.skew);
  if (spec.cardinalities.empty()) throw ConfigError("synthetic spec needs '" + p + "cardinalities' or a preset");
  return spec;
}

namespace {

NoiseSpec parse_noise(const KeyValueConfig& cfg, const std::string& prefix, NoiseSpec base) {
  base.error_rate = cfg.get_double(prefix + "error_rate", base.error_rate);
  base.top_n = static_cast<int>(cfg.get_int(prefix + "top_n", base.top_n));
  base.inclusion_rate = cfg.get_double(prefix + "inclusion_rate", base.inclusion_rate);
  base.concentration = cfg.get_double(prefix + "concentration", base.concentration);
  base.mass_alpha = cfg.get_double(prefix + "mass_alpha", base.mass_alpha);
  base.mass_beta = cfg.get_double(prefix + "mass_beta", base.mass_beta);
  return base;
}

}  // namespace

ExperimentConfig parse_experiment_config(const KeyValueConfig& cfg) {
  ExperimentConfig out;
  try {
    if (auto path = cfg.get("catalog.path")) {
      out.catalog.path = *path;
    } else if (cfg.has("catalog.preset") || cfg.has("catalog.cardinalities")) {
      out.catalog.synthetic = parse_synthetic_spec(cfg, "catalog.");
    } else if (cfg.has("catalog.goals")) {
      out.catalog.synthetic.num_goals = static_cast<std::size_t>(cfg.get_uint("catalog.goals", 10000));
    }
    out.catalog.synthetic_seed = cfg.get_uint("catalog.seed", out.catalog.synthetic_seed);
    out.catalog.order = cfg.get_or("catalog.order", "");
    out.prior = parse_prior(cfg.get_or("prior", "uniform"));
    if (cfg.has("strategies")) {
      out.strategies.clear();
      for (const auto& s : cfg.get_list("strategies")) out.strategies.push_back(parse_strategy(s));
    }
    out.mode = parse_mode(cfg.get_or("mode", "ideal"));
    auto plan = cfg.get_or("plan", "exhaustive");
    if (plan == "exhaustive") {
      out.plan = {EvaluationPlan::Kind::Exhaustive, 0};
    } else if (plan.starts_with("sampled:")) {
      KeyValueConfig tmp;
      tmp.set("plan", plan.substr(8));
      out.plan = {EvaluationPlan::Kind::Sampled, static_cast<std::size_t>(tmp.get_uint("plan", 0))};
    } else {
      throw ConfigError("plan must be 'exhaustive' or 'sampled:<N>'");
    }
    out.seed = cfg.get_uint("seed", out.seed);
    out.random_repeats = static_cast<int>(cfg.get_int("random.repeats", out.random_repeats));
    out.theta = cfg.get_double("theta", out.theta);
    out.policy = parse_policy(cfg.get_or("policy", "wildcard"));
    out.max_turns = static_cast<int>(cfg.get_int("max_turns", out.max_turns));
    out.threads = static_cast<unsigned>(cfg.get_uint("threads", 0));
    out.noise.defaults = parse_noise(cfg, "noise.", out.noise.defaults);
    std::vector<std::string> override_attrs;
    for (const auto& key : cfg.keys_with_prefix("noise.override.")) {
      auto rest = key.substr(std::string_view("noise.override.").size());
      auto dot = rest.rfind('.');
      if (dot == std::string::npos) throw ConfigError("bad noise override key '" + key + "'");
      override_attrs.push_back(rest.substr(0, dot));
    }
    for (const auto& attr : override_attrs)
      if (!out.noise.overrides.count(attr))
        out.noise.overrides[attr] = parse_noise(cfg, "noise.override." + attr + ".", out.noise.defaults);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (auto unused = cfg.unused_keys(); !unused.empty()) throw ConfigError("unknown config key '" + unused.front() + "'");
  try {
    out.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return out;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(KeyValueConfig::load(path));
}

std::string describe(const CatalogSource& source) {
  std::ostringstream os;
  if (source.path) {
    os << "file:" << source.path->string();
  } else {
    const auto& s = source.synthetic;
    os << "synthetic:goals=" << s.num_goals << ",attributes=" << s.cardinalities.size() << ",skew=" << s.skew
       << ",seed=" << source.synthetic_seed;
  }
  if (!source.order.empty()) os << ",order=" << source.order;
  return os.str();
}

Catalog build_catalog(const ExperimentConfig& cfg) {
  Catalog catalog = cfg.catalog.path ? load_catalog(*cfg.catalog.path)
                                     : generate_synthetic(cfg.catalog.synthetic, cfg.catalog.synthetic_seed);
  if (!cfg.catalog.path || !std::holds_alternative<UniformPrior>(cfg.prior) || catalog.uniform_prior())
    catalog = set_prior(catalog, cfg.prior);
  const auto& order = cfg.catalog.order;
  if (order.empty()) return catalog;

  std::vector<AttrId> perm(catalog.num_attributes());
  std::iota(perm.begin(), perm.end(), 0);
  if (order == "ascending-distinct" || order == "descending-distinct") {
    auto stats = attribute_stats(catalog);
    const bool asc = order == "ascending-distinct";
    std::stable_sort(perm.begin(), perm.end(), [&](AttrId x, AttrId y) {
      auto dx = stats[static_cast<std::size_t>(x)].distinct;
      auto dy = stats[static_cast<std::size_t>(y)].distinct;
      return asc ? dx < dy : dx > dy;
    });
  } else {
    KeyValueConfig tmp;
    tmp.set("order", order);
    auto names = tmp.get_list("order");
    if (names.size() != perm.size()) throw ConfigError("catalog.order must name every attribute exactly once");
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto id = catalog.schema().find(names[i]);
      if (!id) throw ConfigError("catalog.order names unknown attribute '" + names[i] + "'");
      perm[i] = *id;
    }
  }
  return permute_attributes(catalog, perm);
}

// ---- running ---------------------------------------------------------------

namespace {

struct DialogOutcome {
  int turns = 0;
  bool success = false;
  bool aborted = false;
  TerminalStatus status = TerminalStatus::EmptyGoalSet;
  double entropy_rise = 0.0;
  bool support_grew = false;
  std::vector<AttrId> asked;
};

std::vector<GoalId> make_plan(const ExperimentConfig& cfg, const Catalog& catalog) {
  std::vector<GoalId> goals;
  auto prior = catalog.prior();
  if (cfg.plan.kind == EvaluationPlan::Kind::Exhaustive) {
    for (std::size_t g = 0; g < prior.size(); ++g)
      if (prior[g] > 0.0) goals.push_back(static_cast<GoalId>(g));
    return goals;
  }
  std::vector<double> cdf(prior.size());
  std::partial_sum(prior.begin(), prior.end(), cdf.begin());
  Rng rng(derive_seed({cfg.seed, 0x91a4ULL}));
  goals.reserve(cfg.plan.samples);
  for (std::size_t i = 0; i < cfg.plan.samples; ++i) {
    double u = uniform01(rng) * cdf.back();
    auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    idx = std::min(idx, cdf.size() - 1);
    while (prior[idx] == 0.0 && idx > 0) --idx;
    goals.push_back(static_cast<GoalId>(idx));
  }
  return goals;
}

DialogOutcome run_one(const ExperimentConfig& cfg, const Catalog& catalog, const DistractorTable& table,
                      const StrategyKind& kind, GoalId goal, std::size_t plan_index, int rep) {
  SessionConfig scfg{cfg.mode, cfg.theta, cfg.policy, kind, cfg.max_turns};
  const std::uint64_t dialog_seed = derive_seed({cfg.seed, plan_index, static_cast<std::uint64_t>(rep)});
  SimulatedUser user(catalog, goal, dialog_seed, cfg.mode == Mode::Noisy ? &cfg.noise : nullptr, &table);
  Transcript t = run_session(scfg, catalog, user, derive_seed({dialog_seed, 0x5e1ec7ULL}), false);

  DialogOutcome out;
  out.turns = static_cast<int>(t.turns.size());
  out.aborted = t.aborted();
  if (t.status) {
    out.status = *t.status;
    out.success = success(t, goal);
  }
  auto seq = t.entropy_sequence();
  for (std::size_t i = 1; i < seq.size(); ++i) out.entropy_rise = std::max(out.entropy_rise, seq[i] - seq[i - 1]);
  std::size_t prev = t.initial_support;
  for (const auto& turn : t.turns) {
    out.asked.push_back(turn.attribute);
    if (turn.support > prev) out.support_grew = true;
    if (turn.support > 0) prev = turn.support;
  }
  return out;
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
}

}  // namespace

BenchReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Catalog catalog = build_catalog(cfg);
  BenchReport report = run_experiment(cfg, catalog);
  report.catalog = describe(cfg.catalog);
  return report;
}

BenchReport run_experiment(const ExperimentConfig& cfg, const Catalog& catalog) {
  cfg.validate();
  BenchReport report;
  report.catalog = describe(cfg.catalog);
  report.mode = to_string(cfg.mode);
  report.prior = to_string(cfg.prior);
  report.seed = cfg.seed;
  for (const auto& a : catalog.schema()) report.attributes.push_back(a.name());
  report.plan_goals = make_plan(cfg, catalog);
  report.plan = cfg.plan.kind == EvaluationPlan::Kind::Exhaustive
                    ? "exhaustive"
                    : "sampled:" + std::to_string(cfg.plan.samples);
  if (report.plan_goals.empty()) throw std::invalid_argument("evaluation plan is empty");

  const DistractorTable table(catalog);
  const std::size_t k = catalog.num_attributes();
  const std::size_t n = report.plan_goals.size();
  for (const auto& kind : cfg.strategies) {
    const int reps = kind.type == StrategyKind::Type::Random ? cfg.random_repeats : 1;
    std::vector<DialogOutcome> outcomes(n * static_cast<std::size_t>(reps));
    parallel_for(outcomes.size(), cfg.threads, [&](std::size_t idx) {
      const std::size_t i = idx / static_cast<std::size_t>(reps);
      const int rep = static_cast<int>(idx % static_cast<std::size_t>(reps));
      outcomes[idx] = run_one(cfg, catalog, table, kind, report.plan_goals[i], i, rep);
    });

    StrategyReport sr;
    sr.name = to_string(kind);
    sr.dialogs = outcomes.size();
    sr.turn_histogram.assign(static_cast<std::size_t>(SessionConfig{cfg.mode, cfg.theta, cfg.policy, kind, cfg.max_turns}
                                                          .turn_limit(catalog)) + 1,
                             0);
    sr.question_counts.assign(k, 0);
    sr.plan_turns.assign(n, 0.0);
    sr.plan_success.assign(n, 0.0);
    double turns_total = 0.0;
    std::size_t successes = 0;
    for (std::size_t idx = 0; idx < outcomes.size(); ++idx) {
      const auto& o = outcomes[idx];
      const std::size_t i = idx / static_cast<std::size_t>(reps);
      turns_total += o.turns;
      if (static_cast<std::size_t>(o.turns) >= sr.turn_histogram.size()) sr.turn_histogram.resize(o.turns + 1, 0);
      ++sr.turn_histogram[static_cast<std::size_t>(o.turns)];
      for (AttrId a : o.asked) ++sr.question_counts[static_cast<std::size_t>(a)];
      if (o.aborted) {
        ++sr.aborted;
        ++sr.status_counts["Aborted"];
      } else {
        ++sr.status_counts[to_string(o.status)];
      }
      if (o.success) ++successes;
      if (o.entropy_rise > kNormTolerance) ++sr.entropy_increases;
      sr.max_entropy_increase = std::max(sr.max_entropy_increase, o.entropy_rise);
      if (o.support_grew) ++sr.support_increases;
      sr.plan_turns[i] += o.turns;
      sr.plan_success[i] += o.success ? 1.0 : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      sr.plan_turns[i] /= reps;
      sr.plan_success[i] /= reps;
    }
    sr.mean_turns = turns_total / static_cast<double>(sr.dialogs);
    sr.success_rate = static_cast<double>(successes) / static_cast<double>(sr.dialogs);
    report.strategies.push_back(std::move(sr));
  }
  return report;
}

const StrategyReport& BenchReport::strategy(std::string_view name) const {
  for (const auto& s : strategies)
    if (s.name == name) return s;
  // Accept a bare "random" for the single random entry.
  if (name == "random")
    for (const auto& s : strategies)
      if (s.name.starts_with("random:")) return s;
  throw std::out_of_range("report has no strategy '" + std::string(name) + "'");
}

PairwiseComparison compare_pairwise(const BenchReport& ra, std::string_view a, const BenchReport& rb,
                                    std::string_view b) {
  if (ra.plan_goals != rb.plan_goals) throw std::invalid_argument("reports were run on different goal lists");
  const auto& sa = ra.strategy(a);
  const auto& sb = rb.strategy(b);
  if (sa.plan_turns.size() != sb.plan_turns.size() || sa.plan_turns.size() != ra.plan_goals.size())
    throw std::invalid_argument("strategies were run on different goal lists");
  PairwiseComparison c;
  c.count = sa.plan_turns.size();
  std::size_t less = 0, equal = 0, greater = 0;
  for (std::size_t i = 0; i < c.count; ++i) {
    if (sa.plan_turns[i] < sb.plan_turns[i]) {
      ++less;
    } else if (sa.plan_turns[i] > sb.plan_turns[i]) {
      ++greater;
    } else {
      ++equal;
    }
  }
  if (c.count > 0) {
    c.less = static_cast<double>(less) / static_cast<double>(c.count);
    c.equal = static_cast<double>(equal) / static_cast<double>(c.count);
    c.greater = static_cast<double>(greater) / static_cast<double>(c.count);
  }
  return c;
}

PairwiseComparison compare_pairwise(const BenchReport& report, std::string_view a, std::string_view b) {
  return compare_pairwise(report, a, report, b);
}

// ---- serialization ---------------------------------------------------------

std::string report_to_json(const BenchReport& report) {
  json j;
  j["format"] = "emdm-bench-report";
  j["version"] = 1;
  j["catalog"] = report.catalog;
  j["mode"] = report.mode;
  j["prior"] = report.prior;
  j["plan"] = report.plan;
  j["seed"] = report.seed;
  j["attributes"] = report.attributes;
  j["plan_goals"] = report.plan_goals;
  json strategies = json::array();
  for (const auto& s : report.strategies) {
    strategies.push_back({{"name", s.name},
                          {"dialogs", s.dialogs},
                          {"mean_turns", s.mean_turns},
                          {"success_rate", s.success_rate},
                          {"turn_histogram", s.turn_histogram},
                          {"question_counts", s.question_counts},
                          {"status_counts", s.status_counts},
                          {"plan_turns", s.plan_turns},
                          {"plan_success", s.plan_success},
                          {"entropy_increases", s.entropy_increases},
                          {"max_entropy_increase", s.max_entropy_increase},
                          {"support_increases", s.support_increases},
                          {"aborted", s.aborted}});
  }
  j["strategies"] = std::move(strategies);
  json pairwise = json::array();
  for (std::size_t x = 0; x < report.strategies.size(); ++x)
    for (std::size_t y = x + 1; y < report.strategies.size(); ++y) {
      auto c = compare_pairwise(report, report.strategies[x].name, report.strategies[y].name);
      pairwise.push_back({{"a", report.strategies[x].name},
                          {"b", report.strategies[y].name},
                          {"less", c.less},
                          {"equal", c.equal},
                          {"greater", c.greater}});
    }
  j["pairwise"] = std::move(pairwise);
  return j.dump(1) + "\n";
}

BenchReport report_from_json(std::string_view text) {
  json j = json::parse(text);
  if (j.value("format", "") != "emdm-bench-report") throw std::invalid_argument("not a bench report");
  if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported bench report version");
  BenchReport r;
  r.catalog = j.at("catalog").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.prior = j.at("prior").get<std::string>();
  r.plan = j.at("plan").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.attributes = j.at("attributes").get<std::vector<std::string>>();
  r.plan_goals = j.at("plan_goals").get<std::vector<GoalId>>();
  for (const auto& s : j.at("strategies")) {
    StrategyReport sr;
    sr.name = s.at("name").get<std::string>();
    sr.dialogs = s.at("dialogs").get<std::size_t>();
    sr.mean_turns = s.at("mean_turns").get<double>();
    sr.success_rate = s.at("success_rate").get<double>();
    sr.turn_histogram = s.at("turn_histogram").get<std::vector<std::size_t>>();
    sr.question_counts = s.at("question_counts").get<std::vector<std::size_t>>();
    sr.status_counts = s.at("status_counts").get<std::map<std::string, std::size_t>>();
    sr.plan_turns = s.at("plan_turns").get<std::vector<double>>();
    sr.plan_success = s.at("plan_success").get<std::vector<double>>();
    sr.entropy_increases = s.at("entropy_increases").get<std::size_t>();
    sr.max_entropy_increase = s.at("max_entropy_increase").get<double>();
    sr.support_increases = s.at("support_increases").get<std::size_t>();
    sr.aborted = s.at("aborted").get<std::size_t>();
    r.strategies.push_back(std::move(sr));
  }
  return r;
}

void save_report(const BenchReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report '" + path.string() + "'");
  out << report_to_json(report);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

BenchReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "table") return ReportFormat::Table;
  if (text == "delimited") return ReportFormat::Delimited;
  if (text == "plot-data") return ReportFormat::PlotData;
  throw std::invalid_argument("unknown report format '" + std::string(text) + "' (table | delimited | plot-data)");
}

std::string format_table(const BenchReport& report) {
  std::ostringstream os;
  os << "catalog: " << report.catalog << "\n"
     << "mode: " << report.mode << "   prior: " << report.prior << "   plan: " << report.plan << " ("
     << report.plan_goals.size() << " goals)   seed: " << report.seed << "\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %12s %14s\n", "strategy", "dialogs", "mean_turns", "success_rate");
  os << line;
  for (const auto& s : report.strategies) {
    std::snprintf(line, sizeof line, "%-16s %10zu %12.3f %13.2f%%\n", s.name.c_str(), s.dialogs, s.mean_turns,
                  100.0 * s.success_rate);
    os << line;
  }
  if (report.strategies.size() > 1) {
    os << "\npairwise (per goal turns)\n";
    std::snprintf(line, sizeof line, "%-16s %-16s %9s %9s %9s\n", "a", "b", "a<b", "a=b", "a>b");
    os << line;
    for (std::size_t x = 0; x < report.strategies.size(); ++x)
      for (std::size_t y = x + 1; y < report.strategies.size(); ++y) {
        auto c = compare_pairwise(report, report.strategies[x].name, report.strategies[y].name);
        std::snprintf(line, sizeof line, "%-16s %-16s %8.2f%% %8.2f%% %8.2f%%\n", report.strategies[x].name.c_str(),
                      report.strategies[y].name.c_str(), 100 * c.less, 100 * c.equal, 100 * c.greater);
        os << line;
      }
  }
  return os.str();
}

namespace {

std::string file_stem(const std::string& strategy) {
  std::string out = strategy;
  std::replace(out.begin(), out.end(), ':', '_');
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const BenchReport& report, ReportFormat format,
                                               const std::filesystem::path& out_dir) {
  if (report.strategies.empty() || report.plan_goals.empty()) throw std::invalid_argument("cannot emit an empty report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  switch (format) {
    case ReportFormat::Table: {
      auto path = out_dir / "report.txt";
      open_out(path) << format_table(report);
      written.push_back(path);
      break;
    }
    case ReportFormat::Delimited: {
      auto summary = out_dir / "summary.csv";
      {
        auto out = open_out(summary);
        out << "strategy,dialogs,mean_turns,success_rate,entropy_increases,support_increases\n";
        for (const auto& s : report.strategies)
          out << s.name << ',' << s.dialogs << ',' << s.mean_turns << ',' << s.success_rate << ','
              << s.entropy_increases << ',' << s.support_increases << '\n';
      }
      auto hist = out_dir / "histograms.csv";
      {
        auto out = open_out(hist);
        out << "strategy,turns,dialogs\n";
        for (const auto& s : report.strategies)
          for (std::size_t t = 0; t < s.turn_histogram.size(); ++t)
            out << s.name << ',' << t << ',' << s.turn_histogram[t] << '\n';
      }
      auto questions = out_dir / "questions.csv";
      {
        auto out = open_out(questions);
        out << "strategy,attribute,questions\n";
        for (const auto& s : report.strategies)
          for (std::size_t a = 0; a < s.question_counts.size(); ++a)
            out << s.name << ',' << report.attributes[a] << ',' << s.question_counts[a] << '\n';
      }
      auto pairwise = out_dir / "pairwise.csv";
      {
        auto out = open_out(pairwise);
        out << "a,b,less,equal,greater\n";
        for (std::size_t x = 0; x < report.strategies.size(); ++x)
          for (std::size_t y = 0; y < report.strategies.size(); ++y) {
            if (x == y) continue;
            auto c = compare_pairwise(report, report.strategies[x].name, report.strategies[y].name);
            out << report.strategies[x].name << ',' << report.strategies[y].name << ',' << c.less << ',' << c.equal
                << ',' << c.greater << '\n';
          }
      }
      written.insert(written.end(), {summary, hist, questions, pairwise});
      break;
    }
    case ReportFormat::PlotData: {
      for (const auto& s : report.strategies) {
        auto hist = out_dir / ("hist_" + file_stem(s.name) + ".dat");
        {
          auto out = open_out(hist);
          out << "# turns dialogs\n";
          for (std::size_t t = 0; t < s.turn_histogram.size(); ++t) out << t << ' ' << s.turn_histogram[t] << '\n';
        }
        auto q = out_dir / ("questions_" + file_stem(s.name) + ".dat");
        {
          auto out = open_out(q);
          out << "# attribute_id attribute questions\n";
          for (std::size_t a = 0; a < s.question_counts.size(); ++a)
            out << a << ' ' << report.attributes[a] << ' ' << s.question_counts[a] << '\n';
        }
        written.push_back(hist);
        written.push_back(q);
      }
      break;
    }
  }
  return written;
}

}  // namespace emdm
