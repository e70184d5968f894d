#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "emdm/bench.hpp"
#include "emdm/catalog.hpp"
#include "emdm/dialog.hpp"
#include "emdm/kvconfig.hpp"
#include "emdm/service.hpp"

using namespace emdm;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

void print_belief(const Catalog& catalog, const DSState& state, std::ostream& out) {
  std::vector<std::size_t> order(state.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return state.probs()[a] > state.probs()[b]; });
  out << "  " << state.size() << " candidate(s), H = " << std::setprecision(4) << state_entropy(state) << " bits\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, order.size()); ++i)
    out << "    " << std::setw(8) << std::fixed << std::setprecision(4) << state.probs()[order[i]] << std::defaultfloat
        << "  " << catalog.label(state.goals()[order[i]]) << "\n";
}

// "value", "?" or "v1:0.6,v2:0.3"
void apply_line(DialogSession& session, const std::string& line) {
  const Catalog& catalog = session.catalog();
  const AttrId attr = *session.question();
  const Attribute& a = catalog.schema()[attr];
  if (line == "?") {
    if (session.config().mode == Mode::Noisy)
      session.observe(Observation::unknown_answer(attr));
    else
      session.answer(std::nullopt);
    return;
  }
  if (line.find(':') == std::string::npos) {
    auto v = a.find(line);
    if (!v) throw std::invalid_argument("'" + line + "' is not a known " + a.name());
    session.answer(*v);
    return;
  }
  Observation obs;
  obs.attribute = attr;
  std::istringstream items(line);
  for (std::string item; std::getline(items, item, ',');) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("expected value:confidence, got '" + item + "'");
    auto v = a.find(trim(item.substr(0, colon)));
    if (!v) throw std::invalid_argument("'" + trim(item.substr(0, colon)) + "' is not a known " + a.name());
    obs.candidates.push_back({*v, std::stod(item.substr(colon + 1))});
  }
  session.observe(obs);
}

int play(const Catalog& catalog, const SessionConfig& cfg, std::uint64_t seed) {
  DialogSession session(catalog, cfg, seed);
  std::cout << "Answer with a value, '?' if you don't know, or value:confidence,... for a ranked list.\n";
  print_belief(catalog, session.state(), std::cout);
  while (!session.finished()) {
    const AttrId attr = *session.question();
    std::cout << question_text(catalog, attr) << "\n> " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) {
      session.abort("input closed");
      break;
    }
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_line(session, line);
    } catch (const std::exception& e) {
      std::cout << "  " << e.what() << "\n";
      continue;
    }
    print_belief(catalog, session.state(), std::cout);
  }
  const Transcript& t = session.transcript();
  if (t.aborted()) {
    std::cout << "aborted: " << t.error << "\n";
    return 1;
  }
  std::cout << to_string(*t.status) << " after " << t.turns.size() << " turn(s):";
  for (GoalId g : t.returned) std::cout << " " << catalog.label(g);
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-guided dialog search over attribute catalogs"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "Batch simulations")->require_subcommand(1);
  std::string config_path, out_dir, format = "table";
  auto* bench_run = bench->add_subcommand("run", "Run an experiment config");
  bench_run->add_option("--config", config_path, "key = value experiment file")->required();
  bench_run->add_option("--out", out_dir, "directory for report.json and formatted output");
  bench_run->add_option("--format", format, "table | delimited | plot-data");

  std::string report_path, pair;
  auto* bench_compare = bench->add_subcommand("compare", "Pairwise turn comparison from a saved report");
  bench_compare->add_option("--report", report_path)->required();
  bench_compare->add_option("--pair", pair, "a,b")->required();

  auto* catalog_cmd = app.add_subcommand("catalog", "Catalog tools")->require_subcommand(1);
  std::string spec_path, catalog_out;
  std::uint64_t gen_seed = 0;
  auto* catalog_gen = catalog_cmd->add_subcommand("gen", "Generate a synthetic catalog");
  catalog_gen->add_option("--spec", spec_path, "key = value synthetic spec")->required();
  catalog_gen->add_option("--seed", gen_seed)->required();
  catalog_gen->add_option("--out", catalog_out, "output file (default stdout)");

  std::string catalog_path;
  auto* catalog_stats = catalog_cmd->add_subcommand("stats", "Per-attribute value counts and missing rates");
  catalog_stats->add_option("--catalog", catalog_path)->required();

  auto* dialog = app.add_subcommand("dialog", "Interactive sessions")->require_subcommand(1);
  std::string strategy = "emdm", mode = "ideal", policy = "wildcard";
  double theta = 0.8;
  std::uint64_t play_seed = 0;
  auto* dialog_play = dialog->add_subcommand("play", "Answer questions at the terminal");
  dialog_play->add_option("--catalog", catalog_path)->required();
  dialog_play->add_option("--strategy", strategy, "sequential | random:<seed> | dsdm | emdm");
  dialog_play->add_option("--mode", mode, "ideal | noisy");
  dialog_play->add_option("--theta", theta);
  dialog_play->add_option("--policy", policy, "wildcard | strict");
  dialog_play->add_option("--seed", play_seed);

  std::string host = env_or("EMDM_HOST", "127.0.0.1");
  std::string catalog_dir = env_or("EMDM_CATALOG_DIR", "catalogs");
  int port = std::atoi(env_or("EMDM_PORT", "8080").c_str());
  int idle_minutes = 30;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP session service");
  serve_cmd->add_option("--host", host, "bind address (EMDM_HOST)");
  serve_cmd->add_option("--port", port, "port (EMDM_PORT)");
  serve_cmd->add_option("--catalog-dir", catalog_dir, "directory of .csv/.tsv catalogs (EMDM_CATALOG_DIR)");
  serve_cmd->add_option("--idle-minutes", idle_minutes, "session idle expiry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench_run) {
      const auto cfg = load_experiment_config(config_path);
      const auto report = run_experiment(cfg);
      std::cout << format_table(report);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        save_report(report, std::filesystem::path(out_dir) / "report.json");
        for (const auto& f : emit_report(report, parse_report_format(format), out_dir))
          std::cerr << "wrote " << f.string() << "\n";
      }
    } else if (*bench_compare) {
      const auto report = load_report(report_path);
      const auto comma = pair.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("--pair expects a,b");
      const std::string a = trim(pair.substr(0, comma)), b = trim(pair.substr(comma + 1));
      const auto c = compare_pairwise(report, a, b);
      std::cout << std::fixed << std::setprecision(4) << a << " < " << b << ": " << c.less << "\n"
                << a << " = " << b << ": " << c.equal << "\n"
                << a << " > " << b << ": " << c.greater << "\n"
                << "goals: " << c.count << "\n";
    } else if (*catalog_gen) {
      auto kv = KeyValueConfig::load(spec_path);
      const auto spec = parse_synthetic_spec(kv, "");
      if (auto extra = kv.unused_keys(); !extra.empty()) throw ConfigError("unknown key '" + extra.front() + "'");
      const auto catalog = generate_synthetic(spec, gen_seed);
      if (catalog_out.empty())
        write_catalog(catalog, std::cout);
      else
        save_catalog(catalog, catalog_out);
    } else if (*catalog_stats) {
      const auto catalog = load_catalog(catalog_path);
      const auto stats = attribute_stats(catalog);
      std::cout << catalog.num_goals() << " goals\n";
      std::cout << std::left << std::setw(16) << "attribute" << std::right << std::setw(10) << "values" << std::setw(10)
                << "missing" << "\n";
      for (std::size_t a = 0; a < stats.size(); ++a)
        std::cout << std::left << std::setw(16) << catalog.schema()[static_cast<AttrId>(a)].name() << std::right
                  << std::setw(10) << stats[a].distinct << std::setw(9) << std::fixed << std::setprecision(1)
                  << 100.0 * stats[a].missing_fraction << "%\n";
    } else if (*dialog_play) {
      SessionConfig cfg;
      cfg.strategy = parse_strategy(strategy);
      cfg.mode = parse_mode(mode);
      cfg.theta = theta;
      cfg.policy = parse_policy(policy);
      cfg.validate();
      return play(load_catalog(catalog_path), cfg, play_seed);
    } else if (*serve_cmd) {
      ServiceOptions options;
      options.idle_timeout = std::chrono::minutes(idle_minutes);
      SessionService service(options);
      const auto n = service.load_catalog_dir(catalog_dir);
      std::cerr << "loaded " << n << " catalog(s) from " << catalog_dir << "; listening on " << host << ":" << port
                << "\n";
      serve(service, host, port);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
