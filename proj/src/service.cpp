#include "emdm/service.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "emdm/rng.hpp"
#include "emdm/strategy.hpp"

namespace emdm {

using nlohmann::json;

namespace {

ServiceResponse reply(int status, json body) {
  body["api_version"] = kApiVersion;
  return {status, body.dump()};
}

ServiceResponse error(int status, std::string code, std::string message) {
  return reply(status, json{{"error", {{"code", std::move(code)}, {"message", std::move(message)}}}});
}

json question_json(const Catalog& catalog, AttrId attr) {
  const auto& a = catalog.schema()[attr];
  json values = json::array();
  for (const auto& v : a.values()) values.push_back(v);
  return {{"attribute", attr}, {"name", a.name()}, {"text", question_text(catalog, attr)}, {"values", std::move(values)}};
}

json snapshot_json(const Catalog& catalog, const DSState& state, std::size_t top_k) {
  std::vector<std::size_t> order(state.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t k = std::min(top_k, order.size());
  auto probs = state.probs();
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t x, std::size_t y) { return probs[x] > probs[y] || (probs[x] == probs[y] && x < y); });
  json top = json::array();
  for (std::size_t i = 0; i < k; ++i) {
    GoalId g = state.goals()[order[i]];
    top.push_back({{"goal", g}, {"label", catalog.label(g)}, {"probability", probs[order[i]]}});
  }
  json attrs = json::array();
  for (const auto& e : informative_attributes(state, catalog))
    attrs.push_back({{"attribute", e.attribute},
                     {"name", catalog.schema()[e.attribute].name()},
                     {"entropy", e.entropy},
                     {"asked", e.asked}});
  return {{"turn", state.turn()},
          {"entropy", state_entropy(state)},
          {"support", state.size()},
          {"top_goals", std::move(top)},
          {"attributes", std::move(attrs)}};
}

json result_json(const Catalog& catalog, const DialogSession& dialog) {
  const auto& t = dialog.transcript();
  json goals = json::array();
  for (GoalId g : t.returned)
    goals.push_back({{"goal", g}, {"label", catalog.label(g)}, {"probability", dialog.state().prob(g)}});
  json r{{"goals", std::move(goals)}, {"turns", t.turns.size()}};
  if (t.status) r["status"] = to_string(*t.status);
  if (t.aborted()) r["error"] = t.error;
  return r;
}

json progress_json(const Catalog& catalog, const DialogSession& dialog, std::size_t top_k) {
  json j{{"finished", dialog.finished()}, {"snapshot", snapshot_json(catalog, dialog.state(), top_k)}};
  if (auto q = dialog.question()) {
    j["question"] = question_json(catalog, *q);
  } else {
    j["question"] = nullptr;
    j["result"] = result_json(catalog, dialog);
  }
  return j;
}

}  // namespace

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)) {
  std::random_device rd;
  id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void SessionService::add_catalog(std::string name, std::shared_ptr<const Catalog> catalog) {
  std::unique_lock lock(mutex_);
  catalogs_[std::move(name)] = std::move(catalog);
}

std::size_t SessionService::load_catalog_dir(const std::filesystem::path& dir) {
  std::size_t n = 0;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".tsv")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    add_catalog(f.stem().string(), std::make_shared<const Catalog>(load_catalog(f)));
    ++n;
  }
  return n;
}

ServiceResponse SessionService::health() const {
  std::shared_lock lock(mutex_);
  return reply(200, {{"status", "ok"}, {"catalogs", catalogs_.size()}, {"sessions", sessions_.size()}});
}

ServiceResponse SessionService::list_catalogs() const {
  std::shared_lock lock(mutex_);
  json list = json::array();
  for (const auto& [name, c] : catalogs_) {
    json attrs = json::array();
    for (const auto& a : c->schema()) attrs.push_back(a.name());
    list.push_back({{"name", name}, {"goals", c->num_goals()}, {"attributes", std::move(attrs)}});
  }
  return reply(200, {{"catalogs", std::move(list)}});
}

std::string SessionService::new_session_id() {
  char buf[40];
  const std::uint64_t n = ++id_counter_;
  std::snprintf(buf, sizeof buf, "%016llx%08llx", static_cast<unsigned long long>(mix64(id_salt_ ^ n)),
                static_cast<unsigned long long>(n & 0xffffffffULL));
  return buf;
}

ServiceResponse SessionService::create_session(std::string_view body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception& e) {
    return error(400, "bad_request", std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object()) return error(400, "bad_request", "request body must be an object");

  std::shared_ptr<const Catalog> catalog;
  const std::string name = req.value("catalog", "");
  {
    std::shared_lock lock(mutex_);
    auto it = catalogs_.find(name);
    if (it == catalogs_.end()) return error(404, "unknown_catalog", "no catalog named '" + name + "'");
    catalog = it->second;
  }

  SessionConfig cfg;
  std::uint64_t seed = 0;
  std::size_t top_k = options_.top_k;
  try {
    cfg.strategy = parse_strategy(req.value("strategy", "emdm"));
    cfg.mode = parse_mode(req.value("mode", "ideal"));
    cfg.theta = req.value("theta", 0.8);
    cfg.policy = parse_policy(req.value("policy", "wildcard"));
    cfg.max_turns = req.value("max_turns", 0);
    seed = req.value("seed", std::uint64_t{0});
    top_k = req.value("top_k", top_k);
    cfg.validate();
  } catch (const std::exception& e) {
    return error(400, "bad_request", e.what());
  }

  auto session = std::make_shared<Session>();
  session->catalog_name = name;
  session->catalog = catalog;
  session->dialog = std::make_unique<DialogSession>(*catalog, cfg, seed);
  session->top_k = top_k;
  session->last_access = options_.clock();

  json out = progress_json(*catalog, *session->dialog, top_k);
  {
    std::unique_lock lock(mutex_);
    session->id = new_session_id();
    sessions_[session->id] = session;
  }
  out["session_id"] = session->id;
  out["catalog"] = name;
  out["strategy"] = to_string(cfg.strategy);
  out["mode"] = to_string(cfg.mode);
  return reply(201, std::move(out));
}

std::shared_ptr<SessionService::Session> SessionService::find_live(const std::string& id) {
  const auto now = options_.clock();
  std::unique_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  if (now - it->second->last_access > options_.idle_timeout) {
    sessions_.erase(it);
    return nullptr;
  }
  it->second->last_access = now;
  return it->second;
}

ServiceResponse SessionService::post_answer(const std::string& id, std::string_view body) {
  auto session = find_live(id);
  if (!session) return error(404, "unknown_session", "no live session '" + id + "'");
  std::unique_lock busy(session->busy, std::try_to_lock);
  if (!busy.owns_lock()) return error(409, "conflict", "another answer for this session is in progress");

  DialogSession& dialog = *session->dialog;
  const Catalog& catalog = *session->catalog;
  if (dialog.finished()) return error(409, "finished", "session has already finished");

  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception& e) {
    return error(400, "bad_request", std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object()) return error(400, "bad_request", "request body must be an object");

  const AttrId attr = *dialog.question();
  const Attribute& attribute = catalog.schema()[attr];
  const bool noisy = dialog.config().mode == Mode::Noisy;
  try {
    if (req.value("unknown", false)) {
      if (noisy) {
        dialog.observe(Observation::unknown_answer(attr));
      } else {
        dialog.answer(std::nullopt);
      }
    } else if (req.contains("candidates")) {
      const auto& list = req.at("candidates");
      if (!list.is_array()) return error(400, "bad_request", "'candidates' must be an array");
      Observation obs;
      obs.attribute = attr;
      double total = 0.0;
      for (const auto& c : list) {
        const double conf = c.at("confidence").get<double>();
        if (!(conf > 0.0 && conf <= 1.0)) return error(400, "bad_confidence", "confidence must lie in (0, 1]");
        total += conf;
        // Unresolvable text matches no goal and is left out of the list.
        if (auto v = attribute.find(c.at("value").get<std::string>())) obs.candidates.push_back({*v, conf});
      }
      if (total > 1.0 + kNormTolerance) return error(400, "bad_confidence", "candidate confidences sum above 1");
      dialog.observe(obs);
    } else if (req.contains("value")) {
      const auto text = req.at("value").get<std::string>();
      const bool has_conf = req.contains("confidence");
      const double conf = req.value("confidence", 1.0);
      if (!(conf > 0.0 && conf <= 1.0)) return error(400, "bad_confidence", "confidence must lie in (0, 1]");
      auto v = attribute.find(text);
      if (!v) {
        dialog.observe(Observation{attr, {}, false});
      } else if (!noisy && (!has_conf || conf == 1.0)) {
        dialog.answer(*v);
      } else {
        dialog.observe(Observation{attr, {{*v, conf}}, false});
      }
    } else {
      return error(400, "bad_request", "answer needs 'value', 'candidates' or 'unknown'");
    }
  } catch (const InvalidObservationError& e) {
    return error(400, "bad_observation", e.what());
  } catch (const json::exception& e) {
    return error(400, "bad_request", e.what());
  }

  json out = progress_json(catalog, dialog, session->top_k);
  out["session_id"] = id;
  return reply(200, std::move(out));
}

ServiceResponse SessionService::get_question(const std::string& id) {
  auto session = find_live(id);
  if (!session) return error(404, "unknown_session", "no live session '" + id + "'");
  std::unique_lock busy(session->busy);
  json out = progress_json(*session->catalog, *session->dialog, session->top_k);
  out["session_id"] = id;
  return reply(200, std::move(out));
}

ServiceResponse SessionService::get_state(const std::string& id) {
  auto session = find_live(id);
  if (!session) return error(404, "unknown_session", "no live session '" + id + "'");
  std::unique_lock busy(session->busy);
  const DialogSession& dialog = *session->dialog;
  std::ostringstream log;
  write_transcript_jsonl(dialog.transcript(), *session->catalog, log);
  json transcript = json::array();
  std::istringstream lines(log.str());
  for (std::string line; std::getline(lines, line);) transcript.push_back(json::parse(line));
  json out = progress_json(*session->catalog, dialog, session->top_k);
  out["session_id"] = id;
  out["catalog"] = session->catalog_name;
  out["strategy"] = to_string(dialog.config().strategy);
  out["mode"] = to_string(dialog.config().mode);
  out["state"] = serialize_state(dialog.state());
  out["transcript"] = std::move(transcript);
  return reply(200, std::move(out));
}

ServiceResponse SessionService::delete_session(const std::string& id) {
  std::unique_lock lock(mutex_);
  if (sessions_.erase(id) == 0) return error(404, "unknown_session", "no live session '" + id + "'");
  return reply(200, {{"deleted", id}});
}

std::size_t SessionService::expire_idle() {
  const auto now = options_.clock();
  std::unique_lock lock(mutex_);
  return std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_access > options_.idle_timeout; });
}

std::size_t SessionService::session_count() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

void serve(SessionService& service, const std::string& host, int port) {
  httplib::Server server;
  auto send = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/v1/health", [&](const httplib::Request&, httplib::Response& res) { send(res, service.health()); });
  server.Get("/v1/catalogs", [&](const httplib::Request&, httplib::Response& res) { send(res, service.list_catalogs()); });
  server.Post("/v1/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    service.expire_idle();
    send(res, service.create_session(req.body));
  });
  server.Get(R"(/v1/sessions/([^/]+)/question)", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_question(req.matches[1]));
  });
  server.Post(R"(/v1/sessions/([^/]+)/answers)", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.post_answer(req.matches[1], req.body));
  });
  server.Get(R"(/v1/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_state(req.matches[1]));
  });
  server.Delete(R"(/v1/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.delete_session(req.matches[1]));
  });
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace emdm
