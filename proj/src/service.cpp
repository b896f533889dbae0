#include "fairplan/service.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace fairplan {

using nlohmann::json;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string content_id(const json& record) {
  json copy = record;
  copy.erase("id");
  copy.erase("created_at");
  copy.erase("timing");
  return sha256_hex(copy.dump()).substr(0, 16);
}

SolutionStore::SolutionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string SolutionStore::put(json record) {
  const std::string id = content_id(record);
  record["id"] = id;
  std::lock_guard lock(mu_);
  const auto path = dir_ / (id + ".json");
  if (std::filesystem::exists(path)) return id;
  std::random_device rd;
  const auto tmp = dir_ / ("." + id + "." + std::to_string(rd()) + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary);
    os << record.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
  return id;
}

std::optional<json> SolutionStore::get(const std::string& id) const {
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c))) return std::nullopt;
  std::lock_guard lock(mu_);
  std::ifstream is(dir_ / (id + ".json"), std::ios::binary);
  if (!is) return std::nullopt;
  return json::parse(is);
}

std::vector<json> SolutionStore::all() const {
  std::lock_guard lock(mu_);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir_))
    if (e.path().extension() == ".json" && e.path().filename().string().front() != '.') files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<json> out;
  for (const auto& f : files) {
    std::ifstream is(f, std::ios::binary);
    out.push_back(json::parse(is));
  }
  return out;
}

json schedule_json(const OrderLineSchedule& s, const SolverCalendar& cal) {
  json placements = json::array();
  for (const auto& p : s.placements)
    placements.push_back({{"batch_id", p.batch_id},
                          {"line_id", p.line_id},
                          {"start", p.start},
                          {"end", p.end},
                          {"start_epoch", cal.instant_at(p.start)},
                          {"end_epoch", p.end > 0 ? cal.instant_at(p.end - 1) + 60 : cal.instant_at(0)}});
  return {{"placements", placements},
          {"makespan", s.makespan},
          {"total_tardiness", s.total_tardiness},
          {"objective", s.objective},
          {"status", s.status == SolveStatus::proven_optimal ? "proven_optimal" : "feasible"},
          {"nodes", s.nodes}};
}

namespace {

OrderLineSchedule schedule_from_json(const json& j) {
  OrderLineSchedule s;
  for (const auto& p : j.at("placements"))
    s.placements.push_back({p.at("batch_id"), p.at("line_id"), p.at("start"), p.at("end")});
  s.makespan = j.at("makespan");
  s.total_tardiness = j.at("total_tardiness");
  s.objective = j.at("objective");
  s.status = j.at("status") == "proven_optimal" ? SolveStatus::proven_optimal : SolveStatus::feasible;
  s.nodes = j.at("nodes");
  return s;
}

json row_json(const AllocationState& state, int r) {
  const EpisodeModel& m = state.model();
  const RowInfo& row = m.rows[r];
  json workers = json::array();
  for (int w = 0; w < m.n_workers(); ++w)
    if (state.sigma(r, w)) workers.push_back(m.workers[w]);
  return {{"r_idx", r},
          {"interval", row.interval + 1},
          {"start", row.start},
          {"end", row.end},
          {"line", row.slot.line_id},
          {"batch", row.slot.batch_id},
          {"geometry", row.slot.geometry_id},
          {"order", row.slot.order_id},
          {"required", row.slot.required},
          {"allocated", state.allocated(r)},
          {"done", state.done(r)},
          {"workers", workers}};
}

json error(std::string message, std::optional<std::string> field = std::nullopt) {
  json j = {{"error", std::move(message)}};
  if (field) j["field"] = *field;
  return j;
}

// Field name from a parse error message of the form "<field>: ...".
std::optional<std::string> field_of(const std::string& what) {
  const auto colon = what.find(':');
  if (colon == std::string::npos) return std::nullopt;
  return what.substr(0, colon);
}

}  // namespace

json kpi_json(const KpiSummary& k) {
  json workers = json::array();
  for (const auto& w : k.workers)
    workers.push_back({{"worker_id", w.worker_id}, {"assignments", w.assignments}, {"mean_pi", w.mean_pi}});
  return {{"mean_xi", k.mean_xi},     {"mean_pi", k.mean_pi},         {"mean_rho", k.mean_rho},
          {"s_fair", k.s_fair},       {"assignments", k.assignments}, {"workers", workers}};
}

json episode_json(const AllocationState& state) {
  const EpisodeModel& m = state.model();
  json rows = json::array();
  for (int r = 0; r < m.n_rows(); ++r) rows.push_back(row_json(state, r));
  return {{"terminal", state.terminal()},
          {"active_interval", state.terminal() ? json(nullptr) : json(state.active_interval() + 1)},
          {"decision_steps", state.decision_steps()},
          {"continuation_assignments", state.continuation_assignments()},
          {"unfilled_slots", state.unfilled_slots()},
          {"n_slots", m.n_slots},
          {"n_rows", m.n_rows()},
          {"n_workers", m.n_workers()},
          {"dense_return", state.dense_return()},
          {"fairness_return", state.fairness_return()},
          {"total_return", state.total_return()},
          {"workers", m.workers},
          {"rows", rows}};
}

json make_record(const SolveRequest& req, const PipelineResult& res) {
  const AllocationState& st = res.allocation.final_state;
  json trace = json::array();
  for (const auto& t : st.trace())
    trace.push_back({{"step", t.step},
                     {"action", t.action},
                     {"r_idx", t.r_idx},
                     {"w_idx", t.w_idx},
                     {"reward", t.reward},
                     {"continuations", t.continuations}});
  json warnings = json::array();
  for (const auto& b : res.timeboxes)
    if (b.warning) warnings.push_back(b.task + " @ " + b.resource + ": " + *b.warning);

  json request = {{"objective", to_string(req.parametrization.objective)},
                  {"reward", to_string(req.parametrization.reward)},
                  {"strategy", to_string(req.parametrization.strategy)},
                  {"days_to_plan", req.days_to_plan},
                  {"seed", req.seed},
                  {"orders_csv", req.orders_csv},
                  {"static_json", req.static_json.value_or("")}};
  return {{"request", request},
          {"parametrization", res.parametrization.label()},
          {"horizon_days", res.instance.calendar.horizon_days},
          {"schedule", schedule_json(res.schedule, res.instance.calendar)},
          {"allocation",
           {{"strategy", res.allocation.strategy},
            {"total_return", res.allocation.total_return},
            {"dense_return", st.dense_return()},
            {"fairness_return", st.fairness_return()},
            {"decision_steps", st.decision_steps()},
            {"continuation_assignments", st.continuation_assignments()},
            {"unfilled_slots", st.unfilled_slots()},
            {"n_slots", st.model().n_slots},
            {"n_rows", st.model().n_rows()},
            {"n_workers", st.model().n_workers()},
            {"trace", trace}}},
          {"kpis", res.kpis ? kpi_json(*res.kpis) : json(nullptr)},
          {"timeboxes", to_json(res.timeboxes)},
          {"warnings", warnings},
          {"timing", {{"layer1_ms", res.layer1_ms}, {"layer2_ms", res.layer2_ms}}}};
}

struct PlannerService::Episode {
  std::mutex mu;
  std::string solution_id;
  AllocationState state;
};

struct PlannerService::Server {
  httplib::Server http;
  std::thread thread;
};

PlannerService::PlannerService(ServiceConfig config) : config_(std::move(config)), store_(config_.store_dir) {}

PlannerService::~PlannerService() { stop(); }

Response PlannerService::solve(const SolveRequest& request) {
  if (request.days_to_plan < 1 || request.days_to_plan > 14)
    return {400, error("days_to_plan must lie in [1, 14]", "days_to_plan")};
  if (request.orders_csv.empty()) return {400, error("orders document is empty", "orders_csv")};
  SolveRequest req = request;
  if (!req.static_json || req.static_json->empty()) req.static_json = config_.static_json;

  Instance instance;
  try {
    LoadOptions lo;
    lo.horizon_days = req.days_to_plan;
    instance = load_instance(req.orders_csv, *req.static_json, lo);
  } catch (const ValidationError& e) {
    json body = error(e.what(), "orders_csv");
    body["problems"] = e.problems();
    body["offending_ids"] = e.offending_ids();
    return {400, body};
  } catch (const std::exception& e) {
    return {400, error(e.what(), "orders_csv")};
  }

  PipelineOptions opt;
  opt.layer1 = config_.layer1;
  opt.mcts_rollouts = config_.mcts_rollouts;
  opt.seed = req.seed;
  opt.days_to_plan = req.days_to_plan;
  const std::int64_t steps = config_.policy_steps;
  opt.policy_provider = [steps](RewardKind r) { return default_policy(r, steps); };

  PipelineResult result;
  try {
    result = run_pipeline(instance, req.parametrization, opt);
  } catch (const NoSolutionError& e) {
    return {504, error(e.what())};
  } catch (const DomainError& e) {
    return {400, error(e.what())};
  }

  json record = make_record(req, result);
  const auto now = std::chrono::system_clock::now();
  record["created_at"] = format_iso8601(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
  const std::string id = store_.put(record);

  const int unfilled = result.allocation.final_state.unfilled_slots();
  json body = {{"id", id},
               {"parametrization", req.parametrization.label()},
               {"kpis", record["kpis"]},
               {"makespan", result.schedule.makespan},
               {"unfilled_slots", unfilled},
               {"warnings", record["warnings"]}};
  return {unfilled > 0 ? 422 : 200, body};
}

namespace {

Parametrization parametrization_from(const std::map<std::string, std::string>& fields) {
  Parametrization p;
  if (auto it = fields.find("objective"); it != fields.end()) p.objective = parse_objective(it->second);
  if (auto it = fields.find("reward"); it != fields.end()) p.reward = parse_reward(it->second);
  if (auto it = fields.find("strategy"); it != fields.end()) p.strategy = parse_strategy(it->second);
  return p;
}

std::int64_t integer_field(const std::map<std::string, std::string>& fields, const std::string& name,
                           std::int64_t fallback) {
  auto it = fields.find(name);
  if (it == fields.end() || it->second.empty()) return fallback;
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size()) throw DomainError(name + ": not an integer");
  return v;
}

}  // namespace

Response PlannerService::solve_form(const std::map<std::string, std::string>& fields) {
  SolveRequest req;
  try {
    if (auto it = fields.find("orders_csv"); it != fields.end()) req.orders_csv = it->second;
    else if (auto it2 = fields.find("orders"); it2 != fields.end()) req.orders_csv = it2->second;
    else return {400, error("orders document is required", "orders_csv")};
    if (auto it = fields.find("static_json"); it != fields.end()) req.static_json = it->second;
    req.parametrization = parametrization_from(fields);
    req.days_to_plan = static_cast<int>(integer_field(fields, "days_to_plan", 5));
    const std::int64_t seed = integer_field(fields, "seed", 0);
    if (seed < 0) throw DomainError("seed: must be non-negative");
    req.seed = static_cast<std::uint64_t>(seed);
  } catch (const DomainError& e) {
    return {400, error(e.what(), field_of(e.what()))};
  }
  return solve(req);
}

Response PlannerService::solve_json(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    return {400, error(std::string("body is not JSON: ") + e.what())};
  }
  if (!j.is_object()) return {400, error("body must be a JSON object")};
  std::map<std::string, std::string> fields;
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) fields[key] = value.get<std::string>();
    else if (value.is_number_integer()) fields[key] = std::to_string(value.get<std::int64_t>());
    else if (key == "static_json" && value.is_object()) fields[key] = value.dump();
    else if (value.is_null()) continue;
    else return {400, error(key + ": unsupported value type", key)};
  }
  return solve_form(fields);
}

Response PlannerService::list_solutions() const {
  json index = json::array();
  for (const auto& r : store_.all()) {
    json entry = {{"id", r.value("id", "")},
                  {"parametrization", r.value("parametrization", "")},
                  {"created_at", r.value("created_at", "")},
                  {"makespan", r.at("schedule").at("makespan")}};
    if (r.contains("kpis") && !r["kpis"].is_null())
      entry["kpis"] = {{"mean_xi", r["kpis"]["mean_xi"]},
                       {"mean_pi", r["kpis"]["mean_pi"]},
                       {"mean_rho", r["kpis"]["mean_rho"]},
                       {"s_fair", r["kpis"]["s_fair"]}};
    else
      entry["kpis"] = nullptr;
    index.push_back(entry);
  }
  return {200, {{"solutions", index}}};
}

Response PlannerService::get_solution(const std::string& id) const {
  auto r = store_.get(id);
  if (!r) return {404, error("unknown solution '" + id + "'")};
  return {200, *r};
}

std::shared_ptr<PlannerService::Episode> PlannerService::find_episode(const std::string& id) {
  std::lock_guard lock(episodes_mu_);
  auto it = episodes_.find(id);
  return it == episodes_.end() ? nullptr : it->second;
}

Response PlannerService::create_episode(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    return {400, error("body is not JSON")};
  }
  if (!j.is_object() || !j.contains("solution_id") || !j["solution_id"].is_string())
    return {400, error("solution_id is required", "solution_id")};
  const std::string sid = j["solution_id"];
  auto record = store_.get(sid);
  if (!record) return {404, error("unknown solution '" + sid + "'")};

  const json& req = record->at("request");
  LoadOptions lo;
  lo.horizon_days = record->at("horizon_days").get<int>();
  std::string static_doc = req.at("static_json");
  if (static_doc.empty()) static_doc = config_.static_json;
  Instance instance = load_instance(req.at("orders_csv").get<std::string>(), static_doc, lo);
  const OrderLineSchedule schedule = schedule_from_json(record->at("schedule"));
  auto ep = std::make_shared<Episode>();
  ep->solution_id = sid;
  ep->state = make_episode(instance, schedule, reward_config(parse_reward(req.at("reward").get<std::string>())));

  std::string id;
  {
    std::lock_guard lock(episodes_mu_);
    id = "ep" + std::to_string(next_episode_++);
    episodes_[id] = ep;
  }
  json out = {{"id", id},
              {"solution_id", sid},
              {"n_actions", ep->state.model().n_actions()},
              {"state", episode_json(ep->state)}};
  return {201, out};
}

Response PlannerService::step_episode(const std::string& id, const std::string& body) {
  auto ep = find_episode(id);
  if (!ep) return {404, error("unknown episode '" + id + "'")};
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    return {400, error("body is not JSON")};
  }
  if (!j.is_object() || !j.contains("action") || !j["action"].is_number_integer())
    return {400, error("action must be an integer", "action")};
  const int action = j["action"];
  std::lock_guard lock(ep->mu);
  if (ep->state.terminal()) return {410, error("episode is already terminal")};
  if (!ep->state.is_legal(action)) return {409, error("action " + std::to_string(action) + " is masked out", "action")};
  const AllocationState before = ep->state;
  const double r = ep->state.apply(action);
  const EpisodeModel& m = ep->state.model();
  const int row = action / m.n_workers(), w = action % m.n_workers();
  json continued = json::array();
  for (int k = 0; k < m.n_rows(); ++k)
    if (k != row && ep->state.sigma(k, w) && !before.sigma(k, w)) continued.push_back(k);
  json out = {{"reward", r},
              {"terminal", ep->state.terminal()},
              {"delta",
               {{"action", action},
                {"r_idx", row},
                {"w_idx", w},
                {"worker", m.workers[w]},
                {"continuations", continued}}},
              {"state", episode_json(ep->state)}};
  return {200, out};
}

Response PlannerService::episode_mask(const std::string& id) {
  auto ep = find_episode(id);
  if (!ep) return {404, error("unknown episode '" + id + "'")};
  std::lock_guard lock(ep->mu);
  const EpisodeModel& m = ep->state.model();
  const auto mask = ep->state.action_mask();
  json legal = json::array();
  for (int a : ep->state.legal_actions())
    legal.push_back({{"action", a}, {"r_idx", a / m.n_workers()}, {"w_idx", a % m.n_workers()}});
  json rows = json::array();
  for (int r = 0; r < m.n_rows(); ++r) rows.push_back(row_json(ep->state, r));
  return {200,
          {{"mask", mask},
           {"n_rows", m.n_rows()},
           {"n_workers", m.n_workers()},
           {"workers", m.workers},
           {"rows", rows},
           {"legal", legal}}};
}

Response PlannerService::get_episode(const std::string& id) {
  auto ep = find_episode(id);
  if (!ep) return {404, error("unknown episode '" + id + "'")};
  std::lock_guard lock(ep->mu);
  json out = {{"id", id}, {"solution_id", ep->solution_id}, {"state", episode_json(ep->state)}};
  json trace = json::array();
  for (const auto& t : ep->state.trace())
    trace.push_back({{"step", t.step}, {"action", t.action}, {"r_idx", t.r_idx}, {"w_idx", t.w_idx},
                     {"reward", t.reward}, {"continuations", t.continuations}});
  out["trace"] = trace;
  return {200, out};
}

json PlannerService::openapi() {
  auto op = [](const char* summary, json responses) {
    return json{{"summary", summary}, {"responses", responses}};
  };
  auto resp = [](std::initializer_list<std::pair<const char*, const char*>> codes) {
    json r = json::object();
    for (const auto& [code, text] : codes) r[code] = {{"description", text}};
    return r;
  };
  json solve = op("Run both planning layers for one parametrization",
                  resp({{"200", "record id"}, {"400", "invalid input"}, {"422", "unfilled slots; record stored"},
                        {"504", "no schedule within budget"}}));
  solve["requestBody"] = {
      {"content",
       {{"application/json",
         {{"schema",
           {{"type", "object"},
            {"required", {"orders_csv"}},
            {"properties",
             {{"orders_csv", {{"type", "string"}}},
              {"static_json", {{"type", "string"}}},
              {"objective", {{"type", "string"}, {"enum", {"makespan", "tardiness", "balanced"}}}},
              {"reward", {{"type", "string"}, {"enum", {"preference", "resilience", "experience", "balanced"}}}},
              {"strategy", {{"type", "string"}, {"enum", {"greedy", "rl", "mcts"}}}},
              {"days_to_plan", {{"type", "integer"}, {"minimum", 1}, {"maximum", 14}}},
              {"seed", {{"type", "integer"}, {"minimum", 0}}}}}}}}},
        {"multipart/form-data", {{"schema", {{"type", "object"}}}}}}}};
  json paths = {
      {"/solve", {{"post", solve}}},
      {"/solutions", {{"get", op("Index of stored records", resp({{"200", "index"}}))}}},
      {"/solutions/{id}", {{"get", op("One stored record", resp({{"200", "record"}, {"404", "unknown id"}}))}}},
      {"/episodes", {{"post", op("Manual allocation episode on a stored record",
                                 resp({{"201", "episode"}, {"400", "bad body"}, {"404", "unknown solution"}}))}}},
      {"/episodes/{id}", {{"get", op("Episode state", resp({{"200", "state"}, {"404", "unknown episode"}}))}}},
      {"/episodes/{id}/step",
       {{"post", op("Apply one flattened action",
                    resp({{"200", "transition"}, {"404", "unknown episode"}, {"409", "action masked out"},
                          {"410", "episode terminal"}}))}}},
      {"/episodes/{id}/mask",
       {{"get", op("Action mask with row and worker mapping", resp({{"200", "mask"}, {"404", "unknown episode"}}))}}},
      {"/openapi.json", {{"get", op("This document", resp({{"200", "OpenAPI document"}}))}}},
  };
  return {{"openapi", "3.0.3"},
          {"info", {{"title", "fairplan planner service"}, {"version", "0.1.0"}}},
          {"paths", paths}};
}

namespace {

void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

static void install_routes(httplib::Server& http, PlannerService& svc) {
  http.Post("/solve", [&svc](const httplib::Request& req, httplib::Response& res) {
    if (req.is_multipart_form_data()) {
      std::map<std::string, std::string> fields;
      for (const auto& [name, part] : req.files) fields[name] = part.content;
      reply(res, svc.solve_form(fields));
    } else {
      reply(res, svc.solve_json(req.body));
    }
  });
  http.Get("/solutions", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.list_solutions()); });
  http.Get(R"(/solutions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.get_solution(req.matches[1]));
  });
  http.Post("/episodes", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.create_episode(req.body));
  });
  http.Post(R"(/episodes/([^/]+)/step)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.step_episode(req.matches[1], req.body));
  });
  http.Get(R"(/episodes/([^/]+)/mask)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.episode_mask(req.matches[1]));
  });
  http.Get(R"(/episodes/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.get_episode(req.matches[1]));
  });
  http.Get("/openapi.json", [](const httplib::Request&, httplib::Response& res) {
    reply(res, {200, PlannerService::openapi()});
  });
  http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    reply(res, {500, error(what)});
  });
}

void PlannerService::serve(const std::string& host, int port) {
  server_ = std::make_unique<Server>();
  install_routes(server_->http, *this);
  if (!server_->http.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

int PlannerService::start_background(const std::string& host) {
  server_ = std::make_unique<Server>();
  install_routes(server_->http, *this);
  const int port = server_->http.bind_to_any_port(host);
  if (port < 0) throw std::runtime_error("cannot bind " + host);
  server_->thread = std::thread([this] { server_->http.listen_after_bind(); });
  server_->http.wait_until_ready();
  return port;
}

void PlannerService::stop() {
  if (!server_) return;
  server_->http.stop();
  if (server_->thread.joinable()) server_->thread.join();
  server_.reset();
}

int port_from_env(int fallback) {
  const char* v = std::getenv("FAIRPLAN_PORT");
  if (!v || !*v) return fallback;
  try {
    const int p = std::stoi(v);
    if (p > 0 && p < 65536) return p;
  } catch (const std::exception&) {
  }
  throw DomainError(std::string("FAIRPLAN_PORT is not a valid port: ") + v);
}

}  // namespace fairplan
