#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairplan/pipeline.hpp"

namespace fairplan {

/// Append-only JSON documents on disk, one file per record, named by a
/// content hash. Writes go through a temporary file and a rename.
class SolutionStore {
 public:
  explicit SolutionStore(std::filesystem::path dir);

  /// Stores `record` (its "id" is filled in) unless an identical one exists.
  std::string put(nlohmann::json record);
  std::optional<nlohmann::json> get(const std::string& id) const;
  std::vector<nlohmann::json> all() const;  // sorted by id

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

/// SHA-256 over the record with "id", "created_at" and "timing" removed,
/// truncated to 16 hex digits.
std::string content_id(const nlohmann::json& record);

std::string sha256_hex(const std::string& data);

struct SolveRequest {
  std::string orders_csv;
  std::optional<std::string> static_json;  // service default when unset
  Parametrization parametrization;
  int days_to_plan = 5;
  std::uint64_t seed = 0;
};

nlohmann::json schedule_json(const OrderLineSchedule& schedule, const SolverCalendar& calendar);
nlohmann::json kpi_json(const KpiSummary& k);
nlohmann::json episode_json(const AllocationState& state);
/// Full record for a pipeline run, without id and created_at.
nlohmann::json make_record(const SolveRequest& request, const PipelineResult& result);

struct ServiceConfig {
  std::filesystem::path store_dir = "solutions";
  std::string static_json;  // default static context document
  SearchBudget layer1{std::chrono::milliseconds(10'000), 20'000'000};
  int mcts_rollouts = 3;
  std::int64_t policy_steps = 6000;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Transport-independent request handling; `serve` wires it to HTTP.
class PlannerService {
 public:
  explicit PlannerService(ServiceConfig config);

  Response solve(const SolveRequest& request);
  /// Parses a JSON body into a request; 400 on bad fields.
  Response solve_json(const std::string& body);
  Response solve_form(const std::map<std::string, std::string>& fields);
  Response list_solutions() const;
  Response get_solution(const std::string& id) const;

  Response create_episode(const std::string& body);
  Response step_episode(const std::string& id, const std::string& body);
  Response episode_mask(const std::string& id);
  Response get_episode(const std::string& id);

  static nlohmann::json openapi();

  /// Blocks serving HTTP until `stop()`.
  void serve(const std::string& host, int port);
  /// Binds to a free port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();
  ~PlannerService();

 private:
  struct Episode;
  struct Server;
  std::shared_ptr<Episode> find_episode(const std::string& id);

  ServiceConfig config_;
  SolutionStore store_;
  std::mutex episodes_mu_;
  std::map<std::string, std::shared_ptr<Episode>> episodes_;
  int next_episode_ = 1;
  std::unique_ptr<Server> server_;
};

/// Port from FAIRPLAN_PORT, else `fallback`.
int port_from_env(int fallback = 8080);

}  // namespace fairplan
