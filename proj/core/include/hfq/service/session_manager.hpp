#pragma once

#include "hfq/acquisition/greedy.hpp"
#include "hfq/acquisition/marginal.hpp"
#include "hfq/model_io.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace hfq {

enum class SessionStatus { active, exhausted, closed };
std::string_view to_string(SessionStatus s) noexcept;

struct SessionConfig {
  std::size_t default_budget = 10;
  std::size_t samples = 5000;
  MarginalMode::Kind mode = MarginalMode::Kind::monte_carlo;
  std::uint64_t seed = 0;
  std::chrono::seconds idle_timeout{3600};
  // Strict: only the proposed query may be answered.
  bool strict = true;
  std::optional<std::filesystem::path> event_log;
};

struct SessionAnswer {
  std::size_t dimension = 0;
  int value = 0;
  bool free_choice = false;
};

struct SessionState {
  std::string id;
  std::string model_id;
  Vector x_machine;
  AnswerSet answers;
  std::vector<SessionAnswer> answer_order;
  std::size_t budget = 0;
  std::size_t remaining_budget = 0;
  AcquisitionTrace trace;  // trace.initial_prediction is the creation prediction
  std::vector<Vector> masked_predictions;  // parallel to predictions, when available
  std::optional<Vector> initial_masked_prediction;
  SessionStatus status = SessionStatus::active;
  bool strict = true;
  MarginalMode mode;
  std::chrono::system_clock::time_point created_at;
  std::chrono::system_clock::time_point updated_at;

  const Vector& current_prediction() const;
};

struct QueryProposal {
  std::size_t dimension = 0;
  std::string feature;
  double expected_entropy = 0.0;
  std::vector<CandidateScore> candidates;
};

struct AnswerOutcome {
  Vector prediction;
  std::optional<Vector> masked_prediction;
  std::size_t remaining_budget = 0;
  SessionStatus status = SessionStatus::active;
};

struct ModelInfo {
  std::string id;
  std::size_t machine_dim = 0;
  std::size_t human_dim = 0;
  std::vector<std::string> classes;
  std::vector<std::size_t> masked_budgets;
};

// Holds loaded models and in-flight sessions. Session mutations are
// serialized per session; models are immutable after loading.
class SessionManager {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  explicit SessionManager(SessionConfig config, Clock clock = {});
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  void add_model(const std::string& id, ModelBundle bundle);
  // Loads every *.json bundle in `dir`; the file stem is the model id.
  std::size_t load_models(const std::filesystem::path& dir);
  std::vector<ModelInfo> models() const;
  std::shared_ptr<const ModelBundle> model(const std::string& id) const;

  // Replays the configured event log, if it exists. Returns events applied.
  std::size_t recover();

  SessionState create(const std::string& model_id, const std::vector<double>& x_machine,
                      std::optional<std::size_t> budget = std::nullopt,
                      std::optional<bool> strict = std::nullopt);
  QueryProposal next_query(const std::string& session_id);
  AnswerOutcome submit_answer(const std::string& session_id, std::size_t dimension, int value);
  SessionState get(const std::string& session_id);
  void close(const std::string& session_id);

  // Drops sessions idle longer than the configured timeout.
  std::size_t expire_idle();
  std::size_t session_count() const;

  const SessionConfig& config() const { return config_; }

 private:
  struct Entry;

  std::shared_ptr<Entry> find(const std::string& id);
  std::string new_session_id();
  void log_event(const std::string& line);
  SessionState create_with(const std::string& id, const std::string& model_id,
                           const std::vector<double>& x_machine, std::size_t budget, bool strict,
                           std::uint64_t seed, bool log);
  AnswerOutcome answer_locked(Entry& entry, std::size_t dimension, int value, bool log);

  SessionConfig config_;
  Clock clock_;
  mutable std::shared_mutex models_mutex_;
  std::map<std::string, std::shared_ptr<const ModelBundle>> models_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex log_mutex_;
  std::ofstream log_;
  std::mutex id_mutex_;
  std::uint64_t id_state_;
  std::uint64_t session_counter_ = 0;
};

}  // namespace hfq
