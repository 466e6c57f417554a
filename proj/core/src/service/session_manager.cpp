#include "hfq/service/session_manager.hpp"

#include "../detail/json_util.hpp"
#include "hfq/error.hpp"
#include "hfq/random.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

namespace hfq {

using detail::json;

std::string_view to_string(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::active: return "active";
    case SessionStatus::exhausted: return "exhausted";
    case SessionStatus::closed: return "closed";
  }
  return "active";
}

const Vector& SessionState::current_prediction() const {
  return trace.steps.empty() ? trace.initial_prediction : trace.steps.back().prediction;
}

struct SessionManager::Entry {
  std::mutex mutex;
  SessionState state;
  std::shared_ptr<const ModelBundle> bundle;
  std::unique_ptr<Marginalizer> marginalizer;
  std::optional<Selection> proposal;  // valid for the current answer count
};

namespace {

std::int64_t to_millis(std::chrono::system_clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

std::chrono::system_clock::time_point from_millis(std::int64_t ms) {
  return std::chrono::system_clock::time_point(std::chrono::milliseconds(ms));
}

std::optional<Vector> masked_prediction(const ModelBundle& bundle, const Vector& xm, const AnswerSet& answers) {
  if (const auto* m = bundle.masked_for(answers.size())) return predict_zero(*m, xm, answers);
  return std::nullopt;
}

}  // namespace

SessionManager::SessionManager(SessionConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  if (!clock_) clock_ = [] { return std::chrono::system_clock::now(); };
  std::random_device rd;
  id_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
              static_cast<std::uint64_t>(to_millis(std::chrono::system_clock::now()));
  if (config_.event_log) {
    log_.open(*config_.event_log, std::ios::app);
    require(log_.good(), ErrorCode::io, "cannot open event log " + config_.event_log->string());
  }
}

SessionManager::~SessionManager() = default;

void SessionManager::add_model(const std::string& id, ModelBundle bundle) {
  require(!id.empty(), ErrorCode::validation, "model id is empty");
  bundle.validate();
  std::unique_lock lock(models_mutex_);
  models_[id] = std::make_shared<const ModelBundle>(std::move(bundle));
}

std::size_t SessionManager::load_models(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorCode::io, "model directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) add_model(f.stem().string(), load_model_bundle(f));
  return files.size();
}

std::vector<ModelInfo> SessionManager::models() const {
  std::shared_lock lock(models_mutex_);
  std::vector<ModelInfo> out;
  for (const auto& [id, b] : models_) {
    ModelInfo info;
    info.id = id;
    info.machine_dim = b->joint.space.machine_dim();
    info.human_dim = b->joint.space.human_dim();
    info.classes = b->joint.space.class_names;
    for (const auto& m : b->masked) info.masked_budgets.push_back(m.trained_budget);
    out.push_back(std::move(info));
  }
  return out;
}

std::shared_ptr<const ModelBundle> SessionManager::model(const std::string& id) const {
  std::shared_lock lock(models_mutex_);
  auto it = models_.find(id);
  require(it != models_.end(), ErrorCode::not_found, "unknown model '" + id + "'");
  return it->second;
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  require(it != sessions_.end(), ErrorCode::not_found, "unknown session '" + id + "'");
  return it->second;
}

std::string SessionManager::new_session_id() {
  std::lock_guard lock(id_mutex_);
  id_state_ = mix_seed(id_state_);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "s-%016llx", static_cast<unsigned long long>(id_state_));
  return buf;
}

void SessionManager::log_event(const std::string& line) {
  if (!config_.event_log) return;
  std::lock_guard lock(log_mutex_);
  log_ << line << '\n';
  log_.flush();
  require(log_.good(), ErrorCode::io, "failed writing the event log");
}

SessionState SessionManager::create(const std::string& model_id, const std::vector<double>& x_machine,
                                    std::optional<std::size_t> budget, std::optional<bool> strict) {
  std::uint64_t counter;
  {
    std::lock_guard lock(id_mutex_);
    counter = session_counter_++;
  }
  std::string id;
  do {
    id = new_session_id();
  } while ([&] {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.count(id) > 0;
  }());
  return create_with(id, model_id, x_machine, budget.value_or(config_.default_budget),
                     strict.value_or(config_.strict), derive_seed(config_.seed, {counter}), true);
}

SessionState SessionManager::create_with(const std::string& id, const std::string& model_id,
                                         const std::vector<double>& x_machine, std::size_t budget,
                                         bool strict, std::uint64_t seed, bool log) {
  auto bundle = model(model_id);
  const auto& space = bundle->joint.space;
  std::string bad;
  for (std::size_t i = 0; i < x_machine.size(); ++i) {
    if (x_machine[i] != 0.0 && x_machine[i] != 1.0) bad += (bad.empty() ? "" : ",") + std::to_string(i);
  }
  require(x_machine.size() == space.machine_dim(), ErrorCode::validation,
          "x_machine has " + std::to_string(x_machine.size()) + " entries, model expects " +
              std::to_string(space.machine_dim()));
  require(bad.empty(), ErrorCode::validation, "x_machine entries must be 0 or 1; offending indices: " + bad);

  auto entry = std::make_shared<Entry>();
  entry->bundle = bundle;
  SessionState& s = entry->state;
  s.id = id;
  s.model_id = model_id;
  s.x_machine = Eigen::Map<const Vector>(x_machine.data(), static_cast<Eigen::Index>(x_machine.size()));
  s.answers = AnswerSet(space.human_dim());
  s.budget = std::min(budget, space.human_dim());
  s.remaining_budget = s.budget;
  s.strict = strict;
  s.mode = config_.mode == MarginalMode::Kind::exact ? MarginalMode::exact()
                                                     : MarginalMode::monte_carlo(config_.samples, seed);
  entry->marginalizer = std::make_unique<Marginalizer>(bundle->joint, bundle->conditionals, s.x_machine);
  s.trace.initial_prediction = entry->marginalizer->predict(s.answers, s.mode.at_stage(0));
  s.initial_masked_prediction = masked_prediction(*bundle, s.x_machine, s.answers);
  s.status = s.remaining_budget == 0 ? SessionStatus::exhausted : SessionStatus::active;
  s.created_at = s.updated_at = clock_();

  if (log) {
    log_event(json{{"event", "create"},
                   {"id", id},
                   {"model_id", model_id},
                   {"x_machine", x_machine},
                   {"budget", s.budget},
                   {"strict", strict},
                   {"seed", seed},
                   {"at", to_millis(s.created_at)}}
                  .dump());
  }
  SessionState snapshot = s;
  std::unique_lock lock(sessions_mutex_);
  require(sessions_.emplace(id, std::move(entry)).second, ErrorCode::conflict, "session id collision");
  return snapshot;
}

QueryProposal SessionManager::next_query(const std::string& session_id) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  const SessionState& s = entry->state;
  require(s.status != SessionStatus::closed, ErrorCode::conflict, "session " + session_id + " is closed");
  require(s.status != SessionStatus::exhausted, ErrorCode::budget_exhausted,
          "session " + session_id + " has no budget left");
  if (!entry->proposal) entry->proposal = select_next_query(*entry->marginalizer, s.answers, s.mode);
  QueryProposal p;
  p.dimension = entry->proposal->dimension;
  p.feature = entry->bundle->joint.space.human_names[p.dimension];
  p.expected_entropy = entry->proposal->expected_entropy;
  p.candidates = entry->proposal->candidates;
  return p;
}

AnswerOutcome SessionManager::submit_answer(const std::string& session_id, std::size_t dimension, int value) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return answer_locked(*entry, dimension, value, true);
}

AnswerOutcome SessionManager::answer_locked(Entry& entry, std::size_t dimension, int value, bool log) {
  SessionState& s = entry.state;
  require(s.status != SessionStatus::closed, ErrorCode::conflict, "session " + s.id + " is closed");
  require(s.status != SessionStatus::exhausted, ErrorCode::budget_exhausted,
          "session " + s.id + " has no budget left");
  require(value == 0 || value == 1, ErrorCode::validation, "answer value must be 0 or 1");
  require(dimension < s.answers.human_dim(), ErrorCode::validation,
          "dimension " + std::to_string(dimension) + " is out of range");
  require(!s.answers.contains(dimension), ErrorCode::conflict,
          "dimension " + std::to_string(dimension) + " was already answered");
  if (!entry.proposal) entry.proposal = select_next_query(*entry.marginalizer, s.answers, s.mode);
  const bool proposed = entry.proposal->dimension == dimension;
  require(proposed || !s.strict, ErrorCode::conflict,
          "strict session expects an answer for dimension " + std::to_string(entry.proposal->dimension));

  s.answers.set(dimension, value);
  s.answer_order.push_back({dimension, value, !proposed});
  AcquisitionStep step;
  step.dimension = dimension;
  step.answer = value;
  step.free_choice = !proposed;
  if (proposed) step.candidates = std::move(entry.proposal->candidates);
  step.prediction = entry.marginalizer->predict(s.answers, s.mode.at_stage(s.answers.size()));
  s.trace.steps.push_back(std::move(step));
  entry.proposal.reset();

  const auto masked = masked_prediction(*entry.bundle, s.x_machine, s.answers);
  s.masked_predictions.push_back(masked.value_or(Vector()));
  --s.remaining_budget;
  if (s.remaining_budget == 0) s.status = SessionStatus::exhausted;
  s.updated_at = clock_();

  if (log) {
    log_event(json{{"event", "answer"},
                   {"id", s.id},
                   {"dimension", dimension},
                   {"value", value},
                   {"at", to_millis(s.updated_at)}}
                  .dump());
  }
  return {s.trace.steps.back().prediction, masked, s.remaining_budget, s.status};
}

SessionState SessionManager::get(const std::string& session_id) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->state;
}

void SessionManager::close(const std::string& session_id) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  entry->state.status = SessionStatus::closed;
  entry->state.updated_at = clock_();
  entry->proposal.reset();
  log_event(json{{"event", "close"}, {"id", session_id}, {"at", to_millis(entry->state.updated_at)}}.dump());
}

std::size_t SessionManager::expire_idle() {
  const auto now = clock_();
  std::unique_lock lock(sessions_mutex_);
  std::size_t removed = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock entry_lock(it->second->mutex, std::try_to_lock);
    if (entry_lock.owns_lock() && now - it->second->state.updated_at > config_.idle_timeout) {
      entry_lock.unlock();
      it = sessions_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::size_t SessionManager::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::size_t SessionManager::recover() {
  if (!config_.event_log || !std::filesystem::exists(*config_.event_log)) return 0;
  const std::string text = detail::read_text_file(*config_.event_log);
  std::size_t applied = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string what = "event log line " + std::to_string(line_no);
    const json ev = detail::parse_json(line, what);
    detail::guarded(what, [&] {
      const auto kind = ev.at("event").get<std::string>();
      const auto id = ev.at("id").get<std::string>();
      const auto at = from_millis(ev.at("at").get<std::int64_t>());
      if (kind == "create") {
        create_with(id, ev.at("model_id").get<std::string>(), ev.at("x_machine").get<std::vector<double>>(),
                    ev.at("budget").get<std::size_t>(), ev.at("strict").get<bool>(),
                    ev.at("seed").get<std::uint64_t>(), false);
        auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        entry->state.created_at = entry->state.updated_at = at;
        std::lock_guard id_lock(id_mutex_);
        ++session_counter_;
      } else if (kind == "answer") {
        auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        answer_locked(*entry, ev.at("dimension").get<std::size_t>(), ev.at("value").get<int>(), false);
        entry->state.updated_at = at;
      } else if (kind == "close") {
        auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        entry->state.status = SessionStatus::closed;
        entry->state.updated_at = at;
      } else {
        fail(ErrorCode::parse, what + ": unknown event '" + kind + "'");
      }
      return 0;
    });
    ++applied;
  }
  return applied;
}

}  // namespace hfq
