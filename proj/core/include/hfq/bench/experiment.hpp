#pragma once

#include "hfq/acquisition/greedy.hpp"
#include "hfq/acquisition/marginal.hpp"
#include "hfq/baselines.hpp"
#include "hfq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hfq {

enum class Method {
  all_features,
  machine_only,
  feature_selection,
  entropy_selection,
  entropy_retrain,
  plausible_classes,
  surprising_features,
};

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view s);
std::vector<Method> all_methods();

struct ExperimentConfig {
  std::string dataset_id;
  std::vector<Method> methods = all_methods();
  std::size_t budget = 10;
  std::size_t samples = 5000;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  MarginalMode::Kind mode = MarginalMode::Kind::monte_carlo;
  std::vector<Hyperparameters> grid = default_grid();
  // Grid used for the per-dimension conditional models.
  std::vector<Hyperparameters> conditional_grid = default_grid();
  bool reuse_selection_hyperparameters = false;
  bool record_traces = true;
  std::size_t threads = 0;

  void validate() const;
  std::map<std::string, std::string> describe() const;
};

struct ResultRow {
  Method method;
  std::size_t budget;
  std::size_t restart;
  double f1;
};

struct ResultSummary {
  Method method;
  std::size_t budget;
  double mean;
  double standard_error;  // sample sd / sqrt(R); 0 when R == 1
};

class ResultTable {
 public:
  void add(Method method, std::size_t budget, std::size_t restart, double f1);

  const std::vector<ResultRow>& rows() const { return rows_; }
  std::vector<ResultSummary> summary() const;

  double mean(Method method, std::size_t budget) const;
  double value(Method method, std::size_t budget, std::size_t restart) const;

  // "# key: value" metadata lines, then the per-restart rows, then the
  // aggregate rows.
  std::string to_csv(const std::map<std::string, std::string>& metadata) const;

 private:
  std::vector<ResultRow> rows_;
};

struct InstanceTrace {
  Method method = Method::entropy_selection;
  std::size_t restart = 0;
  std::size_t instance = 0;  // row in that restart's test split
  Vector x_machine;
  AcquisitionTrace trace;
};

struct CurveResult {
  ResultTable table;
  std::vector<InstanceTrace> traces;  // entropy-selection test traces
  std::vector<FeatureRanking> selection_rankings;  // per restart, when computed
  std::map<std::string, std::string> metadata;
};

// Budget sweep b = 0..B for every configured method over R restarts. Each
// restart r uses seed derive_seed(config.seed, {r}) for its split and every
// model and sampler below it; identical configs give identical tables.
CurveResult run_curve(const Dataset& data, const ExperimentConfig& config);

// Moves the first `promote` ranked human features into the machine block
// and reruns the curve.
CurveResult run_followup(const Dataset& data, const FeatureRanking& ranking,
                         const ExperimentConfig& config, std::size_t promote = 6);

std::string traces_to_jsonl(const std::vector<InstanceTrace>& traces, const FeatureSpace& space);
std::vector<InstanceTrace> parse_traces_jsonl(std::string_view text, const FeatureSpace& space);

}  // namespace hfq
