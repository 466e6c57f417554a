#include "hfq/bench/experiment.hpp"

#include "../detail/json_util.hpp"
#include "hfq/acquisition/retrain.hpp"
#include "hfq/conditional.hpp"
#include "hfq/data/dataset_io.hpp"
#include "hfq/data/split.hpp"
#include "hfq/error.hpp"
#include "hfq/metrics.hpp"
#include "hfq/multinomial.hpp"
#include "hfq/parallel.hpp"
#include "hfq/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

#ifndef HFQ_VERSION
#define HFQ_VERSION "unknown"
#endif

namespace hfq {

using detail::json;

namespace {

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::all_features, "all_features"},
    {Method::machine_only, "machine_only"},
    {Method::feature_selection, "feature_selection"},
    {Method::entropy_selection, "entropy_selection"},
    {Method::entropy_retrain, "entropy_retrain"},
    {Method::plausible_classes, "plausible_classes"},
    {Method::surprising_features, "surprising_features"},
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool has(const std::vector<Method>& methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

AnswerSet prefix_answers(const std::vector<std::size_t>& order, std::size_t b,
                         const Eigen::Ref<const Vector>& x_human) {
  AnswerSet a(static_cast<std::size_t>(x_human.size()));
  for (std::size_t j = 0; j < b && j < order.size(); ++j) {
    a.set(order[j], static_cast<int>(x_human(static_cast<Eigen::Index>(order[j]))));
  }
  return a;
}

// Per-instance predicted labels for each budget 0..B.
using BudgetLabels = std::vector<Labels>;

BudgetLabels empty_labels(std::size_t budget, std::size_t n) {
  return BudgetLabels(budget + 1, Labels(n, 0));
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "all_features";
}

Method parse_method(std::string_view s) {
  for (const auto& [method, name] : kMethodNames) {
    if (name == s) return method;
  }
  fail(ErrorCode::configuration, "unknown method '" + std::string(s) + "'");
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& [method, name] : kMethodNames) out.push_back(method);
  return out;
}

void ExperimentConfig::validate() const {
  require(budget >= 1, ErrorCode::configuration, "budget must be at least 1");
  require(restarts >= 1, ErrorCode::configuration, "need at least one restart");
  require(!methods.empty(), ErrorCode::configuration, "no methods selected");
  require(!grid.empty() && !conditional_grid.empty(), ErrorCode::configuration,
          "hyperparameter grids must be non-empty");
  require(mode == MarginalMode::Kind::exact || samples >= 1, ErrorCode::configuration,
          "Monte Carlo mode needs at least one sample");
  std::set<Method> seen(methods.begin(), methods.end());
  require(seen.size() == methods.size(), ErrorCode::configuration, "method listed twice");
}

std::map<std::string, std::string> ExperimentConfig::describe() const {
  std::string ms;
  for (auto m : methods) ms += (ms.empty() ? "" : ";") + std::string(to_string(m));
  return {{"dataset", dataset_id},
          {"methods", ms},
          {"budget", std::to_string(budget)},
          {"samples", std::to_string(samples)},
          {"restarts", std::to_string(restarts)},
          {"seed", std::to_string(seed)},
          {"mode", mode == MarginalMode::Kind::exact ? "exact" : "mc"},
          {"grid_size", std::to_string(grid.size())},
          {"conditional_grid_size", std::to_string(conditional_grid.size())},
          {"reuse_selection_hyperparameters", reuse_selection_hyperparameters ? "true" : "false"},
          {"f1_average", "macro"},
          {"f1_zero_support", "0"},
          {"code_version", HFQ_VERSION}};
}

void ResultTable::add(Method method, std::size_t budget, std::size_t restart, double f1) {
  rows_.push_back({method, budget, restart, f1});
}

std::vector<ResultSummary> ResultTable::summary() const {
  std::vector<ResultSummary> out;
  std::vector<std::pair<Method, std::size_t>> keys;
  for (const auto& r : rows_) {
    const std::pair key{r.method, r.budget};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [method, budget] : keys) {
    std::vector<double> v;
    for (const auto& r : rows_) {
      if (r.method == method && r.budget == budget) v.push_back(r.f1);
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double se = 0.0;
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    }
    out.push_back({method, budget, mean, se});
  }
  return out;
}

double ResultTable::mean(Method method, std::size_t budget) const {
  for (const auto& s : summary()) {
    if (s.method == method && s.budget == budget) return s.mean;
  }
  fail(ErrorCode::not_found, "no results for " + std::string(to_string(method)) + " at budget " +
                                 std::to_string(budget));
}

double ResultTable::value(Method method, std::size_t budget, std::size_t restart) const {
  for (const auto& r : rows_) {
    if (r.method == method && r.budget == budget && r.restart == restart) return r.f1;
  }
  fail(ErrorCode::not_found, "no result for " + std::string(to_string(method)) + " at budget " +
                                 std::to_string(budget) + ", restart " + std::to_string(restart));
}

std::string ResultTable::to_csv(const std::map<std::string, std::string>& metadata) const {
  std::ostringstream out;
  for (const auto& [k, v] : metadata) out << "# " << k << ": " << v << "\n";
  out << "kind,method,budget,restart,f1,standard_error\n";
  for (const auto& r : rows_) {
    out << "restart," << to_string(r.method) << "," << r.budget << "," << r.restart << ","
        << format_double(r.f1) << ",\n";
  }
  for (const auto& s : summary()) {
    out << "mean," << to_string(s.method) << "," << s.budget << ",," << format_double(s.mean) << ","
        << format_double(s.standard_error) << "\n";
  }
  return out.str();
}

namespace {

struct RestartOutput {
  std::vector<std::pair<Method, std::vector<double>>> f1;  // per budget
  std::vector<InstanceTrace> traces;
  std::optional<FeatureRanking> selection_ranking;
};

RestartOutput run_restart(const Dataset& data, const ExperimentConfig& config, std::size_t restart) {
  const std::uint64_t seed = derive_seed(config.seed, {restart});
  const std::size_t budget = std::min(config.budget, data.space.human_dim());
  const std::size_t k = data.space.num_classes();
  const auto splits = stratified_split(data, seed);
  const Dataset& train = splits.train;
  const Dataset& valid = splits.valid;
  const Dataset& test = splits.test;
  const std::size_t n_test = test.size();

  const MarginalMode root_mode = config.mode == MarginalMode::Kind::exact
                                     ? MarginalMode::exact()
                                     : MarginalMode::monte_carlo(config.samples, derive_seed(seed, {2}));
  const MarginalMode test_mode = root_mode.derived(0);

  RestartOutput out;
  auto record = [&](Method m, const BudgetLabels& predicted) {
    std::vector<double> f1;
    for (const auto& labels : predicted) f1.push_back(macro_f1(test.labels, labels, k));
    out.f1.emplace_back(m, std::move(f1));
  };

  if (has(config.methods, Method::machine_only)) {
    const auto model = train_machine_only(train, valid, config.grid, derive_seed(seed, {1}));
    const Labels labels = predict_labels(model, test.x_machine);
    record(Method::machine_only, BudgetLabels(budget + 1, labels));
  }

  const bool needs_joint = std::any_of(config.methods.begin(), config.methods.end(),
                                      [](Method m) { return m != Method::machine_only; });
  if (!needs_joint) return out;

  const JointModel joint = train_all_features(train, valid, config.grid, derive_seed(seed, {1}));
  if (has(config.methods, Method::all_features)) {
    LinearModel lm;
    lm.weights.resize(joint.theta_m.rows(), joint.theta_m.cols() + joint.theta_h.cols());
    lm.weights << joint.theta_m, joint.theta_h;
    lm.bias = joint.phi;
    const Labels labels = predict_labels(lm, test.joint_features());
    record(Method::all_features, BudgetLabels(budget + 1, labels));
  }
  const bool needs_acquisition = std::any_of(config.methods.begin(), config.methods.end(), [](Method m) {
    return m != Method::machine_only && m != Method::all_features;
  });
  if (!needs_acquisition) return out;

  const ConditionalModels cond =
      fit_conditionals(train, valid, config.conditional_grid, derive_seed(seed, {3}), config.threads);
  std::vector<Marginalizer> marginalizers;
  marginalizers.reserve(n_test);
  for (std::size_t i = 0; i < n_test; ++i) {
    marginalizers.emplace_back(joint, cond, test.x_machine.row(static_cast<Eigen::Index>(i)).transpose());
  }
  auto instance_mode = [&](std::size_t i) { return test_mode.derived(i); };

  // Predicts every budget level from a per-instance query order.
  auto evaluate_orders = [&](const std::vector<std::vector<std::size_t>>& orders) {
    BudgetLabels predicted = empty_labels(budget, n_test);
    parallel_for(
        n_test,
        [&](std::size_t i) {
          const Vector xh = test.x_human.row(static_cast<Eigen::Index>(i)).transpose();
          const auto mode = instance_mode(i);
          for (std::size_t b = 0; b <= budget; ++b) {
            const AnswerSet a = prefix_answers(orders[i], b, xh);
            predicted[b][i] = static_cast<int>(argmax(marginalizers[i].predict(a, mode.at_stage(b))));
          }
        },
        config.threads);
    return predicted;
  };

  if (has(config.methods, Method::feature_selection)) {
    ForwardSelectionOptions opts;
    opts.reuse_hyperparameters = config.reuse_selection_hyperparameters;
    opts.threads = config.threads;
    auto ranking = forward_feature_selection(train, valid, config.grid, budget, derive_seed(seed, {4}), opts);
    record(Method::feature_selection,
           evaluate_orders(std::vector<std::vector<std::size_t>>(n_test, ranking.dims)));
    out.selection_ranking = std::move(ranking);
  }

  if (has(config.methods, Method::plausible_classes)) {
    std::vector<std::vector<std::size_t>> orders(n_test);
    parallel_for(
        n_test,
        [&](std::size_t i) {
          const Vector p = marginalizers[i].predict(AnswerSet(cond.human_dim()), instance_mode(i).at_stage(0));
          orders[i] = plausible_classes_rank(joint, p).dims;
        },
        config.threads);
    record(Method::plausible_classes, evaluate_orders(orders));
  }

  if (has(config.methods, Method::surprising_features)) {
    std::vector<std::vector<std::size_t>> orders(n_test);
    for (std::size_t i = 0; i < n_test; ++i) {
      orders[i] = surprising_features_rank(cond, test.x_machine.row(static_cast<Eigen::Index>(i)).transpose()).dims;
    }
    record(Method::surprising_features, evaluate_orders(orders));
  }

  const bool entropy = has(config.methods, Method::entropy_selection);
  const bool retrain = has(config.methods, Method::entropy_retrain);
  if (!entropy && !retrain) return out;

  std::vector<AcquisitionResult> acquired(n_test);
  parallel_for(
      n_test,
      [&](std::size_t i) {
        const Vector xh = test.x_human.row(static_cast<Eigen::Index>(i)).transpose();
        acquired[i] = greedy_acquire(marginalizers[i], oracle_responder(xh), budget, instance_mode(i));
      },
      config.threads);

  if (entropy) {
    BudgetLabels predicted = empty_labels(budget, n_test);
    for (std::size_t i = 0; i < n_test; ++i) {
      const auto& trace = acquired[i].trace;
      predicted[0][i] = static_cast<int>(argmax(trace.initial_prediction));
      for (std::size_t b = 1; b <= budget; ++b) {
        predicted[b][i] = static_cast<int>(argmax(trace.steps[b - 1].prediction));
      }
    }
    record(Method::entropy_selection, predicted);
    if (config.record_traces) {
      for (std::size_t i = 0; i < n_test; ++i) {
        out.traces.push_back({Method::entropy_selection, restart, i,
                              test.x_machine.row(static_cast<Eigen::Index>(i)).transpose(), acquired[i].trace});
      }
    }
  }

  if (retrain) {
    const auto train_masks = compute_train_masks(joint, cond, train, budget, root_mode.derived(1), config.threads);
    const auto valid_masks = compute_train_masks(joint, cond, valid, budget, root_mode.derived(2), config.threads);
    BudgetLabels predicted = empty_labels(budget, n_test);
    // b = 0 is the marginalized prediction with no answers.
    for (std::size_t i = 0; i < n_test; ++i) {
      predicted[0][i] = static_cast<int>(argmax(acquired[i].trace.initial_prediction));
    }
    for (std::size_t b = 1; b <= budget; ++b) {
      const MaskedModel masked = retrain_masked(train, train_masks.mask(b), valid, valid_masks.mask(b),
                                                config.grid, b, derive_seed(seed, {5, b}));
      for (std::size_t i = 0; i < n_test; ++i) {
        const Vector xh = test.x_human.row(static_cast<Eigen::Index>(i)).transpose();
        const AnswerSet a = prefix_answers(acquired[i].trace.query_order(), b, xh);
        predicted[b][i] = static_cast<int>(
            argmax(predict_zero(masked, test.x_machine.row(static_cast<Eigen::Index>(i)).transpose(), a)));
      }
    }
    record(Method::entropy_retrain, predicted);
  }
  return out;
}

}  // namespace

CurveResult run_curve(const Dataset& data, const ExperimentConfig& config) {
  config.validate();
  data.validate(true);
  const bool uses_human = std::any_of(config.methods.begin(), config.methods.end(),
                                      [](Method m) { return m != Method::machine_only; });
  require(!uses_human || data.space.human_dim() > 0, ErrorCode::configuration,
          "selected methods need human features at training time");

  const std::uint64_t before = fingerprint(data);
  CurveResult result;
  result.metadata = config.describe();
  result.metadata["dataset_fingerprint"] = std::to_string(before);
  result.metadata["machine_dim"] = std::to_string(data.space.machine_dim());
  result.metadata["human_dim"] = std::to_string(data.space.human_dim());
  result.metadata["num_instances"] = std::to_string(data.size());
  if (config.budget > data.space.human_dim()) {
    result.metadata["budget_clamped_to"] = std::to_string(data.space.human_dim());
  }

  for (std::size_t r = 0; r < config.restarts; ++r) {
    auto out = run_restart(data, config, r);
    // Table rows follow the configured method order.
    for (auto m : config.methods) {
      for (const auto& [method, f1] : out.f1) {
        if (method != m) continue;
        for (std::size_t b = 0; b < f1.size(); ++b) result.table.add(m, b, r, f1[b]);
      }
    }
    for (auto& t : out.traces) result.traces.push_back(std::move(t));
    if (out.selection_ranking) result.selection_rankings.push_back(std::move(*out.selection_ranking));
  }
  require(fingerprint(data) == before, ErrorCode::invalid_input, "dataset changed during the run");
  return result;
}

CurveResult run_followup(const Dataset& data, const FeatureRanking& ranking,
                         const ExperimentConfig& config, std::size_t promote) {
  require(ranking.dims.size() >= promote, ErrorCode::configuration,
          "ranking has " + std::to_string(ranking.dims.size()) + " entries, need " + std::to_string(promote));
  ranking.validate(data.space.human_dim());
  const auto dims = ranking.prefix(promote);
  const Dataset moved = promote_human_features(data, dims);
  auto result = run_curve(moved, config);
  std::string names;
  for (auto d : dims) names += (names.empty() ? "" : ";") + data.space.human_names[d];
  result.metadata["promoted_features"] = names;
  return result;
}

std::string traces_to_jsonl(const std::vector<InstanceTrace>& traces, const FeatureSpace& space) {
  std::string out;
  for (const auto& t : traces) {
    json steps = json::array();
    for (const auto& s : t.trace.steps) {
      json cands = json::array();
      for (const auto& c : s.candidates) {
        cands.push_back({{"dimension", c.dimension}, {"expected_entropy", c.expected_entropy}});
      }
      steps.push_back({{"dimension", s.dimension},
                       {"name", s.dimension < space.human_dim() ? space.human_names[s.dimension] : ""},
                       {"answer", s.answer},
                       {"free_choice", s.free_choice},
                       {"prediction", detail::flatten(s.prediction.transpose())},
                       {"candidates", cands}});
    }
    json line = {{"method", std::string(to_string(t.method))},
                 {"restart", t.restart},
                 {"instance", t.instance},
                 {"x_machine", detail::flatten(t.x_machine.transpose())},
                 {"initial_prediction", detail::flatten(t.trace.initial_prediction.transpose())},
                 {"steps", steps}};
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<InstanceTrace> parse_traces_jsonl(std::string_view text, const FeatureSpace& space) {
  std::vector<InstanceTrace> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string what = "trace line " + std::to_string(line_no);
    const json j = detail::parse_json(line, what);
    out.push_back(detail::guarded(what, [&] {
      InstanceTrace t;
      t.method = parse_method(j.at("method").get<std::string>());
      t.restart = j.at("restart").get<std::size_t>();
      t.instance = j.at("instance").get<std::size_t>();
      const auto& xm = j.at("x_machine");
      t.x_machine = detail::vector_from(xm, static_cast<Eigen::Index>(xm.size()), "x_machine");
      require(t.x_machine.size() == static_cast<Eigen::Index>(space.machine_dim()), ErrorCode::parse,
              what + ": machine vector does not match the feature space");
      const auto& ip = j.at("initial_prediction");
      t.trace.initial_prediction = detail::vector_from(ip, static_cast<Eigen::Index>(ip.size()), "prediction");
      for (const auto& s : j.at("steps")) {
        AcquisitionStep step;
        step.dimension = s.at("dimension").get<std::size_t>();
        require(step.dimension < space.human_dim(), ErrorCode::parse, what + ": dimension out of range");
        step.answer = s.at("answer").get<int>();
        step.free_choice = s.value("free_choice", false);
        const auto& p = s.at("prediction");
        step.prediction = detail::vector_from(p, static_cast<Eigen::Index>(p.size()), "prediction");
        for (const auto& c : s.at("candidates")) {
          step.candidates.push_back({c.at("dimension").get<std::size_t>(), c.at("expected_entropy").get<double>()});
        }
        t.trace.steps.push_back(std::move(step));
      }
      return t;
    }));
  }
  return out;
}

}  // namespace hfq
