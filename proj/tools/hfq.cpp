// hfq: command-line front end for preprocessing, training, experiments and
// the session service.
#include "hfq/bench/experiment.hpp"
#include "hfq/bench/heatmap.hpp"
#include "hfq/bench/toy.hpp"
#include "hfq/data/birds.hpp"
#include "hfq/data/dataset_io.hpp"
#include "hfq/data/recipe.hpp"
#include "hfq/data/split.hpp"
#include "hfq/data/synthetic.hpp"
#include "hfq/error.hpp"
#include "hfq/model_io.hpp"
#include "hfq/pipeline.hpp"
#include "hfq/random.hpp"
#include "hfq/service/http_server.hpp"
#include "hfq/service/session_manager.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using hfq::ErrorCode;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct CurveFlags {
  std::string data;
  std::string dataset_id;
  std::vector<std::string> methods;
  std::size_t budget = 10;
  std::size_t samples = 5000;
  std::size_t restarts = 10;
  std::string mode = "mc";
  bool reuse = false;
  std::size_t threads = 0;
  bool no_traces = false;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  hfq::require(in.good(), ErrorCode::io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  hfq::require(out.good(), ErrorCode::io, "cannot write " + p.string());
  out << text;
}

hfq::MarginalMode::Kind parse_mode(const std::string& s) {
  if (s == "exact") return hfq::MarginalMode::Kind::exact;
  hfq::require(s == "mc", ErrorCode::configuration, "mode must be exact or mc");
  return hfq::MarginalMode::Kind::monte_carlo;
}

void add_curve_flags(CLI::App* cmd, CurveFlags& f, Common& c) {
  cmd->add_option("--data", f.data, "Canonical dataset document")->required();
  cmd->add_option("--dataset-id", f.dataset_id, "Label recorded in the result metadata");
  cmd->add_option("--methods", f.methods, "Subset of methods (default: all)")->delimiter(',');
  cmd->add_option("--budget", f.budget, "Query budget B")->capture_default_str();
  cmd->add_option("--samples", f.samples, "Monte Carlo samples S")->capture_default_str();
  cmd->add_option("--restarts", f.restarts, "Random restarts R")->capture_default_str();
  cmd->add_option("--mode", f.mode, "exact or mc")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Root seed")->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads (0 = hardware)");
  cmd->add_flag("--reuse-selection-hyperparameters", f.reuse,
                "Forward selection reuses the previous step's hyperparameters");
  cmd->add_flag("--no-traces", f.no_traces, "Skip the per-instance trace archive");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

hfq::ExperimentConfig to_config(const CurveFlags& f, const Common& c) {
  hfq::ExperimentConfig cfg;
  cfg.dataset_id = f.dataset_id.empty() ? fs::path(f.data).stem().string() : f.dataset_id;
  if (!f.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : f.methods) cfg.methods.push_back(hfq::parse_method(m));
  }
  cfg.budget = f.budget;
  cfg.samples = f.samples;
  cfg.restarts = f.restarts;
  cfg.seed = c.seed;
  cfg.mode = parse_mode(f.mode);
  cfg.reuse_selection_hyperparameters = f.reuse;
  cfg.record_traces = !f.no_traces;
  cfg.threads = f.threads;
  return cfg;
}

void write_curve(const hfq::CurveResult& r, const hfq::FeatureSpace& space, const fs::path& out) {
  write_file(out / "results.csv", r.table.to_csv(r.metadata));
  if (!r.traces.empty()) write_file(out / "traces.jsonl", hfq::traces_to_jsonl(r.traces, space));
  for (std::size_t i = 0; i < r.selection_rankings.size(); ++i) {
    write_file(out / ("selection_ranking_" + std::to_string(i) + ".json"),
               hfq::serialize(r.selection_rankings[i], space));
  }
  for (const auto& s : r.table.summary()) {
    std::cout << hfq::to_string(s.method) << " b=" << s.budget << " f1=" << s.mean << " se=" << s.standard_error
              << "\n";
  }
}

void write_preprocessed(const hfq::PreprocessedDataset& p, const std::string& name, const fs::path& out) {
  fs::create_directories(out);
  hfq::save_dataset(p.data, out / "dataset.json", name);
  nlohmann::json split = {{"rule", p.split.rule == hfq::SplitSpec::Rule::word_count ? "word_count" : "color_lexicon"},
                          {"word_threshold", p.split.word_threshold},
                          {"lexicon", p.split.lexicon},
                          {"features", p.split.features},
                          {"machine_indices", p.split.machine_indices},
                          {"human_indices", p.split.human_indices}};
  write_file(out / "split_spec.json", split.dump(1) + "\n");
  std::cout << name << ": " << p.data.size() << " instances, " << p.data.space.machine_dim() << " machine + "
            << p.data.space.human_dim() << " human features, " << p.data.space.num_classes() << " classes\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Test-time acquisition of human features"};
  app.require_subcommand(1);
  Common c;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate raw corpus files and report counts");
  std::string ingest_kind, input, attributes, labels;
  ingest->add_option("kind", ingest_kind, "recipe or birds")->required()->check(CLI::IsMember({"recipe", "birds"}));
  ingest->add_option("--input", input, "Recipe train file");
  ingest->add_option("--attributes", attributes, "Bird attribute table");
  ingest->add_option("--labels", labels, "Bird label table");
  ingest->callback([&] {
    if (ingest_kind == "recipe") {
      const auto recs = hfq::ingest_recipe(input);
      std::set<std::string> cuisines, ingredients;
      std::size_t labelled = 0;
      for (const auto& r : recs) {
        if (r.cuisine) {
          ++labelled;
          cuisines.insert(*r.cuisine);
        }
        ingredients.insert(r.ingredients.begin(), r.ingredients.end());
      }
      std::cout << recs.size() << " records, " << labelled << " labelled, " << cuisines.size() << " cuisines, "
                << ingredients.size() << " distinct ingredients\n";
    } else {
      const auto t = hfq::ingest_birds(attributes, labels);
      std::set<std::string> fine;
      for (const auto& r : t.records) fine.insert(r.label);
      std::cout << t.records.size() << " images, " << t.attribute_names.size() << " attributes, " << fine.size()
                << " fine labels\n";
    }
  });

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Build a canonical dataset document");
  pre->require_subcommand(1);
  auto* pre_recipe = pre->add_subcommand("recipe", "Recipe corpus");
  hfq::RecipeOptions ropts;
  pre_recipe->add_option("--input", input, "Recipe train file")->required();
  pre_recipe->add_option("--fraction", ropts.subsample_fraction, "Stratified subsample fraction")->capture_default_str();
  pre_recipe->add_option("--min-positive", ropts.min_positive, "Feature pruning threshold")->capture_default_str();
  pre_recipe->add_option("--seed", c.seed, "Subsample seed");
  pre_recipe->add_option("--out", c.out, "Output directory");
  pre_recipe->callback([&] {
    write_preprocessed(hfq::preprocess_recipe(hfq::ingest_recipe(input), c.seed, ropts), "recipe", c.out);
  });

  auto* pre_birds = pre->add_subcommand("birds", "Bird attribute corpus");
  hfq::BirdOptions bopts;
  std::string lexicon = std::string(HFQ_DATA_DIR) + "/color_lexicon.txt";
  std::string mapping;
  pre_birds->add_option("--attributes", attributes, "Attribute table")->required();
  pre_birds->add_option("--labels", labels, "Label table")->required();
  pre_birds->add_option("--lexicon", lexicon, "Color lexicon")->capture_default_str();
  pre_birds->add_option("--label-mapping", mapping, "Fine-to-coarse label mapping");
  pre_birds->add_option("--min-class-count", bopts.min_class_count)->capture_default_str();
  pre_birds->add_option("--min-positive", bopts.min_positive)->capture_default_str();
  pre_birds->add_option("--seed", c.seed);
  pre_birds->add_option("--out", c.out, "Output directory");
  pre_birds->callback([&] {
    if (!mapping.empty()) bopts.label_mapping = hfq::parse_label_mapping(read_file(mapping));
    write_preprocessed(hfq::preprocess_birds(hfq::ingest_birds(attributes, labels), hfq::load_word_list(lexicon),
                                             c.seed, bopts),
                       "birds", c.out);
  });

  auto* pre_planted = pre->add_subcommand("planted", "Synthetic planted-relevance data");
  hfq::PlantedOptions popts;
  pre_planted->add_option("--n", popts.n)->capture_default_str();
  pre_planted->add_option("--machine-dim", popts.machine_dim)->capture_default_str();
  pre_planted->add_option("--human-dim", popts.human_dim)->capture_default_str();
  pre_planted->add_option("--relevant", popts.relevant)->capture_default_str();
  pre_planted->add_option("--classes", popts.num_classes)->capture_default_str();
  pre_planted->add_option("--seed", c.seed);
  pre_planted->add_option("--out", c.out, "Output directory");
  pre_planted->callback([&] {
    const auto d = hfq::make_planted(popts, c.seed);
    fs::create_directories(c.out);
    hfq::save_dataset(d, fs::path(c.out) / "dataset.json", "planted");
    std::cout << "planted: " << d.size() << " instances\n";
  });

  // split
  auto* split = app.add_subcommand("split", "Stratified 2/3, 1/6, 1/6 split");
  std::string data;
  split->add_option("--data", data)->required();
  split->add_option("--seed", c.seed);
  split->add_option("--out", c.out);
  split->callback([&] {
    const auto s = hfq::stratified_split(hfq::load_dataset(data), c.seed);
    fs::create_directories(c.out);
    hfq::save_dataset(s.train, fs::path(c.out) / "train.json", "train");
    hfq::save_dataset(s.valid, fs::path(c.out) / "valid.json", "valid");
    hfq::save_dataset(s.test, fs::path(c.out) / "test.json", "test");
    std::cout << s.train.size() << "/" << s.valid.size() << "/" << s.test.size() << "\n";
  });

  // train
  auto* train = app.add_subcommand("train", "Train a model bundle for the service");
  std::size_t masked_budget = 0, samples = 5000, threads = 0;
  std::string mode = "mc", name;
  train->add_option("--data", data, "Dataset; split with --seed")->required();
  train->add_option("--name", name, "Bundle name (default: dataset file stem)");
  train->add_option("--masked-budget", masked_budget, "Retrain masked models for budgets 1..B");
  train->add_option("--mode", mode)->capture_default_str();
  train->add_option("--samples", samples)->capture_default_str();
  train->add_option("--threads", threads);
  train->add_option("--seed", c.seed);
  train->add_option("--out", c.out);
  train->callback([&] {
    const auto s = hfq::stratified_split(hfq::load_dataset(data), c.seed);
    hfq::BundleOptions o;
    o.masked_budget = masked_budget;
    o.mode = parse_mode(mode) == hfq::MarginalMode::Kind::exact
                 ? hfq::MarginalMode::exact()
                 : hfq::MarginalMode::monte_carlo(samples, hfq::derive_seed(c.seed, {2}));
    o.seed = c.seed;
    o.threads = threads;
    const std::string id = name.empty() ? fs::path(data).stem().string() : name;
    const auto bundle = hfq::train_bundle(id, s.train, s.valid, o);
    fs::create_directories(c.out);
    hfq::save_model_bundle(bundle, fs::path(c.out) / (id + ".json"));
    std::cout << "wrote " << (fs::path(c.out) / (id + ".json")).string() << "\n";
  });

  // curve
  CurveFlags cf;
  auto* curve = app.add_subcommand("curve", "Budget sweep over methods and restarts");
  add_curve_flags(curve, cf, c);
  curve->callback([&] {
    const auto d = hfq::load_dataset(cf.data);
    write_curve(hfq::run_curve(d, to_config(cf, c)), d.space, c.out);
  });

  // followup
  CurveFlags ff;
  std::string ranking;
  std::size_t promote = 6;
  auto* follow = app.add_subcommand("followup", "Promote ranked human features and rerun the curve");
  add_curve_flags(follow, ff, c);
  follow->add_option("--ranking", ranking, "Feature ranking document")->required();
  follow->add_option("--promote", promote)->capture_default_str();
  follow->callback([&] {
    const auto d = hfq::load_dataset(ff.data);
    const auto r = hfq::parse_feature_ranking(read_file(ranking), d.space);
    const auto result = hfq::run_followup(d, r, to_config(ff, c), promote);
    write_curve(result, hfq::promote_human_features(d, r.prefix(promote)).space, c.out);
  });

  // heatmap
  auto* heat = app.add_subcommand("heatmap", "P(query human feature | machine feature) from traces");
  std::string traces;
  std::size_t restart = 0, top = 20;
  heat->add_option("--data", data, "Dataset the curve ran on")->required();
  heat->add_option("--traces", traces, "traces.jsonl from curve")->required();
  heat->add_option("--seed", c.seed, "Root seed of the curve run");
  heat->add_option("--restart", restart)->capture_default_str();
  heat->add_option("--top", top)->capture_default_str();
  heat->add_option("--out", c.out);
  heat->callback([&] {
    const auto d = hfq::load_dataset(data);
    const auto test = hfq::stratified_split(d, hfq::derive_seed(c.seed, {restart})).test;
    auto all = hfq::parse_traces_jsonl(read_file(traces), d.space);
    std::vector<hfq::InstanceTrace> picked;
    for (auto& t : all) {
      if (t.restart == restart) picked.push_back(std::move(t));
    }
    write_file(fs::path(c.out) / "heatmap.csv", hfq::query_heatmap(picked, test, top).to_csv());
  });

  // toy
  auto* toy = app.add_subcommand("toy", "Six-point demonstration that needs both features");
  toy->callback([&] {
    const auto r = hfq::analyze_toy(hfq::make_toy_fig1());
    auto errs = [](const std::vector<std::size_t>& e) {
      std::string s;
      for (auto i : e) s += (s.empty() ? "" : ",") + std::to_string(i);
      return "{" + s + "}";
    };
    std::cout << "joint model correct: " << r.joint_correct << "/" << r.num_points << "\n"
              << "machine rule x " << (r.machine_rule.above ? ">" : "<=") << " " << r.machine_rule.threshold
              << ": " << r.machine_rule.correct << "/" << r.num_points << " errors " << errs(r.machine_rule.errors)
              << "\n"
              << "human rule y " << (r.human_rule.above ? ">" : "<=") << " " << r.human_rule.threshold << ": "
              << r.human_rule.correct << "/" << r.num_points << " errors " << errs(r.human_rule.errors) << "\n"
              << "identical error sets: " << (r.identical_errors ? "yes" : "no") << "\n"
              << "mixtures fixing a shared error: " << r.mixtures_fixing_any_shared_error << "/"
              << r.mixtures_checked << "\n";
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the session service");
  hfq::SessionConfig sc;
  std::string host = "127.0.0.1", models_dir, event_log;
  int port = 8080;
  long idle = 3600;
  bool free_mode = false;
  auto env = [](const char* k, const std::string& fallback) {
    const char* v = std::getenv(k);
    return v ? std::string(v) : fallback;
  };
  host = env("HFQ_BIND", host);
  models_dir = env("HFQ_MODEL_DIR", models_dir);
  serve->add_option("--host", host, "Bind address (env HFQ_BIND)")->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--models", models_dir, "Directory of model bundles (env HFQ_MODEL_DIR)");
  serve->add_option("--budget", sc.default_budget, "Default session budget")->capture_default_str();
  serve->add_option("--samples", sc.samples)->capture_default_str();
  serve->add_option("--mode", mode)->capture_default_str();
  serve->add_option("--seed", sc.seed);
  serve->add_option("--idle-timeout", idle, "Seconds before idle sessions expire")->capture_default_str();
  serve->add_option("--event-log", event_log, "Append-only session log for recovery");
  serve->add_flag("--free", free_mode, "Allow answering any unanswered dimension");
  serve->callback([&] {
    hfq::require(!models_dir.empty(), ErrorCode::configuration, "--models (or HFQ_MODEL_DIR) is required");
    sc.mode = parse_mode(mode);
    sc.idle_timeout = std::chrono::seconds(idle);
    sc.strict = !free_mode;
    if (!event_log.empty()) sc.event_log = event_log;
    hfq::SessionManager sessions(sc);
    const auto n = sessions.load_models(models_dir);
    const auto replayed = sessions.recover();
    hfq::HttpServer server(sessions);
    const int bound = server.bind(host, port);
    std::cout << "loaded " << n << " model(s), replayed " << replayed << " event(s); listening on " << host << ":"
              << bound << std::endl;
    server.listen();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hfq::Error& e) {
    std::cerr << nlohmann::json{{"error", {{"code", std::string(hfq::to_string(e.code())) }, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
}
