#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "reann/error.hpp"
#include "reann/pipeline.hpp"
#include "reann/ruleset_eval.hpp"
#include "checks.hpp"

namespace fs = std::filesystem;
using namespace reann;

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<int> runs;
  std::optional<long long> seed;
  std::string network;
  std::string clusters;
  std::string rules;
  std::string predictions;
  std::string suite = "all";
  int trials = 0;
};

PipelineConfig configure(const Options& o) {
  PipelineConfig cfg = load_pipeline_config(o.config);
  if (o.out) cfg.out_dir = *o.out;
  if (o.runs) cfg.runs = *o.runs;
  if (o.seed) {
    if (*o.seed < 0) throw InvalidConfig("--seed must be non-negative");
    cfg.base_seed = static_cast<std::uint64_t>(*o.seed);
  }
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_kv(const fs::path& path, const KeyValueFile& kv) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  kv.write(out);
}

RuleSet read_rules(const fs::path& path, const PreparedData& p) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open " + path.string());
  return parse_rules(in, p.data.attributes, p.data.class_names, path.string());
}

int cmd_run(const Options& o) {
  const PipelineConfig cfg = configure(o);
  const PreparedData prepared = prepare_data(cfg);
  fs::create_directories(cfg.out_dir);
  std::vector<KeyValueFile> reports;
  for (int i = 0; i < cfg.runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const RunResult r = run_once(prepared, cfg, i);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const fs::path dir = cfg.out_dir / run_directory_name(i);
    write_run_outputs(r, prepared, dir);
    reports.push_back(KeyValueFile::read(dir / "report.txt"));
    if (r.ok)
      fmt::print("{} seed={} seconds={:.3f} connections={} inputs={} rules={} test_accuracy={:.4f}\n",
                 run_directory_name(i), r.seed, seconds, r.final_arch.connections, r.final_arch.inputs,
                 r.rules.count_with_default(), r.rules_test_accuracy);
    else
      fmt::print("{} seed={} seconds={:.3f} error={}\n", run_directory_name(i), r.seed, seconds, r.error);
  }
  const KeyValueFile summary = aggregate(reports);
  write_kv(cfg.out_dir / "summary.txt", summary);
  if (summary.contains("best.run"))
    fmt::print("best run {} rules.count {} rules.test_accuracy {}\n", summary.at("best.run"),
               summary.at("best.rules.count"), summary.at("best.rules.test_accuracy"));
  return 0;
}

int cmd_train(const Options& o) {
  const PipelineConfig cfg = configure(o);
  const PreparedData p = prepare_data(cfg);
  const GrowthResult g = grow(p.train, seeded(cfg.train, cfg.base_seed), cfg.growth);
  fs::create_directories(cfg.out_dir);
  save_network(g.network, cfg.out_dir / "network.txt");
  emit_error_curve(g.trace, cfg.out_dir / "curve.csv");
  KeyValueFile kv;
  kv.set("seed", std::to_string(cfg.base_seed));
  const Architecture a = describe(g.network);
  kv.set("nodes", std::to_string(a.nodes));
  kv.set("connections", std::to_string(a.connections));
  kv.set("hidden", std::to_string(a.hidden));
  for (std::size_t i = 0; i < g.log.size(); ++i)
    kv.set(fmt::format("growth.{}", i + 1), fmt::format("hidden {} sse {} {}", g.log[i].hidden,
                                                        exact_decimal(g.log[i].sse),
                                                        g.log[i].accepted ? "accepted" : "rejected"));
  kv.set("epochs_run", std::to_string(g.trace.epochs_run));
  kv.set("train_accuracy", exact_decimal(accuracy(g.network, p.train)));
  kv.set("test_accuracy", exact_decimal(accuracy(g.network, p.test)));
  write_kv(cfg.out_dir / "report.txt", kv);
  kv.write(std::cout);
  return 0;
}

int cmd_prune(const Options& o) {
  const PipelineConfig cfg = configure(o);
  const PreparedData p = prepare_data(cfg);
  const Network grown = load_network(fs::path(o.network));
  const PruneStage s = prune_stage(grown, p, cfg, cfg.base_seed);
  fs::create_directories(cfg.out_dir);
  save_network(s.pruned.network, cfg.out_dir / "network.txt");
  TrainTrace trace = s.pruned.trace;
  trace.epoch_errors.insert(trace.epoch_errors.end(), s.retrain_trace.epoch_errors.begin(),
                            s.retrain_trace.epoch_errors.end());
  trace.epochs_run = static_cast<int>(trace.epoch_errors.size());
  emit_error_curve(trace, cfg.out_dir / "curve.csv");
  KeyValueFile kv;
  const Architecture before = describe(grown), after = describe(s.pruned.network);
  kv.set("initial.connections", std::to_string(before.connections));
  kv.set("final.nodes", std::to_string(after.nodes));
  kv.set("final.connections", std::to_string(after.connections));
  kv.set("final.inputs", std::to_string(after.inputs));
  kv.set("final.hidden", std::to_string(after.hidden));
  kv.set("prune.floor", exact_decimal(s.pruned.floor));
  kv.set("prune.final_retrain", s.retrain_kept ? "kept" : "discarded");
  kv.set("train_accuracy", exact_decimal(accuracy(s.pruned.network, p.train)));
  kv.set("test_accuracy", exact_decimal(accuracy(s.pruned.network, p.test)));
  write_kv(cfg.out_dir / "report.txt", kv);
  kv.write(std::cout);
  return 0;
}

int cmd_cluster(const Options& o) {
  const PipelineConfig cfg = configure(o);
  const PreparedData p = prepare_data(cfg);
  const Network net = load_network(fs::path(o.network));
  double floor = 0.0;
  const ActivationClustering c = cluster_stage(net, p, cfg, &floor);
  fs::create_directories(cfg.out_dir);
  save_clusters(c, cfg.out_dir / "clusters.txt");
  KeyValueFile kv;
  kv.set("cluster.floor", exact_decimal(floor));
  kv.set("cluster.epsilon", exact_decimal(c.epsilon));
  kv.set("discretized.train_accuracy", exact_decimal(discretized_accuracy(net, c, p.train)));
  kv.set("discretized.test_accuracy", exact_decimal(discretized_accuracy(net, c, p.test)));
  write_kv(cfg.out_dir / "report.txt", kv);
  kv.write(std::cout);
  return 0;
}

int cmd_extract(const Options& o) {
  const PipelineConfig cfg = configure(o);
  const PreparedData p = prepare_data(cfg);
  const Network net = load_network(fs::path(o.network));
  const ActivationClustering c = load_clusters(fs::path(o.clusters), net, p.train);
  const Extraction e = extract_stage(net, c, p, cfg);
  fs::create_directories(cfg.out_dir);
  const std::string text = format_rules(e.rules, p.data.attributes, p.data.class_names);
  write_text(cfg.out_dir / "rules.txt", text);
  std::cout << text;
  return 0;
}

int cmd_eval(const Options& o) {
  const PipelineConfig cfg = configure(o);
  const PreparedData p = prepare_data(cfg);
  RuleSet rs = read_rules(o.rules, p);
  refresh_statistics(rs, to_table(p.train));
  KeyValueFile kv;
  for (const auto& [name, view] : {std::pair{"train", p.train}, std::pair{"test", p.test}}) {
    const EvalReport e = evaluate(rs, view);
    kv.set(fmt::format("{}.accuracy", name), exact_decimal(e.accuracy));
    kv.set(fmt::format("{}.default_used", name), std::to_string(e.default_used));
    for (const auto& t : e.per_rule)
      kv.set(fmt::format("{}.rule.{}", name, t.rule), fmt::format("matched {} correct {}", t.matched, t.correct));
    if (!o.network.empty() && !o.clusters.empty()) {
      const Network net = load_network(fs::path(o.network));
      const ActivationClustering c = load_clusters(fs::path(o.clusters), net, p.train);
      kv.set(fmt::format("{}.fidelity", name), exact_decimal(fidelity(rs, net, c, view)));
    }
  }
  kv.set("rules.count", std::to_string(rs.count_with_default()));
  kv.set("conflict_free.train", conflict_free(rs, to_table(p.train)) ? "true" : "false");
  if (!o.predictions.empty()) {
    std::string text;
    for (const auto& [name, view] : {std::pair{"train", p.train}, std::pair{"test", p.test}})
      for (std::size_t i = 0; i < view.size(); ++i)
        text += fmt::format("{} {} {}\n", name, i, p.data.class_names.at(static_cast<std::size_t>(classify(rs, view.features(i)))));
    write_text(o.predictions, text);
  }
  kv.write(std::cout);
  return 0;
}

int cmd_report(const Options& o) {
  if (!o.out) throw InvalidConfig("report needs --out <dir>");
  const KeyValueFile summary = aggregate_directory(*o.out);
  write_kv(fs::path(*o.out) / "summary.txt", summary);
  summary.write(std::cout);
  return 0;
}

int cmd_check(const Options& o) {
  const std::uint64_t seed = o.seed ? static_cast<std::uint64_t>(*o.seed) : 1;
  auto count = [&](int fallback) { return o.trials > 0 ? o.trials : fallback; };
  bool any = false;
  auto wanted = [&](const std::string& name) {
    const bool hit = o.suite == "all" || o.suite == name;
    any = any || hit;
    return hit;
  };
  if (wanted("gradient")) checks::gradient(count(200), seed).write(std::cout);
  if (wanted("containment")) checks::containment(count(2000), seed).write(std::cout);
  if (wanted("cover")) checks::cover_oracle(count(200000), seed).write(std::cout);
  if (wanted("discretize")) checks::discretized_floor(count(500), seed).write(std::cout);
  if (!any) throw InvalidConfig("unknown check suite '" + o.suite + "'");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule extraction from trained feedforward networks"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_config = true) {
    auto* c = sub->add_option("--config", o.config, "Pipeline config file");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--runs", o.runs, "Number of runs");
    sub->add_option("--seed", o.seed, "Base seed");
  };

  auto* run = app.add_subcommand("run", "Full pipeline, every configured run");
  common(run);
  auto* train = app.add_subcommand("train", "Constructive training only");
  common(train);
  auto* prune = app.add_subcommand("prune", "Prune a trained network snapshot");
  common(prune);
  prune->add_option("--network", o.network, "network.txt to prune")->required()->check(CLI::ExistingFile);
  auto* cluster = app.add_subcommand("cluster", "Discretize hidden activations of a snapshot");
  common(cluster);
  cluster->add_option("--network", o.network, "network.txt")->required()->check(CLI::ExistingFile);
  auto* extract = app.add_subcommand("extract", "Extract rules from a network and its clusters");
  common(extract);
  extract->add_option("--network", o.network, "network.txt")->required()->check(CLI::ExistingFile);
  extract->add_option("--clusters", o.clusters, "clusters.txt")->required()->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("eval", "Evaluate a rules.txt on the configured split");
  common(eval);
  eval->add_option("--rules", o.rules, "rules.txt")->required()->check(CLI::ExistingFile);
  eval->add_option("--network", o.network, "network.txt (for fidelity)")->check(CLI::ExistingFile);
  eval->add_option("--clusters", o.clusters, "clusters.txt (for fidelity)")->check(CLI::ExistingFile);
  eval->add_option("--predictions", o.predictions, "Write the predicted class of every pattern here");
  auto* report = app.add_subcommand("report", "Recompute summary.txt from run reports");
  common(report, false);
  auto* check = app.add_subcommand("check", "Property checks on generated inputs");
  check->add_option("--suite", o.suite, "all, gradient, containment, cover or discretize");
  check->add_option("--trials", o.trials, "Cases per suite (0 keeps the default)");
  check->add_option("--seed", o.seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(o);
    if (train->parsed()) return cmd_train(o);
    if (prune->parsed()) return cmd_prune(o);
    if (cluster->parsed()) return cmd_cluster(o);
    if (extract->parsed()) return cmd_extract(o);
    if (eval->parsed()) return cmd_eval(o);
    if (report->parsed()) return cmd_report(o);
    if (check->parsed()) return cmd_check(o);
  } catch (const reann::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
