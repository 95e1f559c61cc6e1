#include "reann/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "reann/error.hpp"
#include "reann/ruleset_eval.hpp"

namespace reann {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
  train.validate();
  growth.validate();
  prune.validate();
  if (epsilon_grid.empty()) throw InvalidConfig("cluster.epsilon_grid is empty");
  for (const double e : epsilon_grid)
    if (!(e > 0.0 && e <= 2.0)) throw InvalidConfig(fmt::format("epsilon {} outside (0, 2]", e));
  if (!(cluster_eta >= 0.0 && cluster_eta <= 1.0)) throw InvalidConfig("cluster.eta outside [0, 1]");
  if (!(rule_eta >= 0.0 && rule_eta <= 1.0)) throw InvalidConfig("rules.eta outside [0, 1]");
  if (!(fidelity_eta >= 0.0 && fidelity_eta <= 1.0)) throw InvalidConfig("rules.fidelity_eta outside [0, 1]");
  if (runs < 1) throw InvalidConfig("runs must be >= 1");
  if (split.train.size() == 0) throw InvalidConfig("empty training range");
}

namespace {

IndexRange parse_range(const std::string& text, const std::string& key) {
  const auto parts = split_list(text, ',');
  if (parts.size() != 2) throw MalformedInput(key + ": expected 'begin, end'");
  const auto b = parse_integer(parts[0], key);
  const auto e = parse_integer(parts[1], key);
  if (b < 0 || e < b) throw InvalidConfig(key + ": invalid interval");
  return {static_cast<std::size_t>(b), static_cast<std::size_t>(e)};
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

PipelineConfig parse_pipeline_config(const KeyValueFile& kv, const fs::path& base_dir) {
  PipelineConfig cfg;
  cfg.dataset_path = resolve(base_dir, kv.at("dataset.path"));
  cfg.schema_path = resolve(base_dir, kv.at("dataset.schema"));
  cfg.split.train = parse_range(kv.at("split.train"), "split.train");
  cfg.split.test = parse_range(kv.at("split.test"), "split.test");

  cfg.train.learning_rate = kv.number_or("train.learning_rate", cfg.train.learning_rate);
  cfg.train.max_epochs = static_cast<int>(kv.integer_or("train.max_epochs", cfg.train.max_epochs));
  cfg.train.target_error = kv.number_or("train.target_error", cfg.train.target_error);
  if (kv.contains("train.init_range")) {
    const auto r = kv.numbers("train.init_range");
    if (r.size() != 2) throw MalformedInput("train.init_range: expected 'lower, upper'");
    cfg.train.init_lower = r[0];
    cfg.train.init_upper = r[1];
  }

  cfg.growth.improvement_threshold = kv.number_or("growth.threshold", cfg.growth.improvement_threshold);
  cfg.growth.patience_epochs = static_cast<int>(kv.integer_or("growth.patience_epochs", cfg.growth.patience_epochs));
  cfg.growth.max_hidden = static_cast<int>(kv.integer_or("growth.max_hidden", cfg.growth.max_hidden));

  const std::string mode = kv.get_or("prune.mode", "relative");
  if (mode == "relative")
    cfg.prune.mode = FloorMode::relative;
  else if (mode == "absolute")
    cfg.prune.mode = FloorMode::absolute;
  else
    throw InvalidConfig("prune.mode must be 'relative' or 'absolute'");
  cfg.prune.eta = kv.number_or("prune.eta", cfg.prune.eta);
  cfg.prune.min_accuracy = kv.number_or("prune.min_accuracy", cfg.prune.min_accuracy);
  cfg.prune.retrain_epochs = static_cast<int>(kv.integer_or("prune.retrain_epochs", cfg.prune.retrain_epochs));

  if (kv.contains("cluster.epsilon_grid")) cfg.epsilon_grid = kv.numbers("cluster.epsilon_grid");
  cfg.cluster_eta = kv.number_or("cluster.eta", cfg.cluster_eta);
  cfg.rule_eta = kv.number_or("rules.eta", cfg.rule_eta);
  cfg.fidelity_eta = kv.number_or("rules.fidelity_eta", cfg.fidelity_eta);

  cfg.runs = static_cast<int>(kv.integer_or("runs", cfg.runs));
  const auto seed = kv.integer_or("seed", static_cast<long long>(cfg.base_seed));
  if (seed < 0) throw InvalidConfig("seed must be non-negative");
  cfg.base_seed = static_cast<std::uint64_t>(seed);
  if (kv.contains("out")) cfg.out_dir = resolve(base_dir, kv.at("out"));
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  return parse_pipeline_config(KeyValueFile::read(path), path.parent_path());
}

PreparedData prepare_data(const PipelineConfig& cfg) {
  PreparedData p;
  p.schema = load_schema(cfg.schema_path);
  const Dataset raw = load(cfg.dataset_path, p.schema);
  if (cfg.split.train.end > raw.size() || cfg.split.test.end > raw.size())
    throw RangeError(fmt::format("split outside dataset of {} examples", raw.size()));
  p.data = normalize(raw, cfg.split.train);
  p.train = DatasetView(p.data, cfg.split.train);
  p.test = DatasetView(p.data, cfg.split.test);
  return p;
}

Architecture describe(const Network& net) {
  Architecture a;
  const auto live_h = net.live_hidden();
  for (Eigen::Index j = 0; j < net.hidden_count(); ++j)
    if (live_h[static_cast<std::size_t>(j)]) ++a.hidden;
  for (Eigen::Index i = 0; i < net.input_count(); ++i) {
    bool used = false;
    for (Eigen::Index j = 0; j < net.hidden_count() && !used; ++j)
      used = net.mask_ih(i, j) && live_h[static_cast<std::size_t>(j)];
    if (used) ++a.inputs;
  }
  a.nodes = a.inputs + a.hidden + static_cast<std::size_t>(net.output_count());
  a.connections = net.active_connections();
  return a;
}

TrainConfig seeded(const TrainConfig& base, std::uint64_t seed) {
  TrainConfig t = base;
  t.seed = seed;
  return t;
}

PruneStage prune_stage(const Network& grown, const PreparedData& prepared, const PipelineConfig& cfg,
                       std::uint64_t seed) {
  const TrainConfig tcfg = seeded(cfg.train, seed);
  PruneStage stage;
  stage.pruned = prune(grown, prepared.train, tcfg, cfg.prune);
  if (cfg.train.max_epochs > 0) {
    auto [retrained, trace] = train(stage.pruned.network, prepared.train, tcfg);
    const double acc = accuracy(retrained, prepared.train);
    if (acc >= stage.pruned.floor) {
      stage.pruned.network = std::move(retrained);
      stage.pruned.final_accuracy = acc;
      stage.retrain_kept = true;
      stage.retrain_trace = std::move(trace);
    }
  }
  return stage;
}

ActivationClustering cluster_stage(const Network& net, const PreparedData& prepared, const PipelineConfig& cfg,
                                   double* floor_out) {
  const double floor = accuracy(net, prepared.train) - cfg.cluster_eta;
  if (floor_out) *floor_out = floor;
  return cluster(net, prepared.train, cfg.epsilon_grid, floor);
}

Extraction extract_stage(const Network& net, const ActivationClustering& c, const PreparedData& prepared,
                         const PipelineConfig& cfg) {
  Extraction e;
  e.output_rules = extract_output_rules(c, net, prepared.train);
  e.input_rules = extract_input_rules(c, net, prepared.train);
  const RuleSet composed = compose(e.output_rules, e.input_rules, prepared.train);
  e.composed_rule_count = composed.rules.size();

  RuleFloor floor;
  floor.min_accuracy = discretized_accuracy(net, c, prepared.train) - cfg.rule_eta;
  floor.reference.reserve(prepared.train.size());
  for (std::size_t p = 0; p < prepared.train.size(); ++p)
    floor.reference.push_back(discretized_predict(net, c, prepared.train.features(p)));
  floor.min_agreement = 1.0 - cfg.fidelity_eta;
  e.rules = prune_rules(composed, prepared.train, floor);
  return e;
}

RunResult run_once(const PreparedData& prepared, const PipelineConfig& cfg, int run_index) {
  RunResult r;
  r.run = run_index;
  r.seed = cfg.base_seed + static_cast<std::uint64_t>(run_index);
  try {
    const TrainConfig tcfg = seeded(cfg.train, r.seed);
    const auto n_in = static_cast<std::size_t>(prepared.data.attribute_count());
    const auto n_out = static_cast<std::size_t>(prepared.data.class_count());
    r.initial = {n_in + 1 + n_out, n_in + n_out, n_in, 1};

    const GrowthResult grown = grow(prepared.train, tcfg, cfg.growth);
    r.growth_log = grown.log;
    r.intermediate = describe(grown.network);
    r.trace = grown.trace;

    const PruneStage pruned = prune_stage(grown.network, prepared, cfg, r.seed);
    r.prune_log = pruned.pruned.log;
    r.prune_floor = pruned.pruned.floor;
    r.final_retrain_kept = pruned.retrain_kept;
    r.trace.epoch_errors.insert(r.trace.epoch_errors.end(), pruned.pruned.trace.epoch_errors.begin(),
                                pruned.pruned.trace.epoch_errors.end());
    r.trace.epoch_errors.insert(r.trace.epoch_errors.end(), pruned.retrain_trace.epoch_errors.begin(),
                                pruned.retrain_trace.epoch_errors.end());
    r.trace.epochs_run = static_cast<int>(r.trace.epoch_errors.size());
    r.network = pruned.pruned.network;
    r.final_arch = describe(r.network);
    r.network_train_accuracy = accuracy(r.network, prepared.train);
    r.network_test_accuracy = accuracy(r.network, prepared.test);

    r.clustering = cluster_stage(r.network, prepared, cfg, &r.cluster_floor);
    r.discretized_train_accuracy = discretized_accuracy(r.network, r.clustering, prepared.train);
    r.discretized_test_accuracy = discretized_accuracy(r.network, r.clustering, prepared.test);

    Extraction ex = extract_stage(r.network, r.clustering, prepared, cfg);
    r.output_rules = std::move(ex.output_rules);
    r.input_rules = std::move(ex.input_rules);
    r.composed_rule_count = ex.composed_rule_count;
    r.rules = std::move(ex.rules);

    r.rules_train_accuracy = evaluate(r.rules, prepared.train).accuracy;
    r.rules_test_accuracy = evaluate(r.rules, prepared.test).accuracy;
    r.fidelity_train = fidelity(r.rules, r.network, r.clustering, prepared.train);
    r.fidelity_test = fidelity(r.rules, r.network, r.clustering, prepared.test);
    r.network_agreement_train = network_agreement(r.rules, r.network, prepared.train);
    r.network_agreement_test = network_agreement(r.rules, r.network, prepared.test);
    r.ok = true;
  } catch (const Error& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

namespace {

std::string num(double v) { return exact_decimal(v); }
std::string num(std::size_t v) { return std::to_string(v); }

void put_architecture(KeyValueFile& kv, const std::string& prefix, const Architecture& a) {
  kv.set(prefix + ".nodes", num(a.nodes));
  kv.set(prefix + ".connections", num(a.connections));
  kv.set(prefix + ".inputs", num(a.inputs));
  kv.set(prefix + ".hidden", num(a.hidden));
}

void put_eval(KeyValueFile& kv, const std::string& prefix, const EvalReport& e) {
  kv.set(prefix + ".accuracy", num(e.accuracy));
  kv.set(prefix + ".default_used", num(e.default_used));
  for (const auto& t : e.per_rule)
    kv.set(fmt::format("{}.rule.{}", prefix, t.rule), fmt::format("matched {} correct {}", t.matched, t.correct));
}

}  // namespace

KeyValueFile run_report(const RunResult& r, const PreparedData& prepared) {
  KeyValueFile kv;
  kv.set("dataset", prepared.schema.name);
  kv.set("run", std::to_string(r.run + 1));
  kv.set("seed", std::to_string(r.seed));
  kv.set("status", r.ok ? "ok" : "error");
  if (!r.ok) {
    kv.set("error", r.error);
    return kv;
  }
  kv.set("node_count_convention", "input + hidden + output nodes in use, bias nodes excluded");
  kv.set("train.examples", num(prepared.train.size()));
  kv.set("test.examples", num(prepared.test.size()));
  put_architecture(kv, "initial", r.initial);
  put_architecture(kv, "intermediate", r.intermediate);
  put_architecture(kv, "final", r.final_arch);
  kv.set("epochs_run", std::to_string(r.trace.epochs_run));

  for (std::size_t i = 0; i < r.growth_log.size(); ++i) {
    const auto& g = r.growth_log[i];
    kv.set(fmt::format("growth.{}", i + 1),
           fmt::format("hidden {} sse {} {}", g.hidden, num(g.sse), g.accepted ? "accepted" : "rejected"));
  }
  kv.set("prune.floor", num(r.prune_floor));
  for (std::size_t i = 0; i < r.prune_log.size(); ++i) {
    const auto& p = r.prune_log[i];
    kv.set(fmt::format("prune.{}", i + 1),
           fmt::format("{} {} {} {} weight {} accuracy {} active {}",
                       p.outcome == PruneStep::Outcome::commit ? "commit" : "rollback",
                       p.input_to_hidden ? "w_ih" : "w_ho", p.from, p.to, num(p.weight), num(p.accuracy),
                       p.active_after));
  }
  kv.set("prune.final_retrain", r.final_retrain_kept ? "kept" : "discarded");
  std::vector<std::string> removed;
  const auto live_in = r.network.live_inputs();
  for (std::size_t i = 0; i < live_in.size(); ++i)
    if (!live_in[i]) removed.push_back(attribute_display(prepared.data.attributes, i));
  std::string removed_text;
  for (std::size_t i = 0; i < removed.size(); ++i) removed_text += (i ? ", " : "") + removed[i];
  kv.set("prune.removed_inputs", removed_text.empty() ? "none" : removed_text);

  kv.set("network.train_accuracy", num(r.network_train_accuracy));
  kv.set("network.test_accuracy", num(r.network_test_accuracy));

  kv.set("cluster.floor", num(r.cluster_floor));
  kv.set("cluster.epsilon", num(r.clustering.epsilon));
  kv.set("cluster.representative_semantics", "running mean of greedy cluster members");
  std::size_t total_reps = 0;
  for (std::size_t j = 0; j < r.clustering.nodes.size(); ++j) {
    const auto& n = r.clustering.nodes[j];
    total_reps += n.representatives.size();
    std::string reps, counts;
    for (std::size_t k = 0; k < n.representatives.size(); ++k) {
      reps += (k ? " " : "") + num(n.representatives[k]);
      counts += (k ? " " : "") + num(n.counts[k]);
    }
    kv.set(fmt::format("cluster.node.{}", j + 1),
           fmt::format("connected {} epsilon {} values {} counts {}", n.connected ? 1 : 0, num(n.epsilon), reps, counts));
  }
  kv.set("cluster.representatives", num(total_reps));
  kv.set("discretized.train_accuracy", num(r.discretized_train_accuracy));
  kv.set("discretized.test_accuracy", num(r.discretized_test_accuracy));

  kv.set("rules.output_phase", num(r.output_rules.rules.size()));
  std::size_t input_phase = 0;
  for (const auto& f : r.input_rules) input_phase += f.rules.size();
  kv.set("rules.input_phase", num(input_phase));
  kv.set("rules.composed", num(r.composed_rule_count));
  kv.set("rules.count", num(r.rules.count_with_default()));
  std::size_t conditions = 0;
  for (const auto& rule : r.rules.rules) conditions += rule.conditions.size();
  kv.set("rules.conditions_mean",
         num(r.rules.rules.empty() ? 0.0 : static_cast<double>(conditions) / static_cast<double>(r.rules.rules.size())));
  kv.set("rules.train_accuracy", num(r.rules_train_accuracy));
  kv.set("rules.test_accuracy", num(r.rules_test_accuracy));
  kv.set("rules.fidelity_train", num(r.fidelity_train));
  kv.set("rules.fidelity_test", num(r.fidelity_test));
  kv.set("rules.network_agreement_train", num(r.network_agreement_train));
  kv.set("rules.network_agreement_test", num(r.network_agreement_test));
  put_eval(kv, "eval.train", evaluate(r.rules, prepared.train));
  put_eval(kv, "eval.test", evaluate(r.rules, prepared.test));
  return kv;
}

void emit_error_curve(const TrainTrace& trace, std::ostream& out) {
  out << "epoch,sse\n";
  for (std::size_t e = 0; e < trace.epoch_errors.size(); ++e)
    out << (e + 1) << ',' << exact_decimal(trace.epoch_errors[e]) << '\n';
}

void emit_error_curve(const TrainTrace& trace, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  emit_error_curve(trace, out);
}

void write_run_outputs(const RunResult& r, const PreparedData& prepared, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.txt");
    if (!out) throw Error("cannot write " + (dir / "report.txt").string());
    run_report(r, prepared).write(out);
  }
  if (!r.ok) return;
  save_network(r.network, dir / "network.txt");
  save_clusters(r.clustering, dir / "clusters.txt");
  std::ofstream rules(dir / "rules.txt");
  rules << format_rules(r.rules, prepared.data.attributes, prepared.data.class_names);
  emit_error_curve(r.trace, dir / "curve.csv");
}

const std::vector<std::string>& aggregated_fields() {
  static const std::vector<std::string> fields = {
      "initial.nodes",          "initial.connections",     "intermediate.nodes",
      "intermediate.connections", "intermediate.hidden",   "final.nodes",
      "final.connections",      "final.inputs",            "final.hidden",
      "epochs_run",             "network.train_accuracy",  "network.test_accuracy",
      "cluster.epsilon",        "cluster.representatives", "discretized.train_accuracy",
      "discretized.test_accuracy", "rules.count",          "rules.conditions_mean",
      "rules.train_accuracy",   "rules.test_accuracy",     "rules.fidelity_train",
      "rules.fidelity_test"};
  return fields;
}

KeyValueFile aggregate(const std::vector<KeyValueFile>& reports) {
  KeyValueFile out;
  std::vector<const KeyValueFile*> ok;
  for (const auto& r : reports)
    if (r.get_or("status", "") == "ok") ok.push_back(&r);
  out.set("dataset", reports.empty() ? "" : reports.front().get_or("dataset", ""));
  out.set("runs", std::to_string(reports.size()));
  out.set("runs.ok", std::to_string(ok.size()));
  out.set("node_count_convention", "input + hidden + output nodes in use, bias nodes excluded");
  if (ok.empty()) return out;

  for (const auto& field : aggregated_fields()) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto* r : ok) {
      const double v = r->number(field);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out.set(field + ".mean", exact_decimal(sum / static_cast<double>(ok.size())));
    out.set(field + ".min", exact_decimal(lo));
    out.set(field + ".max", exact_decimal(hi));
  }

  const KeyValueFile* best = ok.front();
  for (const auto* r : ok) {
    const double acc = r->number("rules.test_accuracy");
    const double best_acc = best->number("rules.test_accuracy");
    if (acc > best_acc || (acc == best_acc && r->number("rules.count") < best->number("rules.count"))) best = r;
  }
  out.set("best.run", best->at("run"));
  out.set("best.seed", best->at("seed"));
  for (const auto& field : aggregated_fields()) out.set("best." + field, best->at(field));
  for (const auto* r : ok)
    out.set("run." + r->at("run"),
            fmt::format("final.connections {} final.inputs {} rules.count {} rules.test_accuracy {}",
                        r->at("final.connections"), r->at("final.inputs"), r->at("rules.count"),
                        r->at("rules.test_accuracy")));
  return out;
}

std::string run_directory_name(int run_index) { return fmt::format("run_{:02d}", run_index + 1); }

KeyValueFile run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const PreparedData prepared = prepare_data(cfg);
  fs::create_directories(cfg.out_dir);
  std::vector<KeyValueFile> reports;
  for (int i = 0; i < cfg.runs; ++i) {
    const RunResult r = run_once(prepared, cfg, i);
    const fs::path dir = cfg.out_dir / run_directory_name(i);
    write_run_outputs(r, prepared, dir);
    reports.push_back(KeyValueFile::read(dir / "report.txt"));
  }
  KeyValueFile summary = aggregate(reports);
  std::ofstream out(cfg.out_dir / "summary.txt");
  summary.write(out);
  return summary;
}

KeyValueFile aggregate_directory(const fs::path& dir) {
  std::vector<fs::path> runs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && entry.path().filename().string().starts_with("run_") &&
        fs::exists(entry.path() / "report.txt"))
      runs.push_back(entry.path());
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) throw MalformedInput("no run_*/report.txt under " + dir.string());
  std::vector<KeyValueFile> reports;
  for (const auto& r : runs) reports.push_back(KeyValueFile::read(r / "report.txt"));
  return aggregate(reports);
}

}  // namespace reann
