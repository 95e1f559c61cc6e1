// Acceptance suite. Drives the reann command-line tool only and checks its
// outputs; prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace fs = std::filesystem;

namespace {

const fs::path kSource = REANN_SOURCE_DIR;
const std::string kCli = REANN_CLI;

struct Output {
  int status = 0;
  std::string text;
};

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Output execute(const std::string& args) {
  const std::string cmd = quote(kCli) + " " + args + " 2>&1";
  Output out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    out.status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  while (const std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.text.append(buf.data(), n);
  const int raw = pclose(pipe);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_kv(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

KeyValues read_kv(const fs::path& p) { return parse_kv(slurp(p)); }

double num(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  return it == kv.end() ? std::nan("") : std::stod(it->second);
}

struct Benchmark {
  std::string name;
  fs::path config;
  fs::path out;
  Output run;
  KeyValues summary;
  std::vector<double> seconds;
  std::vector<fs::path> run_dirs;
};

Benchmark run_benchmark(const std::string& name, const fs::path& root) {
  Benchmark b;
  b.name = name;
  b.config = kSource / "configs" / (name + ".cfg");
  b.out = root / name;
  fs::remove_all(b.out);
  b.run = execute(fmt::format("run --config {} --out {}", quote(b.config), quote(b.out)));
  const std::regex line(R"(^(run_\d+) seed=\d+ seconds=([0-9.]+))");
  std::istringstream in(b.run.text);
  for (std::string l; std::getline(in, l);) {
    std::smatch m;
    if (std::regex_search(l, m, line)) {
      b.seconds.push_back(std::stod(m[2]));
      b.run_dirs.push_back(b.out / m[1].str());
    }
  }
  if (fs::exists(b.out / "summary.txt")) b.summary = read_kv(b.out / "summary.txt");
  return b;
}

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::cout << fmt::format("{} criterion {}: {}", pass ? "PASS" : "FAIL", id, detail) << std::endl;
  if (!pass) ++failures;
}

struct Cluster {
  bool connected = true;
  std::vector<double> reps;
};

std::vector<Cluster> read_clusters(const fs::path& p) {
  std::vector<Cluster> nodes;
  std::istringstream in(slurp(p));
  for (std::string l; std::getline(in, l);) {
    std::istringstream ss(l);
    std::string kind;
    ss >> kind;
    if (kind == "node") {
      std::string idx, word, eps_word;
      int connected = 1;
      ss >> idx >> word >> connected;
      nodes.push_back({connected != 0, {}});
    } else if (kind == "rep" && !nodes.empty()) {
      int j = 0, r = 0;
      double v = 0;
      ss >> j >> r >> v;
      nodes.back().reps.push_back(v);
    }
  }
  return nodes;
}

bool bipolar_node(const fs::path& clusters) {
  for (const auto& n : read_clusters(clusters)) {
    if (!n.connected || n.reps.empty() || n.reps.size() > 4) continue;
    const auto [lo, hi] = std::minmax_element(n.reps.begin(), n.reps.end());
    if (*lo <= -0.9 && *hi >= 0.9) return true;
  }
  return false;
}

std::vector<std::string> rule_lines(const fs::path& rules, std::string& default_line) {
  std::vector<std::string> out;
  std::istringstream in(slurp(rules));
  for (std::string l; std::getline(in, l);) {
    if (l.rfind("Default Rule:", 0) == 0)
      default_line = l;
    else if (!l.empty())
      out.push_back(l.substr(l.find(": If ") + 2));
  }
  return out;
}

void write_rules(const fs::path& p, const std::vector<std::string>& bodies, const std::string& default_line) {
  std::ofstream out(p);
  for (std::size_t i = 0; i < bodies.size(); ++i) out << "Rule " << i + 1 << ": " << bodies[i] << '\n';
  out << default_line << '\n';
}

struct RuleSetCheck {
  bool ok = true;
  std::string problem;
  double min_fidelity = 1.0;
};

// Coverage, conflict-freeness, fidelity and order-permutation invariance of
// one extracted rule set, all evaluated by the CLI.
void check_rule_set(const Benchmark& b, const fs::path& dir, const fs::path& scratch, RuleSetCheck& acc) {
  auto fail = [&](const std::string& why) {
    if (acc.ok) acc.problem = fmt::format("{} {}: {}", b.name, dir.filename().string(), why);
    acc.ok = false;
  };
  const std::string base = fmt::format("eval --config {} --network {} --clusters {}", quote(b.config),
                                       quote(dir / "network.txt"), quote(dir / "clusters.txt"));
  const fs::path reference = scratch / "predictions_ref.txt";
  const Output e = execute(fmt::format("{} --rules {} --predictions {}", base, quote(dir / "rules.txt"), quote(reference)));
  if (e.status != 0) return fail("eval failed: " + e.text);
  const KeyValues kv = parse_kv(e.text);
  if (kv.count("conflict_free.train") == 0 || kv.at("conflict_free.train") != "true") fail("conflicting rules");
  for (const auto& [key, value] : kv)
    if (key.rfind("train.rule.", 0) == 0 && value.rfind("matched 0 ", 0) == 0) fail(key + " covers no training pattern");
  const double fid = num(kv, "train.fidelity");
  acc.min_fidelity = std::min(acc.min_fidelity, std::isnan(fid) ? 0.0 : fid);

  std::string default_line;
  const auto bodies = rule_lines(dir / "rules.txt", default_line);
  if (bodies.size() < 2) return;
  std::vector<std::vector<std::string>> orders;
  orders.emplace_back(bodies.rbegin(), bodies.rend());
  auto rotated = bodies;
  std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
  orders.push_back(rotated);
  const std::string expected = slurp(reference);
  for (std::size_t k = 0; k < orders.size(); ++k) {
    const fs::path permuted = scratch / "permuted_rules.txt";
    const fs::path predictions = scratch / "predictions_perm.txt";
    write_rules(permuted, orders[k], default_line);
    const Output p = execute(fmt::format("{} --rules {} --predictions {}", base, quote(permuted), quote(predictions)));
    if (p.status != 0) return fail("eval of permuted rules failed");
    if (slurp(predictions) != expected) fail(fmt::format("permutation {} changes predictions", k + 1));
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "reann_acceptance";
  fs::create_directories(root);
  const fs::path scratch = root / "scratch";
  fs::create_directories(scratch);

  const Benchmark cancer = run_benchmark("breast-cancer", root);
  const Benchmark diabetes = run_benchmark("diabetes", root);
  const Benchmark lenses = run_benchmark("lenses", root);
  for (const Benchmark* b : {&cancer, &diabetes, &lenses})
    if (b->run.status != 0 || b->run_dirs.size() != 10 || b->summary.empty())
      std::cout << fmt::format("note: {} run exited {} with {} runs\n{}", b->name, b->run.status, b->run_dirs.size(),
                               b->run.text);

  {
    const double acc = num(cancer.summary, "best.rules.test_accuracy");
    const double rules = num(cancer.summary, "best.rules.count");
    const double slowest = cancer.seconds.empty() ? INFINITY : *std::max_element(cancer.seconds.begin(), cancer.seconds.end());
    verdict(1, acc >= 0.94 && rules <= 3 && slowest < 60.0 && cancer.seconds.size() == 10,
            fmt::format("breast cancer best run {}: rule test accuracy {} (>= 0.94), rules incl. default {} (<= 3), "
                        "slowest run {:.2f} s (< 60 s)",
                        cancer.summary.count("best.run") ? cancer.summary.at("best.run") : "?", acc, rules, slowest));
  }
  {
    const double acc = num(diabetes.summary, "best.rules.test_accuracy");
    const double rules = num(diabetes.summary, "best.rules.count");
    verdict(2, acc >= 0.735 && rules <= 4,
            fmt::format("diabetes best run {}: rule test accuracy {} (>= 0.735), rules incl. default {} (<= 4)",
                        diabetes.summary.count("best.run") ? diabetes.summary.at("best.run") : "?", acc, rules));
  }
  {
    const double acc = num(lenses.summary, "best.rules.test_accuracy");
    const double rules = num(lenses.summary, "best.rules.count");
    verdict(3, acc == 1.0 && rules <= 9,
            fmt::format("lenses best run {}: rule accuracy on all 24 examples {} (= 1), rules incl. default {} (<= 9)",
                        lenses.summary.count("best.run") ? lenses.summary.at("best.run") : "?", acc, rules));
  }
  {
    const double mean = num(cancer.summary, "final.connections.mean");
    const double inputs = num(cancer.summary, "final.inputs.min");
    verdict(4, mean <= 12 && inputs <= 4,
            fmt::format("breast cancer mean final connections {} (<= 12), fewest surviving inputs {} (<= 4)", mean, inputs));
  }
  {
    std::size_t hits = 0;
    for (const auto& dir : cancer.run_dirs) hits += bipolar_node(dir / "clusters.txt") ? 1 : 0;
    const std::string best = cancer.summary.count("best.run") ? cancer.summary.at("best.run") : "0";
    const fs::path best_dir = cancer.out / fmt::format("run_{:02d}", std::stoi(best));
    const bool best_hit = fs::exists(best_dir / "clusters.txt") && bipolar_node(best_dir / "clusters.txt");
    verdict(5, best_hit,
            fmt::format("breast cancer best run {} {} a node with <= 4 representatives spanning <= -0.9 and >= 0.9 "
                        "({} of {} runs do)",
                        best, best_hit ? "has" : "lacks", hits, cancer.run_dirs.size()));
  }
  {
    const Output c = execute("check");
    const KeyValues kv = parse_kv(c.text);
    const bool gradient = num(kv, "gradient.cases") >= 100 && num(kv, "gradient.failures") == 0 &&
                          num(kv, "gradient.max_relative_error") <= 1e-4;
    const bool containment = num(kv, "containment.violations") == 0 && num(kv, "containment.values") > 0;
    const bool cover = num(kv, "cover.mismatches") == 0 && num(kv, "cover.exhaustive_tables") > 0;
    const bool discretize = num(kv, "discretize.violations") == 0 && num(kv, "discretize.succeeded") > 0;

    bool floors = true;
    std::size_t reports = 0;
    RuleSetCheck rules;
    for (const Benchmark* b : {&cancer, &diabetes, &lenses})
      for (const auto& dir : b->run_dirs) {
        const KeyValues r = read_kv(dir / "report.txt");
        if (r.count("status") == 0 || r.at("status") != "ok") continue;
        ++reports;
        if (num(r, "discretized.train_accuracy") < num(r, "cluster.floor")) floors = false;
        if (num(r, "rules.fidelity_train") < 0.98) {
          rules.ok = false;
          rules.problem = b->name + " report fidelity below 0.98";
        }
        check_rule_set(*b, dir, scratch, rules);
      }
    const bool fidelity = rules.min_fidelity >= 0.98;
    const bool pass = c.status == 0 && gradient && containment && cover && discretize && floors && rules.ok &&
                      fidelity && reports == 30;
    verdict(6, pass,
            fmt::format("gradient {} cases max rel err {} | containment {} values, {} violations | cover oracle "
                        "{} exhaustive + {} random tables, {} mismatches | discretized floor {} | {} rule sets "
                        "coverage/conflict/permutation {} | min training fidelity {}{}",
                        kv.count("gradient.cases") ? kv.at("gradient.cases") : "?",
                        kv.count("gradient.max_relative_error") ? kv.at("gradient.max_relative_error") : "?",
                        kv.count("containment.values") ? kv.at("containment.values") : "?",
                        kv.count("containment.violations") ? kv.at("containment.violations") : "?",
                        kv.count("cover.exhaustive_tables") ? kv.at("cover.exhaustive_tables") : "?",
                        kv.count("cover.random_tables") ? kv.at("cover.random_tables") : "?",
                        kv.count("cover.mismatches") ? kv.at("cover.mismatches") : "?",
                        floors && discretize ? "held" : "violated", reports, rules.ok ? "ok" : "failed",
                        rules.min_fidelity, rules.ok ? "" : " (" + rules.problem + ")"));
  }
  {
    const fs::path a = root / "determinism_a", b = root / "determinism_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const std::string args = fmt::format("run --config {} --runs 1 --seed 7 --out ", quote(cancer.config));
    const Output ra = execute(args + quote(a));
    const Output rb = execute(args + quote(b));
    bool same = ra.status == 0 && rb.status == 0;
    std::vector<std::string> compared;
    for (const char* file : {"rules.txt", "report.txt", "network.txt", "clusters.txt", "curve.csv"}) {
      const fs::path fa = a / "run_01" / file, fb = b / "run_01" / file;
      same = same && fs::exists(fa) && slurp(fa) == slurp(fb);
      compared.push_back(file);
    }
    same = same && slurp(a / "summary.txt") == slurp(b / "summary.txt");
    verdict(7, same, fmt::format("two runs with seed 7 give byte-identical {} and summary.txt: {}",
                                 fmt::join(compared, ", "), same ? "yes" : "no"));
  }

  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
