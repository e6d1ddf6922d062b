// fekete_flow: run formation scenarios, analyse trajectories, list builtins.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "fekete/fekete.hpp"

namespace fs = std::filesystem;
using namespace fekete;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitNonConverged = 3;

Scenario resolve(const std::string& arg) {
  if (fs::exists(arg)) return load_scenario(arg);
  if (is_builtin(arg)) return builtin_scenario(arg);
  throw Error(ErrorKind::InvalidArgument, "'" + arg + "' is neither a scenario file nor a builtin scenario");
}

// "cycle:10", "complete:6", "line:5", "thomsen", "moser_spindle" or a JSON
// file {"n": .., "edges": [[i, j, w], ...]}.
WeightedGraph parse_graph(const std::string& spec) {
  if (fs::exists(spec)) {
    std::ifstream in(spec);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(spec, 0, 0, e.what());
    }
    detail::only_keys(j, "graph", {"n", "edges"});
    GraphDesc g;
    g.builder = "explicit";
    g.n = detail::get<int>(j, "n", "graph", 0);
    if (j.contains("edges")) g.edges = detail::parse_edges(j.at("edges"), "graph.edges");
    return g.build();
  }
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  int n = 0;
  if (colon != std::string::npos) {
    try {
      n = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("--graph", "bad vertex count in '" + spec + "'");
    }
  }
  GraphDesc g{name, n, {}, {}};
  if (name == "thomsen" || name == "moser_spindle") g.n = g.vertex_count();
  return g.build();
}

int cmd_run(const std::vector<std::string>& inputs, std::string out, std::optional<std::uint64_t> seed, int jobs,
            bool quiet) {
  if (out.empty()) {
    const char* env = std::getenv("FEKETE_FLOW_OUT");
    out = env && *env ? env : "fekete_out";
  }
  std::vector<Scenario> scenarios;
  for (const auto& a : inputs) {
    Scenario s = resolve(a);
    if (seed) s.init.seed = *seed;
    scenarios.push_back(std::move(s));
  }
  std::vector<RunResult> results(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t k; (k = next++) < scenarios.size();) {
      results[k] = run_scenario(scenarios[k], out);
      const RunResult& r = results[k];
      std::lock_guard<std::mutex> lock(io);
      std::cout << r.name << ": " << to_string(r.status);
      if (r.status == RunStatus::Error) std::cout << " (" << r.error << ")";
      else std::cout << " at t = " << r.t_final << ", |rhs| = " << r.final_rhs_norm;
      std::cout << "\n";
      if (!quiet && !r.output_dir.empty()) std::cout << "  output: " << r.output_dir.string() << "\n";
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, int(scenarios.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitConverged;
  for (const auto& r : results) {
    if (r.status == RunStatus::Error) return kExitError;
    if (r.status == RunStatus::NonConverged) code = kExitNonConverged;
  }
  return code;
}

int cmd_report(const std::string& csv, const std::string& graph) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + csv);
  const TrajectoryTable t = read_trajectory_csv(in, csv);
  if (t.dim != 2) throw ValidationError("trajectory", "equilibrium reports need planar trajectories");
  const WeightedGraph g = parse_graph(graph);
  if (g.size() != t.agents())
    throw ValidationError("--graph", "graph has " + std::to_string(g.size()) + " vertices, trajectory has " +
                                         std::to_string(t.agents()) + " agents");
  const EquilibriumReport r = planar_report(ManifoldDesc{}, g, t.positions.back(), "FINAL_STATE");
  std::cout << report_to_json(r).dump(2) << "\n";
  return 0;
}

int cmd_list(bool write, const std::string& dir) {
  for (const auto& name : builtin_names()) {
    const Scenario s = builtin_scenario(name);
    std::cout << name << "  " << s.description << "\n";
    if (write) {
      fs::create_directories(dir);
      std::ofstream os(fs::path(dir) / (name + ".json"));
      os << write_scenario(s);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fekete-point formation control: scenario runner and equilibrium analysis"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Integrate scenarios (files or builtin names)");
  std::vector<std::string> inputs;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool quiet = false;
  run->add_option("scenarios", inputs, "Scenario JSON files or builtin names")->required();
  run->add_option("--out", out, "Output root (default: $FEKETE_FLOW_OUT or ./fekete_out)");
  run->add_option("--seed", seed, "Override the initialization seed");
  run->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "Only print one status line per run");

  auto* report = app.add_subcommand("report", "Equilibrium report of the last state in a trajectory CSV");
  std::string csv, graph;
  report->add_option("trajectory", csv, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  report->add_option("--graph", graph, "cycle:N | complete:N | line:N | thomsen | moser_spindle | graph.json")
      ->required();

  auto* list = app.add_subcommand("list-examples", "List builtin scenarios");
  std::string write_dir;
  list->add_option("--write", write_dir, "Also write each builtin as JSON into this directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(inputs, out, seed, jobs, quiet);
    if (*report) return cmd_report(csv, graph);
    if (*list) return cmd_list(!write_dir.empty(), write_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
