#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "vrptd/generate.hpp"
#include "vrptd/instance_io.hpp"
#include "vrptd/milp.hpp"
#include "vrptd/replay.hpp"
#include "vrptd/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace vrptd;

namespace {

struct RunArgs {
  std::string graph_path, instance_path, out_dir = ".";
  std::string metric = "dist", norm = "l1";
  std::string wb;  // empty = off, "default" or "theta,mu"
  bool rr = false;
  std::string scheduler = "td-insertion";
  std::string prophet_file, baseline_file;
  unsigned long long seed = 0;
};

SchedulerConfig sched_config(const RunArgs& args) {
  SchedulerConfig config;
  config.metric = args.metric == "time" ? LegTag::Time : LegTag::Distance;
  config.norm = args.norm == "l2" ? 2 : 1;
  config.rr_enabled = args.rr;
  if (!args.wb.empty()) {
    config.wb_enabled = true;
    if (args.wb != "default") {
      std::istringstream is(args.wb);
      char comma = ',';
      if (!(is >> config.wb_theta >> comma >> config.wb_penalty)) {
        throw CLI::ValidationError("--wb expects theta,mu");
      }
    }
  }
  return config;
}

void write_run_outputs(const fs::path& out, const Problem& problem,
                       const ReplayResult& result) {
  fs::create_directories(out);
  write_file((out / "metrics.csv").string(),
             metrics_csv_header() + "\n" + metrics_csv_row(result.metrics) + "\n");
  write_file((out / "events.jsonl").string(), events_to_jsonl(result.events));
  write_file((out / "routes.json").string(),
             routes_to_json(problem, result.fleet).dump(2) + "\n");
  // Wall-clock latencies live outside the deterministic metrics file.
  ordered_json timing{{"latency_mean_ms", result.metrics.latency_mean_ms},
                      {"latency_max_ms", result.metrics.latency_max_ms}};
  write_file((out / "timing.json").string(), timing.dump(2) + "\n");
}

int cmd_generate(const std::string& out_dir, const GenerateSpec& spec) {
  GeneratedInstance gen = generate_instance(spec);
  fs::path out(out_dir);
  fs::create_directories(out);
  write_file((out / "graph.json").string(), gen.graph.dump(2) + "\n");
  write_file((out / "instance.json").string(), gen.instance.dump(2) + "\n");
  if (spec.history_days > 0) {
    write_file((out / "history.json").string(), gen.history.dump(2) + "\n");
  }
  std::cout << "wrote " << (out / "graph.json").string() << ", instance.json"
            << (spec.history_days > 0 ? ", history.json" : "") << "\n";
  return 0;
}

int cmd_run(const RunArgs& args) {
  Problem problem = load_instance(args.graph_path, args.instance_path);

  if (!args.baseline_file.empty()) {
    auto subtours = load_baseline(args.baseline_file, problem);
    ReplayResult result = evaluate_baseline(problem, subtours);
    write_run_outputs(args.out_dir, problem, result);
    std::cout << metrics_csv_header() << "\n"
              << metrics_csv_row(result.metrics) << "\n";
    return 0;
  }

  RunConfig config;
  config.sched = sched_config(args);
  config.seed = args.seed;
  std::vector<Request> forecasts;
  if (args.scheduler == "td-prophet" || !args.prophet_file.empty()) {
    if (args.prophet_file.empty()) {
      throw CLI::ValidationError("td-prophet needs --prophet <forecast file>");
    }
    config.scheduler = RunConfig::Scheduler::Prophet;
    forecasts = load_forecasts(args.prophet_file);
  }
  ReplayResult result = replay(problem, config, forecasts);
  write_run_outputs(args.out_dir, problem, result);
  std::cout << metrics_csv_header() << "\n"
            << metrics_csv_row(result.metrics) << "\n";
  return 0;
}

RunMetrics read_metrics_file(const std::string& path) {
  std::istringstream is(read_file(path));
  std::string header, row;
  if (!std::getline(is, header) || !std::getline(is, row)) {
    throw std::runtime_error("metrics file too short: " + path);
  }
  return metrics_from_csv_row(header, row);
}

int cmd_report(const std::vector<std::string>& files,
               const std::string& baseline_variant, const std::string& out_dir) {
  std::vector<RunMetrics> runs;
  for (const auto& f : files) runs.push_back(read_metrics_file(f));
  std::size_t baseline = 0;
  if (!baseline_variant.empty()) {
    bool found = false;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      if (runs[k].variant == baseline_variant) {
        baseline = k;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error("baseline variant not among the runs: " +
                               baseline_variant);
    }
  }
  ReportTable table = build_report(runs, baseline);
  std::cout << table.text;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file((fs::path(out_dir) / "comparison.csv").string(), table.csv);
  }
  return 0;
}

std::vector<Request> real_requests_of(const Problem& problem) {
  std::vector<Request> out;
  for (int id : release_order(problem)) out.push_back(problem.request(id));
  return out;
}

int cmd_milp_export(const std::string& graph_path, const std::string& instance_path,
                    const std::string& metric, const std::string& out_dir) {
  Problem problem = load_instance(graph_path, instance_path);
  LegTag objective = metric == "time" ? LegTag::Time : LegTag::Distance;
  auto requests = real_requests_of(problem);
  PDGraph pd = build_pd_graph(requests, problem.workers);
  ScalarizedPDGraph sc = scalarize(pd, problem, objective);
  MilpModel model = build_milp(sc, problem, objective);

  fs::path out(out_dir);
  fs::create_directories(out);
  write_file((out / "model.lp").string(), emit_model(model));
  ordered_json nodes = ordered_json::array();
  for (int n = 0; n < static_cast<int>(sc.pd.nodes.size()); ++n) {
    const PDNode& node = sc.pd.nodes[n];
    const char* kind = node.kind == NodeKind::ShiftStart ? "shift_start"
                       : node.kind == NodeKind::ShiftEnd ? "shift_end"
                       : node.kind == NodeKind::Pickup   ? "pickup"
                                                         : "delivery";
    nodes.push_back(ordered_json{{"id", n}, {"kind", kind}, {"owner", node.owner}});
  }
  write_file((out / "pd_nodes.json").string(), nodes.dump(2) + "\n");
  if (!sc.diagnostics.empty()) {
    std::ostringstream os;
    for (const auto& d : sc.diagnostics) os << d << "\n";
    write_file((out / "scalarize_diagnostics.txt").string(), os.str());
  }
  std::cout << "wrote " << (out / "model.lp").string() << " ("
            << model.vars.size() << " vars, " << model.rows.size()
            << " rows)\n";
  return 0;
}

int cmd_milp_check(const std::string& graph_path, const std::string& instance_path,
                   const std::string& metric, const std::string& solutions_file,
                   bool use_oracle, const std::string& out_dir) {
  Problem problem = load_instance(graph_path, instance_path);
  LegTag objective = metric == "time" ? LegTag::Time : LegTag::Distance;
  auto requests = real_requests_of(problem);
  PDGraph pd = build_pd_graph(requests, problem.workers);
  ScalarizedPDGraph sc = scalarize(pd, problem, objective);

  std::vector<std::vector<Subtour>> candidates;
  if (use_oracle) {
    TinySolution sol = solve_exact_tiny(sc, problem, objective);
    if (!sol.feasible) throw std::runtime_error("oracle found no solution");
    std::vector<Subtour> subtours;
    for (std::size_t w = 0; w < problem.workers.size(); ++w) {
      subtours.push_back(subtour_from_nodes(problem, pd, problem.workers[w].id,
                                            sol.nodes_per_worker[w]));
    }
    candidates.push_back(std::move(subtours));
    std::cout << "oracle objective: " << sol.objective << "\n";
  }
  if (!solutions_file.empty()) {
    json doc = json::parse(read_file(solutions_file));
    const json& list = doc.is_object() && doc.contains("solutions")
                           ? doc["solutions"]
                           : doc;
    // Either one solution (array of worker entries) or a list of them.
    auto parse_solution = [&](const json& sol) {
      std::vector<Subtour> subtours;
      for (const auto& entry : sol) {
        std::vector<int> ids;
        for (const auto& n : entry["nodes"]) ids.push_back(n.get<int>());
        subtours.push_back(subtour_from_nodes(problem, pd,
                                              entry["worker"].get<int>(), ids));
      }
      return subtours;
    };
    if (!list.empty() && list[0].is_array()) {
      for (const auto& sol : list) candidates.push_back(parse_solution(sol));
    } else if (!list.empty()) {
      candidates.push_back(parse_solution(list));
    }
  }
  if (candidates.empty()) {
    throw std::runtime_error("nothing to check: pass --solutions or --oracle");
  }

  fs::path out(out_dir);
  fs::create_directories(out);
  ordered_json report_json = ordered_json::array();
  std::vector<std::string> all_cuts;
  int best = -1;
  double best_cost = kInf;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    SolutionCheckReport report =
        check_and_repair(problem, sc, candidates[c], objective);
    double cost = 0.0;
    ordered_json workers = ordered_json::array();
    for (const auto& wc : report.workers) {
      cost += route_cost(wc.route, objective);
      const char* status = wc.status == WorkerCheck::Status::Feasible ? "feasible"
                           : wc.status == WorkerCheck::Status::Repaired
                               ? "repaired"
                               : "rejected";
      ordered_json violations = ordered_json::array();
      for (const auto& v : wc.remaining) violations.push_back(v.describe(wc.route));
      workers.push_back(ordered_json{{"worker", wc.subtour.worker_id},
                                     {"status", status},
                                     {"swaps", wc.swaps},
                                     {"violations", violations}});
    }
    if (report.accepted && cost < best_cost) {
      best_cost = cost;
      best = static_cast<int>(c);
    }
    for (const auto& cut : report.cuts) all_cuts.push_back(cut);
    report_json.push_back(ordered_json{{"solution", c},
                                       {"accepted", report.accepted},
                                       {"cost", cost},
                                       {"workers", workers}});
  }
  ordered_json summary{{"solutions", report_json}, {"best", best}};
  write_file((out / "check_report.json").string(), summary.dump(2) + "\n");
  if (!all_cuts.empty()) {
    std::ostringstream os;
    for (const auto& cut : all_cuts) os << " " << cut << "\n";
    write_file((out / "cuts.lp").string(), os.str());
  }
  std::cout << "checked " << candidates.size() << " solution(s); best: "
            << (best >= 0 ? std::to_string(best) : std::string("none"))
            << "; cuts: " << all_cuts.size() << "\n";
  return 0;
}

int cmd_forecast(const std::string& history_path, double cell, int windows,
                 int days, double threshold, const std::string& aggregator,
                 const std::string& out_file) {
  auto history = load_history(history_path);
  GridSpec spec;
  spec.cell_size_m = cell;
  spec.windows_per_day = windows;
  if (days > 0) {
    spec.sample_days = days;
  } else {
    int max_day = 0;
    for (const auto& h : history) max_day = std::max(max_day, h.day);
    spec.sample_days = max_day + 1;
  }
  Grid3D grid = build_grid(history, spec);
  for (const auto& d : grid.diagnostics) std::cerr << "note: " << d << "\n";
  MergeOptions opt;
  if (threshold > 0) opt.similarity_threshold_s = threshold;
  opt.aggregator =
      aggregator == "median" ? Aggregator::Median : Aggregator::Average;
  auto forecasts = merge_forecasts(grid, opt);
  write_file(out_file, forecasts_to_json(forecasts).dump(2) + "\n");
  std::cout << "wrote " << forecasts.size() << " forecasts to " << out_file
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online scheduler for time-dependent pickup-and-delivery routing"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "emit a synthetic instance");
  GenerateSpec spec;
  std::string gen_out = ".";
  gen->add_option("--seed", spec.seed, "random seed");
  gen->add_option("--grid-width", spec.grid_width, "road grid width");
  gen->add_option("--grid-height", spec.grid_height, "road grid height");
  gen->add_option("--requests", spec.num_requests, "number of requests");
  gen->add_option("--workers", spec.num_workers, "number of workers");
  gen->add_option("--history-days", spec.history_days,
                  "emit a tagged multi-day history as well");
  gen->add_option("--out", gen_out, "output directory");

  // run
  auto* run = app.add_subcommand("run", "replay an instance through a scheduler");
  RunArgs args;
  run->add_option("--graph", args.graph_path, "graph file")->required();
  run->add_option("--instance", args.instance_path, "instance file")->required();
  run->add_option("--scheduler", args.scheduler, "td-insertion or td-prophet")
      ->check(CLI::IsMember({"td-insertion", "td-prophet"}));
  run->add_option("--metric", args.metric, "cost metric")
      ->check(CLI::IsMember({"time", "dist"}));
  run->add_option("--norm", args.norm, "scoring norm")
      ->check(CLI::IsMember({"l1", "l2"}));
  run->add_option("--wb", args.wb, "workload balancer, optionally theta,mu")
      ->expected(0, 1)
      ->default_str("")
      ->option_text("[=theta,mu]");
  run->add_flag("--rr", args.rr, "relocation sweep after each request");
  run->add_option("--prophet", args.prophet_file, "forecast file");
  run->add_option("--baseline", args.baseline_file,
                  "evaluate fixed subtours instead of scheduling");
  run->add_option("--seed", args.seed, "bookkeeping seed");
  run->add_option("--out", args.out_dir, "output directory");

  // report
  auto* rep = app.add_subcommand("report", "compare metrics files");
  std::vector<std::string> report_files;
  std::string baseline_variant, report_out;
  rep->add_option("files", report_files, "metrics.csv files")->required();
  rep->add_option("--baseline", baseline_variant,
                  "variant name used as the comparison base");
  rep->add_option("--out", report_out, "directory for comparison.csv");

  // milp-export
  auto* mexp = app.add_subcommand("milp-export", "emit the relaxed model");
  std::string me_graph, me_instance, me_metric = "dist", me_out = ".";
  mexp->add_option("--graph", me_graph)->required();
  mexp->add_option("--instance", me_instance)->required();
  mexp->add_option("--metric", me_metric)->check(CLI::IsMember({"time", "dist"}));
  mexp->add_option("--out", me_out);

  // milp-check
  auto* mchk = app.add_subcommand("milp-check",
                                  "check and repair candidate solutions");
  std::string mc_graph, mc_instance, mc_metric = "dist", mc_solutions, mc_out = ".";
  bool mc_oracle = false;
  mchk->add_option("--graph", mc_graph)->required();
  mchk->add_option("--instance", mc_instance)->required();
  mchk->add_option("--metric", mc_metric)->check(CLI::IsMember({"time", "dist"}));
  mchk->add_option("--solutions", mc_solutions, "candidate solutions file");
  mchk->add_flag("--oracle", mc_oracle, "also check the exact tiny optimum");
  mchk->add_option("--out", mc_out);

  // forecast
  auto* fc = app.add_subcommand("forecast", "merge a history into forecasts");
  std::string fc_history, fc_out = "forecasts.json", fc_aggregator = "average";
  double fc_cell = 500.0, fc_threshold = 0.0;
  int fc_windows = 24, fc_days = 0;
  fc->add_option("--history", fc_history)->required();
  fc->add_option("--cell", fc_cell, "cell size in meters");
  fc->add_option("--windows", fc_windows, "time windows per day");
  fc->add_option("--days", fc_days, "sample days (default: from the data)");
  fc->add_option("--threshold", fc_threshold,
                 "similarity threshold in seconds (default: half a window)");
  fc->add_option("--aggregator", fc_aggregator)
      ->check(CLI::IsMember({"average", "median"}));
  fc->add_option("--out", fc_out, "output forecast file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_out, spec);
    if (run->parsed()) {
      if (run->count("--wb") && args.wb.empty()) args.wb = "default";
      return cmd_run(args);
    }
    if (rep->parsed()) return cmd_report(report_files, baseline_variant, report_out);
    if (mexp->parsed()) return cmd_milp_export(me_graph, me_instance, me_metric, me_out);
    if (mchk->parsed()) {
      return cmd_milp_check(mc_graph, mc_instance, mc_metric, mc_solutions,
                            mc_oracle, mc_out);
    }
    if (fc->parsed()) {
      return cmd_forecast(fc_history, fc_cell, fc_windows, fc_days, fc_threshold,
                          fc_aggregator, fc_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
