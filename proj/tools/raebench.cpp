// Benchmark and tooling CLI: seeded experiment sweeps with CSV/SVG
// output, exact-utility tables, offline data generation and model
// training.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <set>

#include "rae/bench.hpp"
#include "rae/oracle.hpp"

namespace fs = std::filesystem;
using namespace rae;

namespace {

std::string out_dir_prefix(const std::string& path) {
  const char* dir = std::getenv("RAE_OUT_DIR");
  if (!dir || fs::path(path).is_absolute()) return path;
  fs::create_directories(dir);
  return (fs::path(dir) / path).string();
}

UtilityKind parse_utility(const std::string& s) {
  if (s == "efficiency") return UtilityKind::Efficiency;
  if (s == "success-ratio") return UtilityKind::SuccessRatio;
  throw CLI::ValidationError("--utility must be efficiency or success-ratio");
}

int cmd_run(ExperimentConfig cfg, std::vector<int> n_ro_sweep, const std::string& utility) {
  cfg.utility = parse_utility(utility);
  cfg.out_path = out_dir_prefix(cfg.out_path);

  if (n_ro_sweep.empty()) n_ro_sweep.push_back(cfg.n_ro);
  std::vector<RunRecord> all_rows;
  Summary summary;
  for (int n_ro : n_ro_sweep) {
    ExperimentConfig cell = cfg;
    cell.n_ro = n_ro;
    if (n_ro == 0) cell.mode = "reactive";
    bool planning = cell.mode == "plan" || cell.mode == "plan+lh";
    auto rows = run_experiment(cell);
    SummaryRow srow;
    srow.label = planning ? cell.mode + " nro=" + std::to_string(n_ro) : cell.mode;
    srow.mode = cell.mode;
    srow.n_ro = planning ? n_ro : 0;
    srow.metrics = compute_metrics(rows);
    summary.rows.push_back(srow);
    for (auto& r : rows) all_rows.push_back(std::move(r));
  }
  rescale_against_baseline(summary);

  write_csv_file(all_rows, cfg.out_path);
  std::string stem = cfg.out_path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
  emit_summary_plots(summary, stem);

  std::ostringstream console;
  write_summary_csv(summary, console);
  std::cout << console.str();
  std::cout << "rows: " << all_rows.size() << " -> " << cfg.out_path << "\n";
  return 0;
}

int cmd_oracle(const std::string& domain, const std::string& task_name,
               std::vector<std::string> arg_strs, std::uint64_t problem_seed) {
  domains::DomainBundle bundle = domains::build(domain);
  ProblemInstance prob = bundle.gen_problem(problem_seed, 0);
  State s = bundle.domain->make_state();
  for (const auto& w : prob.initial_state) s.write(w.var, w.args, w.value);

  TaskInstance tau{task_name, {}, TaskOrigin::Root};
  for (const auto& a : arg_strs) tau.args.push_back(value_from_json(nlohmann::json::parse(a)));

  std::cout << "task: " << tau.repr() << "\n";
  for (UtilityKind kind : {UtilityKind::Efficiency, UtilityKind::SuccessRatio}) {
    std::cout << "-- " << to_string(kind) << "\n";
    auto methods = bundle.domain->applicable(s, tau);
    if (methods.empty()) std::cout << "  (no applicable method instance)\n";
    for (const auto& m : methods) {
      UtilityValue u = exact_utility(*bundle.domain, m, s, kind);
      std::cout << "  " << m.identity() << "  U* = " << u.value() << "\n";
    }
    OracleChoice best = optimal_method(*bundle.domain, tau, s, kind);
    if (best.method)
      std::cout << "  optimal: " << best.method->identity() << " (" << best.utility.value()
                << ")\n";
  }
  return 0;
}

int cmd_gen_data(const std::string& domain, const std::string& procedure, int n_tasks, int n_ro,
                 int d_max, int difficulty, std::uint64_t seed, std::string out) {
  auto proc = procedure_from_string(procedure);
  if (!proc) throw CLI::ValidationError("--procedure must be lm1|lm2|lmi|lh");
  domains::DomainBundle bundle = domains::build(domain);
  GenerateOptions opts;
  opts.n_tasks = n_tasks;
  opts.plan.n_ro = n_ro;
  opts.plan.d_max = d_max;
  opts.difficulty = difficulty;
  opts.seed = seed;
  auto records = generate_records(*bundle.domain, bundle.gen_problem, *proc, opts);
  out = out_dir_prefix(out);
  save_records(records, out);
  std::cout << records.size() << " records -> " << out << "\n";
  return 0;
}

int cmd_train(const std::string& domain, const std::string& procedure, const std::string& data,
              std::string out, int epochs, double lr, int batch, int hidden, int k_buckets,
              std::uint64_t seed) {
  auto proc = procedure_from_string(procedure);
  if (!proc) throw CLI::ValidationError("--procedure must be lm1|lm2|lmi|lh");
  domains::DomainBundle bundle = domains::build(domain);
  OneHotEncoder enc(*bundle.domain);
  auto records = load_records(data);
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.batch_size = batch;
  cfg.seed = seed;
  out = out_dir_prefix(out);

  switch (*proc) {
    case Procedure::LM1:
    case Procedure::LM2: {
      MethodPolicyModel model = train_method_policy(enc, records, cfg, hidden);
      save_model(model.to_json(), out);
      break;
    }
    case Procedure::MI: {
      auto models = train_param_models(*bundle.domain, enc, records, cfg, hidden);
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& m : models) arr.push_back(m.to_json());
      save_model(arr, out);
      break;
    }
    case Procedure::LH: {
      HeuristicModel model = train_heuristic(enc, records, k_buckets, cfg, hidden);
      save_model(model.to_json(), out);
      break;
    }
  }
  std::cout << "trained " << procedure << " on " << records.size() << " records -> " << out
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAE/UPOM benchmark runner"};
  app.set_config("--config");
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  ExperimentConfig cfg;
  std::string utility = "efficiency";
  std::vector<int> n_ro_sweep;
  auto* run = app.add_subcommand("run", "execute a seeded experiment sweep");
  run->add_option("--domain", cfg.domain, "toy|toy2|snr|nav|fetch")->required();
  run->add_option("--mode", cfg.mode, "reactive|learned|plan|plan+lh");
  run->add_option("--utility", utility, "efficiency|success-ratio");
  run->add_option("--nro", n_ro_sweep, "rollouts per depth (repeat for a sweep)");
  run->add_option("--dmax", cfg.d_max, "depth bound, -1 = unbounded");
  run->add_option("--C", cfg.C, "UCB exploration constant");
  run->add_option("--heuristic", cfg.heuristic, "h0|hd|learned");
  run->add_option("--seed", cfg.seed, "base seed");
  run->add_option("--problems", cfg.n_problems, "number of generated problems");
  run->add_option("--runs", cfg.runs_per_problem, "runs per problem");
  run->add_option("--difficulty", cfg.difficulty, "exogenous-event level");
  run->add_option("--jobs", cfg.jobs, "worker threads for independent runs");
  run->add_option("--cutoff", cfg.wall_cutoff_s, "wall-clock cutoff per run, seconds");
  run->add_flag("--timing", cfg.timing, "record real wall_ms (breaks byte-identical reruns)");
  run->add_option("--lm-model", cfg.lm_model_path, "method policy file (learned mode)");
  run->add_option("--lh-model", cfg.lh_model_path, "heuristic model file (plan+lh)");
  run->add_option("--lmi-model", cfg.lmi_model_path, "parameter models file");
  run->add_option("--out", cfg.out_path, "CSV output path (RAE_OUT_DIR prefixes relative paths)");

  // oracle -------------------------------------------------------------
  std::string o_domain, o_task;
  std::vector<std::string> o_args;
  std::uint64_t o_seed = 0;
  auto* oracle = app.add_subcommand("oracle", "print exact per-method U* tables");
  oracle->add_option("--domain", o_domain)->required();
  oracle->add_option("--task", o_task)->required();
  oracle->add_option("--args", o_args, "task arguments as JSON values");
  oracle->add_option("--problem-seed", o_seed, "problem supplying the initial state");

  // gen-data -----------------------------------------------------------
  std::string g_domain, g_proc = "lm2", g_out = "records.jsonl";
  int g_tasks = 50, g_nro = 100, g_dmax = -1, g_difficulty = 1;
  std::uint64_t g_seed = 0;
  auto* gen = app.add_subcommand("gen-data", "harvest training records from planner runs");
  gen->add_option("--domain", g_domain)->required();
  gen->add_option("--procedure", g_proc, "lm1|lm2|lmi|lh");
  gen->add_option("--tasks", g_tasks, "root tasks to harvest");
  gen->add_option("--nro", g_nro);
  gen->add_option("--dmax", g_dmax);
  gen->add_option("--difficulty", g_difficulty);
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", g_out);

  // train ----------------------------------------------------------------
  std::string t_domain, t_proc = "lm2", t_data, t_out = "model.json";
  int t_epochs = 150, t_batch = 16, t_hidden = 0, t_k = 10;
  double t_lr = 0.01;
  std::uint64_t t_seed = 0;
  auto* tr = app.add_subcommand("train", "train a model from a record file");
  tr->add_option("--domain", t_domain)->required();
  tr->add_option("--procedure", t_proc, "lm1|lm2|lmi|lh");
  tr->add_option("--data", t_data, "JSONL record file")->required();
  tr->add_option("--out", t_out);
  tr->add_option("--epochs", t_epochs);
  tr->add_option("--lr", t_lr, "learning rate");
  tr->add_option("--batch", t_batch);
  tr->add_option("--hidden", t_hidden, "hidden width (0 = auto)");
  tr->add_option("--k-buckets", t_k, "utility intervals for lh");
  tr->add_option("--seed", t_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(cfg, n_ro_sweep, utility);
    if (oracle->parsed()) return cmd_oracle(o_domain, o_task, o_args, o_seed);
    if (gen->parsed())
      return cmd_gen_data(g_domain, g_proc, g_tasks, g_nro, g_dmax, g_difficulty, g_seed, g_out);
    if (tr->parsed())
      return cmd_train(t_domain, t_proc, t_data, t_out, t_epochs, t_lr, t_batch, t_hidden, t_k,
                       t_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
