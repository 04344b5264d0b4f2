#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rae/domains/registry.hpp"
#include "rae/engine.hpp"
#include "rae/learning.hpp"

namespace rae {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string domain = "toy";
  std::string mode = "reactive";  // reactive | learned | plan | plan+lh
  UtilityKind utility = UtilityKind::Efficiency;
  int n_ro = 50;
  int d_max = -1;  // < 0: unbounded
  double C = 1.0;
  std::string heuristic = "h0";  // h0 | hd | learned
  int n_problems = 50;
  int runs_per_problem = 50;
  std::uint64_t seed = 0;
  double wall_cutoff_s = 1800.0;
  int difficulty = 1;
  int jobs = 1;        // worker pool size for independent runs
  bool timing = false; // off: wall_ms written as 0 so reruns are byte-identical
  std::string out_path = "runs.csv";
  std::string lm_model_path;
  std::string lh_model_path;
  std::string lmi_model_path;

  void check() const {
    if (n_problems < 1 || runs_per_problem < 1 || n_ro < 0)
      throw std::invalid_argument("experiment counts must be at least 1");
  }
};

// ---------------------------------------------------------------------------
// Rows and metrics

/// One CSV row: a task within a run, with the run-level aggregates
/// repeated on each of the run's task rows.
struct RunRecord {
  int run_id = 0;
  int problem_id = 0;
  std::uint64_t seed = 0;
  std::string domain;
  std::string mode;
  std::string utility;
  int n_ro = 0;
  int d_max = -1;
  std::string task_id;
  bool success = false;
  double efficiency = 0;  // 1 / sum of action costs; 0 for failures
  int retries = 0;
  double retry_ratio = 0;    // per run
  double success_ratio = 0;  // per run
  double wall_ms = 0;
  double sim_time = 0;
  bool cutoff = false;
};

struct Metric {
  double mean = 0;
  double half_width = 0;  // 95% normal-approximation interval
  std::size_t n = 0;
};

inline Metric metric_of(const std::vector<double>& xs) {
  Metric m;
  m.n = xs.size();
  if (xs.empty()) return m;
  double sum = 0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double var = 0;
    for (double x : xs) var += (x - m.mean) * (x - m.mean);
    var /= static_cast<double>(xs.size() - 1);
    m.half_width = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
  }
  return m;
}

struct MetricsSummary {
  Metric efficiency;     // over tasks
  Metric success_ratio;  // over tasks (success as 0/1)
  Metric retry_ratio;    // retries per task
  std::size_t tasks = 0;
  std::size_t runs = 0;
};

/// Per-task efficiency (failures contribute 0), success ratio and retry
/// ratio with 95% half-widths.
inline MetricsSummary compute_metrics(const std::vector<RunRecord>& records) {
  if (records.empty()) throw IoError("no records to summarize");
  std::vector<double> eff, succ, retr;
  std::map<std::pair<int, int>, bool> run_seen;
  for (const auto& r : records) {
    eff.push_back(r.efficiency);
    succ.push_back(r.success ? 1.0 : 0.0);
    retr.push_back(static_cast<double>(r.retries));
    run_seen[{r.problem_id, r.run_id}] = true;
  }
  MetricsSummary s;
  s.efficiency = metric_of(eff);
  s.success_ratio = metric_of(succ);
  s.retry_ratio = metric_of(retr);
  s.tasks = records.size();
  s.runs = run_seen.size();
  return s;
}

// ---------------------------------------------------------------------------
// Strategy assembly

struct LoadedModels {
  std::shared_ptr<OneHotEncoder> encoder;
  std::shared_ptr<const MethodPolicyModel> lm;
  std::shared_ptr<const std::vector<ParamModel>> lmi;
  std::shared_ptr<const HeuristicModel> lh;
};

inline LoadedModels load_models(const Domain& domain, const ExperimentConfig& cfg) {
  LoadedModels m;
  m.encoder = std::make_shared<OneHotEncoder>(domain);
  if (!cfg.lm_model_path.empty())
    m.lm = std::make_shared<const MethodPolicyModel>(
        MethodPolicyModel::from_json(load_model_json(cfg.lm_model_path)));
  if (!cfg.lh_model_path.empty())
    m.lh = std::make_shared<const HeuristicModel>(
        HeuristicModel::from_json(load_model_json(cfg.lh_model_path)));
  if (!cfg.lmi_model_path.empty()) {
    auto models = std::make_shared<std::vector<ParamModel>>();
    for (const auto& j : load_model_json(cfg.lmi_model_path))
      models->push_back(ParamModel::from_json(j));
    m.lmi = models;
  }
  return m;
}

inline SelectStrategy make_strategy(const ExperimentConfig& cfg, const LoadedModels& models) {
  SelectStrategy strat;
  if (cfg.mode == "reactive") {
    strat.kind = StrategyKind::Reactive;
    return strat;
  }
  if (cfg.mode == "learned") {
    if (!models.lm) throw MissingModel("learned mode needs a trained method policy (--lm-model)");
    strat.kind = StrategyKind::Learned;
    strat.rank_templates = make_template_ranker(models.encoder, models.lm);
    if (models.lmi) strat.choose_param = make_param_chooser(models.encoder, models.lmi);
    return strat;
  }
  if (cfg.mode == "plan" || cfg.mode == "plan+lh") {
    strat.kind = StrategyKind::Planner;
    strat.plan.n_ro = std::max(cfg.n_ro, 1);
    strat.plan.d_max = cfg.d_max;
    strat.plan.C = cfg.C;
    strat.plan.utility = cfg.utility;
    if (cfg.mode == "plan+lh" || cfg.heuristic == "learned") {
      if (!models.lh) throw MissingModel("plan+lh needs a trained heuristic (--lh-model)");
      strat.plan.heuristic = HeuristicKind::Learned;
      strat.learned_h = make_learned_heuristic(models.encoder, models.lh);
      if (cfg.d_max < 0) strat.plan.d_max = 5;  // a learned cutoff implies a finite depth
    } else if (cfg.heuristic == "hd") {
      strat.plan.heuristic = HeuristicKind::HD;
    }
    if (cfg.mode == "plan" && cfg.n_ro == 0) strat.kind = StrategyKind::Reactive;
    return strat;
  }
  throw std::invalid_argument("unknown mode: " + cfg.mode);
}

// ---------------------------------------------------------------------------
// The experiment sweep

namespace detail {

inline std::uint64_t run_seed(std::uint64_t base, int problem, int run) {
  std::uint64_t x = rae::detail::splitmix64(base ^ 0x9e37u);
  x = rae::detail::splitmix64(x + static_cast<std::uint64_t>(problem) * 1000003ull);
  return rae::detail::splitmix64(x + static_cast<std::uint64_t>(run));
}

}  // namespace detail

/// Executes one (problem, run) cell and emits its task rows.
inline std::vector<RunRecord> run_cell(const domains::DomainBundle& bundle,
                                       const ExperimentConfig& cfg, const LoadedModels& models,
                                       int problem_id, int run_id) {
  std::uint64_t pseed = cfg.seed + static_cast<std::uint64_t>(problem_id);
  ProblemInstance problem = bundle.gen_problem(pseed, cfg.difficulty);
  std::uint64_t rseed = detail::run_seed(cfg.seed, problem_id, run_id);

  EngineConfig ecfg;
  ecfg.strategy = make_strategy(cfg, models);
  RunResult rr = run_problem(*bundle.domain, problem, ecfg, rseed, cfg.wall_cutoff_s);

  // Expected tasks, in schedule order; tasks that never produced an
  // outcome (cutoff, stuck) become failed rows.
  std::vector<TaskInstance> expected;
  for (const auto& [t, ts] : problem.arrivals)
    for (const auto& tsk : ts) expected.push_back(tsk);
  for (const auto& ev : problem.events)
    for (const auto& tsk : ev.tasks) expected.push_back(tsk);

  int total_retries = 0;
  int successes = 0;
  for (const auto& o : rr.outcomes) {
    total_retries += o.retries;
    successes += o.succeeded ? 1 : 0;
  }
  double n_tasks = static_cast<double>(std::max<std::size_t>(1, expected.size()));
  double retry_ratio = static_cast<double>(total_retries) / n_tasks;
  double success_ratio = static_cast<double>(successes) / n_tasks;

  std::vector<RunRecord> rows;
  std::size_t outcome_idx = 0;
  for (const auto& task : expected) {
    RunRecord row;
    row.run_id = run_id;
    row.problem_id = problem_id;
    row.seed = rseed;
    row.domain = cfg.domain;
    row.mode = cfg.mode;
    row.utility = to_string(cfg.utility);
    bool planning = cfg.mode == "plan" || cfg.mode == "plan+lh";
    row.n_ro = planning ? cfg.n_ro : 0;
    row.d_max = cfg.d_max;
    row.task_id = task.repr();
    if (outcome_idx < rr.outcomes.size()) {
      const JobOutcome& o = rr.outcomes[outcome_idx++];
      row.success = o.succeeded;
      row.efficiency = (o.succeeded && o.accrued_cost > 0) ? 1.0 / o.accrued_cost : 0.0;
      row.retries = o.retries;
    }
    row.retry_ratio = retry_ratio;
    row.success_ratio = success_ratio;
    row.wall_ms = cfg.timing ? rr.wall_ms : 0.0;
    row.sim_time = rr.sim_time;
    row.cutoff = rr.cutoff;
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Runs n_problems x runs_per_problem seeded cells (optionally on a
/// worker pool) and returns the rows in deterministic (problem, run)
/// order regardless of completion order.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.check();
  domains::DomainBundle bundle = domains::build(cfg.domain);
  LoadedModels models = load_models(*bundle.domain, cfg);

  int cells = cfg.n_problems * cfg.runs_per_problem;
  std::vector<std::vector<RunRecord>> slots(static_cast<std::size_t>(cells));

  auto work = [&](int cell) {
    int problem = cell / cfg.runs_per_problem;
    int run = cell % cfg.runs_per_problem;
    try {
      slots[static_cast<std::size_t>(cell)] = run_cell(bundle, cfg, models, problem, run);
    } catch (const std::exception&) {
      // A broken run becomes a failed row; it never aborts the sweep.
      RunRecord row;
      row.run_id = run;
      row.problem_id = problem;
      row.seed = detail::run_seed(cfg.seed, problem, run);
      row.domain = cfg.domain;
      row.mode = cfg.mode;
      row.utility = to_string(cfg.utility);
      row.n_ro = cfg.n_ro;
      row.d_max = cfg.d_max;
      row.task_id = "(error)";
      slots[static_cast<std::size_t>(cell)] = {row};
    }
  };

  if (cfg.jobs <= 1) {
    for (int c = 0; c < cells; ++c) work(c);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < cfg.jobs; ++j)
      pool.emplace_back([&]() {
        for (;;) {
          int c = next.fetch_add(1);
          if (c >= cells) return;
          work(c);
        }
      });
    for (auto& th : pool) th.join();
  }

  std::vector<RunRecord> rows;
  for (auto& slot : slots)
    for (auto& r : slot) rows.push_back(std::move(r));
  return rows;
}

// ---------------------------------------------------------------------------
// CSV emission

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline const char* kCsvHeader =
    "run_id,problem_id,seed,domain,mode,utility,n_ro,d_max,task_id,success,efficiency,"
    "retries,retry_ratio,success_ratio,wall_ms,sim_time,cutoff";

inline void write_csv(const std::vector<RunRecord>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.run_id << ',' << r.problem_id << ',' << r.seed << ',' << r.domain << ',' << r.mode
        << ',' << r.utility << ',' << r.n_ro << ',' << r.d_max << ',' << '"' << r.task_id << '"'
        << ',' << (r.success ? 1 : 0) << ',' << format_double(r.efficiency) << ',' << r.retries
        << ',' << format_double(r.retry_ratio) << ',' << format_double(r.success_ratio) << ','
        << format_double(r.wall_ms) << ',' << format_double(r.sim_time) << ','
        << (r.cutoff ? 1 : 0) << '\n';
  }
}

inline void write_csv_file(const std::vector<RunRecord>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_csv(rows, out);
}

// ---------------------------------------------------------------------------
// Summaries and plots

struct SummaryRow {
  std::string label;  // e.g. "reactive" or "plan nro=50"
  std::string mode;
  int n_ro = 0;
  MetricsSummary metrics;
  // Values relative to the n_ro=0 baseline, when present.
  std::optional<double> rel_efficiency, rel_success, rel_retry;
};

struct Summary {
  std::vector<SummaryRow> rows;
};

/// Rescales each metric against the n_ro=0 reactive baseline (which
/// maps to exactly 1.0 by construction).
inline void rescale_against_baseline(Summary& summary) {
  const SummaryRow* base = nullptr;
  for (const auto& r : summary.rows)
    if (r.n_ro == 0 && (!base || r.mode == "reactive")) base = &r;
  if (!base) return;
  for (auto& r : summary.rows) {
    auto rel = [](double v, double b) { return b != 0 ? v / b : 0.0; };
    r.rel_efficiency = rel(r.metrics.efficiency.mean, base->metrics.efficiency.mean);
    r.rel_success = rel(r.metrics.success_ratio.mean, base->metrics.success_ratio.mean);
    r.rel_retry = rel(r.metrics.retry_ratio.mean, base->metrics.retry_ratio.mean);
  }
}

inline void write_summary_csv(const Summary& summary, std::ostream& out) {
  out << "label,mode,n_ro,tasks,runs,efficiency,efficiency_hw,success_ratio,success_ratio_hw,"
         "retry_ratio,retry_ratio_hw,rel_efficiency,rel_success_ratio,rel_retry_ratio\n";
  for (const auto& r : summary.rows) {
    out << '"' << r.label << '"' << ',' << r.mode << ',' << r.n_ro << ',' << r.metrics.tasks << ','
        << r.metrics.runs << ',' << format_double(r.metrics.efficiency.mean) << ','
        << format_double(r.metrics.efficiency.half_width) << ','
        << format_double(r.metrics.success_ratio.mean) << ','
        << format_double(r.metrics.success_ratio.half_width) << ','
        << format_double(r.metrics.retry_ratio.mean) << ','
        << format_double(r.metrics.retry_ratio.half_width) << ','
        << (r.rel_efficiency ? format_double(*r.rel_efficiency) : "") << ','
        << (r.rel_success ? format_double(*r.rel_success) : "") << ','
        << (r.rel_retry ? format_double(*r.rel_retry) : "") << '\n';
  }
}

/// Minimal self-contained SVG bar chart of one metric across the
/// summary rows (with 95% whiskers).
inline std::string summary_svg(const Summary& summary, const std::string& metric_name) {
  auto value_of = [&](const SummaryRow& r) {
    if (metric_name == "success_ratio") return r.metrics.success_ratio;
    if (metric_name == "retry_ratio") return r.metrics.retry_ratio;
    return r.metrics.efficiency;
  };
  const int W = 640, H = 400, margin = 60;
  double vmax = 1e-9;
  for (const auto& r : summary.rows)
    vmax = std::max(vmax, value_of(r).mean + value_of(r).half_width);

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  svg << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
  svg << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << metric_name
      << "</text>\n";
  svg << "<line x1='" << margin << "' y1='" << H - margin << "' x2='" << W - margin / 2
      << "' y2='" << H - margin << "' stroke='black'/>\n";
  svg << "<line x1='" << margin << "' y1='" << H - margin << "' x2='" << margin << "' y2='"
      << margin / 2 << "' stroke='black'/>\n";

  std::size_t n = summary.rows.size();
  double band = static_cast<double>(W - margin * 1.5) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SummaryRow& r = summary.rows[i];
    Metric m = value_of(r);
    double x = margin + band * static_cast<double>(i) + band * 0.15;
    double w = band * 0.7;
    double h = (m.mean / vmax) * (H - margin * 1.5);
    double y = H - margin - h;
    svg << "<rect x='" << x << "' y='" << y << "' width='" << w << "' height='" << h
        << "' fill='#4878a8'/>\n";
    double cx = x + w / 2;
    double e = (m.half_width / vmax) * (H - margin * 1.5);
    svg << "<line x1='" << cx << "' y1='" << y - e << "' x2='" << cx << "' y2='" << y + e
        << "' stroke='black'/>\n";
    svg << "<text x='" << cx << "' y='" << H - margin + 16 << "' text-anchor='middle' "
        << "font-size='11'>" << r.label << "</text>\n";
    svg << "<text x='" << cx << "' y='" << y - e - 4 << "' text-anchor='middle' font-size='11'>"
        << format_double(m.mean) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

/// Writes `<stem>_summary.csv` and one SVG per metric. Refuses an empty
/// summary.
inline void emit_summary_plots(const Summary& summary, const std::string& stem) {
  if (summary.rows.empty()) throw IoError("refusing to plot an empty summary");
  {
    std::ofstream out(stem + "_summary.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + stem + "_summary.csv");
    write_summary_csv(summary, out);
  }
  for (const char* metric : {"efficiency", "success_ratio", "retry_ratio"}) {
    std::ofstream out(stem + "_" + metric + ".svg", std::ios::binary);
    if (!out) throw IoError("cannot write svg");
    out << summary_svg(summary, metric);
  }
}

}  // namespace rae
