#pragma once

#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rae/encoding.hpp"
#include "rae/engine.hpp"
#include "rae/mlp.hpp"
#include "rae/planner.hpp"

namespace rae {

enum class Procedure { LM1, LM2, MI, LH };

inline const char* to_string(Procedure p) {
  switch (p) {
    case Procedure::LM1: return "lm1";
    case Procedure::LM2: return "lm2";
    case Procedure::MI: return "lmi";
    case Procedure::LH: return "lh";
  }
  return "?";
}

inline std::optional<Procedure> procedure_from_string(const std::string& s) {
  if (s == "lm1") return Procedure::LM1;
  if (s == "lm2") return Procedure::LM2;
  if (s == "lmi") return Procedure::MI;
  if (s == "lh") return Procedure::LH;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Data generation

struct GenerateOptions {
  int n_tasks = 50;          // number of root tasks to harvest
  PlanConfig plan;           // planner configuration for the offline runs
  int difficulty = 1;        // dynamism of the generated problems
  std::uint64_t seed = 0;
  double wall_cutoff_s = 120.0;
};

/// Runs the engine with the planner on randomly generated problems and
/// harvests one record per planner-backed Select: the chosen template
/// ((s,tau) -> m), its free-parameter values ((s,v_tau) -> b) and the
/// root Q estimate ((s,tau,m) -> u). The lm1 variant keeps a method
/// record only when its job eventually succeeded while acting; lm2
/// keeps all of them.
inline std::vector<DataRecord> generate_records(
    const Domain& domain, const std::function<ProblemInstance(std::uint64_t, int)>& gen_problem,
    Procedure mode, const GenerateOptions& opts) {
  std::vector<DataRecord> records;
  RngStream seeder(opts.seed, "gen-data");

  int harvested_tasks = 0;
  std::uint64_t problem_idx = 0;
  while (harvested_tasks < opts.n_tasks) {
    std::uint64_t pseed = opts.seed * 1000003ull + (++problem_idx);
    ProblemInstance problem = gen_problem(pseed, opts.difficulty);
    std::size_t tasks_here = problem.num_root_tasks();
    if (tasks_here == 0) continue;

    EngineConfig cfg;
    cfg.strategy.kind = StrategyKind::Planner;
    cfg.strategy.plan = opts.plan;

    Platform platform(domain, problem, pseed);
    Engine engine(domain, platform, cfg, pseed);

    std::vector<std::pair<DataRecord, std::string>> buffered;  // record, frame key
    engine.set_select_observer([&](const SelectRecord& rec) {
      // Only decisions the planner actually weighed: singleton selects
      // bypass the rollouts and carry no information.
      if (!rec.had_alternatives) return;
      std::string frame_key = rec.task.repr() + "/" + rec.chosen.identity();
      DataRecord base;
      base.state = snapshot_state(rec.abstract_state);
      base.task = rec.task;
      base.method = rec.chosen.tmpl().name;
      base.job = rec.job;
      switch (mode) {
        case Procedure::LM1:
        case Procedure::LM2:
          base.type = DataRecord::Type::Method;
          buffered.emplace_back(base, frame_key);
          break;
        case Procedure::MI:
          for (const auto& p : rec.chosen.tmpl().extra_params) {
            DataRecord r = base;
            r.type = DataRecord::Type::Param;
            r.param = p.name;
            r.param_value = rec.chosen.binding().at(p.name);
            buffered.emplace_back(std::move(r), frame_key);
          }
          break;
        case Procedure::LH: {
          DataRecord r = base;
          r.type = DataRecord::Type::Heuristic;
          r.utility = std::min(rec.predicted_q, opts.plan.eff_cap);
          buffered.emplace_back(std::move(r), frame_key);
          break;
        }
      }
    });
    // A method record only counts as a success if its own frame was
    // never retried away and its job finished successfully.
    std::set<std::pair<std::uint64_t, std::string>> frame_failures;
    engine.set_retry_observer(
        [&](std::uint64_t job, const TaskInstance& tau, const std::string& instance_id) {
          frame_failures.insert({job, tau.repr() + "/" + instance_id});
        });

    // Drive the problem to completion the same way the bench does.
    AdvanceReport rep = platform.advance(0);
    for (const auto& t : rep.arrived_tasks) engine.submit(t);
    std::map<std::uint64_t, bool> job_result;
    std::size_t seen = 0;
    while (seen < tasks_here) {
      bool moved = false;
      auto outs = engine.step(&moved);
      for (const auto& o : outs) {
        job_result[o.job] = o.succeeded;
        ++seen;
      }
      if (engine.quiescent() && seen >= tasks_here) break;
      if (engine.quiescent() || !moved) {
        auto due = platform.next_due_time();
        if (!due && engine.quiescent()) break;
        if (!due) break;
        rep = platform.advance(std::max(0.0, *due - platform.now()));
        for (const auto& t : rep.arrived_tasks) engine.submit(t);
      } else {
        rep = platform.advance(0);
        for (const auto& t : rep.arrived_tasks) engine.submit(t);
      }
      if (platform.now() > 1e5) break;
    }

    for (auto& [r, frame_key] : buffered) {
      auto it = job_result.find(r.job);
      bool frame_failed = frame_failures.count({r.job, frame_key}) > 0;
      r.job_succeeded = it != job_result.end() && it->second && !frame_failed;
      if (mode == Procedure::LM1 && !r.job_succeeded) continue;
      records.push_back(std::move(r));
    }
    harvested_tasks += static_cast<int>(tasks_here);
  }
  return records;
}

inline void save_records(const std::vector<DataRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

inline std::vector<DataRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<DataRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encoding records into samples

inline Sample encode_method_record(const OneHotEncoder& enc, const DataRecord& r) {
  Sample s;
  State st = enc.state_from_snapshot(r.state);
  enc.encode_state(st, s.x);
  enc.encode_task(r.task, s.x);
  s.label = static_cast<int>(enc.method_index(r.method));
  return s;
}

inline Sample encode_param_record(const OneHotEncoder& enc, const DataRecord& r,
                                  const std::vector<Value>& value_catalog) {
  Sample s;
  State st = enc.state_from_snapshot(r.state);
  enc.encode_state(st, s.x);
  enc.encode_task_args(r.task, s.x);
  auto it = std::find(value_catalog.begin(), value_catalog.end(), r.param_value);
  if (it == value_catalog.end())
    throw UnknownCatalogEntry("parameter value " + r.param_value.repr() + " not in catalog");
  s.label = static_cast<int>(it - value_catalog.begin());
  return s;
}

inline Sample encode_heuristic_record(const OneHotEncoder& enc, const DataRecord& r,
                                      const Buckets& buckets) {
  Sample s;
  State st = enc.state_from_snapshot(r.state);
  enc.encode_state(st, s.x);
  enc.encode_task(r.task, s.x);
  enc.encode_method(r.method, s.x);
  s.label = buckets.interval_of(r.utility);
  return s;
}

// ---------------------------------------------------------------------------
// Trained models

inline int default_hidden(int in, int out) { return std::max(in / 2, out * 2); }

/// (s, tau) -> method template classifier.
struct MethodPolicyModel {
  Mlp mlp;
  std::vector<std::string> method_catalog;

  nlohmann::json to_json() const {
    return nlohmann::json{{"kind", "lm"}, {"mlp", mlp.to_json()}, {"methods", method_catalog}};
  }
  static MethodPolicyModel from_json(const nlohmann::json& j) {
    MethodPolicyModel m;
    m.mlp = Mlp::from_json(j.at("mlp"));
    m.method_catalog = j.at("methods").get<std::vector<std::string>>();
    return m;
  }
};

/// (s, v_tau) -> value classifier for one free parameter of one method.
struct ParamModel {
  std::string method;
  std::string param;
  Mlp mlp;
  std::vector<Value> value_catalog;

  nlohmann::json to_json() const {
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& v : value_catalog) vals.push_back(value_to_json(v));
    return nlohmann::json{
        {"kind", "lmi"}, {"method", method}, {"param", param}, {"mlp", mlp.to_json()},
        {"values", vals}};
  }
  static ParamModel from_json(const nlohmann::json& j) {
    ParamModel m;
    m.method = j.at("method").get<std::string>();
    m.param = j.at("param").get<std::string>();
    m.mlp = Mlp::from_json(j.at("mlp"));
    for (const auto& v : j.at("values")) m.value_catalog.push_back(value_from_json(v));
    return m;
  }
};

/// (s, tau, m) -> utility interval classifier plus its bucket table.
struct HeuristicModel {
  Mlp mlp;
  Buckets buckets = Buckets::from_intervals({0}, {1});

  nlohmann::json to_json() const {
    return nlohmann::json{{"kind", "lh"}, {"mlp", mlp.to_json()}, {"buckets", buckets.to_json()}};
  }
  static HeuristicModel from_json(const nlohmann::json& j) {
    HeuristicModel m;
    m.mlp = Mlp::from_json(j.at("mlp"));
    m.buckets = Buckets::from_json(j.at("buckets"));
    return m;
  }
};

// --- training ---------------------------------------------------------------

inline MethodPolicyModel train_method_policy(const OneHotEncoder& enc,
                                             const std::vector<DataRecord>& records,
                                             TrainConfig cfg, int hidden = 0) {
  std::vector<Sample> samples;
  for (const auto& r : records)
    if (r.type == DataRecord::Type::Method) samples.push_back(encode_method_record(enc, r));
  if (samples.empty()) throw EmptyDataset("no method records");
  int in = static_cast<int>(samples[0].x.size());
  int out = static_cast<int>(enc.method_width());
  MethodPolicyModel model;
  model.mlp = Mlp(in, hidden > 0 ? hidden : default_hidden(in, out), out);
  model.method_catalog = enc.method_catalog();
  train(model.mlp, samples, cfg);
  return model;
}

inline std::vector<ParamModel> train_param_models(const Domain& domain, const OneHotEncoder& enc,
                                                  const std::vector<DataRecord>& records,
                                                  TrainConfig cfg, int hidden = 0) {
  // One model per (method template, free parameter).
  std::map<std::pair<std::string, std::string>, std::vector<const DataRecord*>> grouped;
  for (const auto& r : records)
    if (r.type == DataRecord::Type::Param) grouped[{r.method, r.param}].push_back(&r);

  std::vector<ParamModel> models;
  for (const auto& [key, rs] : grouped) {
    const auto& [method, param] = key;
    std::vector<Value> catalog;
    for (const auto& m : domain.methods())
      if (m->name == method)
        for (const auto& p : m->extra_params)
          if (p.name == param) {
            catalog = domain.decls().sort(p.sort);
            std::sort(catalog.begin(), catalog.end());
          }
    if (catalog.empty()) continue;

    std::vector<Sample> samples;
    for (const DataRecord* r : rs) samples.push_back(encode_param_record(enc, *r, catalog));
    int in = static_cast<int>(samples[0].x.size());
    int out = static_cast<int>(catalog.size());
    ParamModel pm;
    pm.method = method;
    pm.param = param;
    pm.value_catalog = catalog;
    pm.mlp = Mlp(in, hidden > 0 ? hidden : default_hidden(in, out), out);
    train(pm.mlp, samples, cfg);
    models.push_back(std::move(pm));
  }
  return models;
}

inline HeuristicModel train_heuristic(const OneHotEncoder& enc,
                                      const std::vector<DataRecord>& records, int k_buckets,
                                      TrainConfig cfg, int hidden = 0) {
  std::vector<double> utilities;
  for (const auto& r : records)
    if (r.type == DataRecord::Type::Heuristic) utilities.push_back(r.utility);
  if (utilities.empty()) throw EmptyDataset("no heuristic records");

  HeuristicModel model;
  model.buckets = Buckets::equal_frequency(utilities, k_buckets);
  std::vector<Sample> samples;
  for (const auto& r : records)
    if (r.type == DataRecord::Type::Heuristic)
      samples.push_back(encode_heuristic_record(enc, r, model.buckets));
  int in = static_cast<int>(samples[0].x.size());
  model.mlp = Mlp(in, hidden > 0 ? hidden : default_hidden(in, model.buckets.size()),
                  model.buckets.size());
  train(model.mlp, samples, cfg);
  return model;
}

// --- prediction hooks --------------------------------------------------------

/// Template ranking hook for the engine's Learned strategy.
inline TemplateRanker make_template_ranker(std::shared_ptr<const OneHotEncoder> enc,
                                           std::shared_ptr<const MethodPolicyModel> model) {
  return [enc, model](const State& s, const TaskInstance& tau) {
    std::vector<double> x;
    enc->encode_state(s, x);
    enc->encode_task(tau, x);
    return model->mlp.ranking(x);
  };
}

/// Free-parameter chooser restricted to currently applicable values.
inline ParamChooser make_param_chooser(std::shared_ptr<const OneHotEncoder> enc,
                                       std::shared_ptr<const std::vector<ParamModel>> models) {
  return [enc, models](const State& s, const TaskInstance& tau, const MethodTemplate& tmpl,
                       const std::string& param,
                       const std::vector<Value>& applicable) -> std::optional<Value> {
    if (applicable.empty()) throw std::runtime_error("no applicable value for " + param);
    if (applicable.size() == 1) return applicable[0];
    for (const auto& pm : *models) {
      if (pm.method != tmpl.name || pm.param != param) continue;
      std::vector<double> x;
      enc->encode_state(s, x);
      enc->encode_task_args(tau, x);
      std::vector<std::size_t> ranked = pm.mlp.ranking(x);
      for (std::size_t idx : ranked) {
        const Value& v = pm.value_catalog[idx];
        for (const auto& a : applicable)
          if (a == v) return v;
      }
    }
    return std::nullopt;  // no model: caller falls back to a random instance
  };
}

/// h(tau, m, s) decoding the predicted utility interval to its midpoint.
inline LearnedHeuristic make_learned_heuristic(std::shared_ptr<const OneHotEncoder> enc,
                                               std::shared_ptr<const HeuristicModel> model) {
  return [enc, model](const TaskInstance& tau, const MethodInstance& m, const State& s) {
    std::vector<double> x;
    enc->encode_state(s, x);
    enc->encode_task(tau, x);
    enc->encode_method(m.tmpl().name, x);
    int interval = model->mlp.predict(x);
    return model->buckets.midpoint(interval);
  };
}

// --- persistence -------------------------------------------------------------

inline void save_model(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingModel("cannot read model file " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

// ---------------------------------------------------------------------------
// Incremental online learning

/// Rolling buffer of live records; every X runs the method policy and
/// heuristic are retrained on the most recent Z records and swapped in
/// atomically. Skips a refresh while the buffer is shorter than the
/// minimum.
class IncrementalLearner {
 public:
  IncrementalLearner(const Domain& domain, int z_records, int x_runs, TrainConfig cfg,
                     int k_buckets = 10, std::size_t min_records = 100)
      : domain_(&domain),
        encoder_(std::make_shared<OneHotEncoder>(domain)),
        z_(z_records),
        x_(x_runs),
        cfg_(cfg),
        k_buckets_(k_buckets),
        min_records_(min_records) {}

  void record(DataRecord r) { buffer_.push_back(std::move(r)); }

  /// Call once per completed run; retrains every X runs.
  bool on_run_complete() {
    if (++runs_since_refresh_ < x_) return false;
    runs_since_refresh_ = 0;
    return refresh();
  }

  /// Retrains on the most recent Z records. Returns false when skipped.
  bool refresh() {
    if (buffer_.size() < min_records_) return false;
    std::vector<DataRecord> recent;
    std::size_t start = buffer_.size() > static_cast<std::size_t>(z_)
                            ? buffer_.size() - static_cast<std::size_t>(z_)
                            : 0;
    for (std::size_t i = start; i < buffer_.size(); ++i) recent.push_back(buffer_[i]);

    bool any = false;
    bool has_method = false, has_heur = false;
    for (const auto& r : recent) {
      has_method = has_method || r.type == DataRecord::Type::Method;
      has_heur = has_heur || r.type == DataRecord::Type::Heuristic;
    }
    if (has_method) {
      lm_ = std::make_shared<const MethodPolicyModel>(
          train_method_policy(*encoder_, recent, cfg_));
      any = true;
    }
    if (has_heur) {
      lh_ = std::make_shared<const HeuristicModel>(
          train_heuristic(*encoder_, recent, k_buckets_, cfg_));
      any = true;
    }
    return any;
  }

  std::shared_ptr<const MethodPolicyModel> method_policy() const { return lm_; }
  std::shared_ptr<const HeuristicModel> heuristic() const { return lh_; }
  std::shared_ptr<const OneHotEncoder> encoder() const { return encoder_; }
  std::size_t buffer_size() const { return buffer_.size(); }

 private:
  const Domain* domain_;
  std::shared_ptr<OneHotEncoder> encoder_;
  std::deque<DataRecord> buffer_;
  int z_;
  int x_;
  TrainConfig cfg_;
  int k_buckets_;
  std::size_t min_records_;
  int runs_since_refresh_ = 0;
  std::shared_ptr<const MethodPolicyModel> lm_;
  std::shared_ptr<const HeuristicModel> lh_;
};

}  // namespace rae
