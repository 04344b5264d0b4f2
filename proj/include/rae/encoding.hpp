#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rae/domain.hpp"
#include "rae/mlp.hpp"
#include "rae/problem.hpp"
#include "rae/state.hpp"

namespace rae {

struct UnknownCatalogEntry : std::runtime_error {
  explicit UnknownCatalogEntry(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Training records

/// One supervised example harvested from planner-guided runs:
///   Method    (s, tau)      -> chosen method template
///   Param     (s, v_tau)    -> value of one free parameter
///   Heuristic (s, tau, m)   -> utility estimate
struct DataRecord {
  enum class Type { Method, Param, Heuristic };
  Type type = Type::Method;
  std::vector<CellWrite> state;  // flat snapshot of the abstract state
  TaskInstance task;
  std::string method;       // template name (Method, Heuristic, Param)
  std::string param;        // Param
  Value param_value;        // Param
  double utility = 0;       // Heuristic, pre-clamped
  std::uint64_t job = 0;
  bool job_succeeded = false;
};

inline std::vector<CellWrite> snapshot_state(const State& s) {
  std::vector<CellWrite> out;
  s.for_each([&](const std::string& var, const Args& args, const Value& v) {
    out.push_back(CellWrite{var, args, v});
  });
  return out;
}

inline nlohmann::json record_to_json(const DataRecord& r) {
  nlohmann::json j;
  j["type"] = r.type == DataRecord::Type::Method
                  ? "method"
                  : (r.type == DataRecord::Type::Param ? "param" : "heuristic");
  j["state"] = writes_to_json(r.state);
  j["task"] = task_to_json(r.task);
  j["method"] = r.method;
  if (r.type == DataRecord::Type::Param) {
    j["param"] = r.param;
    j["value"] = value_to_json(r.param_value);
  }
  if (r.type == DataRecord::Type::Heuristic) j["utility"] = r.utility;
  j["job"] = r.job;
  j["succeeded"] = r.job_succeeded;
  return j;
}

inline DataRecord record_from_json(const nlohmann::json& j) {
  DataRecord r;
  std::string t = j.at("type").get<std::string>();
  r.type = t == "method" ? DataRecord::Type::Method
                         : (t == "param" ? DataRecord::Type::Param : DataRecord::Type::Heuristic);
  r.state = writes_from_json(j.at("state"));
  r.task = task_from_json(j.at("task"));
  r.method = j.value("method", "");
  if (r.type == DataRecord::Type::Param) {
    r.param = j.at("param").get<std::string>();
    r.param_value = value_from_json(j.at("value"));
  }
  if (r.type == DataRecord::Type::Heuristic) r.utility = j.at("utility").get<double>();
  r.job = j.value("job", std::uint64_t{0});
  r.job_succeeded = j.value("succeeded", false);
  return r;
}

// ---------------------------------------------------------------------------
// One-hot encoding

/// Fixed-width indicator encoding of states, tasks, methods and
/// parameter values. Every state-variable instance owns an N-wide block
/// (N = largest catalog) with exactly one bit set; tasks contribute a
/// name block plus per-argument object blocks.
class OneHotEncoder {
 public:
  explicit OneHotEncoder(const Domain& domain, int interval_bins = 8) : domain_(&domain) {
    const Declarations& ds = domain.decls();
    for (const auto& var : ds.vars()) {
      std::vector<Value> catalog;
      if (var.range.is_interval()) {
        bins_[var.name] = interval_bins;
        catalog.resize(static_cast<std::size_t>(interval_bins));  // only the size matters
        catalogs_.push_back({});
      } else {
        catalog = var.range.values();
        std::sort(catalog.begin(), catalog.end());
        catalogs_.push_back(catalog);
      }
      max_width_ = std::max(max_width_, catalog.size());
      std::vector<Args> instances;
      enumerate_args(ds, var.arg_sorts, {}, instances);
      for (auto& args : instances)
        instances_.push_back(VarInstance{var.name, std::move(args), catalogs_.size() - 1});
    }

    for (const auto& t : domain.tasks()) {
      task_catalog_.push_back(t.name);
      max_task_arity_ = std::max(max_task_arity_, t.params.size());
    }
    for (const auto& m : domain.methods()) method_catalog_.push_back(m->name);

    // Object catalog: the union of all declared sorts.
    std::vector<Value> objects;
    for (const auto& var : ds.vars())
      for (const auto& sort_name : var.arg_sorts)
        for (const auto& v : ds.sort(sort_name)) objects.push_back(v);
    std::sort(objects.begin(), objects.end());
    objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
    object_catalog_ = std::move(objects);
  }

  std::size_t state_width() const { return instances_.size() * max_width_; }
  std::size_t task_width() const {
    return task_catalog_.size() + max_task_arity_ * (object_catalog_.size() + 1);
  }
  std::size_t task_args_width() const { return max_task_arity_ * (object_catalog_.size() + 1); }
  std::size_t method_width() const { return method_catalog_.size(); }
  std::size_t num_variables() const { return instances_.size(); }
  std::size_t block_width() const { return max_width_; }

  const std::vector<std::string>& task_catalog() const { return task_catalog_; }
  const std::vector<std::string>& method_catalog() const { return method_catalog_; }

  std::size_t method_index(const std::string& name) const {
    for (std::size_t i = 0; i < method_catalog_.size(); ++i)
      if (method_catalog_[i] == name) return i;
    throw UnknownCatalogEntry("method not in catalog: " + name);
  }

  /// w_s: one N-wide block per variable instance, each summing to one.
  void encode_state(const State& s, std::vector<double>& out) const {
    for (const auto& inst : instances_) {
      Value v = s.read(inst.var, inst.args);
      std::size_t offset = out.size();
      out.resize(offset + max_width_, 0.0);
      out[offset + value_slot(inst, v)] = 1.0;
    }
  }

  /// w_tau: task-name block followed by per-argument object blocks
  /// (an extra slot per block covers values outside the object catalog).
  void encode_task(const TaskInstance& tau, std::vector<double>& out) const {
    std::size_t offset = out.size();
    out.resize(offset + task_catalog_.size(), 0.0);
    bool found = false;
    for (std::size_t i = 0; i < task_catalog_.size(); ++i)
      if (task_catalog_[i] == tau.name) {
        out[offset + i] = 1.0;
        found = true;
      }
    if (!found) throw UnknownCatalogEntry("task not in catalog: " + tau.name);
    encode_task_args(tau, out);
  }

  void encode_task_args(const TaskInstance& tau, std::vector<double>& out) const {
    for (std::size_t a = 0; a < max_task_arity_; ++a) {
      std::size_t offset = out.size();
      out.resize(offset + object_catalog_.size() + 1, 0.0);
      if (a < tau.args.size()) {
        auto it = std::lower_bound(object_catalog_.begin(), object_catalog_.end(), tau.args[a]);
        if (it != object_catalog_.end() && *it == tau.args[a]) {
          out[offset + static_cast<std::size_t>(it - object_catalog_.begin())] = 1.0;
          continue;
        }
      }
      out[offset + object_catalog_.size()] = 1.0;  // absent / out-of-catalog slot
    }
  }

  void encode_method(const std::string& method_name, std::vector<double>& out) const {
    std::size_t offset = out.size();
    out.resize(offset + method_catalog_.size(), 0.0);
    out[offset + method_index(method_name)] = 1.0;
  }

  State state_from_snapshot(const std::vector<CellWrite>& writes) const {
    State s = domain_->make_state();
    for (const auto& w : writes) s.write(w.var, w.args, w.value);
    return s;
  }

 private:
  struct VarInstance {
    std::string var;
    Args args;
    std::size_t catalog;
  };

  void enumerate_args(const Declarations& ds, const std::vector<std::string>& sorts, Args prefix,
                      std::vector<Args>& out) const {
    if (prefix.size() == sorts.size()) {
      out.push_back(prefix);
      return;
    }
    std::vector<Value> values = ds.sort(sorts[prefix.size()]);
    std::sort(values.begin(), values.end());
    for (const auto& v : values) {
      prefix.push_back(v);
      enumerate_args(ds, sorts, prefix, out);
      prefix.pop_back();
    }
  }

  std::size_t value_slot(const VarInstance& inst, const Value& v) const {
    auto bin_it = bins_.find(inst.var);
    if (bin_it != bins_.end()) {
      if (v.is_unknown())
        throw UnknownCatalogEntry("unknown value of interval variable " + inst.var);
      const StateVarDecl& decl = domain_->decls().require(inst.var);
      double lo = decl.range.lo(), hi = decl.range.hi();
      double t = (v.as_number() - lo) / std::max(hi - lo, 1e-12);
      int bin = static_cast<int>(t * bin_it->second);
      bin = std::clamp(bin, 0, bin_it->second - 1);
      return static_cast<std::size_t>(bin);
    }
    const auto& catalog = catalogs_[inst.catalog];
    auto it = std::lower_bound(catalog.begin(), catalog.end(), v);
    if (it == catalog.end() || !(*it == v))
      throw UnknownCatalogEntry("value " + v.repr() + " not in catalog of " + inst.var);
    return static_cast<std::size_t>(it - catalog.begin());
  }

  const Domain* domain_;
  std::vector<VarInstance> instances_;
  std::vector<std::vector<Value>> catalogs_;
  std::map<std::string, int> bins_;
  std::size_t max_width_ = 0;
  std::vector<std::string> task_catalog_;
  std::vector<std::string> method_catalog_;
  std::vector<Value> object_catalog_;
  std::size_t max_task_arity_ = 0;
};

// ---------------------------------------------------------------------------
// Utility-interval buckets (for the learned heuristic)

/// Equal-frequency intervals over observed utilities; decode maps an
/// interval index to its midpoint.
class Buckets {
 public:
  static Buckets equal_frequency(std::vector<double> values, int k) {
    if (values.empty()) throw EmptyDataset("no utilities to bucket");
    if (k < 1) throw std::invalid_argument("bucket count must be positive");
    std::sort(values.begin(), values.end());
    Buckets b;
    std::size_t n = values.size();
    for (int i = 1; i < k; ++i)
      b.boundaries_.push_back(values[(static_cast<std::size_t>(i) * n) / static_cast<std::size_t>(k)]);
    b.lo_.resize(static_cast<std::size_t>(k));
    b.hi_.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      b.lo_[static_cast<std::size_t>(i)] = i == 0 ? values.front() : b.boundaries_[static_cast<std::size_t>(i - 1)];
      b.hi_[static_cast<std::size_t>(i)] = i == k - 1 ? values.back() : b.boundaries_[static_cast<std::size_t>(i)];
    }
    return b;
  }

  /// Explicit intervals (used for hand-specified bucketings).
  static Buckets from_intervals(std::vector<double> lo, std::vector<double> hi) {
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("bad intervals");
    Buckets b;
    b.lo_ = std::move(lo);
    b.hi_ = std::move(hi);
    for (std::size_t i = 1; i < b.lo_.size(); ++i) b.boundaries_.push_back(b.lo_[i]);
    return b;
  }

  int size() const { return static_cast<int>(lo_.size()); }

  int interval_of(double u) const {
    int idx = 0;
    for (double b : boundaries_)
      if (u >= b) ++idx;
      else break;
    return idx;
  }

  double midpoint(int idx) const {
    return (lo_[static_cast<std::size_t>(idx)] + hi_[static_cast<std::size_t>(idx)]) / 2.0;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"lo", lo_}, {"hi", hi_}, {"boundaries", boundaries_}};
  }
  static Buckets from_json(const nlohmann::json& j) {
    Buckets b;
    b.lo_ = j.at("lo").get<std::vector<double>>();
    b.hi_ = j.at("hi").get<std::vector<double>>();
    b.boundaries_ = j.at("boundaries").get<std::vector<double>>();
    return b;
  }

 private:
  std::vector<double> boundaries_;  // k-1 cut values
  std::vector<double> lo_, hi_;     // per-bucket interval ends
};

}  // namespace rae
