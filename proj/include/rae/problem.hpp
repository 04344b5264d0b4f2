#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "rae/domain.hpp"
#include "rae/value.hpp"

namespace rae {

struct CellWrite {
  std::string var;  // state variable or environment channel
  Args args;
  Value value;
};

/// A scheduled exogenous change: hidden-truth and/or observed-state
/// mutations, optionally delivering new root tasks.
struct ExogenousEvent {
  double time = 0;
  std::vector<CellWrite> state_writes;
  std::vector<CellWrite> env_writes;
  std::vector<TaskInstance> tasks;
};

/// One runnable problem: initial observed state, hidden environment
/// truths, the exogenous-event schedule and the root-task arrival
/// schedule. `parameters` records numeric knobs the generating domain
/// chose (e.g. outcome probabilities that are port defaults rather than
/// measured data).
struct ProblemInstance {
  std::string domain;
  std::uint64_t seed = 0;
  std::vector<CellWrite> initial_state;
  std::vector<CellWrite> environment;
  std::vector<ExogenousEvent> events;
  std::vector<std::pair<double, std::vector<TaskInstance>>> arrivals;
  std::map<std::string, double> parameters;

  std::size_t num_root_tasks() const {
    std::size_t n = 0;
    for (const auto& [t, ts] : arrivals) n += ts.size();
    for (const auto& e : events) n += e.tasks.size();
    return n;
  }
};

// --- JSON mapping ----------------------------------------------------------
// Values map onto plain JSON: string=Symbol, integer=Int, float=Real,
// bool=Bool, array=Tuple, null=Unknown.

inline nlohmann::json value_to_json(const Value& v) {
  using nlohmann::json;
  switch (v.kind()) {
    case Value::Kind::Unknown: return nullptr;
    case Value::Kind::Symbol: return v.as_symbol();
    case Value::Kind::Int: return v.as_int();
    case Value::Kind::Real: return v.as_real();
    case Value::Kind::Bool: return v.as_bool();
    case Value::Kind::Tuple: {
      json arr = json::array();
      for (const auto& x : v.as_tuple()) arr.push_back(value_to_json(x));
      return arr;
    }
  }
  return nullptr;
}

inline Value value_from_json(const nlohmann::json& j) {
  if (j.is_null()) return Value::unknown();
  if (j.is_string()) return Value::symbol(j.get<std::string>());
  if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
  if (j.is_number_float()) return Value::real(j.get<double>());
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_array()) {
    std::vector<Value> t;
    for (const auto& x : j) t.push_back(value_from_json(x));
    return Value::tuple(std::move(t));
  }
  throw std::invalid_argument("unsupported JSON value: " + j.dump());
}

inline nlohmann::json writes_to_json(const std::vector<CellWrite>& ws) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& w : ws) {
    nlohmann::json ja = nlohmann::json::array();
    for (const auto& a : w.args) ja.push_back(value_to_json(a));
    arr.push_back({{"var", w.var}, {"args", ja}, {"value", value_to_json(w.value)}});
  }
  return arr;
}

inline std::vector<CellWrite> writes_from_json(const nlohmann::json& j) {
  std::vector<CellWrite> out;
  for (const auto& e : j) {
    CellWrite w;
    w.var = e.at("var").get<std::string>();
    for (const auto& a : e.at("args")) w.args.push_back(value_from_json(a));
    w.value = value_from_json(e.at("value"));
    out.push_back(std::move(w));
  }
  return out;
}

inline nlohmann::json task_to_json(const TaskInstance& t) {
  nlohmann::json ja = nlohmann::json::array();
  ja.push_back(t.name);
  for (const auto& a : t.args) ja.push_back(value_to_json(a));
  return ja;
}

inline TaskInstance task_from_json(const nlohmann::json& j) {
  TaskInstance t;
  t.name = j.at(0).get<std::string>();
  for (std::size_t i = 1; i < j.size(); ++i) t.args.push_back(value_from_json(j[i]));
  return t;
}

inline nlohmann::json problem_to_json(const ProblemInstance& p) {
  using nlohmann::json;
  json j;
  j["domain"] = p.domain;
  j["seed"] = p.seed;
  j["initial_state"] = writes_to_json(p.initial_state);
  j["environment"] = writes_to_json(p.environment);
  json evs = json::array();
  for (const auto& e : p.events) {
    json je;
    je["time"] = e.time;
    je["state_writes"] = writes_to_json(e.state_writes);
    je["env_writes"] = writes_to_json(e.env_writes);
    json ts = json::array();
    for (const auto& t : e.tasks) ts.push_back(task_to_json(t));
    je["tasks"] = ts;
    evs.push_back(je);
  }
  j["events"] = evs;
  json arr = json::array();
  for (const auto& [time, tasks] : p.arrivals) {
    json ts = json::array();
    for (const auto& t : tasks) ts.push_back(task_to_json(t));
    arr.push_back({{"time", time}, {"tasks", ts}});
  }
  j["tasks"] = arr;
  if (!p.parameters.empty()) j["parameters"] = p.parameters;
  return j;
}

inline ProblemInstance problem_from_json(const nlohmann::json& j) {
  ProblemInstance p;
  p.domain = j.value("domain", "");
  p.seed = j.value("seed", std::uint64_t{0});
  p.initial_state = writes_from_json(j.at("initial_state"));
  p.environment = writes_from_json(j.at("environment"));
  if (j.contains("events"))
    for (const auto& je : j.at("events")) {
      ExogenousEvent e;
      e.time = je.at("time").get<double>();
      if (je.contains("state_writes")) e.state_writes = writes_from_json(je.at("state_writes"));
      if (je.contains("env_writes")) e.env_writes = writes_from_json(je.at("env_writes"));
      if (je.contains("tasks"))
        for (const auto& jt : je.at("tasks")) e.tasks.push_back(task_from_json(jt));
      p.events.push_back(std::move(e));
    }
  if (j.contains("tasks"))
    for (const auto& ja : j.at("tasks")) {
      std::vector<TaskInstance> ts;
      for (const auto& jt : ja.at("tasks")) ts.push_back(task_from_json(jt));
      p.arrivals.emplace_back(ja.at("time").get<double>(), std::move(ts));
    }
  if (j.contains("parameters"))
    p.parameters = j.at("parameters").get<std::map<std::string, double>>();
  return p;
}

}  // namespace rae
