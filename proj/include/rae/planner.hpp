#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rae/domain.hpp"
#include "rae/platform.hpp"
#include "rae/rng.hpp"
#include "rae/stack.hpp"
#include "rae/utility.hpp"

namespace rae {

struct MissingModel : std::runtime_error {
  explicit MissingModel(const std::string& what) : std::runtime_error(what) {}
};

enum class DepthMode { Refinements, Steps };
enum class HeuristicKind { H0, HD, Learned };

/// Learned heuristic hook: returns a utility value estimate for
/// accomplishing tau with m from s (kind implied by the planner config).
using LearnedHeuristic =
    std::function<double(const TaskInstance&, const MethodInstance&, const State&)>;

struct PlanConfig {
  int d_max = -1;  // < 0: no depth cutoff (rollouts run to completion)
  int n_ro = 100;
  double C = 1.0;  // exploration constant; efficiency Q is unnormalized, scale per domain
  UtilityKind utility = UtilityKind::Efficiency;
  DepthMode depth_mode = DepthMode::Refinements;
  HeuristicKind heuristic = HeuristicKind::H0;
  std::optional<double> time_budget_ms;  // checked between rollouts only
  double eff_cap = 1e9;                  // finite surrogate for the identity inside Q averages
  std::optional<int> k_exploit;          // early stop after K successive exploitation rollouts
  int rollout_threads = 1;               // >1: wave-parallel rollouts (results may differ)
  int stack_depth_cap = 200;             // recursion guard inside simulations

  bool unbounded_depth() const { return d_max < 0; }
};

// ---------------------------------------------------------------------------
// Search statistics

struct CandidateStats {
  MethodInstance instance;
  int n = 0;
  double q = 0.0;
};

struct NodeStats {
  int n_task = 0;  // equals the sum of candidate visit counts
  std::vector<CandidateStats> candidates;
};

/// Q/N tables keyed by the canonical encoding of (refinement stack,
/// abstract state). Owned by one Select invocation.
class SearchStats {
 public:
  NodeStats* find(const std::string& key) {
    auto it = nodes_.find(key);
    return it == nodes_.end() ? nullptr : &it->second;
  }
  NodeStats& create(const std::string& key) { return nodes_[key]; }
  const std::map<std::string, NodeStats>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::map<std::string, NodeStats> nodes_;
};

inline std::string node_key(const RefinementStack& sigma, const State& s) {
  return sigma.signature() + "#" + s.signature();
}

// ---------------------------------------------------------------------------
// Heuristics

/// Estimate of the state after a nondeveloped task would have been
/// achieved; reserved for the depth-counting variant that skips whole
/// refinements at the cutoff instead of truncating the rollout. No
/// bundled domain defines one and the default rollout never calls it.
using DefaultStateEstimator =
    std::function<State(const State&, const TaskInstance&, const MethodInstance&)>;

struct PlannerContext {
  const Domain& domain;
  PlanConfig config;
  LearnedHeuristic learned_h;             // required for HeuristicKind::Learned
  DefaultStateEstimator g_estimate;       // unexercised extension point
};

/// h(tau, m, s) per the configured heuristic: h0 is the identity element
/// (everything remaining is free), hD delegates to the domain's hand
/// heuristic, Learned decodes a trained utility-interval model.
inline UtilityValue heuristic_eval(const PlannerContext& ctx, const TaskInstance& tau,
                                   const MethodInstance& m, const State& s) {
  UtilityKind kind = ctx.config.utility;
  switch (ctx.config.heuristic) {
    case HeuristicKind::H0:
      return UtilityValue::identity(kind);
    case HeuristicKind::HD: {
      const DomainHeuristic* h = ctx.domain.domain_heuristic();
      if (!h) throw MissingModel("domain has no registered hand heuristic");
      return UtilityValue(kind, (*h)(tau, m, s, kind));
    }
    case HeuristicKind::Learned: {
      if (!ctx.learned_h) throw MissingModel("no learned heuristic loaded");
      return UtilityValue(kind, ctx.learned_h(tau, m, s));
    }
  }
  return UtilityValue::identity(kind);
}

// ---------------------------------------------------------------------------
// Rollouts

struct RolloutFlags {
  bool used_untried = false;  // some node picked from its untried set
  bool hit_cutoff = false;    // the depth bound truncated the rollout
};

/// Record of one Q update, for merging parallel rollout waves.
struct QUpdate {
  std::string key;
  std::string candidate;
  double lambda;
};
using UpdateLog = std::vector<QUpdate>;

namespace detail {

inline void apply_update(NodeStats& node, const std::string& cand_id, double lambda,
                         double eff_cap) {
  for (auto& c : node.candidates) {
    if (c.instance.identity() == cand_id) {
      double clamped = std::min(lambda, eff_cap);
      c.q = (c.n * c.q + clamped) / (1 + c.n);
      c.n += 1;
      node.n_task += 1;
      return;
    }
  }
}

}  // namespace detail

/// One UPOM rollout: descends the refinement tree from (s, sigma),
/// sampling action outcomes, choosing untried method instances at
/// random and visited ones by the UCB rule, and updating Q as the
/// running mean of the utilities attributed to each candidate.
/// Returns the utility of the simulated remainder (0 on failure, the
/// identity on success, a heuristic estimate at the depth bound).
inline UtilityValue upom_rollout(const PlannerContext& ctx, State& s, RefinementStack& sigma,
                                 int d, SearchStats& stats, RngStream& rng,
                                 RolloutFlags* flags = nullptr, UpdateLog* log = nullptr) {
  const UtilityKind kind = ctx.config.utility;
  if (sigma.empty()) return UtilityValue::identity(kind);

  if (static_cast<int>(sigma.size()) > ctx.config.stack_depth_cap)
    return UtilityValue::failure(kind);

  StackFrame& top = sigma.top();
  if (d == 0) {
    if (flags) flags->hit_cutoff = true;
    if (!top.has_method()) return UtilityValue::identity(kind);
    return heuristic_eval(ctx, top.task, top.method, s);
  }

  Step step = stack_step(sigma);

  // Task refinement (either the nil entry frame or a subtask step).
  if (!top.has_method() || step.kind == Step::Kind::Sub) {
    TaskInstance sub;
    if (!top.has_method()) {
      sub = top.task;
    } else {
      EvalCtx ectx = top.ctx(s, ctx.domain.rigid());
      sub = TaskInstance{step.instr->name, step.eval_args(ectx), TaskOrigin::Subtask};
    }

    std::string key = node_key(sigma, s);
    NodeStats* node = stats.find(key);
    if (!node) {
      std::vector<MethodInstance> candidates = ctx.domain.applicable(s, sub);
      std::vector<CandidateStats> kept;
      for (auto& m : candidates)
        if (!top.tried.contains(m)) kept.push_back(CandidateStats{std::move(m), 0, 0.0});
      if (kept.empty()) return UtilityValue::failure(kind);
      node = &stats.create(key);
      node->candidates = std::move(kept);
    }
    if (node->candidates.empty()) return UtilityValue::failure(kind);

    // Untried-first, then the UCB exploration/exploitation tradeoff.
    std::vector<std::size_t> untried;
    for (std::size_t i = 0; i < node->candidates.size(); ++i)
      if (node->candidates[i].n == 0) untried.push_back(i);

    std::size_t pick;
    if (!untried.empty()) {
      pick = untried[rng.uniform_index(untried.size())];
      if (flags) flags->used_untried = true;
    } else {
      pick = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < node->candidates.size(); ++i) {
        const CandidateStats& c = node->candidates[i];
        double score = c.q + ctx.config.C * std::sqrt(std::log(static_cast<double>(node->n_task)) /
                                                      static_cast<double>(c.n));
        if (score > best) {
          best = score;
          pick = i;
        }
      }
    }
    const MethodInstance chosen = node->candidates[pick].instance;
    const std::string chosen_id = chosen.identity();

    // Replace a nil entry frame; otherwise stack the child on the
    // in-progress Sub step (completing the child later advances it).
    if (!top.has_method()) sigma.pop();
    StackFrame child;
    child.task = sub;
    child.method = chosen;
    EvalCtx cctx{s, &ctx.domain.rigid(), &chosen.binding(), &child.locals};
    child.pc = initial_pc(chosen.tmpl().body, cctx);
    sigma.push(std::move(child));

    UtilityValue lambda = upom_rollout(ctx, s, sigma, d - 1, stats, rng, flags, log);

    // Re-find: the recursion may have rehashed the table.
    NodeStats* node2 = stats.find(key);
    if (node2) detail::apply_update(*node2, chosen_id, lambda.value(), ctx.config.eff_cap);
    if (log) log->push_back(QUpdate{key, chosen_id, lambda.value()});
    return lambda;
  }

  switch (step.kind) {
    case Step::Kind::End: {
      advance_stack(sigma, s, ctx.domain.rigid());
      return upom_rollout(ctx, s, sigma, d, stats, rng, flags, log);
    }
    case Step::Kind::Assign: {
      EvalCtx ectx = top.ctx(s, ctx.domain.rigid());
      Args target = step.eval_args(ectx);
      Value v = step.instr->value_expr(ectx);
      s.write(step.instr->name, target, std::move(v));
      advance_stack(sigma, s, ctx.domain.rigid());
      return upom_rollout(ctx, s, sigma, d, stats, rng, flags, log);
    }
    case Step::Kind::AssignLocal: {
      EvalCtx ectx = top.ctx(s, ctx.domain.rigid());
      Value v = step.instr->value_expr(ectx);
      top.locals[step.instr->name] = std::move(v);
      advance_stack(sigma, s, ctx.domain.rigid());
      return upom_rollout(ctx, s, sigma, d, stats, rng, flags, log);
    }
    case Step::Kind::FailNow:
      return UtilityValue::failure(kind);
    case Step::Kind::Act: {
      EvalCtx ectx = top.ctx(s, ctx.domain.rigid());
      Args args = step.eval_args(ectx);
      SampleResult sr = sample_action(ctx.domain, s, step.instr->name, args, rng);
      if (sr.failed) return UtilityValue::failure(kind);
      UtilityValue v = action_value(kind, sr.cost, false);
      s = std::move(sr.next);
      advance_stack(sigma, s, ctx.domain.rigid());
      int dn = ctx.config.depth_mode == DepthMode::Steps ? d - 1 : d;
      return oplus(v, upom_rollout(ctx, s, sigma, dn, stats, rng, flags, log));
    }
    default:
      throw std::logic_error("unhandled step kind in rollout");
  }
}

// ---------------------------------------------------------------------------
// Select (progressive deepening driver)

struct PlanDiagnostics {
  int depth_reached = 0;
  int rollouts = 0;
  double chosen_q = 0.0;
  std::vector<std::tuple<std::string, int, double>> root_table;  // identity, N, Q
};

struct PlanResult {
  std::optional<MethodInstance> chosen;
  PlanDiagnostics diag;
};

namespace detail {

inline void merge_wave(SearchStats& master, const SearchStats& snapshot, const UpdateLog& log,
                       double eff_cap) {
  for (const auto& u : log) {
    NodeStats* node = master.find(u.key);
    if (!node) {
      // First sight of this node: adopt its candidate list (zeroed).
      const SearchStats& src = snapshot;
      auto it = src.nodes().find(u.key);
      if (it == src.nodes().end()) continue;
      NodeStats& fresh = master.create(u.key);
      for (const auto& c : it->second.candidates)
        fresh.candidates.push_back(CandidateStats{c.instance, 0, 0.0});
      node = &fresh;
    }
    apply_update(*node, u.candidate, u.lambda, eff_cap);
  }
}

}  // namespace detail

/// Anytime approximately-optimal method-instance selection: applicable
/// instances minus the tried set, a heuristic initialization, then
/// progressively deeper batches of UPOM rollouts, keeping the argmax-Q
/// root candidate seen so far. With no depth bound, a single full-depth
/// batch is run (the deepening ladder has nowhere to stop).
inline PlanResult plan_select(const PlannerContext& ctx, const State& xi, const TaskInstance& tau,
                              const RefinementStack& sigma_ctx, const TriedSet& tried,
                              RngStream& rng) {
  PlanResult result;
  std::vector<MethodInstance> all = ctx.domain.applicable(xi, tau);
  std::vector<MethodInstance> m_set;
  for (auto& m : all)
    if (!tried.contains(m)) m_set.push_back(std::move(m));
  if (m_set.empty()) return result;
  if (m_set.size() == 1) {
    result.chosen = m_set[0];
    return result;
  }

  State s = ctx.domain.abstract(xi);

  RefinementStack sigma = sigma_ctx;
  StackFrame entry;
  entry.task = tau;
  entry.pc = ProgramCounter::end();
  entry.tried = tried;
  sigma.push(std::move(entry));

  // Heuristic initialization of the running best.
  std::size_t best_idx = 0;
  double best_h = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m_set.size(); ++i) {
    double h = heuristic_eval(ctx, tau, m_set[i], s).value();
    if (h > best_h) {
      best_h = h;
      best_idx = i;
    }
  }
  MethodInstance best = m_set[best_idx];

  SearchStats stats;
  const std::string root_key = node_key(sigma, s);
  const auto t0 = std::chrono::steady_clock::now();
  auto time_over = [&]() {
    if (!ctx.config.time_budget_ms) return false;
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return ms >= *ctx.config.time_budget_ms;
  };

  const int big_depth = std::numeric_limits<int>::max() / 2;
  const int last_depth = ctx.config.unbounded_depth() ? 1 : ctx.config.d_max;
  bool stop = false;

  for (int step = 1; step <= last_depth && !stop; ++step) {
    int d = ctx.config.unbounded_depth() ? big_depth : step;
    result.diag.depth_reached = ctx.config.unbounded_depth() ? -1 : d;

    int exploit_streak = 0;
    bool streak_hit_cutoff = false;

    if (ctx.config.rollout_threads <= 1) {
      for (int i = 0; i < ctx.config.n_ro; ++i) {
        if (time_over()) {
          stop = true;
          break;
        }
        State s_run = s;
        RefinementStack sig_run = sigma;
        RolloutFlags flags;
        upom_rollout(ctx, s_run, sig_run, d, stats, rng, &flags);
        result.diag.rollouts++;
        if (ctx.config.k_exploit) {
          if (!flags.used_untried) {
            exploit_streak++;
            streak_hit_cutoff = streak_hit_cutoff || flags.hit_cutoff;
            if (exploit_streak >= *ctx.config.k_exploit) break;
          } else {
            exploit_streak = 0;
            streak_hit_cutoff = false;
          }
        }
      }
    } else {
      // Wave-parallel rollouts: each wave runs T rollouts against a
      // snapshot of the statistics, then their updates are merged in
      // wave order. Not bit-equal to the sequential schedule.
      int remaining = ctx.config.n_ro;
      while (remaining > 0 && !time_over()) {
        int wave = std::min(remaining, ctx.config.rollout_threads);
        std::vector<SearchStats> snaps(static_cast<std::size_t>(wave), stats);
        std::vector<UpdateLog> logs(static_cast<std::size_t>(wave));
        std::vector<RngStream> rngs;
        rngs.reserve(static_cast<std::size_t>(wave));
        for (int w = 0; w < wave; ++w) rngs.push_back(rng.fork("wave" + std::to_string(w)));
        std::vector<std::thread> pool;
        for (int w = 0; w < wave; ++w) {
          pool.emplace_back([&, w]() {
            State s_run = s;
            RefinementStack sig_run = sigma;
            RolloutFlags flags;
            upom_rollout(ctx, s_run, sig_run, d, snaps[static_cast<std::size_t>(w)],
                         rngs[static_cast<std::size_t>(w)], &flags,
                         &logs[static_cast<std::size_t>(w)]);
          });
        }
        for (auto& th : pool) th.join();
        for (int w = 0; w < wave; ++w)
          detail::merge_wave(stats, snaps[static_cast<std::size_t>(w)],
                             logs[static_cast<std::size_t>(w)], ctx.config.eff_cap);
        remaining -= wave;
        result.diag.rollouts += wave;
      }
    }

    // Best root candidate by Q, ties resolved by applicable order.
    if (NodeStats* root = stats.find(root_key)) {
      double best_q = -std::numeric_limits<double>::infinity();
      const CandidateStats* best_c = nullptr;
      for (const auto& c : root->candidates) {
        if (c.q > best_q) {
          best_q = c.q;
          best_c = &c;
        }
      }
      if (best_c) {
        best = best_c->instance;
        result.diag.chosen_q = best_c->q;
      }
    }

    if (time_over()) stop = true;
    if (ctx.config.k_exploit && exploit_streak >= *ctx.config.k_exploit && !streak_hit_cutoff)
      stop = true;  // K exploitation rollouts with no subtask left unrefined
  }

  if (NodeStats* root = stats.find(root_key)) {
    for (const auto& c : root->candidates)
      result.diag.root_table.emplace_back(c.instance.identity(), c.n, c.q);
  }
  result.chosen = best;
  return result;
}

}  // namespace rae
