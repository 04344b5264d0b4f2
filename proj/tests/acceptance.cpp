// Acceptance suite: one criterion per invocation (1..10), or "all".
// Each criterion prints a single [PASS]/[FAIL] line; the exit code is
// the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rae/bench.hpp"
#include "rae/domains/registry.hpp"
#include "rae/learning.hpp"
#include "rae/oracle.hpp"

using namespace rae;
using rae::domains::DomainBundle;

namespace {

struct Criterion {
  int id;
  const char* summary;
  std::function<bool(std::string&)> run;
};

bool close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b));
}

// --- 1: utility algebra ------------------------------------------------------

bool criterion_1(std::string& detail) {
  {
    UtilityValue a(UtilityKind::Efficiency, 1.0 / 3.0);
    UtilityValue b(UtilityKind::Efficiency, 1.0 / 5.0);
    if (oplus(a, b).value() != 0.125) {
      detail = "1/3 (+) 1/5 not exactly 1/8";
      return false;
    }
  }
  RngStream rng(2024, "algebra");
  for (UtilityKind kind : {UtilityKind::Efficiency, UtilityKind::SuccessRatio}) {
    for (int i = 0; i < 10000; ++i) {
      auto draw = [&]() {
        if (kind == UtilityKind::SuccessRatio) return UtilityValue(kind, rng.uniform01());
        double r = rng.uniform01();
        if (r < 0.05) return UtilityValue(kind, 0.0);
        if (r < 0.10) return UtilityValue::identity(kind);
        return UtilityValue(kind, rng.uniform(1e-3, 1e3));
      };
      UtilityValue a = draw(), b = draw(), c = draw();
      double ab_c = oplus(oplus(a, b), c).value();
      double a_bc = oplus(a, oplus(b, c)).value();
      double ab = oplus(a, b).value();
      double ba = oplus(b, a).value();
      bool assoc = (std::isinf(ab_c) && std::isinf(a_bc)) ||
                   std::fabs(ab_c - a_bc) <= 1e-12 * std::max(1.0, std::fabs(ab_c));
      bool comm = (std::isinf(ab) && std::isinf(ba)) ||
                  std::fabs(ab - ba) <= 1e-12 * std::max(1.0, std::fabs(ab));
      double x = draw().value();
      UtilityValue v(kind, x);
      bool ident = oplus(v, UtilityValue::identity(kind)).value() == x &&
                   oplus(UtilityValue::identity(kind), v).value() == x;
      bool absorb = oplus(v, UtilityValue(kind, 0.0)).value() == 0.0 &&
                    oplus(UtilityValue(kind, 0.0), v).value() == 0.0;
      if (!(assoc && comm && ident && absorb)) {
        detail = "algebra property violated on a random triple";
        return false;
      }
    }
  }
  detail = "2x10^4 triples: associative, commutative, identity, absorbing; spot value exact";
  return true;
}

// --- 2: oracle values --------------------------------------------------------

bool criterion_2(std::string& detail) {
  DomainBundle toy = rae::domains::build_toy();
  State s = toy.domain->make_state();
  TaskInstance t{"t", {}, TaskOrigin::Root};
  auto ms = toy.domain->applicable(s, t);
  double eff_mA = exact_utility(*toy.domain, ms[0], s, UtilityKind::Efficiency).value();
  double eff_mB = exact_utility(*toy.domain, ms[1], s, UtilityKind::Efficiency).value();
  double sr_mA = exact_utility(*toy.domain, ms[0], s, UtilityKind::SuccessRatio).value();
  double sr_mB = exact_utility(*toy.domain, ms[1], s, UtilityKind::SuccessRatio).value();

  DomainBundle toy2 = rae::domains::build_toy2();
  State s2 = toy2.domain->make_state();
  TaskInstance t2{"t2", {}, TaskOrigin::Root};
  auto ms2 = toy2.domain->applicable(s2, t2);
  double eff_mC = exact_utility(*toy2.domain, ms2[0], s2, UtilityKind::Efficiency).value();
  double sr_mC = exact_utility(*toy2.domain, ms2[0], s2, UtilityKind::SuccessRatio).value();

  const double tol = 1e-12;
  bool ok = close(eff_mA, 0.5, tol) && close(eff_mB, 0.8, tol) && close(sr_mA, 1.0, tol) &&
            close(sr_mB, 0.8, tol) && close(eff_mC, 4.0 / 15.0, tol) && close(sr_mC, 1.0, tol);
  // The efficiency and success-ratio optima disagree.
  ok = ok && eff_mB > eff_mA && sr_mA > sr_mB;
  std::ostringstream os;
  os << "U*_eff={mA:" << eff_mA << ", mB:" << eff_mB << "}, U*_sr={mA:" << sr_mA
     << ", mB:" << sr_mB << "}, mC eff=" << eff_mC << " sr=" << sr_mC;
  detail = os.str();
  return ok;
}

// --- 3: convergence ----------------------------------------------------------

double optimal_pick_frequency(const Domain& domain, const TaskInstance& root,
                              const std::string& optimal_id, int n_ro, int seeds,
                              std::uint64_t salt) {
  PlanConfig cfg;
  cfg.n_ro = n_ro;
  cfg.d_max = -1;
  cfg.utility = UtilityKind::Efficiency;
  PlannerContext ctx{domain, cfg, nullptr};
  State xi = domain.make_state();
  int hits = 0;
  for (int i = 0; i < seeds; ++i) {
    RngStream rng(salt * 7919 + static_cast<std::uint64_t>(i), "conv");
    PlanResult r = plan_select(ctx, xi, root, RefinementStack{}, TriedSet{}, rng);
    if (r.chosen && r.chosen->identity() == optimal_id) ++hits;
  }
  return static_cast<double>(hits) / seeds;
}

bool criterion_3(std::string& detail) {
  std::ostringstream os;
  bool ok = true;

  // Toy over 100 seeds.
  DomainBundle toy = rae::domains::build_toy();
  TaskInstance t{"t", {}, TaskOrigin::Root};
  State s = toy.domain->make_state();
  OracleChoice best = optimal_method(*toy.domain, t, s, UtilityKind::Efficiency);
  std::map<int, double> toy_freq;
  for (int n_ro : {10, 100, 1000})
    toy_freq[n_ro] = optimal_pick_frequency(*toy.domain, t, best.method->identity(), n_ro, 100, 1);
  os << "toy freq {10:" << toy_freq[10] << " 100:" << toy_freq[100] << " 1000:" << toy_freq[1000]
     << "}";
  ok = ok && toy_freq[1000] >= 0.95;
  ok = ok && toy_freq[10] <= toy_freq[100] + 0.02 && toy_freq[100] <= toy_freq[1000] + 0.02;

  // 20 generated static micro-domains with a clear optimality margin.
  RngStream gen_rng(42, "micro-accept");
  MicroLimits limits{3, 2, 3};
  std::vector<MicroDomain> chosen;
  int scanned = 0;
  while (chosen.size() < 20 && scanned < 400) {
    ++scanned;
    MicroDomain md = gen_micro_domain(gen_rng, limits);
    State ms = md.domain->make_state();
    auto cands = md.domain->applicable(ms, md.root);
    if (cands.size() < 2) continue;
    std::vector<double> us;
    for (const auto& m : cands)
      us.push_back(exact_utility(*md.domain, m, ms, UtilityKind::Efficiency).value());
    double best_u = 0, second = 0;
    for (double u : us)
      if (u > best_u) {
        second = best_u;
        best_u = u;
      } else if (u > second) {
        second = u;
      }
    if (!std::isfinite(best_u) || best_u <= 0) continue;
    if (best_u < 1.2 * second || best_u - second < 0.05) continue;  // needs a margin
    chosen.push_back(std::move(md));
  }
  if (chosen.size() < 20) {
    detail = os.str() + " | could not assemble 20 margin micro-domains";
    return false;
  }

  std::map<int, double> micro_freq;
  for (int n_ro : {10, 100, 1000}) {
    double total = 0;
    for (std::size_t d = 0; d < chosen.size(); ++d) {
      State ms = chosen[d].domain->make_state();
      OracleChoice opt =
          optimal_method(*chosen[d].domain, chosen[d].root, ms, UtilityKind::Efficiency);
      total += optimal_pick_frequency(*chosen[d].domain, chosen[d].root, opt.method->identity(),
                                      n_ro, 5, 100 + d);
    }
    micro_freq[n_ro] = total / static_cast<double>(chosen.size());
  }
  os << " | micro freq {10:" << micro_freq[10] << " 100:" << micro_freq[100]
     << " 1000:" << micro_freq[1000] << "}";
  ok = ok && micro_freq[1000] >= 0.95;
  ok = ok && micro_freq[10] <= micro_freq[100] + 0.02 &&
       micro_freq[100] <= micro_freq[1000] + 0.02;

  detail = os.str();
  return ok;
}

// --- 4: untried-first UCB ----------------------------------------------------

bool criterion_4(std::string& detail) {
  for (int k = 1; k <= 6; ++k) {
    // One task, k methods over k distinct deterministic actions.
    Domain d;
    d.declare_task(TaskDecl{"t", {}});
    for (int i = 0; i < k; ++i) {
      ActionSpec a;
      a.name = "a" + std::to_string(i);
      ActionOutcome okc;
      okc.cost = constant_cost(1.0 + i);
      a.outcomes = {std::move(okc)};
      d.declare_action(std::move(a));
      MethodTemplate m;
      m.name = "m" + std::to_string(i);
      m.task = "t";
      m.body = ir::seq({ir::act("a" + std::to_string(i), {})});
      d.declare_method(std::move(m));
    }

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      PlanConfig cfg;
      PlannerContext ctx{d, cfg, nullptr};
      State s = d.make_state();
      RefinementStack sigma;
      StackFrame entry;
      entry.task = TaskInstance{"t", {}, TaskOrigin::Root};
      entry.pc = ProgramCounter::end();
      sigma.push(entry);
      std::string key = node_key(sigma, s);

      SearchStats stats;
      RngStream rng(seed, "untried");
      for (int i = 0; i < k; ++i) {
        State sc = s;
        RefinementStack gc = sigma;
        upom_rollout(ctx, sc, gc, 1000, stats, rng);
      }
      NodeStats* node = stats.find(key);
      if (!node || static_cast<int>(node->candidates.size()) != k) {
        detail = "node statistics missing candidates at k=" + std::to_string(k);
        return false;
      }
      for (const auto& c : node->candidates)
        if (c.n != 1) {
          detail = "candidate visited " + std::to_string(c.n) +
                   " times within the first k=" + std::to_string(k) + " rollouts";
          return false;
        }
    }
  }
  detail = "first k rollouts visit k distinct candidates, k=1..6, 20 seeds each";
  return true;
}

// --- 5: S&R registry ---------------------------------------------------------

bool criterion_5(std::string& detail) {
  DomainBundle b = rae::domains::build_snr();
  bool ok = b.domain->actions().size() == 14 && b.domain->methods().size() == 16;
  std::set<std::string> names;
  for (const auto& a : b.domain->actions()) names.insert(a->name);
  for (const char* n :
       {"moveEuclidean", "moveCurved", "moveManhattan", "fly", "giveSupportToPerson",
        "clearLocation", "inspectLocation", "inspectPerson", "transfer", "replenishSupplies",
        "captureImage", "changeAltitude", "deadEnd", "fail"})
    ok = ok && names.count(n) == 1;

  using rae::domains::SrPathKind;
  using rae::domains::sr_distance;
  double e = sr_distance(SrPathKind::Euclidean, Value::point(0, 0), Value::point(3, 4));
  double m = sr_distance(SrPathKind::Manhattan, Value::point(0, 0), Value::point(3, 4));
  double c = sr_distance(SrPathKind::Curved, Value::point(0, 0), Value::point(0, 2));
  ok = ok && e == 5.0 && m == 7.0 && c == M_PI;

  std::ostringstream os;
  os << b.domain->actions().size() << " actions, " << b.domain->methods().size()
     << " methods, distances {" << e << ", " << m << ", pi}";
  detail = os.str();
  return ok;
}

// --- 6: RAE semantics --------------------------------------------------------

bool criterion_6(std::string& detail) {
  DomainBundle toy = rae::domains::build_toy();
  Platform platform(*toy.domain, 1);
  EngineConfig cfg;
  Engine engine(*toy.domain, platform, cfg, 1);

  engine.submit(TaskInstance{"t", {}, TaskOrigin::Root});
  engine.step();  // intake: (t, mA, 1, {})
  Job* job = engine.agenda_mut().find(1);
  if (!job || job->stack.top().method.tmpl().name != "mA") {
    detail = "intake did not select the first declared method";
    return false;
  }

  // (a) a running action leaves the stack unchanged.
  engine.step();  // triggers a2 (duration 2)
  std::string sig = job->stack.signature();
  bool moved = true;
  engine.step(&moved);
  if (moved || job->stack.signature() != sig) {
    detail = "running action did not leave the stack unchanged";
    return false;
  }

  // (b) retry moves to the untried alternative in the current state.
  Engine::Outcome r1 = engine.retry(*job);
  if (r1 != Engine::Outcome::Progressed || job->stack.top().method.tmpl().name != "mB" ||
      job->retries != 1) {
    detail = "retry did not move to the untried alternative";
    return false;
  }

  // (c) a retried instance never reappears in the same frame.
  MethodInstance mA(toy.domain->methods()[0], Binding{});
  if (!job->stack.top().tried.contains(mA)) {
    detail = "tried set does not contain the failed instance";
    return false;
  }

  // (d) exhausted tried sets at the root yield retrial-failure.
  Engine::Outcome r2 = engine.retry(*job);
  if (r2 != Engine::Outcome::RetrialFailure) {
    detail = "exhausted root tried set did not produce retrial-failure";
    return false;
  }

  // (e) through the platform: a genuinely failing action drives Retry.
  // Scan for a seed whose first a1 draw fails, pre-try mA, and watch the
  // run end in retrial-failure.
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    DomainBundle t2 = rae::domains::build_toy();
    // The engine run below consumes one outcome draw for mA's a2 before
    // mB's a1 is triggered; mirror that order here.
    Platform probe(*t2.domain, seed);
    probe.trigger("a2", {}, 99);
    std::uint64_t probe_id = probe.trigger("a1", {}, 99);
    probe.advance(1.0);
    if (probe.poll(probe_id).status != ExecStatus::Failed) continue;

    Platform p3(*t2.domain, seed);
    EngineConfig cfg3;
    Engine e3(*t2.domain, p3, cfg3, seed);
    e3.submit(TaskInstance{"t", {}, TaskOrigin::Root});
    e3.step();
    Job* j3 = e3.agenda_mut().find(1);
    e3.retry(*j3);  // mA into tried; mB selected
    if (j3->stack.top().method.tmpl().name != "mB") continue;
    int guard = 0;
    std::vector<JobOutcome> outs;
    while (outs.empty() && guard++ < 50) {
      auto got = e3.step();
      for (auto& o : got) outs.push_back(o);
      p3.advance(1.0);
    }
    if (outs.empty()) {
      detail = "failed-action run did not terminate";
      return false;
    }
    if (outs[0].succeeded) {
      detail = "failed action did not surface as a retrial failure";
      return false;
    }
    detail = "running/failed/done transitions, retry exclusion and retrial-failure verified";
    return true;
  }
  detail = "no failing seed found for the platform-driven retry check";
  return false;
}

// --- 7: trend reproduction ---------------------------------------------------

bool criterion_7(std::string& detail) {
  std::ostringstream os;
  bool ok = true;

  auto sweep = [&](const std::string& domain, const std::string& mode, UtilityKind util,
                   int n_ro) {
    ExperimentConfig cfg;
    cfg.domain = domain;
    cfg.mode = mode;
    cfg.utility = util;
    cfg.n_ro = n_ro;
    cfg.d_max = -1;
    cfg.n_problems = 50;
    cfg.runs_per_problem = 20;
    cfg.seed = 7;
    cfg.difficulty = 1;
    cfg.jobs = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    return compute_metrics(run_experiment(cfg));
  };

  for (const std::string& domain : {std::string("fetch"), std::string("snr")}) {
    MetricsSummary reactive = sweep(domain, "reactive", UtilityKind::Efficiency, 0);
    MetricsSummary plan_eff = sweep(domain, "plan", UtilityKind::Efficiency, 50);
    MetricsSummary plan_sr = sweep(domain, "plan", UtilityKind::SuccessRatio, 50);

    double r_lo = reactive.retry_ratio.mean - reactive.retry_ratio.half_width;
    double p_hi = plan_eff.retry_ratio.mean + plan_eff.retry_ratio.half_width;
    bool retry_ok = plan_eff.retry_ratio.mean < reactive.retry_ratio.mean && p_hi < r_lo;
    bool sr_ok = plan_sr.success_ratio.mean >= reactive.success_ratio.mean;

    os << domain << ": retry " << reactive.retry_ratio.mean << "+-"
       << reactive.retry_ratio.half_width << " -> " << plan_eff.retry_ratio.mean << "+-"
       << plan_eff.retry_ratio.half_width << (retry_ok ? " (disjoint)" : " (OVERLAP)") << "; sr "
       << reactive.success_ratio.mean << " -> " << plan_sr.success_ratio.mean
       << (sr_ok ? "" : " (WORSE)") << " | ";
    ok = ok && retry_ok && sr_ok;
  }
  detail = os.str();
  return ok;
}

// --- 8: MLP numerics ---------------------------------------------------------

bool criterion_8(std::string& detail) {
  // Zero-weight cross entropy.
  Mlp zero(5, 7, 4);
  std::vector<double> probe = {0.3, -1, 2, 0.7, 0};
  if (std::fabs(zero.loss(probe, 1) - std::log(4.0)) > 1e-9) {
    detail = "zero-weight cross-entropy differs from ln(out)";
    return false;
  }

  // Gradient check.
  RngStream rng(99, "accept-grad");
  Mlp mlp(6, 5, 3);
  mlp.randomize(rng);
  std::vector<Sample> batch;
  for (int i = 0; i < 4; ++i) {
    Sample s;
    for (int k = 0; k < 6; ++k) s.x.push_back(rng.uniform(-1, 1));
    s.label = static_cast<int>(rng.uniform_index(3));
    batch.push_back(std::move(s));
  }
  Mlp::Gradients g = mlp.zero_grad();
  for (const auto& s : batch) mlp.accumulate(s.x, s.label, g);
  std::vector<double> flat = mlp.gradient_flat(g);
  std::vector<double*> params = mlp.parameters();
  const double eps = 1e-5;
  double worst = 0;
  auto batch_loss = [&]() {
    double total = 0;
    for (const auto& s : batch) total += mlp.loss(s.x, s.label);
    return total;
  };
  for (int probe_i = 0; probe_i < 10; ++probe_i) {
    std::size_t i = rng.uniform_index(params.size());
    double saved = *params[i];
    *params[i] = saved + eps;
    double up = batch_loss();
    *params[i] = saved - eps;
    double down = batch_loss();
    *params[i] = saved;
    double numeric = (up - down) / (2 * eps);
    double rel =
        std::fabs(numeric - flat[i]) / std::max({1e-8, std::fabs(numeric), std::fabs(flat[i])});
    worst = std::max(worst, rel);
  }
  if (worst >= 1e-4) {
    detail = "gradient check relative error " + std::to_string(worst);
    return false;
  }

  // Linearly separable set: 18 of 20 seeds reach 95% validation accuracy.
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream srng(seed, "accept-sep");
    std::vector<Sample> data;
    while (data.size() < 300) {
      double a = srng.uniform(-1, 1), b = srng.uniform(-1, 1);
      if (std::fabs(a - b) < 0.1) continue;
      data.push_back(Sample{{a, b}, a > b ? 1 : 0});
    }
    Mlp net(2, 8, 2);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.learning_rate = 0.05;
    cfg.seed = seed;
    auto history = train(net, data, cfg);
    if (history.back().val_accuracy >= 0.95) ++passing;
  }
  std::ostringstream os;
  os << "grad rel err " << worst << ", separable seeds passing " << passing << "/20";
  detail = os.str();
  return passing >= 18;
}

// --- 9: LearnH bucketing -----------------------------------------------------

bool criterion_9(std::string& detail) {
  RngStream rng(5, "accept-buckets");
  std::vector<double> utilities;
  for (int i = 0; i < 100; ++i) utilities.push_back(rng.uniform(0.0, 2.0));
  Buckets b = Buckets::equal_frequency(utilities, 4);
  std::vector<int> counts(4, 0);
  for (double u : utilities) counts[static_cast<std::size_t>(b.interval_of(u))]++;
  for (int c : counts)
    if (c < 24 || c > 26) {
      detail = "bucket size " + std::to_string(c) + " outside 25 +- 1";
      return false;
    }

  Buckets fixed = Buckets::from_intervals({0.0, 0.2, 0.4}, {0.2, 0.4, 0.8});
  if (fixed.midpoint(1) != (0.2 + 0.4) / 2.0) {
    detail = "midpoint decode not exact";
    return false;
  }
  std::ostringstream os;
  os << "bucket sizes {" << counts[0] << "," << counts[1] << "," << counts[2] << "," << counts[3]
     << "}, midpoint([0.2,0.4)) = 0.3";
  detail = os.str();
  return true;
}

// --- 10: determinism ---------------------------------------------------------

bool criterion_10(std::string& detail) {
  auto render = [](const char* domain, const char* mode, int n_ro) {
    ExperimentConfig cfg;
    cfg.domain = domain;
    cfg.mode = mode;
    cfg.n_ro = n_ro;
    cfg.n_problems = 3;
    cfg.runs_per_problem = 4;
    cfg.seed = 17;
    cfg.difficulty = 1;
    std::ostringstream os;
    write_csv(run_experiment(cfg), os);
    return os.str();
  };
  for (auto [domain, mode, n_ro] :
       {std::tuple{"toy", "reactive", 0}, {"snr", "plan", 20}, {"fetch", "plan", 20}}) {
    if (render(domain, mode, n_ro) != render(domain, mode, n_ro)) {
      detail = std::string("re-run differs on ") + domain;
      return false;
    }
  }
  detail = "re-runs byte-identical on toy/snr/fetch (reactive and planning)";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "utility algebra properties and spot value", criterion_1},
      {2, "exact oracle values on toy domains", criterion_2},
      {3, "UPOM convergence to oracle optima", criterion_3},
      {4, "untried-first UCB visits", criterion_4},
      {5, "search-and-rescue registry and distances", criterion_5},
      {6, "acting-engine progress/retry semantics", criterion_6},
      {7, "desk-scale planning trends", criterion_7},
      {8, "MLP numerics", criterion_8},
      {9, "utility-interval bucketing", criterion_9},
      {10, "byte-identical reruns", criterion_10},
  };

  int wanted = 0;  // 0 = all
  if (argc > 1 && std::strcmp(argv[1], "all") != 0) wanted = std::atoi(argv[1]);

  int failed = 0;
  for (const auto& c : criteria) {
    if (wanted != 0 && c.id != wanted) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL", c.id, c.summary,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  return failed;
}
