// Simulated annealing with periodic discrete-gradient descent.
//
// The annealer explores with Metropolis moves under geometric cooling; every
// `descent_period` temperature levels it polishes the best point found so
// far with steepest descent (central-difference gradients unless the
// objective supplies an analytic one) and an Armijo line search.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "energy.hpp"
#include "error.hpp"
#include "pdb_io.hpp"

namespace zipper {

struct Objective {
  std::size_t dimension = 0;
  std::function<double(std::span<const double>)> evaluate;
  // Optional; empty means "use finite differences".
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct AnnealConfig {
  std::optional<double> initial_temperature;  // nullopt: derived from x0
  double cooling_factor = 0.95;
  int steps_per_temperature = 50;
  double step_size = 0.5;
  int descent_period = 10;
  double descent_fd_step = 1e-3;
  int descent_max_steps = 1000;
  long max_iterations = 100000;
  double target_tolerance = 1e-8;
  std::uint64_t seed = 1;
  bool record_trace = true;

  void validate() const {
    if (initial_temperature && !(*initial_temperature > 0))
      throw ArgumentError("initial_temperature must be positive");
    if (!(cooling_factor > 0 && cooling_factor < 1))
      throw ArgumentError("cooling_factor must lie in (0, 1)");
    if (steps_per_temperature <= 0 || descent_period <= 0 || descent_max_steps < 0 ||
        max_iterations <= 0)
      throw ArgumentError("anneal step counts must be positive");
    if (!(step_size > 0) || !(descent_fd_step > 0) || !(target_tolerance >= 0))
      throw ArgumentError("anneal step sizes must be positive");
  }
};

struct TracePoint {
  long iteration = 0;
  double temperature = 0.0;
  double best_value = 0.0;
};

struct OptimizationResult {
  std::vector<double> best_point;
  double best_value = 0.0;
  long iterations = 0;
  long rejected_nonfinite = 0;
  bool stalled = false;
  std::vector<TracePoint> trace;
};

inline std::string trace_to_csv(const OptimizationResult& r) {
  std::string out = "iteration,temperature,best_value\n";
  char buf[96];
  for (const TracePoint& p : r.trace) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g\n", p.iteration, p.temperature, p.best_value);
    out += buf;
  }
  return out;
}

namespace impl {

inline double evaluate_checked(const Objective& obj, std::span<const double> x) {
  if (x.size() != obj.dimension)
    throw ArgumentError("start point has dimension " + std::to_string(x.size()) +
                        ", objective expects " + std::to_string(obj.dimension));
  double f = obj.evaluate(x);
  if (!std::isfinite(f))
    throw ArgumentError("objective is not finite at the start point");
  return f;
}

// Evaluation that maps thrown singularities to +inf, so a bad candidate is
// rejected rather than aborting the run.
inline double evaluate_soft(const Objective& obj, std::span<const double> x) {
  try {
    return obj.evaluate(x);
  } catch (const SingularityError&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline std::vector<double> central_difference(const Objective& obj, std::span<const double> x,
                                              double h) {
  std::vector<double> g(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double xi = probe[i];
    probe[i] = xi + h;
    double fp = evaluate_soft(obj, probe);
    probe[i] = xi - h;
    double fm = evaluate_soft(obj, probe);
    probe[i] = xi;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

}  // namespace impl

struct DescentOptions {
  double fd_step = 1e-3;
  int max_steps = 1000;
  double armijo = 1e-4;
  double backtrack = 0.5;
};

// Steepest descent with Armijo backtracking. The initial trial step doubles
// after each accepted step, so long flat approaches are crossed quickly.
// Every accepted step strictly lowers the value.
inline OptimizationResult discrete_gradient_descent(const Objective& obj,
                                                    std::span<const double> x0,
                                                    const DescentOptions& opt = {}) {
  OptimizationResult res;
  res.best_point.assign(x0.begin(), x0.end());
  res.best_value = impl::evaluate_checked(obj, x0);
  res.trace.push_back({0, 0.0, res.best_value});
  if (obj.dimension == 0)
    return res;

  std::vector<double>& x = res.best_point;
  double f = res.best_value;
  double t = 1.0;
  std::vector<double> trial(x.size());
  for (int step = 0; step < opt.max_steps; ++step) {
    std::vector<double> g;
    try {
      g = obj.gradient ? obj.gradient(x) : impl::central_difference(obj, x, opt.fd_step);
    } catch (const SingularityError&) {
      break;
    }
    double g2 = 0.0, xnorm = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g2 += g[i] * g[i];
      xnorm = std::max(xnorm, std::abs(x[i]));
    }
    if (!std::isfinite(g2) || g2 == 0.0)
      break;
    const double gnorm = std::sqrt(g2);
    bool accepted = false;
    double f_new = f;
    while (t * gnorm > 1e-15 * (1.0 + xnorm)) {
      for (std::size_t i = 0; i < x.size(); ++i)
        trial[i] = x[i] - t * g[i];
      f_new = impl::evaluate_soft(obj, trial);
      ++res.iterations;
      if (std::isfinite(f_new) && f_new <= f - opt.armijo * t * g2 && f_new < f) {
        accepted = true;
        break;
      }
      if (!std::isfinite(f_new))
        ++res.rejected_nonfinite;
      t *= opt.backtrack;
    }
    if (!accepted)
      break;
    double improvement = f - f_new;
    x = trial;
    f = f_new;
    res.trace.push_back({step + 1, 0.0, f});
    if (improvement <= 1e-16 * std::max(1.0, std::abs(f)))
      break;
    t *= 2.0;
  }
  res.best_value = f;
  return res;
}

inline OptimizationResult discrete_gradient_descent(const Objective& obj,
                                                    std::span<const double> x0, double fd_step,
                                                    int max_steps) {
  DescentOptions opt;
  opt.fd_step = fd_step;
  opt.max_steps = max_steps;
  return discrete_gradient_descent(obj, x0, opt);
}

namespace impl {

// T0 such that the median uphill single-coordinate move from x0 is
// accepted with probability 0.8.
inline double auto_temperature(const Objective& obj, std::span<const double> x0, double f0,
                               const std::vector<double>& step, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> uphill;
  std::vector<double> cand(x0.size());
  for (int k = 0; k < 100; ++k) {
    std::size_t i = static_cast<std::size_t>(k) % cand.size();
    std::copy(x0.begin(), x0.end(), cand.begin());
    cand[i] += step[i] * unit(rng);
    double fc = evaluate_soft(obj, cand);
    if (std::isfinite(fc) && fc > f0)
      uphill.push_back(fc - f0);
  }
  if (uphill.empty())
    return 1.0;
  auto mid = uphill.begin() + uphill.size() / 2;
  std::nth_element(uphill.begin(), mid, uphill.end());
  return -*mid / std::log(0.8);
}

}  // namespace impl

inline OptimizationResult anneal(const Objective& obj, std::span<const double> x0,
                                 const AnnealConfig& cfg) {
  cfg.validate();
  OptimizationResult res;
  res.best_point.assign(x0.begin(), x0.end());
  res.best_value = impl::evaluate_checked(obj, x0);
  if (obj.dimension == 0) {
    if (cfg.record_trace)
      res.trace.push_back({0, 0.0, res.best_value});
    return res;
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<double> step(obj.dimension, cfg.step_size);

  std::vector<double> x(x0.begin(), x0.end());
  double fx = res.best_value;
  double temperature = cfg.initial_temperature
                           ? *cfg.initial_temperature
                           : impl::auto_temperature(obj, x0, fx, step, rng);
  if (cfg.record_trace)
    res.trace.push_back({0, temperature, res.best_value});

  DescentOptions descent;
  descent.fd_step = cfg.descent_fd_step;
  descent.max_steps = cfg.descent_max_steps;

  auto polish = [&] {
    OptimizationResult local = discrete_gradient_descent(obj, res.best_point, descent);
    res.iterations += local.iterations;
    res.rejected_nonfinite += local.rejected_nonfinite;
    if (local.best_value < res.best_value) {
      res.best_point = local.best_point;
      res.best_value = local.best_value;
      x = res.best_point;
      fx = res.best_value;
    }
  };

  std::vector<double> cand(obj.dimension);
  std::vector<int> accepted(obj.dimension);
  const double max_step = 10.0 * cfg.step_size;
  double best_at_last_descent = res.best_value;
  int level = 0;
  while (res.iterations < cfg.max_iterations) {
    std::fill(accepted.begin(), accepted.end(), 0);
    // One step is a sweep perturbing each coordinate in turn.
    for (int k = 0; k < cfg.steps_per_temperature; ++k) {
      for (std::size_t i = 0; i < cand.size() && res.iterations < cfg.max_iterations; ++i) {
        cand = x;
        cand[i] += step[i] * unit(rng);
        double fc = impl::evaluate_soft(obj, cand);
        ++res.iterations;
        if (!std::isfinite(fc)) {
          ++res.rejected_nonfinite;
          continue;
        }
        double delta = fc - fx;
        if (delta <= 0 || coin(rng) < std::exp(-delta / temperature)) {
          x[i] = cand[i];
          fx = fc;
          ++accepted[i];
          if (fx < res.best_value) {
            res.best_value = fx;
            res.best_point = x;
          }
        }
      }
    }
    for (std::size_t i = 0; i < step.size(); ++i) {
      double rate = static_cast<double>(accepted[i]) / cfg.steps_per_temperature;
      if (rate > 0.6)
        step[i] = std::min(step[i] * 1.1, max_step);
      else if (rate < 0.4)
        step[i] *= 0.9;
    }
    temperature *= cfg.cooling_factor;
    ++level;

    if (level % cfg.descent_period == 0) {
      polish();
      if (level >= 2 * cfg.descent_period &&
          best_at_last_descent - res.best_value < cfg.target_tolerance) {
        res.stalled = true;
      }
      best_at_last_descent = res.best_value;
    }
    if (cfg.record_trace)
      res.trace.push_back({res.iterations, temperature, res.best_value});
    if (res.stalled)
      break;
  }
  polish();
  if (cfg.record_trace && res.trace.back().best_value != res.best_value)
    res.trace.push_back({res.iterations, temperature, res.best_value});
  return res;
}

// Independent runs from `starts` with seeds seed, seed+1, ...; runs are
// concurrent and the minimum wins, ties going to the earlier seed.
inline OptimizationResult anneal_multistart(const Objective& obj,
                                            const std::vector<std::vector<double>>& starts,
                                            const AnnealConfig& cfg) {
  if (starts.empty())
    throw ArgumentError("multistart needs at least one start point");
  std::vector<std::future<OptimizationResult>> runs;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    AnnealConfig c = cfg;
    c.seed = cfg.seed + k;
    runs.push_back(std::async(std::launch::async,
                              [&obj, &starts, k, c] { return anneal(obj, starts[k], c); }));
  }
  std::vector<OptimizationResult> results;
  for (auto& f : runs)
    results.push_back(f.get());
  std::size_t best = 0;
  for (std::size_t k = 1; k < results.size(); ++k)
    if (results[k].best_value < results[best].best_value)
      best = k;
  return results[best];
}

// The contact problem: fixed atoms stay put, free atoms' coordinates are the
// variables, and the value is the LJ energy of the listed vdw pairs.
struct ContactProblem {
  Objective objective;
  std::vector<double> start;                 // free atoms' current coordinates
  std::vector<std::size_t> free_indices;     // canonical atom indices
};

inline ContactProblem make_contact_objective(const Structure& s,
                                             const std::vector<AtomAddress>& fixed,
                                             const std::vector<AtomAddress>& free,
                                             const PairList& pl, const LJParams& lj) {
  lj.validate();
  std::vector<std::size_t> fixed_idx, free_idx;
  for (const AtomAddress& a : fixed)
    fixed_idx.push_back(atom_index(s, a));
  for (const AtomAddress& a : free)
    free_idx.push_back(atom_index(s, a));
  auto listed = [&](std::size_t i) {
    return std::find(fixed_idx.begin(), fixed_idx.end(), i) != fixed_idx.end() ||
           std::find(free_idx.begin(), free_idx.end(), i) != free_idx.end();
  };
  for (const AtomPair& p : pl.pairs())
    if (!listed(p.i) || !listed(p.j))
      throw ArgumentError("contact pair list references an atom that is neither fixed nor free");

  auto base = std::make_shared<const Conformation>(to_conformation(positions(s)));
  pl.check_indices(base->size() / 3);

  ContactProblem prob;
  prob.free_indices = free_idx;
  for (std::size_t i : free_idx)
    for (int c = 0; c < 3; ++c)
      prob.start.push_back((*base)[3 * i + c]);

  prob.objective.dimension = 3 * free_idx.size();
  auto embed = [base, free_idx](std::span<const double> v) {
    Conformation x = *base;
    for (std::size_t k = 0; k < free_idx.size(); ++k)
      for (int c = 0; c < 3; ++c)
        x[3 * free_idx[k] + c] = v[3 * k + c];
    return x;
  };
  prob.objective.evaluate = [embed, pl, lj](std::span<const double> v) {
    return lj_pairlist(embed(v), lj, pl);
  };
  prob.objective.gradient = [embed, pl, lj, free_idx](std::span<const double> v) {
    std::vector<double> full = gradient(embed(v), lj, pl);
    std::vector<double> g(3 * free_idx.size());
    for (std::size_t k = 0; k < free_idx.size(); ++k)
      for (int c = 0; c < 3; ++c)
        g[3 * k + c] = full[3 * free_idx[k] + c];
    return g;
  };
  return prob;
}

}  // namespace zipper
