#include "ctmn/stats.hpp"

#include <cmath>

namespace ctmn {

double SufficientStats::dwell_total(int var, int value) const {
  double t = 0.0;
  for (const auto &[u, cs] : per_var[var])
    t += cs.dwell[value];
  return t;
}

double SufficientStats::pair_count(int var, int from, int to) const {
  double m = 0.0;
  for (const auto &[u, cs] : per_var[var])
    m += cs.acc(from, to) + cs.rej(from, to);
  return m;
}

double SufficientStats::accepted_total(int var, int from, int to) const {
  double m = 0.0;
  for (const auto &[u, cs] : per_var[var])
    m += cs.acc(from, to);
  return m;
}

void SufficientStats::merge(const SufficientStats &other) {
  if (per_var.empty())
    per_var.resize(other.per_var.size());
  for (std::size_t i = 0; i < other.per_var.size(); ++i) {
    for (const auto &[u, cs] : other.per_var[i]) {
      auto it = per_var[i].find(u);
      if (it == per_var[i].end()) {
        per_var[i].emplace(u, cs);
        continue;
      }
      ContextStats &mine = it->second;
      for (std::size_t j = 0; j < cs.dwell.size(); ++j)
        mine.dwell[j] += cs.dwell[j];
      for (std::size_t j = 0; j < cs.accepted.size(); ++j) {
        mine.accepted[j] += cs.accepted[j];
        mine.rejected[j] += cs.rejected[j];
      }
    }
  }
}

namespace {

SufficientStats make_empty(const CtmnModel &model) {
  SufficientStats s;
  s.per_var.resize(model.variables.size());
  return s;
}

ContextStats &context(SufficientStats &s, const CtmnModel &model, int var,
                      std::uint64_t ctx) {
  auto it = s.per_var[var].find(ctx);
  if (it == s.per_var[var].end())
    it = s.per_var[var].emplace(ctx, ContextStats(model.variables[var].cardinality)).first;
  return it->second;
}

void add_dwell(SufficientStats &s, const CtmnModel &model,
               const InteractionGraph &graph, const StateSpace &space,
               const State &x, double duration) {
  for (int i = 0; i < static_cast<int>(model.variables.size()); ++i) {
    const std::uint64_t u = space.project_index(x, graph.blankets[i]);
    context(s, model, i, u).dwell[x[i]] += duration;
  }
}

// The single changed variable, or -1 if states are equal, or -2 for a
// multi-variable change.
int changed_variable(const State &a, const State &b) {
  int var = -1;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) {
      if (var >= 0)
        return -2;
      var = static_cast<int>(i);
    }
  return var;
}

} // namespace

SufficientStats collect_observed_stats(const Trajectory &traj,
                                       const CtmnModel &model,
                                       const InteractionGraph &graph) {
  const StateSpace space(model.variables);
  SufficientStats s = make_empty(model);
  State x = traj.initial;
  for (const auto &j : traj.jumps) {
    add_dwell(s, model, graph, space, x, j.dwell);
    const int var = changed_variable(x, j.to);
    if (var == -1)
      throw InvalidTrajectory("self-transition in trajectory");
    if (var == -2)
      throw InvalidTrajectory("trajectory changes more than one variable at once");
    const std::uint64_t u = space.project_index(x, graph.blankets[var]);
    context(s, model, var, u).acc(x[var], j.to[var]) += 1.0;
    x = j.to;
  }
  add_dwell(s, model, graph, space, x, traj.final_dwell);
  return s;
}

SufficientStats collect_augmented_stats(const AugmentedTrajectory &aug,
                                        const CtmnModel &model,
                                        const InteractionGraph &graph) {
  const StateSpace space(model.variables);
  SufficientStats s = make_empty(model);
  for (int m = 0; m < aug.num_proposals(); ++m) {
    const State &x = aug.states[m];
    add_dwell(s, model, graph, space, x, aug.tau[m]);
    const int var = changed_variable(x, aug.proposals[m]);
    if (var < 0)
      throw InvalidTrajectory("proposal must change exactly one variable");
    const std::uint64_t u = space.project_index(x, graph.blankets[var]);
    ContextStats &cs = context(s, model, var, u);
    if (aug.accepted(m))
      cs.acc(x[var], aug.proposals[m][var]) += 1.0;
    else
      cs.rej(x[var], aug.proposals[m][var]) += 1.0;
  }
  add_dwell(s, model, graph, space, aug.states.back(), aug.tau.back());
  return s;
}

SufficientStats expected_rejections(const SufficientStats &stats,
                                    const CtmnModel &model,
                                    const InteractionGraph &graph) {
  if (stats.per_var.size() != model.variables.size())
    throw std::invalid_argument("stats and model variable counts differ");
  const StateSpace space(model.variables);
  SufficientStats out = stats;
  for (int i = 0; i < static_cast<int>(model.variables.size()); ++i) {
    const int c = model.variables[i].cardinality;
    for (auto &[u, cs] : out.per_var[i]) {
      if (u >= space.subset_size(graph.blankets[i]))
        throw std::invalid_argument("context index out of range for blanket of variable " +
                                    model.variables[i].name);
      const std::vector<int> bv = space.subset_state_of(u, graph.blankets[i]);
      for (int a = 0; a < c; ++a) {
        if (cs.dwell[a] == 0.0)
          continue;
        for (int b = 0; b < c; ++b) {
          if (b == a)
            continue;
          const double r = model.proposals.rate(i, a, b);
          if (r == 0.0)
            continue;
          const double f = accept_prob_log(model.acceptance,
                                           log_g(model, graph, i, a, b, bv));
          cs.rej(a, b) = cs.dwell[a] * r * (1.0 - f);
        }
      }
    }
  }
  return out;
}

} // namespace ctmn
