#include "ctmn/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ctmn {

int AugmentedTrajectory::proposal_variable(int m) const {
  const State &x = states[m];
  const State &y = proposals[m];
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i])
      return static_cast<int>(i);
  throw std::logic_error("proposal identical to current state");
}

double Trajectory::horizon() const {
  double t = final_dwell;
  for (const auto &j : jumps)
    t += j.dwell;
  return t;
}

namespace {

State draw_initial(const CtmnModel &model, const InitialDistribution &init,
                   std::mt19937_64 &rng) {
  const StateSpace space(model.variables);
  switch (init.kind) {
  case InitialDistribution::Kind::Fixed:
    if (init.fixed.size() != model.variables.size())
      throw std::invalid_argument("fixed initial state has wrong arity");
    return init.fixed;
  case InitialDistribution::Kind::Uniform: {
    std::uniform_int_distribution<std::uint64_t> d(0, space.size() - 1);
    return space.state_of(d(rng));
  }
  case InitialDistribution::Kind::Stationary: {
    const Eigen::VectorXd pi = stationary_exact(model);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng);
    double acc = 0.0;
    for (std::uint64_t s = 0; s < space.size(); ++s) {
      acc += pi[s];
      if (r < acc)
        return space.state_of(s);
    }
    return space.state_of(space.size() - 1);
  }
  }
  throw std::logic_error("unreachable");
}

} // namespace

AugmentedTrajectory sample_augmented_trajectory(const CtmnModel &model,
                                                const InitialDistribution &init,
                                                double horizon,
                                                std::uint64_t seed) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("horizon must be positive");
  const int nv = static_cast<int>(model.variables.size());
  const InteractionGraph graph = induced_graph(model);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  AugmentedTrajectory out;
  out.horizon = horizon;
  State x = draw_initial(model, init, rng);
  out.states.push_back(x);

  double t = 0.0;
  for (;;) {
    // total proposal rate in the current state
    double rho = 0.0;
    for (int i = 0; i < nv; ++i)
      rho += model.proposals.row_sum(i, x[i]);
    if (rho <= 0.0)
      throw std::runtime_error("all proposal rates are zero in state; degenerate model");
    std::exponential_distribution<double> wait(rho);
    const double dt = wait(rng);
    if (t + dt >= horizon) {
      // pending proposal censored at the horizon
      out.tau.push_back(horizon - t);
      break;
    }
    t += dt;
    out.tau.push_back(dt);

    // pick (variable, target) proportional to its proposal rate
    double r = unit(rng) * rho;
    int pvar = -1, pval = -1;
    for (int i = 0; i < nv && pvar < 0; ++i) {
      const int c = model.variables[i].cardinality;
      for (int b = 0; b < c; ++b) {
        if (b == x[i])
          continue;
        r -= model.proposals.rate(i, x[i], b);
        if (r < 0.0) {
          pvar = i;
          pval = b;
          break;
        }
      }
    }
    if (pvar < 0) { // numerical edge of the scan
      pvar = nv - 1;
      pval = x[pvar] == 0 ? 1 : 0;
    }

    State y = x;
    y[pvar] = pval;
    out.proposals.push_back(y);
    const double lg = log_g_in_state(model, graph, pvar, x[pvar], pval, x);
    const double pacc = accept_prob_log(model.acceptance, lg);
    if (unit(rng) < pacc)
      x = y;
    out.states.push_back(x);
  }
  return out;
}

Trajectory strip_proposals(const AugmentedTrajectory &aug) {
  Trajectory out;
  out.initial = aug.states.front();
  double dwell = 0.0;
  for (int m = 0; m < aug.num_proposals(); ++m) {
    dwell += aug.tau[m];
    if (aug.accepted(m)) {
      out.jumps.push_back({dwell, aug.states[m + 1]});
      dwell = 0.0;
    }
  }
  out.final_dwell = dwell + aug.tau.back();
  return out;
}

} // namespace ctmn
