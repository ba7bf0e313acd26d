#include "ctmn/learn.hpp"

#include <cmath>
#include <limits>

#include "ctmn/eval.hpp"

namespace ctmn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double softplus(double t) {
  // log(1 + e^t), stable for large |t|
  if (t > 30.0)
    return t;
  if (t < -30.0)
    return std::exp(t);
  return std::log1p(std::exp(t));
}

} // namespace

std::vector<AcceptanceCell> acceptance_cells(const SufficientStats &stats,
                                             const CtmnModel &model,
                                             const InteractionGraph &graph) {
  const StateSpace space(model.variables);
  std::vector<AcceptanceCell> cells;
  for (int i = 0; i < static_cast<int>(stats.per_var.size()); ++i) {
    const int c = model.variables[i].cardinality;
    for (const auto &[u, cs] : stats.per_var[i]) {
      std::vector<int> bv = space.subset_state_of(u, graph.blankets[i]);
      State scratch(model.variables.size(), 0);
      for (std::size_t j = 0; j < graph.blankets[i].size(); ++j)
        scratch[graph.blankets[i][j]] = bv[j];
      for (int a = 0; a < c; ++a)
        for (int b = 0; b < c; ++b) {
          if (b == a || (cs.acc(a, b) == 0.0 && cs.rej(a, b) == 0.0))
            continue;
          AcceptanceCell cell;
          cell.var = i;
          cell.context = u;
          cell.from = a;
          cell.to = b;
          cell.accepted = cs.acc(a, b);
          cell.rejected = cs.rej(a, b);
          State xs = scratch, ys = scratch;
          xs[i] = a;
          ys[i] = b;
          for (std::size_t k = 0; k < model.equilibrium.features.size(); ++k) {
            const Feature &f = model.equilibrium.features[k];
            if (std::find(f.scope.begin(), f.scope.end(), i) == f.scope.end())
              continue;
            const double d = f.value(ys, space) - f.value(xs, space);
            if (d != 0.0)
              cell.deltas.emplace_back(static_cast<int>(k), d);
          }
          cells.push_back(std::move(cell));
        }
    }
  }
  return cells;
}

double loglik_proposal(const SufficientStats &stats, const ProposalRates &rates) {
  double ll = 0.0;
  for (int i = 0; i < static_cast<int>(stats.per_var.size()); ++i) {
    const int c = rates.cardinality(i);
    for (int a = 0; a < c; ++a) {
      const double t = stats.dwell_total(i, a);
      for (int b = 0; b < c; ++b) {
        if (b == a)
          continue;
        const double r = rates.rate(i, a, b);
        const double m = stats.pair_count(i, a, b);
        if (m > 0.0) {
          if (r <= 0.0)
            return kNegInf;
          ll += m * std::log(r);
        }
        ll -= r * t;
      }
    }
  }
  return ll;
}

double loglik_acceptance(const std::vector<AcceptanceCell> &cells,
                         const std::vector<double> &theta, AcceptanceKind kind,
                         const OptimizerConfig &config) {
  (void)config;
  double ll = 0.0;
  for (const auto &cell : cells) {
    double t = 0.0;
    for (const auto &[k, d] : cell.deltas)
      t += theta[k] * d;
    double log_f, log_1mf;
    if (kind == AcceptanceKind::Logistic) {
      log_f = -softplus(-t);
      log_1mf = -softplus(t);
    } else {
      if (t >= 0.0) {
        log_f = 0.0;
        log_1mf = kNegInf;  // f = 1, rejection impossible
      } else {
        log_f = t;
        log_1mf = std::log1p(-std::exp(t));
      }
    }
    if (cell.accepted > 0.0) {
      if (log_f == kNegInf)
        return kNegInf;
      ll += cell.accepted * log_f;
    }
    if (cell.rejected > 0.0) {
      if (log_1mf == kNegInf)
        return kNegInf;
      ll += cell.rejected * log_1mf;
    }
  }
  return ll;
}

double loglik_acceptance(const SufficientStats &stats, const CtmnModel &model,
                         const InteractionGraph &graph) {
  return loglik_acceptance(acceptance_cells(stats, model, graph),
                           model.equilibrium.weights, model.acceptance);
}

std::vector<double> grad_acceptance(const std::vector<AcceptanceCell> &cells,
                                    std::size_t num_weights,
                                    const std::vector<double> &theta,
                                    AcceptanceKind kind,
                                    const OptimizerConfig &config) {
  std::vector<double> grad(num_weights, 0.0);
  for (const auto &cell : cells) {
    double t = 0.0;
    for (const auto &[k, d] : cell.deltas)
      t += theta[k] * d;
    double psi_a, psi_r;
    if (kind == AcceptanceKind::Logistic) {
      const double f = accept_prob_log(kind, t);
      psi_a = 1.0 - f;
      psi_r = f;
    } else {
      // Subgradient at g = 1: psi_a = 1{g <= 1}; psi_r is the left limit
      // z/(1-z), clamped.
      psi_a = t <= 0.0 ? 1.0 : 0.0;
      if (t <= 0.0) {
        const double z = std::exp(t);
        psi_r = z >= 1.0 ? config.metropolis_psi_cap
                         : std::min(config.metropolis_psi_cap, z / (1.0 - z));
      } else {
        psi_r = 0.0;
      }
    }
    const double coef = psi_a * cell.accepted - psi_r * cell.rejected;
    if (coef == 0.0)
      continue;
    for (const auto &[k, d] : cell.deltas)
      grad[k] += d * coef;
  }
  return grad;
}

std::vector<double> grad_acceptance(const SufficientStats &stats,
                                    const CtmnModel &model,
                                    const InteractionGraph &graph) {
  return grad_acceptance(acceptance_cells(stats, model, graph),
                         model.equilibrium.weights.size(),
                         model.equilibrium.weights, model.acceptance);
}

ProposalRates mle_proposal_rates(const SufficientStats &stats,
                                 const ProposalRates &templ,
                                 std::vector<std::string> *warnings) {
  ProposalRates out = templ;
  for (int i = 0; i < static_cast<int>(stats.per_var.size()); ++i) {
    const int c = templ.cardinality(i);
    for (int a = 0; a < c; ++a)
      for (int b = a + 1; b < c; ++b) {
        const double num = stats.pair_count(i, a, b) + stats.pair_count(i, b, a);
        const double den = stats.dwell_total(i, a) + stats.dwell_total(i, b);
        if (den > 0.0) {
          out.set_symmetric(i, a, b, num / den);
        } else if (warnings) {
          warnings->push_back("no dwell time for variable " + std::to_string(i) +
                              " values " + std::to_string(a) + "," +
                              std::to_string(b) + "; keeping template rate");
        }
      }
  }
  return out;
}

std::vector<double> maximize_acceptance_weights(const SufficientStats &stats,
                                                const CtmnModel &model,
                                                const InteractionGraph &graph,
                                                const std::vector<double> &theta0,
                                                const OptimizerConfig &config,
                                                OptimizerDiagnostics *diag) {
  const auto cells = acceptance_cells(stats, model, graph);
  const std::size_t nk = model.equilibrium.weights.size();
  std::vector<double> theta = theta0;
  double ll = loglik_acceptance(cells, theta, model.acceptance, config);
  if (!std::isfinite(ll))
    throw std::runtime_error("acceptance log-likelihood is non-finite at the "
                             "starting point; cannot optimize");
  double step = config.initial_step;
  int it = 0;
  bool converged = false;
  double gnorm = 0.0;
  for (; it < config.max_iterations; ++it) {
    const auto grad = grad_acceptance(cells, nk, theta, model.acceptance, config);
    gnorm = 0.0;
    double g2 = 0.0;
    for (double g : grad) {
      gnorm = std::max(gnorm, std::abs(g));
      g2 += g * g;
    }
    if (gnorm < config.grad_tolerance) {
      converged = true;
      break;
    }
    // Armijo backtracking on the ascent direction.
    double alpha = step;
    bool moved = false;
    while (alpha > 1e-18) {
      std::vector<double> cand = theta;
      for (std::size_t k = 0; k < nk; ++k)
        cand[k] += alpha * grad[k];
      const double cll = loglik_acceptance(cells, cand, model.acceptance, config);
      if (std::isfinite(cll) && cll >= ll + config.armijo_c * alpha * g2) {
        theta = std::move(cand);
        ll = cll;
        moved = true;
        break;
      }
      alpha *= config.armijo_shrink;
    }
    if (!moved)
      break;  // no ascent step found at machine scale
    step = std::min(alpha / config.armijo_shrink, config.initial_step * 16.0);
  }
  if (diag) {
    diag->final_loglik = ll;
    diag->grad_norm = gnorm;
    diag->iterations = it;
    diag->converged = converged;
  }
  return theta;
}

namespace {

double relative_change(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

} // namespace

CtmnModel em_fit(const std::vector<Trajectory> &trajectories,
                 const CtmnModel &templ, const EmConfig &config,
                 EmDiagnostics *diag) {
  const InteractionGraph graph = induced_graph(templ);
  const StateSpace space(templ.variables);

  SufficientStats obs;
  obs.per_var.resize(templ.variables.size());
  double total_accepted = 0.0;
  for (const auto &traj : trajectories)
    obs.merge(collect_observed_stats(traj, templ, graph));
  for (int i = 0; i < static_cast<int>(templ.variables.size()); ++i)
    for (int a = 0; a < templ.variables[i].cardinality; ++a)
      for (int b = 0; b < templ.variables[i].cardinality; ++b)
        if (a != b)
          total_accepted += obs.accepted_total(i, a, b);

  CtmnModel model = templ;
  if (!config.init_theta_from_template)
    std::fill(model.equilibrium.weights.begin(), model.equilibrium.weights.end(), 0.0);
  if (total_accepted == 0.0) {
    if (diag)
      diag->warnings.push_back("no transitions in the data; returning template");
    // Rates still shrink toward zero for visited values.
    model.proposals = mle_proposal_rates(obs, templ.proposals,
                                         diag ? &diag->warnings : nullptr);
    model.equilibrium.weights = templ.equilibrium.weights;
    return model;
  }

  // Optimistic completion: acceptance <= 1 means at least as many proposals
  // as accepted transitions, so start from twice the accepted-only estimate.
  {
    ProposalRates init = mle_proposal_rates(obs, templ.proposals, nullptr);
    for (int i = 0; i < init.num_variables(); ++i)
      for (int a = 0; a < init.cardinality(i); ++a)
        for (int b = a + 1; b < init.cardinality(i); ++b)
          init.set_symmetric(i, a, b, 2.0 * init.rate(i, a, b));
    model.proposals = init;
  }

  const bool track_loglik = space.size() <= (std::uint64_t{1} << 12);
  Eigen::VectorXd uniform_init;
  if (track_loglik)
    uniform_init = Eigen::VectorXd::Constant(space.size(), 1.0 / double(space.size()));

  bool converged = false;
  for (int it = 0; it < config.max_iterations; ++it) {
    const SufficientStats completed = expected_rejections(obs, model, graph);

    ProposalRates new_rates = mle_proposal_rates(completed, model.proposals,
                                                 diag ? &diag->warnings : nullptr);
    OptimizerDiagnostics inner;
    std::vector<double> new_theta = maximize_acceptance_weights(
        completed, model, graph, model.equilibrium.weights, config.inner, &inner);

    double change = 0.0;
    for (int i = 0; i < new_rates.num_variables(); ++i)
      for (int a = 0; a < new_rates.cardinality(i); ++a)
        for (int b = 0; b < new_rates.cardinality(i); ++b)
          if (a != b)
            change = std::max(change, relative_change(new_rates.rate(i, a, b),
                                                      model.proposals.rate(i, a, b)));
    for (std::size_t k = 0; k < new_theta.size(); ++k)
      change = std::max(change,
                        relative_change(new_theta[k], model.equilibrium.weights[k]));

    model.proposals = new_rates;
    model.equilibrium.weights = new_theta;

    if (diag) {
      EmIterationRecord rec;
      rec.iteration = it;
      rec.param_change = change;
      rec.inner_iterations = inner.iterations;
      rec.observed_loglik = std::numeric_limits<double>::quiet_NaN();
      if (track_loglik) {
        const RateMatrix q = build_rate_matrix(model);
        double ll = 0.0;
        for (const auto &traj : trajectories)
          ll += trajectory_loglik_exact(traj, q, uniform_init);
        rec.observed_loglik = ll;
      }
      diag->iterations.push_back(rec);
    }

    if (change < config.param_tolerance) {
      converged = true;
      break;
    }
  }
  if (diag) {
    diag->converged = converged;
    if (!converged)
      diag->warnings.push_back("EM reached the iteration cap before converging");
  }
  return model;
}

} // namespace ctmn
