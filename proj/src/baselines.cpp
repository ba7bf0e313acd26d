#include "ctmn/baselines.hpp"

#include <cmath>

#include "ctmn/stats.hpp"

namespace ctmn {

std::vector<double> fit_mn_dwell(const std::vector<Trajectory> &trajectories,
                                 const EquilibriumSpec &templ,
                                 const std::vector<VariableSpec> &variables,
                                 const OptimizerConfig &config,
                                 BaselineResult *result) {
  const StateSpace space(variables);
  const std::uint64_t n = space.size_checked();
  const std::size_t nk = templ.features.size();

  // Dwell-weighted empirical feature sums and total observation time.
  std::vector<double> emp(nk, 0.0);
  double t_total = 0.0;
  auto add_interval = [&](const State &x, double d) {
    t_total += d;
    for (std::size_t k = 0; k < nk; ++k)
      emp[k] += d * templ.features[k].value(x, space);
  };
  for (const auto &traj : trajectories) {
    State x = traj.initial;
    for (const auto &j : traj.jumps) {
      add_interval(x, j.dwell);
      x = j.to;
    }
    add_interval(x, traj.final_dwell);
  }

  // Feature table over all states, for log Z and E_pi[s].
  Eigen::MatrixXd feat(n, nk);
  for (std::uint64_t s = 0; s < n; ++s) {
    const State x = space.state_of(s);
    for (std::size_t k = 0; k < nk; ++k)
      feat(s, k) = templ.features[k].value(x, space);
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(nk);
  Eigen::VectorXd emp_v = Eigen::Map<Eigen::VectorXd>(emp.data(), nk);

  auto log_pi = [&](const Eigen::VectorXd &th) {
    Eigen::VectorXd logw = feat * th;
    const double mx = logw.maxCoeff();
    const double logz = mx + std::log((logw.array() - mx).exp().sum());
    return Eigen::VectorXd(logw.array() - logz);
  };
  auto objective = [&](const Eigen::VectorXd &th) {
    // sum_intervals d * log pi(x) = theta . emp - T_total * log Z
    Eigen::VectorXd logw = feat * th;
    const double mx = logw.maxCoeff();
    const double logz = mx + std::log((logw.array() - mx).exp().sum());
    return th.dot(emp_v) - t_total * logz;
  };

  double obj = objective(theta);
  double step = config.initial_step;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    const Eigen::VectorXd pi = log_pi(theta).array().exp();
    const Eigen::VectorXd grad = emp_v - t_total * (feat.transpose() * pi);
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm < config.grad_tolerance * std::max(1.0, t_total))
      break;
    double alpha = step;
    bool moved = false;
    const double g2 = grad.squaredNorm();
    while (alpha > 1e-18) {
      const Eigen::VectorXd cand = theta + alpha * grad;
      const double cobj = objective(cand);
      if (std::isfinite(cobj) && cobj >= obj + config.armijo_c * alpha * g2) {
        theta = cand;
        obj = cobj;
        moved = true;
        break;
      }
      alpha *= config.armijo_shrink;
    }
    if (!moved)
      break;
    step = std::min(alpha / config.armijo_shrink, config.initial_step);
  }

  if (result) {
    result->learner = "mn-dwell";
    result->iterations = it;
    result->stationary = log_pi(theta).array().exp();
    result->residual =
        (emp_v - t_total * (feat.transpose() * result->stationary))
            .lpNorm<Eigen::Infinity>();
  }
  return std::vector<double>(theta.data(), theta.data() + nk);
}

CtbnConditionalRates fit_ctbn_mle(const std::vector<Trajectory> &trajectories,
                                  const CtmnModel &templ,
                                  const InteractionGraph &graph,
                                  std::vector<std::string> *warnings) {
  const StateSpace space(templ.variables);
  SufficientStats stats;
  stats.per_var.resize(templ.variables.size());
  for (const auto &traj : trajectories)
    stats.merge(collect_observed_stats(traj, templ, graph));

  CtbnConditionalRates out;
  const int nv = static_cast<int>(templ.variables.size());
  out.vars.resize(nv);
  for (int i = 0; i < nv; ++i) {
    auto &vc = out.vars[i];
    vc.parents = graph.blankets[i];
    const int c = templ.variables[i].cardinality;
    const std::uint64_t nctx = space.subset_size(vc.parents);
    vc.per_context.assign(nctx, Eigen::MatrixXd::Zero(c, c));
    for (std::uint64_t u = 0; u < nctx; ++u) {
      const auto it = stats.per_var[i].find(u);
      Eigen::MatrixXd &m = vc.per_context[u];
      if (it == stats.per_var[i].end()) {
        if (warnings)
          warnings->push_back("context " + std::to_string(u) + " of variable " +
                              templ.variables[i].name +
                              " never visited; rates set to zero");
        continue;
      }
      const ContextStats &cs = it->second;
      for (int a = 0; a < c; ++a) {
        double diag = 0.0;
        if (cs.dwell[a] > 0.0) {
          for (int b = 0; b < c; ++b) {
            if (b == a)
              continue;
            m(a, b) = cs.acc(a, b) / cs.dwell[a];
            diag += m(a, b);
          }
        } else if (warnings) {
          warnings->push_back("value " + std::to_string(a) + " of variable " +
                              templ.variables[i].name + " in context " +
                              std::to_string(u) +
                              " has no dwell time; rates set to zero");
        }
        m(a, a) = -diag;
      }
    }
  }
  return out;
}

Eigen::VectorXd ctbn_stationary(const CtbnConditionalRates &ctbn,
                                const std::vector<VariableSpec> &variables,
                                BaselineResult *result) {
  const RateMatrix rm = amalgamate(ctbn, variables);
  const Eigen::Index n = rm.q.rows();

  Eigen::MatrixXd qt = rm.q.transpose();
  if (n <= 4096) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(qt);
    lu.setThreshold(1e-10 * std::max(1.0, qt.cwiseAbs().maxCoeff()));
    if (lu.rank() < n - 1)
      throw std::runtime_error("rate matrix null space is multidimensional; "
                               "chain is reducible");
  }

  // Replace one redundant balance equation by the normalization row.
  Eigen::MatrixXd a = qt;
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);

  for (Eigen::Index s = 0; s < n; ++s) {
    if (pi[s] < -1e-12)
      throw std::runtime_error("stationary solve produced a negative entry: " +
                               std::to_string(pi[s]));
    if (pi[s] < 0.0) {
      pi[s] = 0.0;
      if (result)
        result->warnings.push_back("clamped tiny negative stationary entry");
    }
  }
  pi /= pi.sum();

  const double residual = (pi.transpose() * rm.q).lpNorm<Eigen::Infinity>();
  if (residual >= 1e-10)
    throw std::runtime_error("stationary residual " + std::to_string(residual) +
                             " exceeds 1e-10");
  if (result) {
    result->learner = "ctbn";
    result->stationary = pi;
    result->residual = residual;
  }
  return pi;
}

} // namespace ctmn
