#ifndef CTMN_BASELINES_HPP
#define CTMN_BASELINES_HPP

#include <string>
#include <vector>

#include "ctmn/learn.hpp"
#include "ctmn/model.hpp"
#include "ctmn/simulate.hpp"

namespace ctmn {

struct BaselineResult {
  Eigen::VectorXd stationary;
  std::string learner;
  int iterations = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

// Dwell-time-weighted Markov-network fit: maximizes
// sum_intervals duration * log pi_theta(state) by gradient ascent, with the
// model feature expectation computed by exact enumeration.
std::vector<double> fit_mn_dwell(const std::vector<Trajectory> &trajectories,
                                 const EquilibriumSpec &templ,
                                 const std::vector<VariableSpec> &variables,
                                 const OptimizerConfig &config,
                                 BaselineResult *result = nullptr);

// Conditional-rate MLE q = M^a / T per (variable, parent context); cells
// without dwell evidence get rate zero and a warning.
CtbnConditionalRates fit_ctbn_mle(const std::vector<Trajectory> &trajectories,
                                  const CtmnModel &templ,
                                  const InteractionGraph &graph,
                                  std::vector<std::string> *warnings = nullptr);

// Stationary distribution of the amalgamated chain: the normalized null
// vector of Q^T, via a dense solve with one balance row replaced by the
// normalization constraint. Asserts ||pi^T Q||_inf < 1e-10 on return.
Eigen::VectorXd ctbn_stationary(const CtbnConditionalRates &ctbn,
                                const std::vector<VariableSpec> &variables,
                                BaselineResult *result = nullptr);

} // namespace ctmn

#endif
