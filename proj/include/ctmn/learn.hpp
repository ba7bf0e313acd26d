#ifndef CTMN_LEARN_HPP
#define CTMN_LEARN_HPP

#include <string>
#include <vector>

#include "ctmn/model.hpp"
#include "ctmn/stats.hpp"

namespace ctmn {

struct OptimizerConfig {
  double grad_tolerance = 1e-8;   // max-norm of the gradient
  int max_iterations = 10000;
  double initial_step = 1.0;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  // Cap on the Metropolis psi_r term z/(1-z) near g = 1.
  double metropolis_psi_cap = 1e6;
};

struct OptimizerDiagnostics {
  double final_loglik = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct EmConfig {
  double param_tolerance = 1e-6;  // relative max parameter change
  int max_iterations = 500;
  // Default initialization is theta = 0 and twice the accepted-only rate
  // estimate; set this to start theta from the template weights instead.
  bool init_theta_from_template = false;
  OptimizerConfig inner;
};

struct EmIterationRecord {
  int iteration = 0;
  double observed_loglik = 0.0;   // NaN when not evaluated
  double param_change = 0.0;
  int inner_iterations = 0;
};

struct EmDiagnostics {
  std::vector<EmIterationRecord> iterations;
  bool converged = false;
  std::vector<std::string> warnings;
};

// One proposal cell of the acceptance likelihood: counts plus the sparse
// feature deltas that determine log g as a linear function of theta.
struct AcceptanceCell {
  int var = 0;
  std::uint64_t context = 0;
  int from = 0, to = 0;
  double accepted = 0.0, rejected = 0.0;
  std::vector<std::pair<int, double>> deltas;  // (feature index, s_k(y)-s_k(x))
};

// Flattens the visited (variable, context, transition) cells of `stats`.
std::vector<AcceptanceCell> acceptance_cells(const SufficientStats &stats,
                                             const CtmnModel &model,
                                             const InteractionGraph &graph);

// Sum over i of M[x,y] ln r - r T[x], over ordered pairs. Returns -inf (as a
// value, not an exception) when a zero rate carries a positive count.
double loglik_proposal(const SufficientStats &stats, const ProposalRates &rates);

// Acceptance/rejection log-likelihood; Z-free. -inf reported as a value.
double loglik_acceptance(const SufficientStats &stats, const CtmnModel &model,
                         const InteractionGraph &graph);
double loglik_acceptance(const std::vector<AcceptanceCell> &cells,
                         const std::vector<double> &theta, AcceptanceKind kind,
                         const OptimizerConfig &config = {});

std::vector<double> grad_acceptance(const SufficientStats &stats,
                                    const CtmnModel &model,
                                    const InteractionGraph &graph);
std::vector<double> grad_acceptance(const std::vector<AcceptanceCell> &cells,
                                    std::size_t num_weights,
                                    const std::vector<double> &theta,
                                    AcceptanceKind kind,
                                    const OptimizerConfig &config = {});

// Closed-form symmetric MLE (M[x,y]+M[y,x])/(T[x]+T[y]). Pairs with zero
// denominator keep the template value; a warning is recorded per such pair.
ProposalRates mle_proposal_rates(const SufficientStats &stats,
                                 const ProposalRates &templ,
                                 std::vector<std::string> *warnings = nullptr);

// Gradient ascent with Armijo backtracking on the acceptance likelihood.
std::vector<double> maximize_acceptance_weights(const SufficientStats &stats,
                                                const CtmnModel &model,
                                                const InteractionGraph &graph,
                                                const std::vector<double> &theta0,
                                                const OptimizerConfig &config,
                                                OptimizerDiagnostics *diag = nullptr);

// EM over unobserved rejected proposals: analytic E-step (expected
// rejections), closed-form rate M-step, gradient-ascent weight M-step.
CtmnModel em_fit(const std::vector<Trajectory> &trajectories,
                 const CtmnModel &templ, const EmConfig &config,
                 EmDiagnostics *diag = nullptr);

} // namespace ctmn

#endif
