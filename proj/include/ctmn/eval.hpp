#ifndef CTMN_EVAL_HPP
#define CTMN_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ctmn/learn.hpp"
#include "ctmn/model.hpp"
#include "ctmn/simulate.hpp"

namespace ctmn {

// KL(p || q) with 0 ln 0 = 0; +inf where p > 0 and q = 0.
double kl_divergence(const Eigen::VectorXd &p, const Eigen::VectorXd &q);

// Exact log-density of an observed trajectory under the CTMP of Q: initial
// probability, exponential survival per interval, and the jump rates. The
// final interval contributes survival only (censored).
double trajectory_loglik_exact(const Trajectory &traj, const RateMatrix &q,
                               const Eigen::VectorXd &init);

// Equilibrium mean time between transitions, 1 / sum_x pi_x |q_xx|. One
// "expected-transition unit" of trajectory length equals this many absolute
// time units.
double expected_transition_time_unit(const CtmnModel &model);

enum class Regime { StationaryInit, UniformInitLong, UniformInitShort };
enum class LearnerKind { Ctmn, MnDwell, Ctbn };

std::string to_string(Regime r);
std::string to_string(LearnerKind l);

struct ExperimentConfig {
  Regime regime = Regime::StationaryInit;
  // Per-trajectory length in expected-transition units. 0 selects the
  // regime default (25 for stationary/long, 10 for short).
  double trajectory_units = 0.0;
  std::vector<double> sizes = {250.0, 1000.0, 4000.0};  // total training units
  int replicates = 20;
  std::uint64_t base_seed = 1;
  std::vector<LearnerKind> learners = {LearnerKind::Ctmn, LearnerKind::MnDwell,
                                       LearnerKind::Ctbn};
  EmConfig em;
  OptimizerConfig mn_optimizer;

  double effective_trajectory_units() const;
};

struct ExperimentRow {
  LearnerKind learner;
  Regime regime;
  double size = 0.0;
  int replicate = 0;
  double kl = 0.0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct ExperimentSummary {
  LearnerKind learner;
  Regime regime;
  double size = 0.0;
  double kl_median = 0.0;
  double kl_q25 = 0.0;
  double kl_q75 = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<ExperimentSummary> summaries;
};

// The learning experiment: sample per-regime training sets from the true
// model, fit every configured learner on the template structure, score
// KL(pi_true || pi_hat). Deterministic given the config and base seed.
ExperimentResult run_experiment(const CtmnModel &true_model,
                                const CtmnModel &templ,
                                const ExperimentConfig &config);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

} // namespace ctmn

#endif
