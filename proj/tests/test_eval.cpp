#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ctmn/eval.hpp"
#include "ctmn/io.hpp"
#include "helpers.hpp"

using namespace ctmn;

TEST_CASE("kl_divergence") {
  Eigen::VectorXd p(2), q(2);
  p << 0.75, 0.25;
  q << 0.5, 0.5;
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(p, q) ==
        doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)).epsilon(1e-12));

  SUBCASE("support violation is infinite") {
    Eigen::VectorXd z(2);
    z << 1.0, 0.0;
    CHECK(std::isinf(kl_divergence(p, z)));
    CHECK(kl_divergence(z, p) > 0.0);  // 0 ln 0 = 0 on the p side
  }
  SUBCASE("nonnegative, zero only at equality") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
      Eigen::VectorXd a(4), b(4);
      for (int i = 0; i < 4; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
      }
      a /= a.sum();
      b /= b.sum();
      const double kl = kl_divergence(a, b);
      CHECK(kl >= 0.0);
      if ((a - b).cwiseAbs().maxCoeff() > 1e-3)
        CHECK(kl > 0.0);
    }
  }
}

TEST_CASE("trajectory_loglik_exact") {
  RateMatrix rm;
  rm.space = StateSpace({{"X", 2}});
  rm.q = Eigen::MatrixXd(2, 2);
  rm.q << -1.0, 1.0, 2.0, -2.0;
  const Eigen::VectorXd init = Eigen::VectorXd::Constant(2, 0.5);

  SUBCASE("hand evaluation with a censored tail") {
    Trajectory t;
    t.initial = {0};
    t.jumps = {{1.0, {1}}};
    t.final_dwell = 0.5;
    CHECK(trajectory_loglik_exact(t, rm, init) ==
          doctest::Approx(std::log(0.5) - 2.0).epsilon(1e-12));
  }
  SUBCASE("pure survival") {
    Trajectory t;
    t.initial = {1};
    t.final_dwell = 3.0;
    CHECK(trajectory_loglik_exact(t, rm, init) ==
          doctest::Approx(std::log(0.5) - 6.0).epsilon(1e-12));
  }
  SUBCASE("forbidden jumps give -inf") {
    const CtmnModel m = demo_cycle_model();
    const RateMatrix q = build_rate_matrix(m);
    Trajectory t;
    t.initial = {0, 0, 0, 0};
    t.jumps = {{1.0, {1, 1, 0, 0}}};  // two variables at once
    t.final_dwell = 1.0;
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(16, 1.0 / 16);
    CHECK(trajectory_loglik_exact(t, q, u) ==
          -std::numeric_limits<double>::infinity());
  }
  SUBCASE("generating model beats a perturbed one on average") {
    const CtmnModel m = demo_cycle_model();
    CtmnModel other = m;
    other.equilibrium.weights[1] += 1.0;
    other.proposals.set_symmetric(2, 0, 1, 5.0);
    const RateMatrix qt = build_rate_matrix(m);
    const RateMatrix qo = build_rate_matrix(other);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(16, 1.0 / 16);
    double diff = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const Trajectory t = strip_proposals(sample_augmented_trajectory(
          m, InitialDistribution::stationary(), 50.0, 800 + rep));
      diff += trajectory_loglik_exact(t, qt, u) - trajectory_loglik_exact(t, qo, u);
    }
    CHECK(diff > 0.0);
  }
}

TEST_CASE("expected_transition_time_unit") {
  SUBCASE("single binary variable") {
    CtmnModel m;
    m.variables = {{"X", 2}};
    const StateSpace space(m.variables);
    m.equilibrium.features = {make_indicator({0}, {1}, space)};
    m.equilibrium.weights = {0.0};
    m.proposals = ProposalRates(m.variables);
    m.proposals.set_symmetric(0, 0, 1, 1.0);  // q01 = q10 = 0.5 under logistic
    m.acceptance = AcceptanceKind::Logistic;
    CHECK(expected_transition_time_unit(m) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("homogeneous in the rates") {
    CtmnModel m = demo_cycle_model();
    const double u1 = expected_transition_time_unit(m);
    for (int i = 0; i < 4; ++i)
      m.proposals.set_symmetric(i, 0, 1, 3.0 * m.proposals.rate(i, 0, 1));
    CHECK(expected_transition_time_unit(m) == doctest::Approx(u1 / 3.0).epsilon(1e-12));
  }
  SUBCASE("matches the empirical mean inter-transition time") {
    const CtmnModel m = demo_cycle_model();
    const double unit = expected_transition_time_unit(m);
    const Trajectory t = strip_proposals(sample_augmented_trajectory(
        m, InitialDistribution::stationary(), 20000.0, 12));
    const double emp = t.horizon() / t.num_transitions();
    const double se = emp / std::sqrt(double(t.num_transitions()));
    CHECK(std::abs(emp - unit) < 3 * se);
  }
}

TEST_CASE("quantiles") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == doctest::Approx(2.0));
  CHECK_THROWS(median({}));
  // Infinite entries (failed replicates) must not poison finite ranks.
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(median({1.0, 2.0, inf}) == 2.0);
  CHECK(std::isinf(quantile({1.0, inf}, 0.75)));
}

TEST_CASE("run_experiment determinism and shape") {
  const CtmnModel m = demo_cycle_model();
  ExperimentConfig cfg;
  cfg.sizes = {150.0};
  cfg.replicates = 2;
  cfg.base_seed = 5;
  cfg.learners = {LearnerKind::MnDwell, LearnerKind::Ctbn};
  cfg.regime = Regime::StationaryInit;
  const auto r1 = run_experiment(m, m, cfg);
  const auto r2 = run_experiment(m, m, cfg);
  REQUIRE(r1.rows.size() == 4);  // 2 learners x 1 size x 2 replicates
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].kl == r2.rows[i].kl);
    CHECK(r1.rows[i].kl >= 0.0);
    CHECK(!r1.rows[i].failed);
  }
  CHECK(r1.summaries.size() == 2);
  for (const auto &s : r1.summaries) {
    CHECK(s.kl_q25 <= s.kl_median);
    CHECK(s.kl_median <= s.kl_q75);
  }
}

TEST_CASE("run_experiment captures learner failures as rows") {
  // At a very small size the conditional-rate baseline can hit an unvisited
  // context, giving a reducible chain; the harness must record the failure
  // instead of aborting the grid.
  const CtmnModel m = demo_cycle_model();
  ExperimentConfig cfg;
  cfg.sizes = {60.0};
  cfg.replicates = 2;
  cfg.base_seed = 5;
  cfg.learners = {LearnerKind::Ctbn};
  cfg.regime = Regime::StationaryInit;
  const auto r = run_experiment(m, m, cfg);
  REQUIRE(r.rows.size() == 2);
  bool any_failed = false;
  for (const auto &row : r.rows)
    if (row.failed) {
      any_failed = true;
      CHECK(!row.error.empty());
      CHECK(std::isinf(row.kl));
    }
  CHECK(any_failed);
}
