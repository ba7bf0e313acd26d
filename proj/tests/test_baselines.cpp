#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ctmn/baselines.hpp"
#include "ctmn/eval.hpp"
#include "ctmn/io.hpp"
#include "helpers.hpp"

using namespace ctmn;

TEST_CASE("fit_mn_dwell") {
  SUBCASE("single binary variable at 75% occupancy recovers ln 3") {
    CtmnModel m;
    m.variables = {{"X", 2}};
    const StateSpace space(m.variables);
    m.equilibrium.features = {make_indicator({0}, {1}, space)};
    m.equilibrium.weights = {0.0};
    Trajectory t;
    t.initial = {0};
    t.jumps = {{1.0, {1}}};
    t.final_dwell = 3.0;
    BaselineResult res;
    const auto theta = fit_mn_dwell({t}, m.equilibrium, m.variables,
                                    OptimizerConfig{}, &res);
    CHECK(theta[0] == doctest::Approx(std::log(3.0)).epsilon(1e-5));
    CHECK(res.stationary[1] == doctest::Approx(0.75).epsilon(1e-6));
  }

  SUBCASE("data in exact stationary proportions is a fixed point") {
    const CtmnModel m = demo_cycle_model();
    const Eigen::VectorXd pi = stationary_exact(m);
    const StateSpace space(m.variables);
    // One synthetic interval per state, weighted by its stationary mass.
    std::vector<Trajectory> data;
    for (std::uint64_t s = 0; s < space.size(); ++s) {
      Trajectory t;
      t.initial = space.state_of(s);
      t.final_dwell = pi[s];
      data.push_back(std::move(t));
    }
    BaselineResult res;
    fit_mn_dwell(data, m.equilibrium, m.variables, OptimizerConfig{}, &res);
    CHECK(0.5 * (res.stationary - pi).cwiseAbs().sum() < 1e-6);
  }

  SUBCASE("moment matching: residual near zero at the optimum") {
    const CtmnModel m = demo_cycle_model();
    const double unit = expected_transition_time_unit(m);
    std::vector<Trajectory> data;
    for (int t = 0; t < 10; ++t)
      data.push_back(strip_proposals(sample_augmented_trajectory(
          m, InitialDistribution::stationary(), 25.0 * unit, 40 + t)));
    BaselineResult res;
    fit_mn_dwell(data, m.equilibrium, m.variables, OptimizerConfig{}, &res);
    double total = 0.0;
    for (const auto &t : data)
      total += t.horizon();
    CHECK(res.residual / total < 1e-6);
  }

  SUBCASE("KL to the truth decreases with data size under stationary sampling") {
    const CtmnModel m = demo_cycle_model();
    const Eigen::VectorXd pi = stationary_exact(m);
    const double unit = expected_transition_time_unit(m);
    std::vector<double> kls;
    for (const int ntraj : {4, 400}) {
      std::vector<Trajectory> data;
      for (int t = 0; t < ntraj; ++t)
        data.push_back(strip_proposals(sample_augmented_trajectory(
            m, InitialDistribution::stationary(), 25.0 * unit, 5000 + t)));
      BaselineResult res;
      fit_mn_dwell(data, m.equilibrium, m.variables, OptimizerConfig{}, &res);
      kls.push_back(kl_divergence(pi, res.stationary));
    }
    CHECK(kls[1] < kls[0]);
  }
}

TEST_CASE("fit_ctbn_mle") {
  const CtmnModel m = demo_cycle_model();
  const InteractionGraph g = induced_graph(m);

  SUBCASE("count over time estimator") {
    CtmnModel tiny;
    tiny.variables = {{"X", 2}};
    const StateSpace space(tiny.variables);
    tiny.equilibrium.features = {make_indicator({0}, {1}, space)};
    tiny.equilibrium.weights = {0.0};
    tiny.proposals = ProposalRates(tiny.variables);
    const InteractionGraph tg = induced_graph(tiny);
    Trajectory t;
    t.initial = {0};
    for (int k = 0; k < 5; ++k) {
      t.jumps.push_back({0.4, {1}});
      t.jumps.push_back({0.1, {0}});
    }
    t.final_dwell = 0.0;
    // T[0] = 5*0.4 = 2.0 with 5 transitions out -> q = 2.5
    const auto cim = fit_ctbn_mle({t}, tiny, tg);
    CHECK(cim.vars[0].per_context[0](0, 1) == doctest::Approx(2.5));
  }

  SUBCASE("unvisited contexts get zero rates and a warning") {
    Trajectory t;
    t.initial = {0, 0, 0, 0};
    t.final_dwell = 1.0;
    std::vector<std::string> warnings;
    const auto cim = fit_ctbn_mle({t}, m, g, &warnings);
    CHECK(!warnings.empty());
    CHECK(cim.vars[0].per_context[3].cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("converges to the true conditional rates with data") {
    const double unit = expected_transition_time_unit(m);
    std::vector<Trajectory> data;
    for (int t = 0; t < 60; ++t)
      data.push_back(strip_proposals(sample_augmented_trajectory(
          m, InitialDistribution::stationary(), 100.0 * unit, 600 + t)));
    const auto cim = fit_ctbn_mle(data, m, g);
    const auto truth = to_ctbn(m);
    for (int i = 0; i < 4; ++i)
      for (std::size_t u = 0; u < truth.vars[i].per_context.size(); ++u)
        for (int a = 0; a < 2; ++a) {
          const double tq = truth.vars[i].per_context[u](a, 1 - a);
          const double eq = cim.vars[i].per_context[u](a, 1 - a);
          CHECK(eq == doctest::Approx(tq).epsilon(0.25));
        }
  }
}

TEST_CASE("ctbn_stationary") {
  SUBCASE("two-state chain") {
    CtbnConditionalRates ctbn;
    Eigen::MatrixXd q(2, 2);
    q << -1.0, 1.0, 2.0, -2.0;
    ctbn.vars.push_back({{}, {q}});
    const Eigen::VectorXd pi = ctbn_stationary(ctbn, {{"X", 2}});
    CHECK(pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("matches the model's stationary distribution") {
    const CtmnModel m = demo_cycle_model();
    const Eigen::VectorXd pi = ctbn_stationary(to_ctbn(m), m.variables);
    CHECK(0.5 * (pi - stationary_exact(m)).cwiseAbs().sum() < 1e-10);
  }
  SUBCASE("symmetric rates give the uniform distribution") {
    CtbnConditionalRates ctbn;
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << -1.0, 1.0, 1.0, -1.0;
    b << -3.0, 3.0, 3.0, -3.0;
    ctbn.vars.push_back({{}, {a}});
    ctbn.vars.push_back({{}, {b}});
    const Eigen::VectorXd pi = ctbn_stationary(ctbn, {{"A", 2}, {"B", 2}});
    for (int s = 0; s < 4; ++s)
      CHECK(pi[s] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("reducible chains are rejected") {
    CtbnConditionalRates ctbn;
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
    ctbn.vars.push_back({{}, {z}});
    ctbn.vars.push_back({{}, {z}});
    CHECK_THROWS(ctbn_stationary(ctbn, {{"A", 2}, {"B", 2}}));
  }
}

TEST_CASE("ctbn pipeline converges to the truth") {
  const CtmnModel m = demo_cycle_model();
  const InteractionGraph g = induced_graph(m);
  const Eigen::VectorXd pi = stationary_exact(m);
  const double unit = expected_transition_time_unit(m);
  std::vector<double> kls;
  for (const int ntraj : {6, 120}) {
    std::vector<Trajectory> data;
    for (int t = 0; t < ntraj; ++t)
      data.push_back(strip_proposals(sample_augmented_trajectory(
          m, InitialDistribution::uniform(), 25.0 * unit, 7100 + t)));
    kls.push_back(kl_divergence(pi, ctbn_stationary(fit_ctbn_mle(data, m, g),
                                                    m.variables)));
  }
  CHECK(kls[1] < kls[0]);
}
