#ifndef CTMN_TEST_HELPERS_HPP
#define CTMN_TEST_HELPERS_HPP

#include <random>

#include "ctmn/io.hpp"
#include "ctmn/model.hpp"

namespace ctmn::testing {

// Random model over <= max_vars binary variables: random singleton and
// pairwise features with random weights, random symmetric rates.
inline CtmnModel random_model(std::mt19937_64 &rng, int max_vars = 5,
                              AcceptanceKind kind = AcceptanceKind::Logistic) {
  std::uniform_int_distribution<int> nvd(2, max_vars);
  std::uniform_real_distribution<double> wd(-1.5, 1.5);
  std::uniform_real_distribution<double> rd(0.2, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CtmnModel m;
  const int nv = nvd(rng);
  for (int i = 0; i < nv; ++i)
    m.variables.push_back({"X" + std::to_string(i + 1), 2});
  const StateSpace space(m.variables);

  for (int i = 0; i < nv; ++i)
    m.equilibrium.features.push_back(make_indicator({i}, {1}, space));
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j)
      if (unit(rng) < 0.5) {
        Feature f;
        f.scope = {i, j};
        f.table = {wd(rng), wd(rng), wd(rng), wd(rng)};
        m.equilibrium.features.push_back(std::move(f));
      }
  m.equilibrium.weights.resize(m.equilibrium.features.size());
  for (auto &w : m.equilibrium.weights)
    w = wd(rng);

  m.proposals = ProposalRates(m.variables);
  for (int i = 0; i < nv; ++i)
    m.proposals.set_symmetric(i, 0, 1, rd(rng));
  m.acceptance = kind;
  return m;
}

// Independent stationary oracle: kernel of Q^T via full-pivot LU.
inline Eigen::VectorXd nullspace_stationary(const Eigen::MatrixXd &q) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(q.transpose());
  Eigen::MatrixXd ker = lu.kernel();
  Eigen::VectorXd v = ker.col(0);
  if (v.sum() < 0)
    v = -v;
  return v / v.sum();
}

} // namespace ctmn::testing

#endif
