#include "ctmn/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ctmn/baselines.hpp"
#include "ctmn/stats.hpp"

namespace ctmn {

double kl_divergence(const Eigen::VectorXd &p, const Eigen::VectorXd &q) {
  if (p.size() != q.size())
    throw std::invalid_argument("distributions have different lengths");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0)
      continue;
    if (q[i] <= 0.0)
      return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double trajectory_loglik_exact(const Trajectory &traj, const RateMatrix &q,
                               const Eigen::VectorXd &init) {
  std::uint64_t s = q.space.index_of(traj.initial);
  double ll = init[s] > 0.0 ? std::log(init[s])
                            : -std::numeric_limits<double>::infinity();
  for (const auto &j : traj.jumps) {
    const std::uint64_t t = q.space.index_of(j.to);
    ll += q.q(s, s) * j.dwell;
    if (q.q(s, t) <= 0.0)
      return -std::numeric_limits<double>::infinity();
    ll += std::log(q.q(s, t));
    s = t;
  }
  ll += q.q(s, s) * traj.final_dwell;
  return ll;
}

double expected_transition_time_unit(const CtmnModel &model) {
  const RateMatrix rm = build_rate_matrix(model);
  const Eigen::VectorXd pi = stationary_exact(model);
  const double rate = -(pi.array() * rm.q.diagonal().array()).sum();
  if (rate <= 0.0)
    throw std::runtime_error("model has zero total transition rate");
  return 1.0 / rate;
}

std::string to_string(Regime r) {
  switch (r) {
  case Regime::StationaryInit: return "stationary";
  case Regime::UniformInitLong: return "uniform-long";
  case Regime::UniformInitShort: return "uniform-short";
  }
  return "?";
}

std::string to_string(LearnerKind l) {
  switch (l) {
  case LearnerKind::Ctmn: return "ctmn";
  case LearnerKind::MnDwell: return "mn-dwell";
  case LearnerKind::Ctbn: return "ctbn";
  }
  return "?";
}

double ExperimentConfig::effective_trajectory_units() const {
  if (trajectory_units > 0.0)
    return trajectory_units;
  return regime == Regime::UniformInitShort ? 10.0 : 25.0;
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
  if (values.empty())
    throw std::invalid_argument("quantile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  if (frac == 0.0)  // avoid 0 * inf at exact ranks
    return values[lo];
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

namespace {

// splitmix64; derived seeds for replicate/trajectory streams
std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

ExperimentResult run_experiment(const CtmnModel &true_model,
                                const CtmnModel &templ,
                                const ExperimentConfig &config) {
  const Eigen::VectorXd pi_true = stationary_exact(true_model);
  const double unit = expected_transition_time_unit(true_model);
  const double traj_units = config.effective_trajectory_units();
  const InitialDistribution init =
      config.regime == Regime::StationaryInit ? InitialDistribution::stationary()
                                              : InitialDistribution::uniform();
  const InteractionGraph templ_graph = induced_graph(templ);

  ExperimentResult out;
  for (std::size_t si = 0; si < config.sizes.size(); ++si) {
    const double size = config.sizes[si];
    const int ntraj = std::max(1, static_cast<int>(std::llround(size / traj_units)));
    for (int rep = 0; rep < config.replicates; ++rep) {
      std::vector<Trajectory> data;
      data.reserve(ntraj);
      for (int t = 0; t < ntraj; ++t) {
        const std::uint64_t seed =
            mix_seed(config.base_seed ^ mix_seed((si << 40) + (std::uint64_t(rep) << 20) + t));
        data.push_back(strip_proposals(sample_augmented_trajectory(
            true_model, init, traj_units * unit, seed)));
      }
      for (LearnerKind learner : config.learners) {
        ExperimentRow row;
        row.learner = learner;
        row.regime = config.regime;
        row.size = size;
        row.replicate = rep;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          Eigen::VectorXd pi_hat;
          switch (learner) {
          case LearnerKind::Ctmn: {
            const CtmnModel fit = em_fit(data, templ, config.em);
            pi_hat = stationary_exact(fit);
            break;
          }
          case LearnerKind::MnDwell: {
            BaselineResult res;
            fit_mn_dwell(data, templ.equilibrium, templ.variables,
                         config.mn_optimizer, &res);
            pi_hat = res.stationary;
            break;
          }
          case LearnerKind::Ctbn: {
            const CtbnConditionalRates cim =
                fit_ctbn_mle(data, templ, templ_graph);
            pi_hat = ctbn_stationary(cim, templ.variables);
            break;
          }
          }
          row.kl = kl_divergence(pi_true, pi_hat);
        } catch (const std::exception &e) {
          // A degenerate estimate (e.g. a reducible conditional-rate chain
          // from unvisited contexts) puts zero mass where the truth has
          // support, so its divergence is infinite.
          row.failed = true;
          row.error = e.what();
          row.kl = std::numeric_limits<double>::infinity();
        }
        row.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        out.rows.push_back(std::move(row));
      }
    }
  }

  // Canonical order: learner, size, replicate.
  std::sort(out.rows.begin(), out.rows.end(),
            [](const ExperimentRow &a, const ExperimentRow &b) {
              if (a.learner != b.learner)
                return static_cast<int>(a.learner) < static_cast<int>(b.learner);
              if (a.size != b.size)
                return a.size < b.size;
              return a.replicate < b.replicate;
            });

  for (LearnerKind learner : config.learners)
    for (double size : config.sizes) {
      std::vector<double> kls;
      for (const auto &row : out.rows)
        if (row.learner == learner && row.size == size)
          kls.push_back(row.kl);
      if (kls.empty())
        continue;
      ExperimentSummary s;
      s.learner = learner;
      s.regime = config.regime;
      s.size = size;
      s.kl_median = median(kls);
      s.kl_q25 = quantile(kls, 0.25);
      s.kl_q75 = quantile(kls, 0.75);
      out.summaries.push_back(s);
    }
  return out;
}

} // namespace ctmn
