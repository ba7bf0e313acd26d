#ifndef CTMN_STATS_HPP
#define CTMN_STATS_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "ctmn/model.hpp"
#include "ctmn/simulate.hpp"

namespace ctmn {

struct InvalidTrajectory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Counts and dwell times for one variable in one Markov-blanket context.
// Counts are real-valued so the same record holds observed integers and
// expected completions.
struct ContextStats {
  std::vector<double> dwell;     // T[x_i], length card
  std::vector<double> accepted;  // M^a[x_i,y_i], card*card row-major
  std::vector<double> rejected;  // M^r[x_i,y_i]

  explicit ContextStats(int card = 0)
      : dwell(card, 0.0),
        accepted(static_cast<std::size_t>(card) * card, 0.0),
        rejected(static_cast<std::size_t>(card) * card, 0.0) {}

  int card() const { return static_cast<int>(dwell.size()); }
  double &acc(int x, int y) { return accepted[static_cast<std::size_t>(x) * card() + y]; }
  double acc(int x, int y) const { return accepted[static_cast<std::size_t>(x) * card() + y]; }
  double &rej(int x, int y) { return rejected[static_cast<std::size_t>(x) * card() + y]; }
  double rej(int x, int y) const { return rejected[static_cast<std::size_t>(x) * card() + y]; }
};

// Sufficient statistics keyed by (variable, blanket-context index). Context
// indices are mixed-radix over the blanket in sorted variable order, the
// same digit convention as StateSpace. Unvisited contexts are absent.
struct SufficientStats {
  // per_var[i]: context index -> stats
  std::vector<std::map<std::uint64_t, ContextStats>> per_var;

  // Aggregates over contexts.
  double dwell_total(int var, int value) const;
  double pair_count(int var, int from, int to) const;  // M^a + M^r
  double accepted_total(int var, int from, int to) const;

  void merge(const SufficientStats &other);
};

SufficientStats collect_observed_stats(const Trajectory &traj,
                                       const CtmnModel &model,
                                       const InteractionGraph &graph);

SufficientStats collect_augmented_stats(const AugmentedTrajectory &aug,
                                        const CtmnModel &model,
                                        const InteractionGraph &graph);

// Analytic E-step: fills M^r[x,y|u] = T[x|u] * r^i_{x,y} * (1 - f(g_i)).
// Dwell times and accepted counts pass through untouched.
SufficientStats expected_rejections(const SufficientStats &stats,
                                    const CtmnModel &model,
                                    const InteractionGraph &graph);

} // namespace ctmn

#endif
