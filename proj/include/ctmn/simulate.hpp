#ifndef CTMN_SIMULATE_HPP
#define CTMN_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include "ctmn/model.hpp"

namespace ctmn {

// Proposal-resolved record of a run: states[0] is the initial state, and for
// m = 1..M, proposals[m-1] is the m'th proposed state and states[m] the state
// after resolving it. tau[m-1] is the wait before the m'th proposal; tau[M]
// is the censored tail out to the horizon.
struct AugmentedTrajectory {
  std::vector<double> tau;        // M+1 entries
  std::vector<State> states;      // M+1 entries
  std::vector<State> proposals;   // M entries
  double horizon = 0.0;

  int num_proposals() const { return static_cast<int>(proposals.size()); }
  bool accepted(int m) const { return states[m + 1] == proposals[m]; }
  // Index of the single variable proposal m attempts to change.
  int proposal_variable(int m) const;
};

struct Trajectory {
  struct Jump {
    double dwell;  // time spent in the previous state before this jump
    State to;
  };
  State initial;
  std::vector<Jump> jumps;
  double final_dwell = 0.0;  // censored at the horizon

  double horizon() const;
  int num_transitions() const { return static_cast<int>(jumps.size()); }
};

struct InitialDistribution {
  enum class Kind { Stationary, Uniform, Fixed };
  Kind kind = Kind::Stationary;
  State fixed;  // used when kind == Fixed

  static InitialDistribution stationary() { return {Kind::Stationary, {}}; }
  static InitialDistribution uniform() { return {Kind::Uniform, {}}; }
  static InitialDistribution fixed_state(State x) { return {Kind::Fixed, std::move(x)}; }
};

// Generative sampler: waits ~ Exponential(total proposal rate), proposal
// (i, y_i) drawn proportional to r^i, accepted with probability f(g_i).
// RNG is std::mt19937_64 seeded with `seed`; runs are bitwise reproducible
// within one implementation. Batches derive seeds as base seed + index.
AugmentedTrajectory sample_augmented_trajectory(const CtmnModel &model,
                                                const InitialDistribution &init,
                                                double horizon,
                                                std::uint64_t seed);

// Drops rejected proposals, merging the intervals they separate.
Trajectory strip_proposals(const AugmentedTrajectory &aug);

} // namespace ctmn

#endif
