#ifndef CTMN_IO_HPP
#define CTMN_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "ctmn/eval.hpp"
#include "ctmn/model.hpp"
#include "ctmn/simulate.hpp"
#include "ctmn/stats.hpp"

namespace ctmn {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string &msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
        line(line_) {}
};

// Shortest round-trippable decimal for a double.
std::string format_double(double v);

// --- model documents (schema "ctmn-model 1") ------------------------------
//
//   ctmn-model 1
//   acceptance logistic|metropolis
//   var <name> <cardinality>
//   feature table <var...> : <value...>        values in mixed-radix scope order
//   feature indicator <var...> : <assignment>  expands to a 0/1 table
//   weights <theta...>
//   rate <var> <a> <b> <value>                 a < b; mirrored on load
//   end

std::string model_to_string(const CtmnModel &model);
CtmnModel model_from_string(const std::string &text);
void save_model(const std::string &path, const CtmnModel &model);
CtmnModel load_model(const std::string &path);

// FNV-1a over the canonical serialization; ties trajectory files to models.
std::string model_hash(const CtmnModel &model);

// --- trajectory documents (schema "ctmn-traj 1") --------------------------
//
//   ctmn-traj 1
//   model <hash>
//   horizon <t>
//   seed <s>
//   0 init - - <v1,v2,...,vn>
//   <time> accept|reject <var> <from> <to>
//   end
//
// Times are absolute and strictly increasing; reject lines only appear in
// augmented files. The final dwell is implied by the horizon.

struct TrajectoryHeader {
  std::string model_hash;
  double horizon = 0.0;
  std::uint64_t seed = 0;
};

void save_trajectory(const std::string &path, const Trajectory &traj,
                     const TrajectoryHeader &header);
Trajectory load_trajectory(const std::string &path, TrajectoryHeader *header = nullptr);

void save_augmented(const std::string &path, const AugmentedTrajectory &aug,
                    const TrajectoryHeader &header);
AugmentedTrajectory load_augmented(const std::string &path,
                                   TrajectoryHeader *header = nullptr);

// Debug/fixture dump of sufficient statistics.
std::string stats_to_string(const SufficientStats &stats, const CtmnModel &model,
                            const InteractionGraph &graph);

// --- experiment output ----------------------------------------------------

void write_rows_csv(std::ostream &os, const std::vector<ExperimentRow> &rows);
void write_summary_csv(std::ostream &os,
                       const std::vector<ExperimentSummary> &summaries);

// Experiment config files: one "key value..." pair per line. Keys: regime,
// sizes, replicates, seed, learners, trajectory-units, em-tol, em-max-iter.
ExperimentConfig experiment_config_from_string(const std::string &text);
ExperimentConfig load_experiment_config(const std::string &path);

// The four-variable binary-cycle demo model used throughout the tests.
CtmnModel demo_cycle_model();

} // namespace ctmn

#endif
