#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "ctmn/io.hpp"
#include "helpers.hpp"

using namespace ctmn;
using ctmn::testing::random_model;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ctmn-test-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string &name) const { return (path / name).string(); }
};

bool models_equal(const CtmnModel &a, const CtmnModel &b) {
  return model_to_string(a) == model_to_string(b);
}

} // namespace

TEST_CASE("format_double round trips") {
  for (double v : {0.0, 1.0, -0.2, 1e-17, 3.141592653589793, 1e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("model persistence") {
  TempDir dir;
  SUBCASE("demo model round trips") {
    const CtmnModel m = demo_cycle_model();
    save_model(dir.file("m.ctmn"), m);
    const CtmnModel back = load_model(dir.file("m.ctmn"));
    CHECK(models_equal(m, back));
    CHECK(model_hash(m) == model_hash(back));
  }
  SUBCASE("random models round trip") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 10; ++rep) {
      const CtmnModel m = random_model(rng);
      CHECK(models_equal(m, model_from_string(model_to_string(m))));
    }
  }
  SUBCASE("indicator shorthand expands to a 0/1 table") {
    const CtmnModel m = model_from_string(
        "ctmn-model 1\nvar A 2\nvar B 2\n"
        "feature indicator A B : 1 0\nweights 0.5\nrate A 0 1 1\nrate B 0 1 1\nend\n");
    CHECK(m.equilibrium.features[0].table == std::vector<double>{0, 0, 1, 0});
  }
  SUBCASE("unknown schema version is rejected") {
    CHECK_THROWS_WITH_AS(model_from_string("ctmn-model 2\nend\n"),
                         doctest::Contains("unsupported schema version"),
                         ParseError);
  }
  SUBCASE("parse errors carry line numbers") {
    try {
      model_from_string("ctmn-model 1\nvar A 2\nbogus directive\nend\n");
      FAIL("expected a parse error");
    } catch (const ParseError &e) {
      CHECK(e.line == 3);
    }
  }
  SUBCASE("lower-triangular rate entries are rejected") {
    CHECK_THROWS_WITH_AS(
        model_from_string("ctmn-model 1\nvar A 2\nweights\nrate A 1 0 2\nend\n"),
        doctest::Contains("a < b"), ParseError);
  }
  SUBCASE("validation failures are reported on load") {
    const std::string doc =
        "ctmn-model 1\nvar A 2\nfeature indicator A : 1\nweights 1 2\nend\n";
    CHECK_THROWS_WITH(model_from_string(doc), doctest::Contains("validation"));
  }
}

TEST_CASE("trajectory persistence") {
  TempDir dir;
  const CtmnModel m = demo_cycle_model();
  const std::string hash = model_hash(m);

  SUBCASE("observed round trip") {
    const Trajectory t = strip_proposals(sample_augmented_trajectory(
        m, InitialDistribution::uniform(), 30.0, 21));
    save_trajectory(dir.file("t.traj"), t, {hash, 0.0, 21});
    TrajectoryHeader h;
    const Trajectory back = load_trajectory(dir.file("t.traj"), &h);
    CHECK(h.model_hash == hash);
    CHECK(h.seed == 21);
    CHECK(back.initial == t.initial);
    REQUIRE(back.jumps.size() == t.jumps.size());
    for (std::size_t i = 0; i < t.jumps.size(); ++i) {
      CHECK(back.jumps[i].to == t.jumps[i].to);
      CHECK(back.jumps[i].dwell == doctest::Approx(t.jumps[i].dwell).epsilon(1e-12));
    }
    CHECK(back.horizon() == doctest::Approx(t.horizon()).epsilon(1e-12));
  }

  SUBCASE("augmented round trip preserves rejections") {
    const AugmentedTrajectory aug =
        sample_augmented_trajectory(m, InitialDistribution::uniform(), 20.0, 33);
    save_augmented(dir.file("a.traj"), aug, {hash, 0.0, 33});
    const AugmentedTrajectory back = load_augmented(dir.file("a.traj"));
    CHECK(back.states == aug.states);
    CHECK(back.proposals == aug.proposals);
    REQUIRE(back.tau.size() == aug.tau.size());
    for (std::size_t i = 0; i < aug.tau.size(); ++i)
      CHECK(back.tau[i] == doctest::Approx(aug.tau[i]).epsilon(1e-9));
  }

  SUBCASE("reject events are refused by the observed loader") {
    const AugmentedTrajectory aug =
        sample_augmented_trajectory(m, InitialDistribution::uniform(), 50.0, 2);
    bool any_rejected = false;
    for (int p = 0; p < aug.num_proposals(); ++p)
      any_rejected |= !aug.accepted(p);
    REQUIRE(any_rejected);
    save_augmented(dir.file("a.traj"), aug, {hash, 0.0, 2});
    CHECK_THROWS_WITH(load_trajectory(dir.file("a.traj")),
                      doctest::Contains("reject"));
  }

  SUBCASE("non-increasing times are rejected") {
    const std::string doc = "ctmn-traj 1\nmodel x\nhorizon 2\nseed 0\n"
                            "0 init - - 0,0,0,0\n1 accept 0 0 1\n1 accept 1 0 1\nend\n";
    TempDir d2;
    std::ofstream(d2.file("bad.traj")) << doc;
    CHECK_THROWS_WITH(load_trajectory(d2.file("bad.traj")),
                      doctest::Contains("strictly increasing"));
  }
}

TEST_CASE("stats dump includes contexts and counts") {
  const CtmnModel m = demo_cycle_model();
  const InteractionGraph g = induced_graph(m);
  const auto s = collect_augmented_stats(
      sample_augmented_trajectory(m, InitialDistribution::uniform(), 20.0, 6), m, g);
  const std::string dump = stats_to_string(s, m, g);
  CHECK(dump.find("X1 ctx") != std::string::npos);
  CHECK(dump.find("T[0]") != std::string::npos);
}

TEST_CASE("experiment config parsing") {
  const ExperimentConfig cfg = experiment_config_from_string(
      "regime uniform-short\nsizes 100 200\nreplicates 5\nseed 9\n"
      "learners ctmn ctbn\ntrajectory-units 10\n");
  CHECK(cfg.regime == Regime::UniformInitShort);
  CHECK(cfg.sizes == std::vector<double>{100.0, 200.0});
  CHECK(cfg.replicates == 5);
  CHECK(cfg.base_seed == 9);
  CHECK(cfg.learners == std::vector<LearnerKind>{LearnerKind::Ctmn, LearnerKind::Ctbn});
  CHECK(cfg.effective_trajectory_units() == 10.0);
  CHECK_THROWS(experiment_config_from_string("sizes 200 100\n"));
  CHECK_THROWS(experiment_config_from_string("regime nope\n"));
}

TEST_CASE("csv writers") {
  std::ostringstream os;
  ExperimentRow row;
  row.learner = LearnerKind::Ctmn;
  row.regime = Regime::StationaryInit;
  row.size = 250;
  row.replicate = 3;
  row.kl = 0.125;
  row.seconds = 0.5;
  write_rows_csv(os, {row});
  CHECK(os.str() == "learner,regime,size,replicate,kl,seconds\n"
                    "ctmn,stationary,250,3,0.125,0.5\n");
  std::ostringstream os2;
  ExperimentSummary s;
  s.learner = LearnerKind::Ctbn;
  s.regime = Regime::UniformInitLong;
  s.size = 1000;
  s.kl_median = 0.5;
  s.kl_q25 = 0.25;
  s.kl_q75 = 0.75;
  write_summary_csv(os2, {s});
  CHECK(os2.str() == "learner,regime,size,kl_median,kl_q25,kl_q75\n"
                     "ctbn,uniform-long,1000,0.5,0.25,0.75\n");
}
