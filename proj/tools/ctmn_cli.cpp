// Command-line front end: sample trajectories, fit models, score estimates.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ctmn/baselines.hpp"
#include "ctmn/eval.hpp"
#include "ctmn/io.hpp"
#include "ctmn/learn.hpp"

namespace {

using namespace ctmn;

std::uint64_t default_seed() {
  if (const char *env = std::getenv("CTMN_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 1;
}

InitialDistribution parse_init(const std::string &text) {
  if (text == "stationary")
    return InitialDistribution::stationary();
  if (text == "uniform")
    return InitialDistribution::uniform();
  if (text.rfind("fixed=", 0) == 0) {
    State x;
    std::stringstream ss(text.substr(6));
    std::string tok;
    while (std::getline(ss, tok, ','))
      x.push_back(std::stoi(tok));
    return InitialDistribution::fixed_state(std::move(x));
  }
  throw std::runtime_error("bad --init value '" + text +
                           "' (want stationary, uniform, or fixed=v1,v2,...)");
}

std::vector<Trajectory> load_trajectories(const std::vector<std::string> &paths) {
  if (paths.empty())
    throw std::runtime_error("no trajectory files given");
  std::vector<Trajectory> out;
  for (const auto &p : paths) {
    try {
      out.push_back(load_trajectory(p));
    } catch (const std::exception &e) {
      throw std::runtime_error(p + ": " + e.what());
    }
  }
  return out;
}

void write_distribution(const std::string &path, const Eigen::VectorXd &pi) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < pi.size(); ++i)
    os << format_double(pi[i]) << "\n";
}

Eigen::VectorXd read_distribution(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open " + path);
  std::vector<double> v;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    v.push_back(std::stod(line));
  }
  Eigen::VectorXd pi(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    pi[static_cast<Eigen::Index>(i)] = v[i];
  const double total = pi.sum();
  if (!(total > 0.0))
    throw std::runtime_error(path + ": distribution does not sum to a positive value");
  return pi / total;
}

double balance_residual(const CtmnModel &model) {
  const RateMatrix rm = build_rate_matrix(model);
  const Eigen::VectorXd pi = stationary_exact(model);
  const auto n = rm.q.rows();
  double worst = 0.0;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      worst = std::max(worst, std::abs(pi[x] * rm.q(x, y) - pi[y] * rm.q(y, x)));
  return worst;
}

int cmd_sample(const std::string &model_path, double horizon, double units,
               const std::string &init_text, int count, std::uint64_t seed,
               const std::string &out, bool augmented) {
  const CtmnModel model = load_model(model_path);
  if ((horizon > 0.0) == (units > 0.0))
    throw std::runtime_error("give exactly one of --horizon and --length-units");
  if (units > 0.0)
    horizon = units * expected_transition_time_unit(model);
  const InitialDistribution init = parse_init(init_text);
  const std::string hash = model_hash(model);
  for (int k = 0; k < count; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    const AugmentedTrajectory aug = sample_augmented_trajectory(model, init, horizon, s);
    const std::string path = count == 1 ? out : out + "." + std::to_string(k);
    if (augmented)
      save_augmented(path, aug, {hash, horizon, s});
    else
      save_trajectory(path, strip_proposals(aug), {hash, horizon, s});
    std::cout << path << "\n";
  }
  return 0;
}

int cmd_learn(const std::string &model_path, const std::vector<std::string> &traj_paths,
              const std::string &out, const EmConfig &config) {
  const CtmnModel templ = load_model(model_path);
  const std::vector<Trajectory> data = load_trajectories(traj_paths);
  EmDiagnostics diag;
  const CtmnModel fitted = em_fit(data, templ, config, &diag);
  save_model(out, fitted);
  std::cout << "iterations " << diag.iterations.size() << "\n"
            << "converged " << (diag.converged ? "yes" : "no") << "\n";
  if (!diag.iterations.empty() &&
      std::isfinite(diag.iterations.back().observed_loglik))
    std::cout << "observed-loglik "
              << format_double(diag.iterations.back().observed_loglik) << "\n";
  for (const auto &w : diag.warnings)
    std::cerr << "warning: " << w << "\n";
  return 0;
}

int cmd_baseline(const std::string &model_path,
                 const std::vector<std::string> &traj_paths,
                 const std::string &learner, const std::string &out) {
  const CtmnModel templ = load_model(model_path);
  const std::vector<Trajectory> data = load_trajectories(traj_paths);
  BaselineResult result;
  if (learner == "mn-dwell") {
    fit_mn_dwell(data, templ.equilibrium, templ.variables, OptimizerConfig{}, &result);
  } else if (learner == "ctbn") {
    const InteractionGraph graph = induced_graph(templ);
    const CtbnConditionalRates cim =
        fit_ctbn_mle(data, templ, graph, &result.warnings);
    result.stationary = ctbn_stationary(cim, templ.variables, &result);
  } else {
    throw std::runtime_error("unknown learner '" + learner +
                             "' (want mn-dwell or ctbn)");
  }
  for (const auto &w : result.warnings)
    std::cerr << "warning: " << w << "\n";
  if (!out.empty())
    write_distribution(out, result.stationary);
  for (Eigen::Index i = 0; i < result.stationary.size(); ++i)
    std::cout << format_double(result.stationary[i]) << "\n";
  return 0;
}

int cmd_eval(const std::string &model_path, const std::string &fitted_path,
             const std::string &stationary_path) {
  const CtmnModel truth = load_model(model_path);
  const Eigen::VectorXd pi_true = stationary_exact(truth);
  if (fitted_path.empty() == stationary_path.empty())
    throw std::runtime_error("give exactly one of --fitted and --stationary");
  Eigen::VectorXd pi_hat;
  if (!fitted_path.empty()) {
    const CtmnModel fitted = load_model(fitted_path);
    pi_hat = stationary_exact(fitted);
    std::cout << "balance-residual " << format_double(balance_residual(fitted)) << "\n";
  } else {
    pi_hat = read_distribution(stationary_path);
    if (pi_hat.size() != pi_true.size())
      throw std::runtime_error("estimate has " + std::to_string(pi_hat.size()) +
                               " states, model has " + std::to_string(pi_true.size()));
  }
  std::cout << "kl " << format_double(kl_divergence(pi_true, pi_hat)) << "\n";
  return 0;
}

int cmd_experiment(const std::string &model_path, const std::string &template_path,
                   const std::string &config_path, const std::string &rows_path,
                   const std::string &summary_path) {
  const CtmnModel truth = load_model(model_path);
  const CtmnModel templ =
      template_path.empty() ? truth : load_model(template_path);
  const ExperimentConfig config = load_experiment_config(config_path);
  const ExperimentResult result = run_experiment(truth, templ, config);
  for (const auto &row : result.rows)
    if (row.failed)
      std::cerr << "warning: " << to_string(row.learner) << " size "
                << row.size << " replicate " << row.replicate
                << " failed: " << row.error << "\n";
  if (!rows_path.empty()) {
    std::ofstream os(rows_path);
    if (!os)
      throw std::runtime_error("cannot open " + rows_path + " for writing");
    write_rows_csv(os, result.rows);
  }
  std::ostringstream summary;
  write_summary_csv(summary, result.summaries);
  if (!summary_path.empty()) {
    std::ofstream os(summary_path);
    if (!os)
      throw std::runtime_error("cannot open " + summary_path + " for writing");
    os << summary.str();
  }
  std::cout << summary.str();
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Continuous-time Markov network toolkit"};
  app.require_subcommand(1);

  // sample
  std::string s_model, s_init = "stationary", s_out = "out.traj";
  double s_horizon = 0.0, s_units = 0.0;
  int s_count = 1;
  std::uint64_t s_seed = default_seed();
  bool s_augmented = false;
  auto *sample = app.add_subcommand("sample", "Simulate trajectories from a model");
  sample->add_option("--model", s_model, "model document")->required();
  sample->add_option("--horizon", s_horizon, "trajectory length in absolute time");
  sample->add_option("--length-units", s_units,
                     "trajectory length in expected-transition units");
  sample->add_option("--init", s_init, "stationary|uniform|fixed=v1,v2,...");
  sample->add_option("--count", s_count, "number of trajectories");
  sample->add_option("--seed", s_seed, "base seed (also env CTMN_SEED)");
  sample->add_option("--out", s_out, "output path (suffixed when --count > 1)");
  sample->add_flag("--augmented", s_augmented, "keep rejected proposals");

  // learn
  std::string l_model, l_out = "fitted.ctmn";
  std::vector<std::string> l_trajs;
  EmConfig l_config;
  auto *learn = app.add_subcommand("learn", "Fit a model by EM on observed trajectories");
  learn->add_option("--model", l_model, "template model document")->required();
  learn->add_option("trajectories", l_trajs, "trajectory files")->required();
  learn->add_option("--out", l_out, "fitted model output path");
  learn->add_option("--em-tol", l_config.param_tolerance, "EM parameter tolerance");
  learn->add_option("--em-max-iter", l_config.max_iterations, "EM iteration cap");

  // baseline
  std::string b_model, b_learner, b_out;
  std::vector<std::string> b_trajs;
  auto *baseline = app.add_subcommand("baseline", "Fit a reference learner");
  baseline->add_option("--model", b_model, "template model document")->required();
  baseline->add_option("--learner", b_learner, "mn-dwell|ctbn")->required();
  baseline->add_option("trajectories", b_trajs, "trajectory files")->required();
  baseline->add_option("--out", b_out, "write the stationary estimate here");

  // eval
  std::string e_model, e_fitted, e_stationary;
  auto *eval = app.add_subcommand("eval", "Score an estimate against a model");
  eval->add_option("--model", e_model, "reference model document")->required();
  eval->add_option("--fitted", e_fitted, "fitted model document");
  eval->add_option("--stationary", e_stationary,
                   "stationary estimate, one probability per line");

  // experiment
  std::string x_model, x_template, x_config, x_rows, x_summary;
  auto *experiment = app.add_subcommand("experiment", "Run the learning benchmark");
  experiment->add_option("--model", x_model, "true model document")->required();
  experiment->add_option("--template", x_template,
                         "learner template (defaults to the true model)");
  experiment->add_option("--config", x_config, "experiment config file")->required();
  experiment->add_option("--rows", x_rows, "per-replicate CSV output path");
  experiment->add_option("--summary", x_summary, "summary CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0)
      return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sample->parsed())
      return cmd_sample(s_model, s_horizon, s_units, s_init, s_count, s_seed,
                        s_out, s_augmented);
    if (learn->parsed())
      return cmd_learn(l_model, l_trajs, l_out, l_config);
    if (baseline->parsed())
      return cmd_baseline(b_model, b_trajs, b_learner, b_out);
    if (eval->parsed())
      return cmd_eval(e_model, e_fitted, e_stationary);
    if (experiment->parsed())
      return cmd_experiment(x_model, x_template, x_config, x_rows, x_summary);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
