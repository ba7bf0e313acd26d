#include "ctmn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ctmn {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string &tok, int line) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError(line, "bad number '" + tok + "'");
  return v;
}

long parse_long(const std::string &tok, int line) {
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError(line, "bad integer '" + tok + "'");
  return v;
}

std::vector<std::string> tokens(const std::string &line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string t;
  while (is >> t) {
    if (t[0] == '#')
      break;
    out.push_back(t);
  }
  return out;
}

int variable_index(const std::vector<VariableSpec> &vars, const std::string &name,
                   int line) {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name)
      return static_cast<int>(i);
  throw ParseError(line, "unknown variable '" + name + "'");
}

std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << text;
}

} // namespace

std::string model_to_string(const CtmnModel &model) {
  std::ostringstream os;
  os << "ctmn-model 1\n";
  os << "acceptance "
     << (model.acceptance == AcceptanceKind::Logistic ? "logistic" : "metropolis")
     << "\n";
  for (const auto &v : model.variables)
    os << "var " << v.name << " " << v.cardinality << "\n";
  for (const auto &f : model.equilibrium.features) {
    os << "feature table";
    for (int v : f.scope)
      os << " " << model.variables[v].name;
    os << " :";
    for (double s : f.table)
      os << " " << format_double(s);
    os << "\n";
  }
  os << "weights";
  for (double w : model.equilibrium.weights)
    os << " " << format_double(w);
  os << "\n";
  for (int i = 0; i < model.proposals.num_variables(); ++i)
    for (int a = 0; a < model.proposals.cardinality(i); ++a)
      for (int b = a + 1; b < model.proposals.cardinality(i); ++b)
        if (model.proposals.rate(i, a, b) != 0.0)
          os << "rate " << model.variables[i].name << " " << a << " " << b << " "
             << format_double(model.proposals.rate(i, a, b)) << "\n";
  os << "end\n";
  return os.str();
}

CtmnModel model_from_string(const std::string &text) {
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;

  CtmnModel model;
  bool have_header = false, have_weights = false, done = false;
  bool rates_built = false;
  // (scope, table) pairs held until all variables are known is unnecessary:
  // variables must precede features in the document.
  auto ensure_rates = [&] {
    if (!rates_built) {
      model.proposals = ProposalRates(model.variables);
      rates_built = true;
    }
  };

  while (std::getline(is, raw)) {
    ++lineno;
    const auto tk = tokens(raw);
    if (tk.empty())
      continue;
    if (!have_header) {
      if (tk.size() != 2 || tk[0] != "ctmn-model")
        throw ParseError(lineno, "expected 'ctmn-model <version>' header");
      if (tk[1] != "1")
        throw ParseError(lineno, "unsupported schema version '" + tk[1] + "'");
      have_header = true;
      continue;
    }
    if (tk[0] == "acceptance") {
      if (tk.size() != 2)
        throw ParseError(lineno, "acceptance needs one argument");
      if (tk[1] == "logistic")
        model.acceptance = AcceptanceKind::Logistic;
      else if (tk[1] == "metropolis")
        model.acceptance = AcceptanceKind::Metropolis;
      else
        throw ParseError(lineno, "unknown acceptance kind '" + tk[1] + "'");
    } else if (tk[0] == "var") {
      if (tk.size() != 3)
        throw ParseError(lineno, "var needs a name and a cardinality");
      if (rates_built)
        throw ParseError(lineno, "variables must precede rates");
      model.variables.push_back({tk[1], static_cast<int>(parse_long(tk[2], lineno))});
    } else if (tk[0] == "feature") {
      if (tk.size() < 4 || (tk[1] != "table" && tk[1] != "indicator"))
        throw ParseError(lineno, "feature needs 'table' or 'indicator', a scope and values");
      const StateSpace space(model.variables);
      Feature f;
      std::size_t p = 2;
      for (; p < tk.size() && tk[p] != ":"; ++p)
        f.scope.push_back(variable_index(model.variables, tk[p], lineno));
      if (p == tk.size())
        throw ParseError(lineno, "feature is missing ':' before values");
      ++p;
      if (f.scope.empty())
        throw ParseError(lineno, "feature has empty scope");
      if (tk[1] == "indicator") {
        std::vector<int> assignment;
        for (; p < tk.size(); ++p)
          assignment.push_back(static_cast<int>(parse_long(tk[p], lineno)));
        if (assignment.size() != f.scope.size())
          throw ParseError(lineno, "indicator assignment arity mismatch");
        f = make_indicator(f.scope, assignment, space);
      } else {
        for (; p < tk.size(); ++p)
          f.table.push_back(parse_double(tk[p], lineno));
        if (f.table.size() != space.subset_size(f.scope))
          throw ParseError(lineno, "feature table has " +
                                       std::to_string(f.table.size()) +
                                       " values, expected " +
                                       std::to_string(space.subset_size(f.scope)));
      }
      model.equilibrium.features.push_back(std::move(f));
    } else if (tk[0] == "weights") {
      have_weights = true;
      model.equilibrium.weights.clear();
      for (std::size_t p = 1; p < tk.size(); ++p)
        model.equilibrium.weights.push_back(parse_double(tk[p], lineno));
    } else if (tk[0] == "rate") {
      if (tk.size() != 5)
        throw ParseError(lineno, "rate needs variable, two values and a rate");
      ensure_rates();
      const int var = variable_index(model.variables, tk[1], lineno);
      const int a = static_cast<int>(parse_long(tk[2], lineno));
      const int b = static_cast<int>(parse_long(tk[3], lineno));
      if (a < 0 || b >= model.variables[var].cardinality || a >= b)
        throw ParseError(lineno, "rate values must satisfy 0 <= a < b < cardinality");
      model.proposals.set_symmetric(var, a, b, parse_double(tk[4], lineno));
    } else if (tk[0] == "end") {
      done = true;
      break;
    } else {
      throw ParseError(lineno, "unknown directive '" + tk[0] + "'");
    }
  }
  if (!have_header)
    throw ParseError(lineno, "missing 'ctmn-model' header");
  if (!done)
    throw ParseError(lineno, "missing 'end'");
  if (!have_weights)
    throw ParseError(lineno, "missing 'weights'");
  ensure_rates();

  const auto violations = validate_model(model);
  if (!violations.empty()) {
    std::string msg = "model validation failed:";
    for (const auto &v : violations)
      msg += "\n  " + v.what;
    throw std::runtime_error(msg);
  }
  return model;
}

void save_model(const std::string &path, const CtmnModel &model) {
  write_file(path, model_to_string(model));
}

CtmnModel load_model(const std::string &path) {
  try {
    return model_from_string(read_file(path));
  } catch (const ParseError &e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string model_hash(const CtmnModel &model) {
  const std::string s = model_to_string(model);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string state_csv(const State &x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i)
      s += ',';
    s += std::to_string(x[i]);
  }
  return s;
}

State parse_state_csv(const std::string &tok, int line) {
  State x;
  std::size_t p = 0;
  while (p <= tok.size()) {
    const std::size_t q = tok.find(',', p);
    const std::string d = tok.substr(p, q == std::string::npos ? q : q - p);
    x.push_back(static_cast<int>(parse_long(d, line)));
    if (q == std::string::npos)
      break;
    p = q + 1;
  }
  return x;
}

void write_traj_header(std::ostream &os, const TrajectoryHeader &h) {
  os << "ctmn-traj 1\n";
  os << "model " << h.model_hash << "\n";
  os << "horizon " << format_double(h.horizon) << "\n";
  os << "seed " << h.seed << "\n";
}

struct TrajEvent {
  double time;
  int kind;  // 0 init, 1 accept, 2 reject
  int var, from, to;
  State init_state;
};

std::vector<TrajEvent> read_traj_events(const std::string &path,
                                        TrajectoryHeader &header) {
  std::istringstream is(read_file(path));
  std::string raw;
  int lineno = 0;
  bool have_header = false, done = false;
  std::vector<TrajEvent> events;
  double last_time = -1.0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto tk = tokens(raw);
    if (tk.empty())
      continue;
    if (!have_header) {
      if (tk.size() != 2 || tk[0] != "ctmn-traj")
        throw ParseError(lineno, "expected 'ctmn-traj <version>' header");
      if (tk[1] != "1")
        throw ParseError(lineno, "unsupported schema version '" + tk[1] + "'");
      have_header = true;
      continue;
    }
    if (tk[0] == "model") {
      header.model_hash = tk.size() > 1 ? tk[1] : "";
    } else if (tk[0] == "horizon") {
      header.horizon = parse_double(tk.at(1), lineno);
    } else if (tk[0] == "seed") {
      header.seed = static_cast<std::uint64_t>(parse_long(tk.at(1), lineno));
    } else if (tk[0] == "end") {
      done = true;
      break;
    } else {
      if (tk.size() != 5)
        throw ParseError(lineno, "event needs: time kind variable from to");
      TrajEvent ev{};
      ev.time = parse_double(tk[0], lineno);
      if (ev.time <= last_time && !(events.empty() && ev.time == 0.0))
        throw ParseError(lineno, "event times must be strictly increasing");
      last_time = ev.time;
      if (tk[1] == "init") {
        if (!events.empty())
          throw ParseError(lineno, "init must be the first event");
        ev.kind = 0;
        ev.init_state = parse_state_csv(tk[4], lineno);
      } else if (tk[1] == "accept" || tk[1] == "reject") {
        if (events.empty())
          throw ParseError(lineno, "first event must be init");
        ev.kind = tk[1] == "accept" ? 1 : 2;
        ev.var = static_cast<int>(parse_long(tk[2], lineno));
        ev.from = static_cast<int>(parse_long(tk[3], lineno));
        ev.to = static_cast<int>(parse_long(tk[4], lineno));
      } else {
        throw ParseError(lineno, "unknown event kind '" + tk[1] + "'");
      }
      events.push_back(std::move(ev));
    }
  }
  if (!done)
    throw ParseError(lineno, "missing 'end'");
  if (events.empty() || events[0].kind != 0)
    throw ParseError(lineno, "trajectory has no init event");
  if (events.back().time >= header.horizon && events.size() > 1)
    throw ParseError(lineno, "events extend beyond the horizon");
  return events;
}

} // namespace

void save_trajectory(const std::string &path, const Trajectory &traj,
                     const TrajectoryHeader &header) {
  std::ostringstream os;
  TrajectoryHeader h = header;
  h.horizon = traj.horizon();
  write_traj_header(os, h);
  os << "0 init - - " << state_csv(traj.initial) << "\n";
  double t = 0.0;
  State x = traj.initial;
  for (const auto &j : traj.jumps) {
    t += j.dwell;
    int var = 0;
    while (x[var] == j.to[var])
      ++var;
    os << format_double(t) << " accept " << var << " " << x[var] << " "
       << j.to[var] << "\n";
    x = j.to;
  }
  os << "end\n";
  write_file(path, os.str());
}

Trajectory load_trajectory(const std::string &path, TrajectoryHeader *header) {
  TrajectoryHeader h;
  const auto events = read_traj_events(path, h);
  if (header)
    *header = h;
  Trajectory out;
  out.initial = events[0].init_state;
  State x = out.initial;
  double last = 0.0;
  for (std::size_t e = 1; e < events.size(); ++e) {
    const auto &ev = events[e];
    if (ev.kind == 2)
      throw std::runtime_error(path + ": reject events are only permitted in "
                                      "augmented trajectory files");
    if (x[ev.var] != ev.from)
      throw std::runtime_error(path + ": event from-value disagrees with state");
    x[ev.var] = ev.to;
    out.jumps.push_back({ev.time - last, x});
    last = ev.time;
  }
  out.final_dwell = h.horizon - last;
  return out;
}

void save_augmented(const std::string &path, const AugmentedTrajectory &aug,
                    const TrajectoryHeader &header) {
  std::ostringstream os;
  TrajectoryHeader h = header;
  h.horizon = aug.horizon;
  write_traj_header(os, h);
  os << "0 init - - " << state_csv(aug.states[0]) << "\n";
  double t = 0.0;
  for (int m = 0; m < aug.num_proposals(); ++m) {
    t += aug.tau[m];
    const int var = aug.proposal_variable(m);
    os << format_double(t) << (aug.accepted(m) ? " accept " : " reject ") << var
       << " " << aug.states[m][var] << " " << aug.proposals[m][var] << "\n";
  }
  os << "end\n";
  write_file(path, os.str());
}

AugmentedTrajectory load_augmented(const std::string &path,
                                   TrajectoryHeader *header) {
  TrajectoryHeader h;
  const auto events = read_traj_events(path, h);
  if (header)
    *header = h;
  AugmentedTrajectory out;
  out.horizon = h.horizon;
  out.states.push_back(events[0].init_state);
  double last = 0.0;
  for (std::size_t e = 1; e < events.size(); ++e) {
    const auto &ev = events[e];
    State x = out.states.back();
    if (x[ev.var] != ev.from)
      throw std::runtime_error(path + ": event from-value disagrees with state");
    State y = x;
    y[ev.var] = ev.to;
    out.proposals.push_back(y);
    out.states.push_back(ev.kind == 1 ? y : x);
    out.tau.push_back(ev.time - last);
    last = ev.time;
  }
  out.tau.push_back(h.horizon - last);
  return out;
}

std::string stats_to_string(const SufficientStats &stats, const CtmnModel &model,
                            const InteractionGraph &graph) {
  const StateSpace space(model.variables);
  std::ostringstream os;
  for (int i = 0; i < static_cast<int>(stats.per_var.size()); ++i) {
    for (const auto &[u, cs] : stats.per_var[i]) {
      os << model.variables[i].name << " ctx " << u << " [";
      const auto bv = space.subset_state_of(u, graph.blankets[i]);
      for (std::size_t j = 0; j < bv.size(); ++j)
        os << (j ? "," : "") << model.variables[graph.blankets[i][j]].name << "="
           << bv[j];
      os << "]\n";
      for (int a = 0; a < cs.card(); ++a)
        os << "  T[" << a << "] " << format_double(cs.dwell[a]) << "\n";
      for (int a = 0; a < cs.card(); ++a)
        for (int b = 0; b < cs.card(); ++b)
          if (a != b && (cs.acc(a, b) != 0.0 || cs.rej(a, b) != 0.0))
            os << "  M[" << a << "->" << b << "] a " << format_double(cs.acc(a, b))
               << " r " << format_double(cs.rej(a, b)) << "\n";
    }
  }
  return os.str();
}

void write_rows_csv(std::ostream &os, const std::vector<ExperimentRow> &rows) {
  os << "learner,regime,size,replicate,kl,seconds\n";
  for (const auto &r : rows)
    os << to_string(r.learner) << "," << to_string(r.regime) << ","
       << format_double(r.size) << "," << r.replicate << ","
       << (r.failed ? "failed" : format_double(r.kl)) << ","
       << format_double(r.seconds) << "\n";
}

void write_summary_csv(std::ostream &os,
                       const std::vector<ExperimentSummary> &summaries) {
  os << "learner,regime,size,kl_median,kl_q25,kl_q75\n";
  for (const auto &s : summaries)
    os << to_string(s.learner) << "," << to_string(s.regime) << ","
       << format_double(s.size) << "," << format_double(s.kl_median) << ","
       << format_double(s.kl_q25) << "," << format_double(s.kl_q75) << "\n";
}

ExperimentConfig experiment_config_from_string(const std::string &text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto tk = tokens(raw);
    if (tk.empty())
      continue;
    if (tk[0] == "regime") {
      const std::string &r = tk.at(1);
      if (r == "stationary")
        cfg.regime = Regime::StationaryInit;
      else if (r == "uniform-long")
        cfg.regime = Regime::UniformInitLong;
      else if (r == "uniform-short")
        cfg.regime = Regime::UniformInitShort;
      else
        throw ParseError(lineno, "unknown regime '" + r + "'");
    } else if (tk[0] == "sizes") {
      cfg.sizes.clear();
      for (std::size_t p = 1; p < tk.size(); ++p)
        cfg.sizes.push_back(parse_double(tk[p], lineno));
      if (cfg.sizes.empty())
        throw ParseError(lineno, "sizes needs at least one value");
      for (std::size_t p = 1; p < cfg.sizes.size(); ++p)
        if (cfg.sizes[p] <= cfg.sizes[p - 1])
          throw ParseError(lineno, "sizes must be increasing");
    } else if (tk[0] == "replicates") {
      cfg.replicates = static_cast<int>(parse_long(tk.at(1), lineno));
      if (cfg.replicates < 1)
        throw ParseError(lineno, "replicates must be >= 1");
    } else if (tk[0] == "seed") {
      cfg.base_seed = static_cast<std::uint64_t>(parse_long(tk.at(1), lineno));
    } else if (tk[0] == "trajectory-units") {
      cfg.trajectory_units = parse_double(tk.at(1), lineno);
    } else if (tk[0] == "learners") {
      cfg.learners.clear();
      for (std::size_t p = 1; p < tk.size(); ++p) {
        if (tk[p] == "ctmn")
          cfg.learners.push_back(LearnerKind::Ctmn);
        else if (tk[p] == "mn-dwell")
          cfg.learners.push_back(LearnerKind::MnDwell);
        else if (tk[p] == "ctbn")
          cfg.learners.push_back(LearnerKind::Ctbn);
        else
          throw ParseError(lineno, "unknown learner '" + tk[p] + "'");
      }
    } else if (tk[0] == "em-tol") {
      cfg.em.param_tolerance = parse_double(tk.at(1), lineno);
    } else if (tk[0] == "em-max-iter") {
      cfg.em.max_iterations = static_cast<int>(parse_long(tk.at(1), lineno));
    } else {
      throw ParseError(lineno, "unknown key '" + tk[0] + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string &path) {
  try {
    return experiment_config_from_string(read_file(path));
  } catch (const ParseError &e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

CtmnModel demo_cycle_model() {
  CtmnModel m;
  m.variables = {{"X1", 2}, {"X2", 2}, {"X3", 2}, {"X4", 2}};
  const StateSpace space(m.variables);
  auto eq_table = [] {
    Feature f;
    f.table = {1.0, 0.0, 0.0, 1.0};
    return f;
  };
  for (int i = 0; i < 4; ++i)
    m.equilibrium.features.push_back(make_indicator({i}, {1}, space));
  const int pairs[4][2] = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  for (const auto &p : pairs) {
    Feature f = eq_table();
    f.scope = {p[0], p[1]};
    m.equilibrium.features.push_back(std::move(f));
  }
  m.equilibrium.weights = {-0.2, -2.3, 0.7, 0.7, -1.2, -1.2, -1.2, -1.2};
  m.proposals = ProposalRates(m.variables);
  for (int i = 0; i < 4; ++i)
    m.proposals.set_symmetric(i, 0, 1, i + 1.0);
  m.acceptance = AcceptanceKind::Logistic;
  return m;
}

} // namespace ctmn
