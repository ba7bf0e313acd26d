#include "ctmn/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ctmn {

StateSpace::StateSpace(const std::vector<VariableSpec> &vars) {
  cards_.reserve(vars.size());
  size_ = 1;
  for (const auto &v : vars) {
    cards_.push_back(v.cardinality);
    size_ *= static_cast<std::uint64_t>(v.cardinality);
  }
}

std::uint64_t StateSpace::size_checked() const {
  if (size_ > kEnumerationLimit)
    throw StateSpaceTooLarge(size_);
  return size_;
}

std::uint64_t StateSpace::index_of(const State &x) const {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < cards_.size(); ++i)
    idx = idx * cards_[i] + x[i];
  return idx;
}

State StateSpace::state_of(std::uint64_t idx) const {
  State x(cards_.size());
  for (std::size_t i = cards_.size(); i-- > 0;) {
    x[i] = static_cast<int>(idx % cards_[i]);
    idx /= cards_[i];
  }
  return x;
}

std::uint64_t StateSpace::project_index(const State &x,
                                        const std::vector<int> &subset) const {
  std::uint64_t idx = 0;
  for (int v : subset)
    idx = idx * cards_[v] + x[v];
  return idx;
}

std::uint64_t StateSpace::subset_size(const std::vector<int> &subset) const {
  std::uint64_t n = 1;
  for (int v : subset)
    n *= static_cast<std::uint64_t>(cards_[v]);
  return n;
}

std::vector<int> StateSpace::subset_state_of(std::uint64_t idx,
                                             const std::vector<int> &subset) const {
  std::vector<int> vals(subset.size());
  for (std::size_t i = subset.size(); i-- > 0;) {
    vals[i] = static_cast<int>(idx % cards_[subset[i]]);
    idx /= cards_[subset[i]];
  }
  return vals;
}

double Feature::value(const State &x, const StateSpace &space) const {
  std::uint64_t idx = 0;
  for (int v : scope)
    idx = idx * space.cardinality(v) + x[v];
  return table[idx];
}

Feature make_indicator(std::vector<int> scope, const std::vector<int> &assignment,
                       const StateSpace &space) {
  Feature f;
  f.scope = std::move(scope);
  f.table.assign(space.subset_size(f.scope), 0.0);
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < f.scope.size(); ++i)
    idx = idx * space.cardinality(f.scope[i]) + assignment[i];
  f.table[idx] = 1.0;
  return f;
}

ProposalRates::ProposalRates(const std::vector<VariableSpec> &vars) {
  for (const auto &v : vars) {
    cards_.push_back(v.cardinality);
    mats_.emplace_back(static_cast<std::size_t>(v.cardinality) * v.cardinality, 0.0);
  }
}

void ProposalRates::set_rate(int var, int from, int to, double r) {
  mats_[var][static_cast<std::size_t>(from) * cards_[var] + to] = r;
}

void ProposalRates::set_symmetric(int var, int a, int b, double r) {
  set_rate(var, a, b, r);
  set_rate(var, b, a, r);
}

double ProposalRates::row_sum(int var, int from) const {
  double s = 0.0;
  for (int b = 0; b < cards_[var]; ++b)
    if (b != from)
      s += rate(var, from, b);
  return s;
}

double accept_prob_log(AcceptanceKind kind, double t) {
  switch (kind) {
  case AcceptanceKind::Metropolis:
    return t >= 0.0 ? 1.0 : std::exp(t);
  case AcceptanceKind::Logistic:
    // stable sigmoid of t
    if (t >= 0.0)
      return 1.0 / (1.0 + std::exp(-t));
    else {
      double e = std::exp(t);
      return e / (1.0 + e);
    }
  }
  return 0.0;
}

double accept_prob(AcceptanceKind kind, double z) {
  if (!(z > 0.0))
    throw std::invalid_argument("acceptance ratio must be positive");
  return accept_prob_log(kind, std::log(z));
}

std::vector<Violation> validate_model(const CtmnModel &model) {
  std::vector<Violation> out;
  const int n = static_cast<int>(model.variables.size());
  std::set<std::string> names;
  for (int i = 0; i < n; ++i) {
    const auto &v = model.variables[i];
    if (v.cardinality < 2)
      out.push_back({"variable " + v.name + " has cardinality < 2"});
    if (!names.insert(v.name).second)
      out.push_back({"duplicate variable name " + v.name});
  }
  StateSpace space(model.variables);
  const auto &eq = model.equilibrium;
  if (eq.weights.size() != eq.features.size())
    out.push_back({"weight vector length " + std::to_string(eq.weights.size()) +
                   " does not match feature count " +
                   std::to_string(eq.features.size())});
  for (std::size_t k = 0; k < eq.features.size(); ++k) {
    const auto &f = eq.features[k];
    if (f.scope.empty()) {
      out.push_back({"feature " + std::to_string(k) + " has empty scope"});
      continue;
    }
    std::set<int> seen;
    bool in_range = true;
    for (int v : f.scope) {
      if (v < 0 || v >= n) {
        out.push_back({"feature " + std::to_string(k) +
                       " scope references variable " + std::to_string(v) +
                       " out of range"});
        in_range = false;
      } else if (!seen.insert(v).second) {
        out.push_back({"feature " + std::to_string(k) +
                       " scope repeats variable " + std::to_string(v)});
      }
    }
    if (in_range && f.table.size() != space.subset_size(f.scope))
      out.push_back({"feature " + std::to_string(k) + " table has " +
                     std::to_string(f.table.size()) + " entries, expected " +
                     std::to_string(space.subset_size(f.scope))});
    for (double s : f.table)
      if (!std::isfinite(s)) {
        out.push_back({"feature " + std::to_string(k) + " has non-finite table entry"});
        break;
      }
  }
  for (double w : eq.weights)
    if (!std::isfinite(w)) {
      out.push_back({"non-finite weight"});
      break;
    }
  if (model.proposals.num_variables() != n) {
    out.push_back({"proposal rates cover " +
                   std::to_string(model.proposals.num_variables()) +
                   " variables, expected " + std::to_string(n)});
    return out;
  }
  for (int i = 0; i < n; ++i) {
    const int c = model.variables[i].cardinality;
    if (model.proposals.cardinality(i) != c) {
      out.push_back({"proposal matrix for " + model.variables[i].name +
                     " has wrong dimension"});
      continue;
    }
    for (int a = 0; a < c; ++a)
      for (int b = a + 1; b < c; ++b) {
        const double rab = model.proposals.rate(i, a, b);
        const double rba = model.proposals.rate(i, b, a);
        if (rab < 0.0 || rba < 0.0)
          out.push_back({"negative proposal rate for " + model.variables[i].name});
        if (rab != rba)
          out.push_back({"asymmetric proposal rates for " + model.variables[i].name +
                         " between values " + std::to_string(a) + " and " +
                         std::to_string(b)});
      }
  }
  return out;
}

InteractionGraph induced_graph(const CtmnModel &model) {
  const int n = static_cast<int>(model.variables.size());
  std::vector<std::set<int>> nb(n);
  for (const auto &f : model.equilibrium.features)
    for (std::size_t a = 0; a < f.scope.size(); ++a)
      for (std::size_t b = a + 1; b < f.scope.size(); ++b) {
        nb[f.scope[a]].insert(f.scope[b]);
        nb[f.scope[b]].insert(f.scope[a]);
      }
  InteractionGraph g;
  g.blankets.resize(n);
  for (int i = 0; i < n; ++i)
    g.blankets[i].assign(nb[i].begin(), nb[i].end());
  return g;
}

bool InteractionGraph::has_edge(int i, int j) const {
  return std::binary_search(blankets[i].begin(), blankets[i].end(), j);
}

double log_unnormalized_weight(const CtmnModel &model, const State &x) {
  const StateSpace space(model.variables);
  double s = 0.0;
  for (std::size_t k = 0; k < model.equilibrium.features.size(); ++k)
    s += model.equilibrium.weights[k] * model.equilibrium.features[k].value(x, space);
  return s;
}

Eigen::VectorXd stationary_exact(const CtmnModel &model) {
  const StateSpace space(model.variables);
  const std::uint64_t n = space.size_checked();
  Eigen::VectorXd logw(n);
  for (std::uint64_t s = 0; s < n; ++s)
    logw[s] = log_unnormalized_weight(model, space.state_of(s));
  const double mx = logw.maxCoeff();
  const double logz = mx + std::log((logw.array() - mx).exp().sum());
  return (logw.array() - logz).exp();
}

double log_g(const CtmnModel &model, const InteractionGraph &graph, int var,
             int from, int to, const std::vector<int> &blanket_values) {
  const auto &blanket = graph.blankets[var];
  if (blanket_values.size() != blanket.size())
    throw std::invalid_argument("blanket assignment has " +
                                std::to_string(blanket_values.size()) +
                                " values, expected " +
                                std::to_string(blanket.size()));
  // Scratch joint state carrying only the variables g_i can read.
  State x(model.variables.size(), 0);
  for (std::size_t j = 0; j < blanket.size(); ++j)
    x[blanket[j]] = blanket_values[j];
  return log_g_in_state(model, graph, var, from, to, x);
}

double log_g_in_state(const CtmnModel &model, const InteractionGraph &graph,
                      int var, int from, int to, const State &x) {
  (void)graph;
  const StateSpace space(model.variables);
  State y = x;
  y[var] = to;
  State xv = x;
  xv[var] = from;
  double t = 0.0;
  for (std::size_t k = 0; k < model.equilibrium.features.size(); ++k) {
    const auto &f = model.equilibrium.features[k];
    if (std::find(f.scope.begin(), f.scope.end(), var) == f.scope.end())
      continue;
    t += model.equilibrium.weights[k] * (f.value(y, space) - f.value(xv, space));
  }
  return t;
}

double g_ratio(const CtmnModel &model, const InteractionGraph &graph, int var,
               int from, int to, const std::vector<int> &blanket_values) {
  return std::exp(log_g(model, graph, var, from, to, blanket_values));
}

RateMatrix build_rate_matrix(const CtmnModel &model) {
  RateMatrix rm;
  rm.space = StateSpace(model.variables);
  const std::uint64_t n = rm.space.size_checked();
  rm.q = Eigen::MatrixXd::Zero(n, n);
  const int nv = static_cast<int>(model.variables.size());
  const InteractionGraph graph = induced_graph(model);
  for (std::uint64_t s = 0; s < n; ++s) {
    State x = rm.space.state_of(s);
    double diag = 0.0;
    for (int i = 0; i < nv; ++i) {
      const int c = model.variables[i].cardinality;
      const int xi = x[i];
      for (int yi = 0; yi < c; ++yi) {
        if (yi == xi)
          continue;
        const double r = model.proposals.rate(i, xi, yi);
        if (r == 0.0)
          continue;
        const double t = log_g_in_state(model, graph, i, xi, yi, x);
        const double q = r * accept_prob_log(model.acceptance, t);
        State y = x;
        y[i] = yi;
        rm.q(s, rm.space.index_of(y)) = q;
        diag += q;
      }
    }
    rm.q(s, s) = -diag;
  }
  return rm;
}

CtbnConditionalRates to_ctbn(const CtmnModel &model) {
  const StateSpace space(model.variables);
  const InteractionGraph graph = induced_graph(model);
  CtbnConditionalRates out;
  const int nv = static_cast<int>(model.variables.size());
  out.vars.resize(nv);
  for (int i = 0; i < nv; ++i) {
    auto &vc = out.vars[i];
    vc.parents = graph.blankets[i];
    const int c = model.variables[i].cardinality;
    const std::uint64_t nctx = space.subset_size(vc.parents);
    vc.per_context.resize(nctx);
    for (std::uint64_t u = 0; u < nctx; ++u) {
      const std::vector<int> bv = space.subset_state_of(u, vc.parents);
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(c, c);
      for (int a = 0; a < c; ++a) {
        double diag = 0.0;
        for (int b = 0; b < c; ++b) {
          if (b == a)
            continue;
          const double r = model.proposals.rate(i, a, b);
          double q = 0.0;
          if (r != 0.0)
            q = r * accept_prob_log(model.acceptance,
                                    log_g(model, graph, i, a, b, bv));
          m(a, b) = q;
          diag += q;
        }
        m(a, a) = -diag;
      }
      vc.per_context[u] = std::move(m);
    }
  }
  return out;
}

RateMatrix amalgamate(const CtbnConditionalRates &ctbn,
                      const std::vector<VariableSpec> &variables) {
  RateMatrix rm;
  rm.space = StateSpace(variables);
  const std::uint64_t n = rm.space.size_checked();
  rm.q = Eigen::MatrixXd::Zero(n, n);
  const int nv = static_cast<int>(variables.size());
  if (static_cast<int>(ctbn.vars.size()) != nv)
    throw std::invalid_argument("conditional rates cover wrong variable count");
  for (std::uint64_t s = 0; s < n; ++s) {
    State x = rm.space.state_of(s);
    double diag = 0.0;
    for (int i = 0; i < nv; ++i) {
      const auto &vc = ctbn.vars[i];
      const std::uint64_t u = rm.space.project_index(x, vc.parents);
      if (u >= vc.per_context.size())
        throw std::invalid_argument("missing conditional matrix for variable " +
                                    variables[i].name);
      const Eigen::MatrixXd &m = vc.per_context[u];
      const int c = variables[i].cardinality;
      for (int b = 0; b < c; ++b) {
        if (b == x[i])
          continue;
        const double q = m(x[i], b);
        State y = x;
        y[i] = b;
        rm.q(s, rm.space.index_of(y)) = q;
        diag += q;
      }
    }
    rm.q(s, s) = -diag;
  }
  return rm;
}

} // namespace ctmn
