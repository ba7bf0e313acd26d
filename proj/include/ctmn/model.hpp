#ifndef CTMN_MODEL_HPP
#define CTMN_MODEL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ctmn {

// A joint assignment to all state variables, one value per variable.
using State = std::vector<int>;

// Exact enumeration refuses state spaces above this many joint states.
inline constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 20;

struct StateSpaceTooLarge : std::runtime_error {
  explicit StateSpaceTooLarge(std::uint64_t size)
      : std::runtime_error("state space has " + std::to_string(size) +
                           " states, exceeding the enumeration limit of " +
                           std::to_string(kEnumerationLimit)) {}
};

struct VariableSpec {
  std::string name;
  int cardinality = 2;
};

// Mixed-radix enumeration of the joint state space. Variable 0 is the most
// significant digit, so index(x) = ((x0*c1 + x1)*c2 + x2)*...  This ordering
// is fixed; matrix and vector indices are reproducible across runs.
class StateSpace {
public:
  StateSpace() = default;
  explicit StateSpace(const std::vector<VariableSpec> &vars);

  int num_variables() const { return static_cast<int>(cards_.size()); }
  int cardinality(int i) const { return cards_[i]; }
  std::uint64_t size() const { return size_; }

  // size(), or throws StateSpaceTooLarge above the enumeration limit.
  std::uint64_t size_checked() const;

  std::uint64_t index_of(const State &x) const;
  State state_of(std::uint64_t idx) const;

  // Mixed-radix index of an assignment to a sorted subset of variables,
  // read out of a full joint state. subset[0] is the most significant digit.
  std::uint64_t project_index(const State &x, const std::vector<int> &subset) const;
  std::uint64_t subset_size(const std::vector<int> &subset) const;
  std::vector<int> subset_state_of(std::uint64_t idx, const std::vector<int> &subset) const;

private:
  std::vector<int> cards_;
  std::uint64_t size_ = 1;
};

// A real-valued feature over a small set of variables, stored as a dense
// table over the scope's joint domain (scope[0] most significant digit).
struct Feature {
  std::vector<int> scope;
  std::vector<double> table;

  double value(const State &x, const StateSpace &space) const;
};

// Indicator feature: 1 at the given scope assignment, 0 elsewhere.
Feature make_indicator(std::vector<int> scope, const std::vector<int> &assignment,
                       const StateSpace &space);

struct EquilibriumSpec {
  std::vector<Feature> features;
  std::vector<double> weights;
};

// Per-variable symmetric proposal rates, card x card with zero diagonal.
class ProposalRates {
public:
  ProposalRates() = default;
  explicit ProposalRates(const std::vector<VariableSpec> &vars);

  double rate(int var, int from, int to) const {
    return mats_[var][static_cast<std::size_t>(from) * cards_[var] + to];
  }
  void set_rate(int var, int from, int to, double r);
  // Sets both (from,to) and (to,from).
  void set_symmetric(int var, int a, int b, double r);

  int num_variables() const { return static_cast<int>(mats_.size()); }
  int cardinality(int var) const { return cards_[var]; }
  // Total proposal rate out of value `from` for one variable.
  double row_sum(int var, int from) const;

private:
  std::vector<std::vector<double>> mats_;
  std::vector<int> cards_;
};

enum class AcceptanceKind { Metropolis, Logistic };

// f(z) for z = exp(t), evaluated from the log-ratio t for stability.
double accept_prob_log(AcceptanceKind kind, double t);
// f(z); z must be > 0.
double accept_prob(AcceptanceKind kind, double z);

struct CtmnModel {
  std::vector<VariableSpec> variables;
  EquilibriumSpec equilibrium;
  ProposalRates proposals;
  AcceptanceKind acceptance = AcceptanceKind::Logistic;

  StateSpace space() const { return StateSpace(variables); }
};

struct InteractionGraph {
  // blanket[i] = sorted neighbors of variable i in the feature-induced graph.
  std::vector<std::vector<int>> blankets;

  bool has_edge(int i, int j) const;
};

struct RateMatrix {
  StateSpace space;
  Eigen::MatrixXd q;
};

// Conditional rate matrices per variable and parent assignment, indexed by
// the mixed-radix parent-context index (same digit ordering as StateSpace).
struct CtbnConditionalRates {
  struct VariableCim {
    std::vector<int> parents;                 // sorted
    std::vector<Eigen::MatrixXd> per_context; // card x card, zero row sums
  };
  std::vector<VariableCim> vars;
};

struct Violation {
  std::string what;
};

std::vector<Violation> validate_model(const CtmnModel &model);

InteractionGraph induced_graph(const CtmnModel &model);

double log_unnormalized_weight(const CtmnModel &model, const State &x);

// Exact stationary distribution, log-sum-exp normalized.
Eigen::VectorXd stationary_exact(const CtmnModel &model);

// log g_i(x_i -> y_i | u_i). blanket_values assigns exactly the variables of
// graph.blankets[var], in sorted variable order.
double log_g(const CtmnModel &model, const InteractionGraph &graph, int var,
             int from, int to, const std::vector<int> &blanket_values);
// Same, reading the blanket context out of a full joint state.
double log_g_in_state(const CtmnModel &model, const InteractionGraph &graph,
                      int var, int from, int to, const State &x);
double g_ratio(const CtmnModel &model, const InteractionGraph &graph, int var,
               int from, int to, const std::vector<int> &blanket_values);

RateMatrix build_rate_matrix(const CtmnModel &model);

CtbnConditionalRates to_ctbn(const CtmnModel &model);

RateMatrix amalgamate(const CtbnConditionalRates &ctbn,
                      const std::vector<VariableSpec> &variables);

} // namespace ctmn

#endif
