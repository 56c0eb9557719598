#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace drmdp {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using StateId = int;

inline constexpr double kSimplexTol = 1e-9;

struct Horizon {
    enum class Kind { Finite, Infinite };
    Kind kind = Kind::Infinite;
    int T = 0;           // number of stages, Finite only
    double gamma = 1.0;  // discount, in (0,1]; < 1 required for Infinite

    static Horizon finite(int T, double gamma);
    static Horizon infinite(double gamma);
};

/// States, their stage labels and successor lists. Successor lists are kept
/// in ascending global state order; the flattened parameter vector for a
/// state stacks one block per action, each block following that order.
struct StateSpace {
    int num_states = 0;
    StateId initial_state = 0;
    std::vector<int> stage;                          // 1-based; all 1 for infinite horizon
    std::vector<std::vector<StateId>> successors;    // per state

    int num_stages() const;
    void validate(const Horizon& h) const;
};

struct ActionSpace {
    std::vector<std::vector<std::string>> actions;  // names per state, each nonempty

    int count(StateId s) const { return static_cast<int>(actions[s].size()); }
    void validate(const StateSpace& space) const;
};

/// Fixed (certain) transition/reward tables for classical evaluation.
struct FixedParameters {
    std::vector<MatrixXd> transition;  // per state: |A_s| x |succ(s)| rows on the simplex
    std::vector<VectorXd> reward;      // per state: |A_s|

    void validate(const StateSpace& space, const ActionSpace& acts);
};

struct Policy {
    std::vector<VectorXd> pi;  // per state, on the simplex over A_s

    void validate(const StateSpace& space, const ActionSpace& acts);
    /// Index of the action with the largest weight.
    int argmax(StateId s) const;
};

struct ValueFunction {
    VectorXd v;  // indexed by state
};

/// Discounted continuation-value matrix V of shape (|A_s|*|succ|) x |A_s|:
/// column a is nonzero only in action-a's block, where it equals
/// gamma * v(successor) in successor order. With p_s stacked the same way,
/// r_s'pi + p_s' V pi is the one-step expected value of policy pi.
struct ContinuationMatrix {
    MatrixXd V;
    int num_actions = 0;
    int num_successors = 0;
};

ContinuationMatrix build_continuation_matrix(const VectorXd& successor_values, int num_actions,
                                             double gamma);

/// Exact expected discounted return of `policy` from the initial state:
/// backward recursion over stages for finite horizons, a linear solve for
/// the discounted infinite-horizon case.
double evaluate_policy(const StateSpace& space, const ActionSpace& acts, const Horizon& horizon,
                       const FixedParameters& params, const Policy& policy);

/// Value vector of `policy` at every state (same computation as
/// evaluate_policy, exposed for diagnostics).
ValueFunction policy_values(const StateSpace& space, const ActionSpace& acts,
                            const Horizon& horizon, const FixedParameters& params,
                            const Policy& policy);

/// Renormalize a near-simplex vector in place; throws if the deviation
/// exceeds the tolerance.
void project_simplex(Eigen::Ref<VectorXd> row, double tol = kSimplexTol);

}  // namespace drmdp
