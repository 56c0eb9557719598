#include "drmdp/mdp.hpp"

#include <algorithm>
#include <stdexcept>

namespace drmdp {

Horizon Horizon::finite(int T, double gamma) {
    if (T <= 0) throw std::invalid_argument("finite horizon needs T >= 1");
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in (0,1]");
    return {Kind::Finite, T, gamma};
}

Horizon Horizon::infinite(double gamma) {
    if (gamma <= 0.0 || gamma >= 1.0)
        throw std::invalid_argument("infinite horizon needs gamma in (0,1)");
    return {Kind::Infinite, 0, gamma};
}

int StateSpace::num_stages() const {
    int m = 0;
    for (int t : stage) m = std::max(m, t);
    return m;
}

void StateSpace::validate(const Horizon& h) const {
    if (num_states <= 0) throw std::invalid_argument("empty state space");
    if (static_cast<int>(stage.size()) != num_states ||
        static_cast<int>(successors.size()) != num_states)
        throw std::invalid_argument("state space arrays inconsistent");
    if (initial_state < 0 || initial_state >= num_states)
        throw std::invalid_argument("initial state out of range");
    const int T = num_stages();
    std::vector<int> seen(T + 1, 0);
    for (int t : stage) {
        if (t < 1 || t > T) throw std::invalid_argument("stage labels must be contiguous from 1");
        seen[t]++;
    }
    for (int t = 1; t <= T; ++t)
        if (seen[t] == 0) throw std::invalid_argument("stage labels must be contiguous from 1");
    if (h.kind == Horizon::Kind::Finite) {
        if (T != h.T) throw std::invalid_argument("stage count does not match horizon T");
        if (stage[initial_state] != 1)
            throw std::invalid_argument("initial state must sit in stage 1");
        if (seen[1] != 1) throw std::invalid_argument("stage 1 must contain only the initial state");
        for (int s = 0; s < num_states; ++s)
            for (StateId sp : successors[s])
                if (stage[sp] != stage[s] + 1)
                    throw std::invalid_argument("successors must live in the next stage");
    } else {
        if (T != 1) throw std::invalid_argument("infinite horizon uses a single stage");
    }
    for (int s = 0; s < num_states; ++s) {
        if (stage[s] == num_stages() && h.kind == Horizon::Kind::Finite) continue;
        if (!std::is_sorted(successors[s].begin(), successors[s].end()))
            throw std::invalid_argument("successor lists must be in ascending state order");
        for (StateId sp : successors[s])
            if (sp < 0 || sp >= num_states) throw std::invalid_argument("successor out of range");
    }
}

void ActionSpace::validate(const StateSpace& space) const {
    if (static_cast<int>(actions.size()) != space.num_states)
        throw std::invalid_argument("action table size mismatch");
    for (const auto& a : actions)
        if (a.empty()) throw std::invalid_argument("every state needs at least one action");
}

void project_simplex(Eigen::Ref<VectorXd> row, double tol) {
    if (row.minCoeff() < -tol) throw std::invalid_argument("negative probability");
    const double sum = row.sum();
    if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("probabilities do not sum to 1");
    row = row.cwiseMax(0.0);
    row /= row.sum();
}

void FixedParameters::validate(const StateSpace& space, const ActionSpace& acts) {
    if (static_cast<int>(transition.size()) != space.num_states ||
        static_cast<int>(reward.size()) != space.num_states)
        throw std::invalid_argument("parameter table size mismatch");
    for (int s = 0; s < space.num_states; ++s) {
        const int na = acts.count(s);
        const int ns = static_cast<int>(space.successors[s].size());
        if (ns == 0) continue;  // terminal
        if (transition[s].rows() != na || transition[s].cols() != ns)
            throw std::invalid_argument("transition shape mismatch");
        if (reward[s].size() != na) throw std::invalid_argument("reward shape mismatch");
        for (int a = 0; a < na; ++a) {
            VectorXd row = transition[s].row(a).transpose();
            project_simplex(row);
            transition[s].row(a) = row.transpose();
        }
    }
}

void Policy::validate(const StateSpace& space, const ActionSpace& acts) {
    if (static_cast<int>(pi.size()) != space.num_states)
        throw std::invalid_argument("policy size mismatch");
    for (int s = 0; s < space.num_states; ++s) {
        if (pi[s].size() != acts.count(s)) throw std::invalid_argument("policy row size mismatch");
        project_simplex(pi[s]);
    }
}

int Policy::argmax(StateId s) const {
    int best = 0;
    for (int a = 1; a < pi[s].size(); ++a)
        if (pi[s][a] > pi[s][best]) best = a;
    return best;
}

ContinuationMatrix build_continuation_matrix(const VectorXd& successor_values, int num_actions,
                                             double gamma) {
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in (0,1]");
    if (!successor_values.allFinite())
        throw std::invalid_argument("continuation values must be finite");
    const int ns = static_cast<int>(successor_values.size());
    ContinuationMatrix cm;
    cm.num_actions = num_actions;
    cm.num_successors = ns;
    cm.V = MatrixXd::Zero(num_actions * ns, num_actions);
    for (int a = 0; a < num_actions; ++a) cm.V.block(a * ns, a, ns, 1) = gamma * successor_values;
    return cm;
}

namespace {

VectorXd values_impl(const StateSpace& space, const ActionSpace& acts, const Horizon& horizon,
                     const FixedParameters& params, const Policy& policy) {
    const int n = space.num_states;
    if (horizon.kind == Horizon::Kind::Finite) {
        VectorXd v = VectorXd::Zero(n);
        for (int t = horizon.T - 1; t >= 1; --t) {
            VectorXd next = v;
            for (int s = 0; s < n; ++s) {
                if (space.stage[s] != t) continue;
                const auto& succ = space.successors[s];
                double val = 0.0;
                for (int a = 0; a < acts.count(s); ++a) {
                    double cont = 0.0;
                    for (size_t j = 0; j < succ.size(); ++j)
                        cont += params.transition[s](a, static_cast<int>(j)) * next[succ[j]];
                    val += policy.pi[s][a] * (params.reward[s][a] + horizon.gamma * cont);
                }
                v[s] = val;
            }
        }
        return v;
    }
    // Infinite horizon: solve (I - gamma P_pi) v = r_pi.
    MatrixXd P = MatrixXd::Zero(n, n);
    VectorXd r = VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
        const auto& succ = space.successors[s];
        for (int a = 0; a < acts.count(s); ++a) {
            const double w = policy.pi[s][a];
            if (succ.empty()) continue;
            r[s] += w * params.reward[s][a];
            for (size_t j = 0; j < succ.size(); ++j)
                P(s, succ[j]) += w * params.transition[s](a, static_cast<int>(j));
        }
    }
    MatrixXd M = MatrixXd::Identity(n, n) - horizon.gamma * P;
    return M.partialPivLu().solve(r);
}

}  // namespace

double evaluate_policy(const StateSpace& space, const ActionSpace& acts, const Horizon& horizon,
                       const FixedParameters& params, const Policy& policy) {
    return values_impl(space, acts, horizon, params, policy)[space.initial_state];
}

ValueFunction policy_values(const StateSpace& space, const ActionSpace& acts,
                            const Horizon& horizon, const FixedParameters& params,
                            const Policy& policy) {
    return {values_impl(space, acts, horizon, params, policy)};
}

}  // namespace drmdp
