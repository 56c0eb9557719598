#pragma once

#include <optional>
#include <string>

#include "drmdp/ambiguity.hpp"
#include "drmdp/conic.hpp"
#include "drmdp/mdp.hpp"

namespace drmdp {

/// One per-state max-min subproblem: the discounted continuation matrix
/// (gamma already folded in) plus the state's ambiguity set.
struct SRobustInstance {
    StateId state = 0;
    ContinuationMatrix cont;
    AmbiguitySet amb;
    bool verified = false;  // verify_nesting + check_regularity passed upstream

    void validate() const;
};

struct SRobustSolution {
    SolveStatus status = SolveStatus::NumericalTrouble;
    VectorXd policy;       // pi* on the simplex over A_s
    double value = 0.0;    // vtilde(s) = -w*
    int deterministic_action = -1;  // lexicographically smallest near-pure action, else -1

    // Dual certificates of the inner worst-case problem.
    VectorXd beta;                 // moment multipliers (k entries, possibly none)
    VectorXd kappa, lambda;        // n_s each, nonnegative
    std::vector<VectorXd> nu;      // per confidence set, in dual-cone coordinates

    // Worst-case mean parameters recovered from the fixed-policy program.
    VectorXd worst_p, worst_r;

    double max_row_violation = 0.0;  // largest constraint violation at the solution
    std::string message;
};

struct SRobustOptions {
    bool allow_unverified = false;
    SolveTolerances tol;
};

/// Emit the per-state dual program: minimize w over (w, pi, beta, kappa,
/// lambda, nu_i) subject to the five row families, pi on the simplex and
/// nu_i in the dual cones. Moment-free sets (k = 0) drop beta entirely.
ConicProgramIR build_program(const SRobustInstance& inst, const SRobustOptions& opt = {});

/// Solve for the S-robust action and value of the state.
SRobustSolution solve_srobust(const SRobustInstance& inst, const SRobustOptions& opt = {});

/// Worst-case expected one-step value of a fixed action distribution,
/// together with the worst-case mean parameters attaining it.
SRobustSolution worst_case_value(const SRobustInstance& inst, const VectorXd& pi_fixed,
                                 const SRobustOptions& opt = {});

// ---------------------------------------------------------------------------
// Specialized reduced programs for the four canonical ambiguity liftings.
// Each is an independent formulation whose optimal value must agree with
// build_program applied to the matching lifted AmbiguitySet.

enum class ExampleKind { Mean, MeanCovariance, Mad, Huber };

struct ExampleData {
    ContinuationMatrix cont;  // gamma folded
    // Mean: transition uncertainty with G E[p] <=_K f; rewards fixed.
    MatrixXd mean_G;
    VectorXd mean_f;
    Cone mean_K = Cone::nonneg(1);
    VectorXd r_fixed;
    // Reward-side examples: transitions fixed.
    VectorXd p_fixed;
    MatrixXd cov_G;      // mean-box rows (G m <= f)
    VectorXd cov_f;
    MatrixXd cov_sigma;  // covariance bound
    VectorXd mad_m, mad_f;
    VectorXd huber_f;
    double huber_g = 0.0;
    double huber_delta = 1.0;
};

ConicProgramIR build_example_program(ExampleKind kind, const ExampleData& data);

/// Solve a specialized program; returns (value, pi*).
std::pair<double, VectorXd> solve_example_program(ExampleKind kind, const ExampleData& data,
                                                  const SolveTolerances& tol = {});

}  // namespace drmdp
