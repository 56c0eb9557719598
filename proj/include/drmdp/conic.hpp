#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drmdp/cones.hpp"
#include "drmdp/ipm.hpp"

namespace drmdp {

struct VariableBlock {
    std::string name;
    int dim = 0;
    int offset = 0;  // into the stacked variable vector
};

/// Affine conic membership: b - M x must lie in `cone`.
struct Membership {
    VectorXd b;
    MatrixXd M;
    Cone cone;
};

/// Solver-agnostic program: minimize objective'x subject to eq_A x = eq_d
/// and the listed memberships. Variable blocks are stacked in declaration
/// order; all of them are free (cone restrictions go through memberships).
struct ConicProgramIR {
    std::vector<VariableBlock> blocks;
    VectorXd objective;
    MatrixXd eq_A;
    VectorXd eq_d;
    std::vector<Membership> memberships;

    int total_dim() const { return blocks.empty() ? 0 : blocks.back().offset + blocks.back().dim; }
    const VariableBlock& block(const std::string& name) const;
};

/// Incremental assembly helper. Terms are (block index, coefficient matrix)
/// pairs; omitted blocks contribute zero columns.
class ProgramBuilder {
public:
    int add_block(const std::string& name, int dim);
    void minimize(int block, const VectorXd& coeffs);
    void add_equality(const std::vector<std::pair<int, MatrixXd>>& terms, const VectorXd& rhs);
    void add_membership(const VectorXd& b, const std::vector<std::pair<int, MatrixXd>>& terms,
                        const Cone& cone);
    ConicProgramIR build();

private:
    struct PendingRow {
        VectorXd rhs;
        std::vector<std::pair<int, MatrixXd>> terms;
    };
    std::vector<VariableBlock> blocks_;
    std::vector<std::pair<int, VectorXd>> obj_;
    std::vector<PendingRow> eqs_;
    std::vector<std::pair<PendingRow, Cone>> members_;
    int dim_ = 0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalTrouble };

struct SolveTolerances {
    double feastol = 1e-8;
    double relgap = 1e-7;
    int max_iters = 100;
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalTrouble;
    VectorXd x;              // stacked primal values
    double objective = 0.0;
    double primal_residual = 0.0;
    double gap_estimate = 0.0;
    int iterations = 0;
    std::string message;

    // Dual information (populated on Optimal): multipliers for eq_A rows and,
    // per membership, the dual vector in the membership's own cone order.
    VectorXd eq_dual;
    std::vector<VectorXd> membership_duals;

    VectorXd block_value(const ConicProgramIR& ir, const std::string& name) const;
};

/// Translate the IR into conelp standard form and solve. Deterministic for
/// fixed inputs. Infeasible/Unbounded are reported with certificates in
/// `message`; NumericalTrouble never throws.
SolveOutcome solve(const ConicProgramIR& ir, const SolveTolerances& tol = {});

/// JSON dump of the emitted program (golden-file format). Stable key order
/// and shortest round-trip float formatting, so identical programs produce
/// byte-identical dumps.
std::string dump_ir_json(const ConicProgramIR& ir);

}  // namespace drmdp
