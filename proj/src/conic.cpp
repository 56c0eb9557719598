#include "drmdp/conic.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace drmdp {

namespace {
using ordered_json = nlohmann::ordered_json;

constexpr double kSqrt2Inv = 0.70710678118654752440;

/// Rotation mapping the rotated cone {2uv >= |w|^2, u,v >= 0} onto the
/// second-order cone: (u,v,w) -> ((u+v)/sqrt2, (u-v)/sqrt2, w). Orthogonal
/// and involutive, so the same map sends duals back.
MatrixXd rsoc_rotation(int d) {
    MatrixXd T = MatrixXd::Identity(d, d);
    T(0, 0) = kSqrt2Inv;
    T(0, 1) = kSqrt2Inv;
    T(1, 0) = kSqrt2Inv;
    T(1, 1) = -kSqrt2Inv;
    return T;
}

ordered_json matrix_json(const MatrixXd& m) {
    ordered_json j;
    j["shape"] = {m.rows(), m.cols()};
    std::vector<double> data;
    data.reserve(m.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    j["data"] = data;
    return j;
}

ordered_json vector_json(const VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

ordered_json cone_json(const Cone& c) {
    ordered_json j;
    j["kind"] = cone_name(c);
    if (c.kind == Cone::Kind::Product) {
        ordered_json fs = ordered_json::array();
        for (const auto& f : c.factors) fs.push_back(cone_json(f));
        j["factors"] = fs;
    } else if (c.kind == Cone::Kind::Psd) {
        j["n"] = c.size;
    } else {
        j["dim"] = c.size;
    }
    return j;
}

}  // namespace

const VariableBlock& ConicProgramIR::block(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return b;
    throw std::invalid_argument("unknown variable block: " + name);
}

int ProgramBuilder::add_block(const std::string& name, int dim) {
    if (dim <= 0) throw std::invalid_argument("block dimension must be positive");
    for (const auto& b : blocks_)
        if (b.name == name) throw std::invalid_argument("duplicate block name: " + name);
    blocks_.push_back({name, dim, dim_});
    dim_ += dim;
    return static_cast<int>(blocks_.size()) - 1;
}

void ProgramBuilder::minimize(int block, const VectorXd& coeffs) {
    if (coeffs.size() != blocks_.at(block).dim)
        throw std::invalid_argument("objective coefficient size mismatch");
    obj_.emplace_back(block, coeffs);
}

void ProgramBuilder::add_equality(const std::vector<std::pair<int, MatrixXd>>& terms,
                                  const VectorXd& rhs) {
    for (const auto& [bi, M] : terms) {
        if (M.rows() != rhs.size() || M.cols() != blocks_.at(bi).dim)
            throw std::invalid_argument("equality term shape mismatch");
    }
    eqs_.push_back({rhs, terms});
}

void ProgramBuilder::add_membership(const VectorXd& b,
                                    const std::vector<std::pair<int, MatrixXd>>& terms,
                                    const Cone& cone) {
    if (cone.dim() != b.size()) throw std::invalid_argument("membership cone/vector mismatch");
    for (const auto& [bi, M] : terms) {
        if (M.rows() != b.size() || M.cols() != blocks_.at(bi).dim)
            throw std::invalid_argument("membership term shape mismatch");
    }
    members_.push_back({{b, terms}, cone});
}

ConicProgramIR ProgramBuilder::build() {
    ConicProgramIR ir;
    ir.blocks = blocks_;
    ir.objective = VectorXd::Zero(dim_);
    for (const auto& [bi, v] : obj_) ir.objective.segment(blocks_[bi].offset, blocks_[bi].dim) += v;
    int eq_rows = 0;
    for (const auto& e : eqs_) eq_rows += static_cast<int>(e.rhs.size());
    ir.eq_A = MatrixXd::Zero(eq_rows, dim_);
    ir.eq_d = VectorXd::Zero(eq_rows);
    int r = 0;
    for (const auto& e : eqs_) {
        const int nr = static_cast<int>(e.rhs.size());
        ir.eq_d.segment(r, nr) = e.rhs;
        for (const auto& [bi, M] : e.terms)
            ir.eq_A.block(r, blocks_[bi].offset, nr, blocks_[bi].dim) += M;
        r += nr;
    }
    for (const auto& [row, cone] : members_) {
        Membership mem;
        mem.b = row.rhs;
        mem.cone = cone;
        mem.M = MatrixXd::Zero(row.rhs.size(), dim_);
        for (const auto& [bi, M] : row.terms)
            mem.M.block(0, blocks_[bi].offset, M.rows(), blocks_[bi].dim) += M;
        ir.memberships.push_back(std::move(mem));
    }
    return ir;
}

VectorXd SolveOutcome::block_value(const ConicProgramIR& ir, const std::string& name) const {
    const auto& b = ir.block(name);
    return x.segment(b.offset, b.dim);
}

SolveOutcome solve(const ConicProgramIR& ir, const SolveTolerances& tol) {
    const int n = ir.total_dim();
    SolveOutcome out;

    // Destination bookkeeping for mapping duals back to memberships.
    struct FactorTarget {
        int membership;
        int factor_offset;          // offset inside the membership vector
        int len;
        bool to_eq;                 // equality rows (zero cone) vs barrier rows
        bool free_rows = false;     // dropped rows (free cone)
        int target_offset = 0;      // row offset in A or position key for G
        bool rotated = false;       // rsoc -> soc rotation applied
    };
    std::vector<FactorTarget> targets;

    std::vector<MatrixXd> eq_blocks{ir.eq_A};
    std::vector<VectorXd> eq_rhs{ir.eq_d};
    int eq_rows = static_cast<int>(ir.eq_A.rows());

    struct BarrierRows {
        MatrixXd M;
        VectorXd b;
        Cone::Kind kind;
        int size;  // matrix order for psd
        int target_index;  // index into `targets`
    };
    std::vector<BarrierRows> nn_rows, soc_rows, psd_rows;

    for (size_t mi = 0; mi < ir.memberships.size(); ++mi) {
        const auto& mem = ir.memberships[mi];
        int off = 0;
        for (const Cone& f : mem.cone.flattened()) {
            const int len = f.dim();
            FactorTarget t{static_cast<int>(mi), off, len, false, false, 0, false};
            MatrixXd M = mem.M.middleRows(off, len);
            VectorXd b = mem.b.segment(off, len);
            switch (f.kind) {
                case Cone::Kind::Zero:
                    t.to_eq = true;
                    t.target_offset = eq_rows;
                    eq_blocks.push_back(M);
                    eq_rhs.push_back(b);
                    eq_rows += len;
                    targets.push_back(t);
                    break;
                case Cone::Kind::Free:
                    t.free_rows = true;
                    targets.push_back(t);
                    break;
                case Cone::Kind::NonNeg:
                    t.target_offset = static_cast<int>(nn_rows.size());
                    targets.push_back(t);
                    nn_rows.push_back({M, b, f.kind, len, static_cast<int>(targets.size()) - 1});
                    break;
                case Cone::Kind::SecondOrder:
                    t.target_offset = static_cast<int>(soc_rows.size());
                    targets.push_back(t);
                    soc_rows.push_back({M, b, f.kind, len, static_cast<int>(targets.size()) - 1});
                    break;
                case Cone::Kind::RotatedSecondOrder: {
                    MatrixXd T = rsoc_rotation(len);
                    t.rotated = true;
                    t.target_offset = static_cast<int>(soc_rows.size());
                    targets.push_back(t);
                    soc_rows.push_back({T * M, T * b, Cone::Kind::SecondOrder, len,
                                        static_cast<int>(targets.size()) - 1});
                    break;
                }
                case Cone::Kind::Psd:
                    t.target_offset = static_cast<int>(psd_rows.size());
                    targets.push_back(t);
                    psd_rows.push_back({M, b, f.kind, f.size, static_cast<int>(targets.size()) - 1});
                    break;
                case Cone::Kind::Product:
                    throw std::logic_error("flattened() returned a product");
            }
            off += len;
        }
    }

    MatrixXd A(eq_rows, n);
    VectorXd d(eq_rows);
    {
        int r = 0;
        for (size_t i = 0; i < eq_blocks.size(); ++i) {
            A.middleRows(r, eq_blocks[i].rows()) = eq_blocks[i];
            d.segment(r, eq_rhs[i].size()) = eq_rhs[i];
            r += static_cast<int>(eq_blocks[i].rows());
        }
    }

    ipm::ConeSpec spec;
    int g_rows = 0;
    for (const auto& br : nn_rows) g_rows += static_cast<int>(br.b.size());
    spec.nonneg = g_rows;
    for (const auto& br : soc_rows) {
        spec.soc.push_back(static_cast<int>(br.b.size()));
        g_rows += static_cast<int>(br.b.size());
    }
    for (const auto& br : psd_rows) {
        spec.psd.push_back(br.size);
        g_rows += svec_dim(br.size);
    }

    MatrixXd G(g_rows, n);
    VectorXd h(g_rows);
    std::vector<int> row_of_target(targets.size(), -1);
    {
        int r = 0;
        for (const auto& group : {&nn_rows, &soc_rows, &psd_rows}) {
            for (const auto& br : *group) {
                row_of_target[br.target_index] = r;
                G.middleRows(r, br.M.rows()) = br.M;
                h.segment(r, br.b.size()) = br.b;
                r += static_cast<int>(br.M.rows());
            }
        }
    }

    if (g_rows == 0) {
        // Pure equality program; solve the KKT system directly.
        MatrixXd K = MatrixXd::Zero(n + eq_rows, n + eq_rows);
        K.topRightCorner(n, eq_rows) = A.transpose();
        K.bottomLeftCorner(eq_rows, n) = A;
        VectorXd rhs(n + eq_rows);
        rhs << -ir.objective, d;
        Eigen::FullPivLU<MatrixXd> lu(K);
        if (!lu.isInvertible()) {
            out.status = SolveStatus::NumericalTrouble;
            out.message = "equality-only program with singular KKT system";
            return out;
        }
        VectorXd sol = lu.solve(rhs);
        out.status = SolveStatus::Optimal;
        out.x = sol.head(n);
        out.objective = ir.objective.dot(out.x);
        out.eq_dual = sol.tail(eq_rows);
        out.primal_residual = (A * out.x - d).lpNorm<Eigen::Infinity>();
        out.membership_duals.resize(ir.memberships.size());
        for (const auto& t : targets) {
            auto& md = out.membership_duals[t.membership];
            if (md.size() == 0) md = VectorXd::Zero(ir.memberships[t.membership].b.size());
            if (t.to_eq) md.segment(t.factor_offset, t.len) = out.eq_dual.segment(t.target_offset, t.len);
        }
        return out;
    }

    ipm::Settings st;
    st.feastol = tol.feastol;
    st.abstol = tol.feastol;
    st.reltol = tol.relgap;
    st.max_iters = tol.max_iters;
    ipm::Result r = ipm::conelp(ir.objective, A, d, G, h, spec, st);

    out.iterations = r.iters;
    out.primal_residual = r.pres;
    out.gap_estimate = r.relgap;
    switch (r.status) {
        case ipm::IpmStatus::Optimal: {
            out.status = SolveStatus::Optimal;
            out.x = r.x;
            out.objective = r.primal_obj;
            out.eq_dual = r.y;
            out.membership_duals.resize(ir.memberships.size());
            for (size_t mi = 0; mi < ir.memberships.size(); ++mi)
                out.membership_duals[mi] = VectorXd::Zero(ir.memberships[mi].b.size());
            for (size_t ti = 0; ti < targets.size(); ++ti) {
                const auto& t = targets[ti];
                auto seg = out.membership_duals[t.membership].segment(t.factor_offset, t.len);
                if (t.free_rows) continue;
                if (t.to_eq) {
                    seg = r.y.segment(t.target_offset, t.len);
                } else {
                    VectorXd zf = r.z.segment(row_of_target[ti], t.len);
                    if (t.rotated) zf = rsoc_rotation(t.len).transpose() * zf;
                    seg = zf;
                }
            }
            break;
        }
        case ipm::IpmStatus::PrimalInfeasible:
            out.status = SolveStatus::Infeasible;
            out.message = "infeasible: " + r.message;
            out.eq_dual = r.y;
            break;
        case ipm::IpmStatus::DualInfeasible:
            out.status = SolveStatus::Unbounded;
            out.message = "unbounded: " + r.message;
            out.x = r.x;
            break;
        default:
            out.status = SolveStatus::NumericalTrouble;
            out.message = r.message;
            out.x = r.x;
            break;
    }
    return out;
}

std::string dump_ir_json(const ConicProgramIR& ir) {
    ordered_json j;
    ordered_json blocks = ordered_json::array();
    for (const auto& b : ir.blocks) {
        ordered_json bj;
        bj["name"] = b.name;
        bj["dim"] = b.dim;
        blocks.push_back(bj);
    }
    j["blocks"] = blocks;
    j["objective"] = vector_json(ir.objective);
    ordered_json eq;
    eq["A"] = matrix_json(ir.eq_A);
    eq["d"] = vector_json(ir.eq_d);
    j["equalities"] = eq;
    ordered_json mems = ordered_json::array();
    for (const auto& m : ir.memberships) {
        ordered_json mj;
        mj["b"] = vector_json(m.b);
        mj["M"] = matrix_json(m.M);
        mj["cone"] = cone_json(m.cone);
        mems.push_back(mj);
    }
    j["memberships"] = mems;
    return j.dump(2) + "\n";
}

}  // namespace drmdp
