#include "drmdp/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "drmdp/conic.hpp"

namespace drmdp {

namespace {

MatrixXd stacked(const ConfidenceSet& cs) {
    MatrixXd M(cs.b.size(), cs.B.cols() + cs.D.cols() + cs.E.cols());
    M << cs.B, cs.D, cs.E;
    return M;
}

/// minimize objective'x over the intersection of the given sets' memberships.
SolveOutcome optimize_over(const AmbiguitySet& amb, const std::vector<int>& set_ids,
                           const VectorXd& objective) {
    ProgramBuilder pb;
    int x = pb.add_block("x", amb.dim());
    pb.minimize(x, objective);
    for (int id : set_ids) {
        const auto& cs = amb.sets[id];
        pb.add_membership(cs.b, {{x, stacked(cs)}}, cs.cone);
    }
    return solve(pb.build());
}

bool strictly_inside(const Cone& cone, const VectorXd& res, double margin) {
    int off = 0;
    for (const Cone& f : cone.flattened()) {
        const int len = f.dim();
        VectorXd v = res.segment(off, len);
        switch (f.kind) {
            case Cone::Kind::Zero:
                if (v.lpNorm<Eigen::Infinity>() > 1e-9) return false;
                break;
            case Cone::Kind::NonNeg:
                if (v.minCoeff() < margin) return false;
                break;
            case Cone::Kind::SecondOrder:
                if (v[0] - v.tail(len - 1).norm() < margin) return false;
                break;
            case Cone::Kind::RotatedSecondOrder:
                if (v[0] < margin || v[1] < margin ||
                    2.0 * v[0] * v[1] - v.tail(len - 2).squaredNorm() < margin)
                    return false;
                break;
            case Cone::Kind::Psd: {
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(v), Eigen::EigenvaluesOnly);
                if (es.eigenvalues().minCoeff() < margin) return false;
                break;
            }
            default:
                break;
        }
        off += len;
    }
    return true;
}

}  // namespace

VectorXd ConfidenceSet::residual(const VectorXd& p, const VectorXd& r, const VectorXd& u) const {
    VectorXd res = b;
    if (B.cols() > 0) res -= B * p;
    if (D.cols() > 0) res -= D * r;
    if (E.cols() > 0) res -= E * u;
    return res;
}

bool ConfidenceSet::contains(const VectorXd& p, const VectorXd& r, const VectorXd& u,
                             double tol) const {
    return in_cone(cone, residual(p, r, u), tol);
}

MomentConstraints MomentConstraints::none(int np, int nr, int q) {
    MomentConstraints m;
    m.F = MatrixXd::Zero(0, np);
    m.G = MatrixXd::Zero(0, nr);
    m.H = MatrixXd::Zero(0, q);
    m.c = VectorXd::Zero(0);
    return m;
}

void AmbiguitySet::validate_shapes() const {
    if (sets.empty()) throw std::invalid_argument("ambiguity set needs at least one confidence set");
    if (moments.F.cols() != np || moments.G.cols() != nr || moments.H.cols() != q)
        throw std::invalid_argument("moment constraint shape mismatch");
    if (moments.F.rows() != moments.rows() || moments.G.rows() != moments.rows() ||
        moments.H.rows() != moments.rows())
        throw std::invalid_argument("moment constraint row mismatch");
    for (const auto& cs : sets) {
        if (cs.B.cols() != np || cs.D.cols() != nr || cs.E.cols() != q)
            throw std::invalid_argument("confidence set column mismatch");
        const int L = static_cast<int>(cs.b.size());
        if (cs.B.rows() != L || cs.D.rows() != L || cs.E.rows() != L || cs.cone.dim() != L)
            throw std::invalid_argument("confidence set row mismatch");
        if (cs.prob_lo < 0.0 || cs.prob_hi > 1.0 || cs.prob_lo > cs.prob_hi)
            throw std::invalid_argument("probability bounds invalid");
        if (cs.parent >= size() || cs.parent == &cs - sets.data())
            throw std::invalid_argument("parent index invalid");
    }
    if (sets.back().parent != -1 || sets.back().prob_lo != 1.0 || sets.back().prob_hi != 1.0)
        throw std::invalid_argument("root must be last, parentless, with probability one");
}

std::vector<int> AmbiguitySet::ancestors(int i) const {
    if (i < 0 || i >= size()) throw std::invalid_argument("unknown confidence set index");
    std::vector<int> out{i};
    int cur = i;
    while (sets[cur].parent != -1) {
        cur = sets[cur].parent;
        if (std::find(out.begin(), out.end(), cur) != out.end())
            throw std::invalid_argument("nesting forest has a cycle");
        out.push_back(cur);
    }
    if (cur != root()) out.push_back(root());
    return out;
}

std::vector<int> AmbiguitySet::children(int i) const {
    std::vector<int> out;
    for (int j = 0; j < size(); ++j) {
        int par = sets[j].parent;
        if (par == -1 && j != root()) par = root();
        if (par == i) out.push_back(j);
    }
    return out;
}

bool feasible_for(const AmbiguitySet& amb, const DiscreteDistribution& dist, double tol) {
    const int m = static_cast<int>(dist.weights.size());
    if (dist.points.cols() != m || dist.points.rows() != amb.dim()) return false;
    if (std::abs(dist.weights.sum() - 1.0) > tol || dist.weights.minCoeff() < -tol) return false;
    VectorXd mom = VectorXd::Zero(amb.moments.rows());
    for (int k = 0; k < m; ++k) {
        const VectorXd x = dist.points.col(k);
        const VectorXd p = x.head(amb.np), r = x.segment(amb.np, amb.nr), u = x.tail(amb.q);
        if (amb.moments.rows() > 0)
            mom += dist.weights[k] * (amb.moments.F * p + amb.moments.G * r + amb.moments.H * u);
    }
    if (amb.moments.rows() > 0 && (mom - amb.moments.c).lpNorm<Eigen::Infinity>() > tol)
        return false;
    for (int i = 0; i < amb.size(); ++i) {
        double mass = 0.0;
        for (int k = 0; k < m; ++k) {
            const VectorXd x = dist.points.col(k);
            if (amb.sets[i].contains(x.head(amb.np), x.segment(amb.np, amb.nr), x.tail(amb.q),
                                     1e-9))
                mass += dist.weights[k];
        }
        if (mass < amb.sets[i].prob_lo - tol || mass > amb.sets[i].prob_hi + tol) return false;
    }
    return true;
}

namespace {

struct RowView {
    // One scalarized row of a membership: slack(x) = b_row - M_row x.
    VectorXd coeffs;
    double rhs;
    Cone::Kind kind;
};

std::vector<RowView> scalar_rows(const ConfidenceSet& cs) {
    std::vector<RowView> rows;
    const MatrixXd M = stacked(cs);
    int off = 0;
    for (const Cone& f : cs.cone.flattened()) {
        for (int r = 0; r < f.dim(); ++r)
            rows.push_back({M.row(off + r).transpose(), cs.b[off + r], f.kind});
        off += f.dim();
    }
    return rows;
}

bool same_row(const RowView& a, const RowView& b) {
    return a.kind == b.kind && std::abs(a.rhs - b.rhs) <= 1e-12 &&
           (a.coeffs - b.coeffs).lpNorm<Eigen::Infinity>() <= 1e-12;
}

}  // namespace

NestingReport verify_nesting(const AmbiguitySet& amb, VerifyMode mode, int sample_n,
                             double delta) {
    NestingReport rep;
    try {
        amb.validate_shapes();
        for (int i = 0; i < amb.size(); ++i) amb.ancestors(i);  // throws on cycles
    } catch (const std::exception& e) {
        rep.message = e.what();
        return rep;
    }
    rep.structure_ok = true;
    if (amb.size() == 1) {  // single root: vacuous
        rep.ok = true;
        rep.message = "single confidence set; nothing to verify";
        return rep;
    }

    // Declared edges and incomparable pairs.
    std::vector<std::pair<int, int>> edges;  // child -> parent
    for (int i = 0; i < amb.size(); ++i) {
        if (i == amb.root()) continue;
        edges.push_back({i, amb.sets[i].parent == -1 ? amb.root() : amb.sets[i].parent});
    }
    std::vector<std::pair<int, int>> incomparable;
    for (int i = 0; i < amb.size(); ++i)
        for (int j = i + 1; j < amb.size(); ++j) {
            auto ai = amb.ancestors(i), aj = amb.ancestors(j);
            const bool i_in_j = std::find(ai.begin(), ai.end(), j) != ai.end();
            const bool j_in_i = std::find(aj.begin(), aj.end(), i) != aj.end();
            if (!i_in_j && !j_in_i) incomparable.push_back({i, j});
        }

    if (mode == VerifyMode::DeclaredOnly) {
        rep.ok = true;
        rep.message = "structural checks only";
        return rep;
    }

    bool all_ok = true;
    if (mode == VerifyMode::Optimize) {
        for (auto [c, p] : edges) {
            EdgeReport er;
            er.child = c;
            er.parent = p;
            er.certified = true;
            er.margin = std::numeric_limits<double>::infinity();
            const auto parent_rows = scalar_rows(amb.sets[p]);
            const auto child_rows = scalar_rows(amb.sets[c]);
            bool has_strict_row = false;
            for (const auto& row : parent_rows) {
                const bool shared = std::any_of(child_rows.begin(), child_rows.end(),
                                                [&](const RowView& cr) { return same_row(cr, row); });
                if (row.kind == Cone::Kind::Zero) {
                    // Child must pin the same hyperplane.
                    for (double sign : {1.0, -1.0}) {
                        auto out = optimize_over(amb, {c}, sign * row.coeffs);
                        if (out.status != SolveStatus::Optimal ||
                            std::abs(row.rhs - sign * out.objective) > 1e-7) {
                            er.certified = false;
                            er.note = "equality row of parent not preserved by child";
                        }
                    }
                    continue;
                }
                if (row.kind != Cone::Kind::NonNeg) {
                    if (!shared) {
                        er.sampled_only = true;
                        er.note = "non-polyhedral parent rows checked by sampling only";
                    }
                    continue;
                }
                if (shared) continue;
                // min slack of the parent row over the child set.
                auto out = optimize_over(amb, {c}, -row.coeffs);
                if (out.status != SolveStatus::Optimal) {
                    er.certified = false;
                    er.note = "child optimization failed: " + out.message;
                    break;
                }
                const double margin = row.rhs - (-out.objective);
                er.margin = std::min(er.margin, margin);
                if (margin < delta) {
                    er.certified = false;
                    er.note = "containment margin below delta";
                } else {
                    has_strict_row = true;
                }
            }
            if (er.certified && !has_strict_row && !er.sampled_only) {
                er.certified = false;
                er.note = "child coincides with parent; containment not strict";
            }
            all_ok = all_ok && er.certified;
            rep.edges.push_back(std::move(er));
        }
        for (auto [i, j] : incomparable) {
            EdgeReport er;
            er.child = i;
            er.parent = j;
            auto out = optimize_over(amb, {i, j}, VectorXd::Zero(amb.dim()));
            if (out.status == SolveStatus::Infeasible) {
                er.certified = true;
            } else if (out.status == SolveStatus::Optimal) {
                er.certified = false;
                er.note = "incomparable sets intersect";
            } else {
                er.certified = false;
                er.note = "disjointness solve inconclusive: " + out.message;
            }
            all_ok = all_ok && er.certified;
            rep.disjoint.push_back(std::move(er));
        }
        rep.ok = all_ok;
        rep.message = all_ok ? "nesting certified" : "nesting verification failed";
        return rep;
    }

    // Sample mode: draw from the root's bounding box, keep points inside each
    // set, and count violations empirically.
    VectorXd lo(amb.dim()), hi(amb.dim());
    for (int k = 0; k < amb.dim(); ++k) {
        VectorXd dir = VectorXd::Zero(amb.dim());
        dir[k] = 1.0;
        auto lo_out = optimize_over(amb, {amb.root()}, dir);
        auto hi_out = optimize_over(amb, {amb.root()}, -dir);
        if (lo_out.status != SolveStatus::Optimal || hi_out.status != SolveStatus::Optimal) {
            rep.message = "root bounding box not computable (unbounded root?)";
            return rep;
        }
        lo[k] = lo_out.objective;
        hi[k] = -hi_out.objective;
    }
    std::mt19937_64 rng(20240901);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw_in = [&](int set_id, VectorXd& x) {
        for (int tries = 0; tries < 20000; ++tries) {
            for (int k = 0; k < amb.dim(); ++k) x[k] = lo[k] + (hi[k] - lo[k]) * unif(rng);
            // project equality rows feasibility is unlikely from raw draws if
            // Zero rows exist; handle pinned coordinates exactly.
            const auto& cs = amb.sets[set_id];
            if (cs.contains(x.head(amb.np), x.segment(amb.np, amb.nr), x.tail(amb.q), 1e-7))
                return true;
        }
        return false;
    };
    // With equality rows raw rejection rarely lands inside; fall back to the
    // interior point when sampling fails.
    for (auto [c, p] : edges) {
        EdgeReport er;
        er.child = c;
        er.parent = p;
        int inside = 0, violations = 0;
        VectorXd x(amb.dim());
        for (int t = 0; t < sample_n; ++t) {
            if (!draw_in(c, x)) break;
            ++inside;
            if (!amb.sets[p].contains(x.head(amb.np), x.segment(amb.np, amb.nr), x.tail(amb.q),
                                      1e-9))
                ++violations;
        }
        er.certified = inside > 0 && violations == 0;
        er.sampled_only = true;
        er.note = "sampled " + std::to_string(inside) + " points, " + std::to_string(violations) +
                  " containment violations";
        all_ok = all_ok && er.certified;
        rep.edges.push_back(std::move(er));
    }
    for (auto [i, j] : incomparable) {
        EdgeReport er;
        er.child = i;
        er.parent = j;
        int inside = 0, overlaps = 0;
        VectorXd x(amb.dim());
        for (int t = 0; t < sample_n; ++t) {
            if (!draw_in(i, x)) break;
            ++inside;
            if (amb.sets[j].contains(x.head(amb.np), x.segment(amb.np, amb.nr), x.tail(amb.q),
                                     1e-9))
                ++overlaps;
        }
        er.certified = inside > 0 && overlaps == 0;
        er.sampled_only = true;
        er.note = "sampled " + std::to_string(inside) + " points, " + std::to_string(overlaps) +
                  " overlaps";
        all_ok = all_ok && er.certified;
        rep.disjoint.push_back(std::move(er));
    }
    rep.ok = all_ok;
    rep.message = all_ok ? "no sampled violations" : "sampled violations found";
    return rep;
}

RegularityReport check_regularity(const AmbiguitySet& amb) {
    RegularityReport rep;
    amb.validate_shapes();
    const auto& root = amb.sets[amb.root()];
    rep.root_prob_one = root.prob_lo == 1.0 && root.prob_hi == 1.0;

    // Condition 1: bounded root.
    rep.bounded = true;
    if (amb.lifted) {
        rep.boundedness_waived = true;
    } else {
        for (int k = 0; k < amb.dim() && rep.bounded; ++k) {
            VectorXd dir = VectorXd::Zero(amb.dim());
            dir[k] = 1.0;
            for (double sign : {1.0, -1.0}) {
                auto out = optimize_over(amb, {amb.root()}, sign * dir);
                if (out.status == SolveStatus::Unbounded) rep.bounded = false;
                else if (out.status == SolveStatus::Infeasible) {
                    rep.message = "root set is empty";
                    return rep;
                }
            }
        }
    }

    // Condition 2: Slater-type interior distribution built from a finite
    // candidate pool with known strict memberships.
    const double margin = 1e-7;
    std::vector<VectorXd> candidates;
    auto interior_point = [&](int set_id) -> std::optional<VectorXd> {
        ProgramBuilder pb;
        int x = pb.add_block("x", amb.dim());
        int t = pb.add_block("t", 1);
        VectorXd obj = VectorXd::Zero(1);
        obj[0] = -1.0;
        pb.minimize(t, obj);
        const auto& cs = amb.sets[set_id];
        // b - Mx - t*w in cone, with w the per-factor interior direction.
        VectorXd w = VectorXd::Zero(cs.b.size());
        int off = 0;
        for (const Cone& f : cs.cone.flattened()) {
            switch (f.kind) {
                case Cone::Kind::NonNeg:
                    w.segment(off, f.dim()).setOnes();
                    break;
                case Cone::Kind::SecondOrder:
                    w[off] = 1.0;
                    break;
                case Cone::Kind::RotatedSecondOrder:
                    w[off] = 1.0;
                    w[off + 1] = 1.0;
                    break;
                case Cone::Kind::Psd:
                    w.segment(off, f.dim()) = svec(MatrixXd::Identity(f.size, f.size));
                    break;
                default:
                    break;
            }
            off += f.dim();
        }
        pb.add_membership(cs.b, {{x, stacked(cs)}, {t, w}}, cs.cone);
        // 0 <= t <= 1
        pb.add_membership(VectorXd::Zero(1), {{t, -MatrixXd::Ones(1, 1)}}, Cone::nonneg(1));
        pb.add_membership(VectorXd::Ones(1), {{t, MatrixXd::Ones(1, 1)}}, Cone::nonneg(1));
        auto out = solve(pb.build());
        if (out.status != SolveStatus::Optimal) return std::nullopt;
        return VectorXd(out.x.head(amb.dim()));
    };
    for (int i = 0; i < amb.size(); ++i) {
        if (auto pt = interior_point(i)) candidates.push_back(*pt);
        // Push-away candidates: maximize violation of each child's nonneg rows
        // over the parent, landing in the parent minus that child.
        for (int c : amb.children(i)) {
            for (const auto& row : scalar_rows(amb.sets[c])) {
                if (row.kind != Cone::Kind::NonNeg) continue;
                auto out = optimize_over(amb, {i}, -row.coeffs);
                if (out.status == SolveStatus::Optimal) candidates.push_back(out.x);
            }
        }
    }

    // Strict membership classification; ambiguous candidates are dropped.
    std::vector<VectorXd> pool;
    std::vector<std::vector<bool>> member;
    for (const auto& cand : candidates) {
        std::vector<bool> mem(amb.size());
        bool ambiguous = false;
        for (int i = 0; i < amb.size() && !ambiguous; ++i) {
            const auto& cs = amb.sets[i];
            VectorXd res = cs.residual(cand.head(amb.np), cand.segment(amb.np, amb.nr),
                                       cand.tail(amb.q));
            const bool strict_in = strictly_inside(cs.cone, res, margin);
            const bool weak_in = in_cone(cs.cone, res, margin * 0.1);
            if (strict_in) mem[i] = true;
            else if (!weak_in) mem[i] = false;
            else ambiguous = true;
        }
        if (!ambiguous) {
            pool.push_back(cand);
            member.push_back(std::move(mem));
        }
    }

    if (pool.empty()) {
        rep.message = "no candidate interior points found";
        rep.ok = false;
        return rep;
    }

    // Mixture weights: maximize the distance of every non-degenerate mass to
    // its bounds, subject to moments and the pinned masses.
    const int m = static_cast<int>(pool.size());
    ProgramBuilder pb;
    int wblk = pb.add_block("w", m);
    int tblk = pb.add_block("t", 1);
    pb.minimize(tblk, -VectorXd::Ones(1));
    pb.add_equality({{wblk, MatrixXd::Ones(1, m)}}, VectorXd::Ones(1));
    pb.add_membership(VectorXd::Zero(m), {{wblk, -MatrixXd::Identity(m, m)}}, Cone::nonneg(m));
    pb.add_membership(VectorXd::Zero(1), {{tblk, -MatrixXd::Ones(1, 1)}}, Cone::nonneg(1));
    pb.add_membership(VectorXd::Constant(1, 0.5), {{tblk, MatrixXd::Ones(1, 1)}}, Cone::nonneg(1));
    if (amb.moments.rows() > 0) {
        MatrixXd Mm(amb.moments.rows(), m);
        for (int k = 0; k < m; ++k) {
            const VectorXd& x = pool[k];
            Mm.col(k) = amb.moments.F * x.head(amb.np) + amb.moments.G * x.segment(amb.np, amb.nr) +
                        amb.moments.H * x.tail(amb.q);
        }
        pb.add_equality({{wblk, Mm}}, amb.moments.c);
    }
    for (int i = 0; i < amb.size(); ++i) {
        VectorXd ind(m);
        for (int k = 0; k < m; ++k) ind[k] = member[k][i] ? 1.0 : 0.0;
        const auto& cs = amb.sets[i];
        if (cs.prob_lo == cs.prob_hi) {
            pb.add_equality({{wblk, ind.transpose()}}, VectorXd::Constant(1, cs.prob_lo));
        } else {
            // lo + t <= ind'w <= hi - t
            pb.add_membership(VectorXd::Constant(1, -cs.prob_lo),
                              {{wblk, -ind.transpose()}, {tblk, MatrixXd::Ones(1, 1)}},
                              Cone::nonneg(1));
            pb.add_membership(VectorXd::Constant(1, cs.prob_hi),
                              {{wblk, ind.transpose()}, {tblk, MatrixXd::Ones(1, 1)}},
                              Cone::nonneg(1));
        }
    }
    auto out = solve(pb.build());
    if (out.status == SolveStatus::Optimal && -out.objective >= 1e-9) {
        rep.interior_ok = true;
        DiscreteDistribution w;
        w.points.resize(amb.dim(), m);
        for (int k = 0; k < m; ++k) w.points.col(k) = pool[k];
        w.weights = out.x.head(m).cwiseMax(0.0);
        w.weights /= w.weights.sum();
        rep.witness = w;
        for (int i = 0; i < amb.size(); ++i) {
            double mass = 0.0;
            for (int k = 0; k < m; ++k)
                if (member[k][i]) mass += w.weights[k];
            rep.witness_masses.push_back(mass);
        }
    } else {
        bool any_nondegenerate = false;
        for (const auto& cs : amb.sets) any_nondegenerate |= cs.prob_lo != cs.prob_hi;
        if (!any_nondegenerate && out.status == SolveStatus::Optimal) {
            rep.interior_ok = true;  // vacuous: all bounds degenerate
        } else {
            rep.message = "interior distribution not certified";
        }
    }
    rep.ok = (rep.bounded || rep.boundedness_waived) && rep.root_prob_one && rep.interior_ok;
    if (rep.ok && rep.message.empty())
        rep.message = rep.boundedness_waived ? "certified (boundedness waived: lifted set)"
                                             : "certified";
    return rep;
}

AmbiguitySet from_point(const VectorXd& p0, const VectorXd& r0) {
    const int np = static_cast<int>(p0.size()), nr = static_cast<int>(r0.size());
    AmbiguitySet amb;
    amb.np = np;
    amb.nr = nr;
    amb.q = 0;
    amb.moments = MomentConstraints::none(np, nr, 0);
    ConfidenceSet root;
    root.B = MatrixXd::Zero(np + nr, np);
    root.B.topRows(np) = MatrixXd::Identity(np, np);
    root.D = MatrixXd::Zero(np + nr, nr);
    root.D.bottomRows(nr) = MatrixXd::Identity(nr, nr);
    root.E = MatrixXd::Zero(np + nr, 0);
    root.b = VectorXd(np + nr);
    root.b << p0, r0;
    root.cone = Cone::zero(np + nr);
    amb.sets.push_back(std::move(root));
    amb.point = {{p0, r0}};
    return amb;
}

AmbiguitySet from_support(ConfidenceSet root, int np, int nr, int q) {
    if (root.b.size() == 0) throw std::invalid_argument("empty support membership");
    AmbiguitySet amb;
    amb.np = np;
    amb.nr = nr;
    amb.q = q;
    amb.moments = MomentConstraints::none(np, nr, q);
    root.prob_lo = root.prob_hi = 1.0;
    root.parent = -1;
    amb.sets.push_back(std::move(root));
    amb.validate_shapes();
    return amb;
}

namespace {

/// Rows pinning p to a fixed vector plus a box on r; bounds on coordinate
/// `coord` of r replaced by [lo, hi].
ConfidenceSet box_set(const VectorXd& p_pin, const VectorXd& r_lo, const VectorXd& r_hi, int coord,
                      double lo, double hi) {
    const int np = static_cast<int>(p_pin.size()), nr = static_cast<int>(r_lo.size());
    const int rows = np + 2 * nr;
    ConfidenceSet cs;
    cs.B = MatrixXd::Zero(rows, np);
    cs.D = MatrixXd::Zero(rows, nr);
    cs.E = MatrixXd::Zero(rows, 0);
    cs.b = VectorXd::Zero(rows);
    cs.B.topRows(np) = MatrixXd::Identity(np, np);
    cs.b.head(np) = p_pin;
    // r <= hi rows, then r >= lo rows
    cs.D.block(np, 0, nr, nr) = MatrixXd::Identity(nr, nr);
    cs.D.block(np + nr, 0, nr, nr) = -MatrixXd::Identity(nr, nr);
    for (int k = 0; k < nr; ++k) {
        cs.b[np + k] = (k == coord) ? hi : r_hi[k];
        cs.b[np + nr + k] = (k == coord) ? -lo : -r_lo[k];
    }
    cs.cone = Cone::product({Cone::zero(np), Cone::nonneg(2 * nr)});
    return cs;
}

}  // namespace

AmbiguitySet interval_ambiguity(const VectorXd& p_pin, const VectorXd& r_lo, const VectorXd& r_hi,
                                int coord, const std::vector<IntervalLevel>& levels, bool nested) {
    const int np = static_cast<int>(p_pin.size()), nr = static_cast<int>(r_lo.size());
    if (coord < 0 || coord >= nr) throw std::invalid_argument("interval coordinate out of range");
    AmbiguitySet amb;
    amb.np = np;
    amb.nr = nr;
    amb.q = 0;
    amb.moments = MomentConstraints::none(np, nr, 0);
    const int n_levels = static_cast<int>(levels.size());
    for (int i = 0; i < n_levels; ++i) {
        const auto& lv = levels[i];
        ConfidenceSet cs = box_set(p_pin, r_lo, r_hi, coord, lv.lo, lv.hi);
        cs.prob_lo = lv.prob_lo;
        cs.prob_hi = lv.prob_hi;
        cs.parent = nested ? (i + 1 < n_levels ? i + 1 : n_levels) : n_levels;
        amb.sets.push_back(std::move(cs));
    }
    ConfidenceSet root = box_set(p_pin, r_lo, r_hi, coord, r_lo[coord], r_hi[coord]);
    root.parent = -1;
    amb.sets.push_back(std::move(root));
    amb.validate_shapes();
    return amb;
}

AmbiguitySet affine_scalar_ambiguity(const VectorXd& p_base, const VectorXd& p_dir,
                                     const VectorXd& r_pin, double lo, double hi,
                                     const std::vector<IntervalLevel>& levels, bool nested) {
    const int np = static_cast<int>(p_base.size()), nr = static_cast<int>(r_pin.size());
    AmbiguitySet amb;
    amb.np = np;
    amb.nr = nr;
    amb.q = 1;
    amb.moments = MomentConstraints::none(np, nr, 1);
    auto make_set = [&](double tlo, double thi) {
        const int rows = np + nr + 2;
        ConfidenceSet cs;
        cs.B = MatrixXd::Zero(rows, np);
        cs.D = MatrixXd::Zero(rows, nr);
        cs.E = MatrixXd::Zero(rows, 1);
        cs.b = VectorXd::Zero(rows);
        cs.B.topRows(np) = MatrixXd::Identity(np, np);
        cs.E.topRows(np) = -p_dir;
        cs.b.head(np) = p_base;
        cs.D.block(np, 0, nr, nr) = MatrixXd::Identity(nr, nr);
        cs.b.segment(np, nr) = r_pin;
        cs.E(np + nr, 0) = 1.0;   // theta <= thi
        cs.b[np + nr] = thi;
        cs.E(np + nr + 1, 0) = -1.0;  // theta >= tlo
        cs.b[np + nr + 1] = -tlo;
        cs.cone = Cone::product({Cone::zero(np + nr), Cone::nonneg(2)});
        return cs;
    };
    const int n_levels = static_cast<int>(levels.size());
    for (int i = 0; i < n_levels; ++i) {
        ConfidenceSet cs = make_set(levels[i].lo, levels[i].hi);
        cs.prob_lo = levels[i].prob_lo;
        cs.prob_hi = levels[i].prob_hi;
        cs.parent = nested ? (i + 1 < n_levels ? i + 1 : n_levels) : n_levels;
        amb.sets.push_back(std::move(cs));
    }
    ConfidenceSet root = make_set(lo, hi);
    root.parent = -1;
    amb.sets.push_back(std::move(root));
    amb.validate_shapes();
    return amb;
}

AmbiguitySet lift_mean(const MatrixXd& G, const VectorXd& f, const Cone& K, const VectorXd& p_lo,
                       const VectorXd& p_hi, const VectorXd& r_pin) {
    const int np = static_cast<int>(p_lo.size()), nr = static_cast<int>(r_pin.size());
    const int M = static_cast<int>(f.size());
    if (G.rows() != M || G.cols() != np || K.dim() != M)
        throw std::invalid_argument("lift_mean shape mismatch");
    AmbiguitySet amb;
    amb.np = np;
    amb.nr = nr;
    amb.q = M;
    amb.moments.F = MatrixXd::Zero(M, np);
    amb.moments.G = MatrixXd::Zero(M, nr);
    amb.moments.H = MatrixXd::Identity(M, M);
    amb.moments.c = f;
    const int rows = 2 * np + nr + M;
    ConfidenceSet root;
    root.B = MatrixXd::Zero(rows, np);
    root.D = MatrixXd::Zero(rows, nr);
    root.E = MatrixXd::Zero(rows, M);
    root.b = VectorXd::Zero(rows);
    root.B.topRows(np) = MatrixXd::Identity(np, np);
    root.b.head(np) = p_hi;  // p <= hi
    root.B.middleRows(np, np) = -MatrixXd::Identity(np, np);
    root.b.segment(np, np) = -p_lo;  // p >= lo
    root.D.middleRows(2 * np, nr) = MatrixXd::Identity(nr, nr);
    root.b.segment(2 * np, nr) = r_pin;
    // u - G p in K
    root.B.bottomRows(M) = G;
    root.E.bottomRows(M) = -MatrixXd::Identity(M, M);
    root.cone = Cone::product({Cone::nonneg(2 * np), Cone::zero(nr), K});
    amb.sets.push_back(std::move(root));
    amb.lifted = true;
    amb.validate_shapes();
    return amb;
}

AmbiguitySet lift_mean_covariance(const VectorXd& m, const MatrixXd& sigma, const VectorXd& p_pin,
                                  double r_box_halfwidth) {
    const int nr = static_cast<int>(m.size()), np = static_cast<int>(p_pin.size());
    if (sigma.rows() != nr || sigma.cols() != nr)
        throw std::invalid_argument("sigma shape mismatch");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (sigma + sigma.transpose()),
                                               Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("sigma must be positive semidefinite");
    const int q = svec_dim(nr);
    AmbiguitySet amb;
    amb.np = np;
    amb.nr = nr;
    amb.q = q;
    amb.moments.F = MatrixXd::Zero(nr + q, np);
    amb.moments.G = MatrixXd::Zero(nr + q, nr);
    amb.moments.H = MatrixXd::Zero(nr + q, q);
    amb.moments.G.topRows(nr) = MatrixXd::Identity(nr, nr);
    amb.moments.H.bottomRows(q) = MatrixXd::Identity(q, q);
    amb.moments.c = VectorXd(nr + q);
    amb.moments.c << m, svec(0.5 * (sigma + sigma.transpose()));

    const int sd = svec_dim(nr + 1);
    const int rows = np + 2 * nr + sd;
    ConfidenceSet root;
    root.B = MatrixXd::Zero(rows, np);
    root.D = MatrixXd::Zero(rows, nr);
    root.E = MatrixXd::Zero(rows, q);
    root.b = VectorXd::Zero(rows);
    root.B.topRows(np) = MatrixXd::Identity(np, np);
    root.b.head(np) = p_pin;
    root.D.middleRows(np, nr) = MatrixXd::Identity(nr, nr);
    root.b.segment(np, nr) = m + VectorXd::Constant(nr, r_box_halfwidth);
    root.D.middleRows(np + nr, nr) = -MatrixXd::Identity(nr, nr);
    root.b.segment(np + nr, nr) = -(m - VectorXd::Constant(nr, r_box_halfwidth));
    // svec of [[1, (r-m)'], [r-m, U]]: row (0,0) = 1; rows (i,0) = sqrt2 (r_i - m_i);
    // rows (i,j), i>=j>=1, equal the svec coordinates of U directly.
    const double s2 = std::sqrt(2.0);
    int rr = np + 2 * nr;
    int ucol = 0;
    for (int j = 0; j <= nr; ++j) {
        for (int i = j; i <= nr; ++i) {
            if (i == 0 && j == 0) {
                root.b[rr] = 1.0;
            } else if (j == 0) {
                root.D(rr, i - 1) = -s2;
                root.b[rr] = -s2 * m[i - 1];
            } else {
                root.E(rr, ucol++) = -1.0;
            }
            ++rr;
        }
    }
    root.cone = Cone::product({Cone::zero(np), Cone::nonneg(2 * nr), Cone::psd(nr + 1)});
    amb.sets.push_back(std::move(root));
    amb.lifted = true;  // U is unbounded above
    amb.validate_shapes();
    return amb;
}

AmbiguitySet lift_mad(const VectorXd& m, const VectorXd& f, const VectorXd& r_lo,
                      const VectorXd& r_hi, const VectorXd& p_pin) {
    const int nr = static_cast<int>(m.size()), np = static_cast<int>(p_pin.size());
    if (f.minCoeff() < 0.0) throw std::invalid_argument("mad bound f must be nonnegative");
    AmbiguitySet amb;
    amb.np = np;
    amb.nr = nr;
    amb.q = nr;
    amb.moments.F = MatrixXd::Zero(nr, np);
    amb.moments.G = MatrixXd::Zero(nr, nr);
    amb.moments.H = MatrixXd::Identity(nr, nr);
    amb.moments.c = f;
    double span = 0.0;
    for (int k = 0; k < nr; ++k)
        span = std::max({span, std::abs(r_hi[k] - m[k]), std::abs(m[k] - r_lo[k])});
    const double cap = 10.0 * (span + f.lpNorm<Eigen::Infinity>() + 1.0);
    const int rows = np + 2 * nr /*box*/ + 2 * nr /*deviation*/ + nr /*cap*/;
    ConfidenceSet root;
    root.B = MatrixXd::Zero(rows, np);
    root.D = MatrixXd::Zero(rows, nr);
    root.E = MatrixXd::Zero(rows, nr);
    root.b = VectorXd::Zero(rows);
    int rr = 0;
    root.B.topRows(np) = MatrixXd::Identity(np, np);
    root.b.head(np) = p_pin;
    rr += np;
    root.D.middleRows(rr, nr) = MatrixXd::Identity(nr, nr);
    root.b.segment(rr, nr) = r_hi;
    rr += nr;
    root.D.middleRows(rr, nr) = -MatrixXd::Identity(nr, nr);
    root.b.segment(rr, nr) = -r_lo;
    rr += nr;
    // u >= r - m: m - r + u >= 0
    root.D.middleRows(rr, nr) = MatrixXd::Identity(nr, nr);
    root.E.middleRows(rr, nr) = -MatrixXd::Identity(nr, nr);
    root.b.segment(rr, nr) = m;
    rr += nr;
    // u >= m - r: -m + r + u >= 0
    root.D.middleRows(rr, nr) = -MatrixXd::Identity(nr, nr);
    root.E.middleRows(rr, nr) = -MatrixXd::Identity(nr, nr);
    root.b.segment(rr, nr) = -m;
    rr += nr;
    // u <= cap
    root.E.middleRows(rr, nr) = MatrixXd::Identity(nr, nr);
    root.b.segment(rr, nr) = VectorXd::Constant(nr, cap);
    root.cone = Cone::product({Cone::zero(np), Cone::nonneg(4 * nr + nr)});
    amb.sets.push_back(std::move(root));
    amb.validate_shapes();
    return amb;
}

AmbiguitySet lift_huber(const VectorXd& f, double g, double delta, const VectorXd& r_lo,
                        const VectorXd& r_hi, const VectorXd& p_pin) {
    if (delta <= 0.0) throw std::invalid_argument("huber delta must be positive");
    if (g < 0.0) throw std::invalid_argument("huber bound g must be nonnegative");
    const int nr = static_cast<int>(f.size()), np = static_cast<int>(p_pin.size());
    AmbiguitySet amb;
    amb.np = np;
    amb.nr = nr;
    amb.q = 5;  // u, v, w, s, t
    amb.moments.F = MatrixXd::Zero(1, np);
    amb.moments.G = MatrixXd::Zero(1, nr);
    amb.moments.H = MatrixXd::Zero(1, 5);
    amb.moments.H(0, 2) = 1.0;  // E[w] = g
    amb.moments.c = VectorXd::Constant(1, g);
    double span = 0.0;
    for (int k = 0; k < nr; ++k) span += std::abs(f[k]) * std::max(std::abs(r_lo[k]), std::abs(r_hi[k]));
    const double cap = 10.0 * (span + delta + g + 1.0);
    // rows: p pin (np, zero), f'r - u + v = 0 (1, zero), box on r (2nr),
    //       u-s >= 0, v-t >= 0, five nonnegativity rows, five cap rows,
    //       rotated cone (4).
    const int nn = 2 * nr + 2 + 5 + 5;
    const int rows = np + 1 + nn + 4;
    ConfidenceSet root;
    root.B = MatrixXd::Zero(rows, np);
    root.D = MatrixXd::Zero(rows, nr);
    root.E = MatrixXd::Zero(rows, 5);
    root.b = VectorXd::Zero(rows);
    int rr = 0;
    root.B.topRows(np) = MatrixXd::Identity(np, np);
    root.b.head(np) = p_pin;
    rr += np;
    // residual = u - v - f'r must be zero
    root.D.row(rr) = f.transpose();
    root.E(rr, 0) = -1.0;
    root.E(rr, 1) = 1.0;
    rr += 1;
    root.D.middleRows(rr, nr) = MatrixXd::Identity(nr, nr);
    root.b.segment(rr, nr) = r_hi;
    rr += nr;
    root.D.middleRows(rr, nr) = -MatrixXd::Identity(nr, nr);
    root.b.segment(rr, nr) = -r_lo;
    rr += nr;
    root.E(rr, 0) = -1.0;  // u - s >= 0
    root.E(rr, 3) = 1.0;
    rr += 1;
    root.E(rr, 1) = -1.0;  // v - t >= 0
    root.E(rr, 4) = 1.0;
    rr += 1;
    root.E.middleRows(rr, 5) = -MatrixXd::Identity(5, 5);  // all five >= 0
    rr += 5;
    root.E.middleRows(rr, 5) = MatrixXd::Identity(5, 5);  // all five <= cap
    root.b.segment(rr, 5) = VectorXd::Constant(5, cap);
    rr += 5;
    // rotated cone: (w - delta u + delta s - delta v + delta t, 1, s, t)
    root.E(rr, 0) = delta;
    root.E(rr, 1) = delta;
    root.E(rr, 2) = -1.0;
    root.E(rr, 3) = -delta;
    root.E(rr, 4) = -delta;
    root.b[rr + 1] = 1.0;
    root.E(rr + 2, 3) = -1.0;
    root.E(rr + 3, 4) = -1.0;
    root.cone = Cone::product({Cone::zero(np + 1), Cone::nonneg(nn), Cone::rsoc(4)});
    amb.sets.push_back(std::move(root));
    amb.validate_shapes();
    return amb;
}

}  // namespace drmdp
