#include "drmdp/ipm.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "drmdp/cones.hpp"

namespace drmdp::ipm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
    enum class Type { NonNeg, Soc, Psd } type;
    int offset;  // into s/z vectors
    int len;     // vector length (svec length for Psd)
    int order;   // matrix order for Psd, otherwise 0
};

std::vector<Block> layout(const ConeSpec& k) {
    std::vector<Block> bs;
    int off = 0;
    if (k.nonneg > 0) {
        bs.push_back({Block::Type::NonNeg, off, k.nonneg, 0});
        off += k.nonneg;
    }
    for (int d : k.soc) {
        bs.push_back({Block::Type::Soc, off, d, 0});
        off += d;
    }
    for (int n : k.psd) {
        bs.push_back({Block::Type::Psd, off, svec_dim(n), n});
        off += svec_dim(n);
    }
    return bs;
}

/// Nesterov-Todd scaling per block. For the PSD block we keep the factor R
/// with  S = R R',  Z = R^{-T} R^{-1} applied as congruences; lambda is the
/// common scaled point W z = W^{-T} s.
struct Scaling {
    struct SocScale {
        double eta;     // sqrt(det ratio)
        VectorXd wbar;  // normalized scaling point, wbar'J wbar = 1
        MatrixXd W;     // dense symmetric scaling matrix
        MatrixXd Winv;
    };
    struct PsdScale {
        MatrixXd r, rinv;
    };
    VectorXd w_nn;  // sqrt(s/z) entrywise
    std::vector<SocScale> soc;
    std::vector<PsdScale> psd;
    VectorXd lambda;
};

double soc_res(const VectorXd& u) { return u[0] * u[0] - u.tail(u.size() - 1).squaredNorm(); }

bool compute_scaling(const std::vector<Block>& blocks, const VectorXd& s, const VectorXd& z,
                     Scaling& w) {
    w.soc.clear();
    w.psd.clear();
    w.lambda.resize(s.size());
    for (const Block& blk : blocks) {
        auto sb = s.segment(blk.offset, blk.len);
        auto zb = z.segment(blk.offset, blk.len);
        switch (blk.type) {
            case Block::Type::NonNeg: {
                if (sb.minCoeff() <= 0.0 || zb.minCoeff() <= 0.0) return false;
                w.w_nn = (sb.array() / zb.array()).sqrt();
                w.lambda.segment(blk.offset, blk.len) = (sb.array() * zb.array()).sqrt();
                break;
            }
            case Block::Type::Soc: {
                const double sres = soc_res(sb), zres = soc_res(zb);
                if (sres <= 0.0 || zres <= 0.0 || sb[0] <= 0.0 || zb[0] <= 0.0) return false;
                VectorXd sbar = sb / std::sqrt(sres);
                VectorXd zbar = zb / std::sqrt(zres);
                const double g = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
                if (!(g > 0.0)) return false;
                VectorXd wbar(blk.len);
                wbar[0] = (sbar[0] + zbar[0]) / (2.0 * g);
                wbar.tail(blk.len - 1) =
                    (sbar.tail(blk.len - 1) - zbar.tail(blk.len - 1)) / (2.0 * g);
                const double eta = std::sqrt(std::sqrt(sres / zres));
                // W = eta * [ w0  w1' ; w1  I + w1 w1'/(1+w0) ];  W^{-1} negates
                // the off-diagonal blocks and divides by eta.
                const int d = blk.len;
                MatrixXd W(d, d), Winv(d, d);
                const VectorXd w1 = wbar.tail(d - 1);
                const MatrixXd D =
                    MatrixXd::Identity(d - 1, d - 1) + w1 * w1.transpose() / (1.0 + wbar[0]);
                W(0, 0) = wbar[0];
                W.block(0, 1, 1, d - 1) = w1.transpose();
                W.block(1, 0, d - 1, 1) = w1;
                W.block(1, 1, d - 1, d - 1) = D;
                Winv = W;
                Winv.block(0, 1, 1, d - 1) *= -1.0;
                Winv.block(1, 0, d - 1, 1) *= -1.0;
                W *= eta;
                Winv /= eta;
                w.lambda.segment(blk.offset, blk.len) = W * zb;
                w.soc.push_back({eta, wbar, std::move(W), std::move(Winv)});
                break;
            }
            case Block::Type::Psd: {
                MatrixXd S = smat(sb), Z = smat(zb);
                Eigen::LLT<MatrixXd> ls(S), lz(Z);
                if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
                MatrixXd Ls = ls.matrixL();
                MatrixXd Lz = lz.matrixL();
                Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls,
                                               Eigen::ComputeFullU | Eigen::ComputeFullV);
                VectorXd sing = svd.singularValues();
                if (sing.minCoeff() <= 0.0) return false;
                VectorXd si = sing.array().sqrt().inverse();
                MatrixXd R = Ls * svd.matrixV() * si.asDiagonal();
                MatrixXd Rinv = si.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
                // lambda = R' Z R = diag(sing)
                w.lambda.segment(blk.offset, blk.len) = svec(MatrixXd(sing.asDiagonal()));
                w.psd.push_back({std::move(R), std::move(Rinv)});
                break;
            }
        }
    }
    return true;
}

enum class Op { W, WT, Winv, WinvT };

/// Apply the NT scaling (or its transpose/inverse) blockwise.
VectorXd apply(const std::vector<Block>& blocks, const Scaling& w, Op op, const VectorXd& u) {
    VectorXd out(u.size());
    size_t isoc = 0, ipsd = 0;
    for (const Block& blk : blocks) {
        auto ub = u.segment(blk.offset, blk.len);
        switch (blk.type) {
            case Block::Type::NonNeg: {
                switch (op) {
                    case Op::W:
                    case Op::WT: out.segment(blk.offset, blk.len) = w.w_nn.cwiseProduct(ub); break;
                    case Op::Winv:
                    case Op::WinvT: out.segment(blk.offset, blk.len) = ub.cwiseQuotient(w.w_nn); break;
                }
                break;
            }
            case Block::Type::Soc: {
                const auto& sc = w.soc[isoc++];
                if (op == Op::W || op == Op::WT)
                    out.segment(blk.offset, blk.len) = sc.W * ub;
                else
                    out.segment(blk.offset, blk.len) = sc.Winv * ub;
                break;
            }
            case Block::Type::Psd: {
                const auto& ps = w.psd[ipsd++];
                MatrixXd U = smat(ub);
                MatrixXd res;
                switch (op) {
                    case Op::W: res = ps.r.transpose() * U * ps.r; break;
                    case Op::WT: res = ps.r * U * ps.r.transpose(); break;
                    case Op::Winv: res = ps.rinv.transpose() * U * ps.rinv; break;
                    case Op::WinvT: res = ps.rinv * U * ps.rinv.transpose(); break;
                }
                out.segment(blk.offset, blk.len) = svec(0.5 * (res + res.transpose()));
                break;
            }
        }
    }
    return out;
}

/// Dense W'W for the KKT (3,3) block.
MatrixXd form_WtW(const std::vector<Block>& blocks, const Scaling& w, int m) {
    MatrixXd WtW = MatrixXd::Zero(m, m);
    size_t isoc = 0, ipsd = 0;
    for (const Block& blk : blocks) {
        switch (blk.type) {
            case Block::Type::NonNeg:
                WtW.block(blk.offset, blk.offset, blk.len, blk.len).diagonal() =
                    w.w_nn.array().square();
                break;
            case Block::Type::Soc: {
                const auto& sc = w.soc[isoc++];
                WtW.block(blk.offset, blk.offset, blk.len, blk.len) = sc.W * sc.W;
                break;
            }
            case Block::Type::Psd: {
                const auto& ps = w.psd[ipsd++];
                // W'W u = svec(P' U P) with P = r r'; build columnwise.
                MatrixXd P = ps.r * ps.r.transpose();
                for (int j = 0; j < blk.len; ++j) {
                    VectorXd e = VectorXd::Zero(blk.len);
                    e[j] = 1.0;
                    MatrixXd E = smat(e);
                    WtW.block(blk.offset, blk.offset, blk.len, blk.len).col(j) =
                        svec(P.transpose() * E * P);
                }
                break;
            }
        }
    }
    return WtW;
}

/// Jordan product u o v.
VectorXd jordan_prod(const std::vector<Block>& blocks, const VectorXd& u, const VectorXd& v) {
    VectorXd out(u.size());
    for (const Block& blk : blocks) {
        auto ub = u.segment(blk.offset, blk.len);
        auto vb = v.segment(blk.offset, blk.len);
        switch (blk.type) {
            case Block::Type::NonNeg:
                out.segment(blk.offset, blk.len) = ub.cwiseProduct(vb);
                break;
            case Block::Type::Soc: {
                out[blk.offset] = ub.dot(vb);
                out.segment(blk.offset + 1, blk.len - 1) =
                    ub[0] * vb.tail(blk.len - 1) + vb[0] * ub.tail(blk.len - 1);
                break;
            }
            case Block::Type::Psd: {
                MatrixXd U = smat(ub), V = smat(vb);
                out.segment(blk.offset, blk.len) = svec(0.5 * (U * V + V * U));
                break;
            }
        }
    }
    return out;
}

/// Jordan division u \ v (solve u o x = v).
VectorXd jordan_div(const std::vector<Block>& blocks, const VectorXd& u, const VectorXd& v) {
    VectorXd out(u.size());
    for (const Block& blk : blocks) {
        auto ub = u.segment(blk.offset, blk.len);
        auto vb = v.segment(blk.offset, blk.len);
        switch (blk.type) {
            case Block::Type::NonNeg:
                out.segment(blk.offset, blk.len) = vb.cwiseQuotient(ub);
                break;
            case Block::Type::Soc: {
                const int d = blk.len;
                const double rho = ub[0] * ub[0] - ub.tail(d - 1).squaredNorm();
                const double zeta = ub.tail(d - 1).dot(vb.tail(d - 1));
                out[blk.offset] = (ub[0] * vb[0] - zeta) / rho;
                const double factor = (zeta / ub[0] - vb[0]) / rho;
                out.segment(blk.offset + 1, d - 1) = factor * ub.tail(d - 1) + vb.tail(d - 1) / ub[0];
                break;
            }
            case Block::Type::Psd: {
                MatrixXd U = smat(ub), V = smat(vb);
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(U);
                MatrixXd Vt = es.eigenvectors().transpose() * V * es.eigenvectors();
                const VectorXd& d = es.eigenvalues();
                for (int i = 0; i < Vt.rows(); ++i)
                    for (int j = 0; j < Vt.cols(); ++j) Vt(i, j) = 2.0 * Vt(i, j) / (d[i] + d[j]);
                MatrixXd X = es.eigenvectors() * Vt * es.eigenvectors().transpose();
                out.segment(blk.offset, blk.len) = svec(0.5 * (X + X.transpose()));
                break;
            }
        }
    }
    return out;
}

/// Identity element of the Jordan algebra.
VectorXd jordan_e(const std::vector<Block>& blocks, int m) {
    VectorXd e = VectorXd::Zero(m);
    for (const Block& blk : blocks) {
        switch (blk.type) {
            case Block::Type::NonNeg:
                e.segment(blk.offset, blk.len).setOnes();
                break;
            case Block::Type::Soc:
                e[blk.offset] = 1.0;
                break;
            case Block::Type::Psd:
                e.segment(blk.offset, blk.len) = svec(MatrixXd::Identity(blk.order, blk.order));
                break;
        }
    }
    return e;
}

/// Shift a point into the interior of the cone (for initialization).
void bring_to_cone(const std::vector<Block>& blocks, VectorXd& x) {
    for (const Block& blk : blocks) {
        auto xb = x.segment(blk.offset, blk.len);
        switch (blk.type) {
            case Block::Type::NonNeg: {
                const double alpha = -xb.minCoeff();
                if (alpha >= 0.0) xb.array() += 1.0 + alpha;
                break;
            }
            case Block::Type::Soc: {
                const double alpha = xb.tail(blk.len - 1).norm() - xb[0];
                if (alpha >= 0.0) xb[0] += 1.0 + alpha;
                break;
            }
            case Block::Type::Psd: {
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(xb), Eigen::EigenvaluesOnly);
                const double alpha = -es.eigenvalues().minCoeff();
                if (alpha >= 0.0) {
                    MatrixXd X = smat(xb);
                    X.diagonal().array() += 1.0 + alpha;
                    xb = svec(X);
                }
                break;
            }
        }
    }
}

/// Max step length t such that lambda + t*d stays in the cone; ds and dz are
/// given in scaled coordinates.
double max_step(const std::vector<Block>& blocks, const VectorXd& lambda, const VectorXd& d) {
    double step = kInf;
    for (const Block& blk : blocks) {
        auto lb = lambda.segment(blk.offset, blk.len);
        auto db = d.segment(blk.offset, blk.len);
        switch (blk.type) {
            case Block::Type::NonNeg: {
                const double rho = (db.array() / lb.array()).minCoeff();
                if (rho < 0.0) step = std::min(step, -1.0 / rho);
                break;
            }
            case Block::Type::Soc: {
                const int dlen = blk.len;
                const double lres = soc_res(lb);
                if (lres <= 0.0) continue;
                const double lnorm = std::sqrt(lres);
                VectorXd lbar = lb / lnorm;
                const double lbar_d = lbar[0] * db[0] - lbar.tail(dlen - 1).dot(db.tail(dlen - 1));
                VectorXd rho(dlen);
                rho[0] = lbar_d / lnorm;
                const double f = (lbar_d + db[0]) / (lbar[0] + 1.0);
                rho.tail(dlen - 1) = (db.tail(dlen - 1) - f * lbar.tail(dlen - 1)) / lnorm;
                const double r = rho.tail(dlen - 1).norm() - rho[0];
                if (r > 0.0) step = std::min(step, 1.0 / r);
                break;
            }
            case Block::Type::Psd: {
                MatrixXd L = smat(lb);
                Eigen::LLT<MatrixXd> llt(L);
                if (llt.info() != Eigen::Success) continue;
                MatrixXd Lc = llt.matrixL();
                MatrixXd M = Lc.triangularView<Eigen::Lower>().solve(smat(db));
                M = Lc.triangularView<Eigen::Lower>().solve(M.transpose()).transpose();
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()),
                                                           Eigen::EigenvaluesOnly);
                const double emin = es.eigenvalues().minCoeff();
                if (emin < 0.0) step = std::min(step, -1.0 / emin);
                break;
            }
        }
    }
    return step;
}

struct KktSolver {
    int n, p, m;
    Eigen::FullPivLU<MatrixXd> lu;
    MatrixXd K;

    void factor(const MatrixXd& A, const MatrixXd& G, const MatrixXd& WtW, double reg) {
        const int N = n + p + m;
        K.setZero(N, N);
        if (p > 0) {
            K.block(n, 0, p, n) = A;
            K.block(0, n, n, p) = A.transpose();
        }
        K.block(n + p, 0, m, n) = G;
        K.block(0, n + p, n, m) = G.transpose();
        K.block(n + p, n + p, m, m) = -WtW;
        for (int i = 0; i < n; ++i) K(i, i) += reg;
        for (int i = n; i < N; ++i) K(i, i) -= reg;
        lu.compute(K);
    }

    /// Solve with one round of iterative refinement.
    void solve(const VectorXd& rx, const VectorXd& ry, const VectorXd& rz, VectorXd& dx,
               VectorXd& dy, VectorXd& dz) const {
        VectorXd rhs(n + p + m);
        rhs << rx, ry, rz;
        VectorXd sol = lu.solve(rhs);
        VectorXd resid = rhs - K * sol;
        sol += lu.solve(resid);
        dx = sol.head(n);
        dy = sol.segment(n, p);
        dz = sol.tail(m);
    }
};

}  // namespace

int ConeSpec::dim() const {
    int d = nonneg;
    for (int s : soc) d += s;
    for (int n : psd) d += svec_dim(n);
    return d;
}

int ConeSpec::degree() const {
    int d = nonneg + static_cast<int>(soc.size());
    for (int n : psd) d += n;
    return d;
}

Result conelp(const VectorXd& c, const MatrixXd& A, const VectorXd& b, const MatrixXd& G,
              const VectorXd& h, const ConeSpec& cones, const Settings& st) {
    const int n = static_cast<int>(c.size());
    const int p = static_cast<int>(A.rows());
    const int m = static_cast<int>(G.rows());
    Result res;
    if (m != cones.dim()) throw std::invalid_argument("conelp: cone dim mismatch");
    if (A.cols() != n && p > 0) throw std::invalid_argument("conelp: A col mismatch");
    if (G.cols() != n && m > 0) throw std::invalid_argument("conelp: G col mismatch");
    if (m == 0) throw std::invalid_argument("conelp: at least one conic membership required");

    const auto blocks = layout(cones);
    const VectorXd e = jordan_e(blocks, m);
    const double deg = cones.degree();

    const double resx0 = std::max(1.0, c.norm());
    const double resy0 = std::max(1.0, b.norm());
    const double resz0 = std::max(1.0, h.norm());

    KktSolver kkt;
    kkt.n = n;
    kkt.p = p;
    kkt.m = m;

    // Initialization: W = I solves for a least-squares primal/dual pair.
    kkt.factor(A, G, MatrixXd::Identity(m, m), st.static_reg);
    VectorXd x, y, s, z, dx1(n), dy1(p), dz1(m), dx2(n), dy2(p), dz2(m);
    kkt.solve(VectorXd::Zero(n), b, h, dx1, dy1, dz1);
    x = dx1;
    s = -dz1;
    bring_to_cone(blocks, s);
    kkt.solve(-c, VectorXd::Zero(p), VectorXd::Zero(m), dx2, dy2, dz2);
    y = dy2;
    z = dz2;
    bring_to_cone(blocks, z);
    double tau = 1.0, kap = 1.0;

    Scaling W;
    Result best;
    double best_score = kInf;

    for (int iter = 0; iter <= st.max_iters; ++iter) {
        // Residuals.
        VectorXd rx = -G.transpose() * z;
        if (p > 0) rx -= A.transpose() * y;
        const double hresx = rx.norm();
        rx -= tau * c;
        VectorXd ry = p > 0 ? VectorXd(A * x) : VectorXd();
        const double hresy = p > 0 ? ry.norm() : 0.0;
        if (p > 0) ry -= tau * b;
        VectorXd rz = s + G * x;
        const double hresz = rz.norm();
        rz -= tau * h;
        const double cx = c.dot(x);
        const double by = p > 0 ? b.dot(y) : 0.0;
        const double hz = h.dot(z);
        const double rt = kap + cx + by + hz;

        const double nx = x.norm(), ny = y.norm(), nz = z.norm(), ns = s.norm();
        const double gap = s.dot(z);
        const double mu = (gap + kap * tau) / (deg + 1.0);
        const double pcost = cx / tau;
        const double dcost = -(hz + by) / tau;
        double relgap = kInf;
        if (pcost < 0.0) relgap = gap / tau / tau / (-pcost);
        else if (dcost > 0.0) relgap = gap / tau / tau / dcost;
        const double nry = p > 0 ? ry.norm() / std::max(resy0 + nx, 1.0) : 0.0;
        const double nrz = rz.norm() / std::max(resz0 + nx + ns, 1.0);
        const double pres = std::max(nry, nrz) / tau;
        const double dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / tau;
        double pinfres = kInf, dinfres = kInf;
        if (hz + by < -st.reltol * std::max(ny + nz, 1.0))
            pinfres = hresx / std::max(ny + nz, 1.0);
        if (cx < -st.reltol * std::max(nx, 1.0))
            dinfres = std::max(hresy / std::max(nx, 1.0), hresz / std::max(nx + ns, 1.0));

        auto fill = [&](Result& r) {
            r.x = x / tau;
            r.y = y / tau;
            r.z = z / tau;
            r.s = s / tau;
            r.primal_obj = pcost;
            r.dual_obj = dcost;
            r.gap = gap / (tau * tau);
            r.relgap = relgap;
            r.pres = pres;
            r.dres = dres;
            r.iters = iter;
        };

        // Exit tests.
        if (pres <= st.feastol && dres <= st.feastol &&
            (gap / (tau * tau) <= st.abstol || relgap <= st.reltol)) {
            res.status = IpmStatus::Optimal;
            fill(res);
            return res;
        }
        if (pinfres <= st.feastol) {
            res.status = IpmStatus::PrimalInfeasible;
            const double scale = -1.0 / (hz + by);
            res.x = VectorXd::Zero(n);
            res.y = y * scale;
            res.z = z * scale;
            res.s = s * scale;
            res.pres = pinfres;
            res.iters = iter;
            res.message = "certificate: b'y + h'z = -1, A'y + G'z ~ 0, z in K*";
            return res;
        }
        if (dinfres <= st.feastol) {
            res.status = IpmStatus::DualInfeasible;
            const double scale = -1.0 / cx;
            res.x = x * scale;
            res.s = s * scale;
            res.y = VectorXd::Zero(p);
            res.z = VectorXd::Zero(m);
            res.dres = dinfres;
            res.iters = iter;
            res.message = "certificate: c'x = -1, Ax ~ 0, Gx + s ~ 0, s in K";
            return res;
        }

        if (std::getenv("DRMDP_IPM_TRACE"))
            std::fprintf(stderr, "it=%d mu=%.3e pres=%.3e dres=%.3e gap=%.3e tau=%.3e kap=%.3e\n",
                         iter, mu, pres, dres, gap / (tau * tau), tau, kap);

        const double score = std::max(pres, dres) + std::max(0.0, std::min(relgap, 10.0));
        if (std::isfinite(score) && score < best_score) {
            best_score = score;
            best.status = IpmStatus::OptimalInaccurate;
            fill(best);
        }

        if (iter == st.max_iters || !std::isfinite(mu)) break;

        // NT scaling.
        if (!compute_scaling(blocks, s, z, W)) break;
        kkt.factor(A, G, form_WtW(blocks, W, m), st.static_reg);

        // Solve for the (c, b, h) system reused by both directions.
        kkt.solve(-c, b, h, dx1, dy1, dz1);
        const double dtau_denom = kap / tau - c.dot(dx1) - (p > 0 ? b.dot(dy1) : 0.0) - h.dot(dz1);
        if (dtau_denom == 0.0 || !std::isfinite(dtau_denom)) break;

        // Affine (predictor) direction.
        kkt.solve(rx, p > 0 ? VectorXd(-ry) : VectorXd(), s - rz, dx2, dy2, dz2);
        double dtau_aff =
            (rt - kap + c.dot(dx2) + (p > 0 ? b.dot(dy2) : 0.0) + h.dot(dz2)) / dtau_denom;
        VectorXd dz_aff = dz2 + dtau_aff * dz1;
        VectorXd Wdz_aff = apply(blocks, W, Op::W, dz_aff);
        VectorXd ds_by_W = -Wdz_aff - W.lambda;  // W^{-T} ds_aff
        const double dkap_aff = -kap - kap / tau * dtau_aff;

        double alpha_aff = max_step(blocks, W.lambda, ds_by_W);
        alpha_aff = std::min(alpha_aff, max_step(blocks, W.lambda, Wdz_aff));
        if (dtau_aff < 0.0) alpha_aff = std::min(alpha_aff, -tau / dtau_aff);
        if (dkap_aff < 0.0) alpha_aff = std::min(alpha_aff, -kap / dkap_aff);
        alpha_aff = std::min(alpha_aff, 1.0);

        const double sigma =
            std::clamp(std::pow(1.0 - alpha_aff, 3.0), st.sigma_min, st.sigma_max);
        const double one_minus_sigma = 1.0 - sigma;

        // Combined (corrector) direction.
        VectorXd ds_comb = jordan_prod(blocks, W.lambda, W.lambda) +
                           jordan_prod(blocks, ds_by_W, Wdz_aff) - sigma * mu * e;
        VectorXd lam_div = jordan_div(blocks, W.lambda, ds_comb);
        VectorXd W_lam_div = apply(blocks, W, Op::WT, lam_div);
        kkt.solve(one_minus_sigma * rx, p > 0 ? VectorXd(-one_minus_sigma * ry) : VectorXd(),
                  -one_minus_sigma * rz + W_lam_div, dx2, dy2, dz2);
        const double bkap = kap * tau + dkap_aff * dtau_aff - sigma * mu;
        const double dtau = (one_minus_sigma * rt - bkap / tau + c.dot(dx2) +
                             (p > 0 ? b.dot(dy2) : 0.0) + h.dot(dz2)) /
                            dtau_denom;
        dx2 += dtau * dx1;
        if (p > 0) dy2 += dtau * dy1;
        dz2 += dtau * dz1;
        VectorXd Wdz = apply(blocks, W, Op::W, dz2);
        VectorXd ds_by_W2 = -(lam_div + Wdz);
        const double dkap = -(bkap + kap * dtau) / tau;

        double alpha = max_step(blocks, W.lambda, ds_by_W2);
        alpha = std::min(alpha, max_step(blocks, W.lambda, Wdz));
        if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
        if (dkap < 0.0) alpha = std::min(alpha, -kap / dkap);
        alpha = std::min(st.step_frac * alpha, 1.0);
        if (!std::isfinite(alpha) || alpha <= 0.0) break;

        VectorXd ds = apply(blocks, W, Op::WT, ds_by_W2);
        x += alpha * dx2;
        if (p > 0) y += alpha * dy2;
        z += alpha * dz2;
        s += alpha * ds;
        tau += alpha * dtau;
        kap += alpha * dkap;
        if (tau <= 0.0 || kap < 0.0) break;
    }

    // No full-precision exit: report the best iterate with a reduced-accuracy
    // status if it is usable, otherwise flag numerical trouble.
    if (std::isfinite(best_score) && best.pres <= st.feastol_reduced &&
        best.dres <= st.feastol_reduced &&
        (best.gap <= st.feastol_reduced || best.relgap <= st.feastol_reduced)) {
        best.message = "reduced accuracy";
        return best;
    }
    res = best;
    res.status = (res.iters >= st.max_iters) ? IpmStatus::MaxIters : IpmStatus::Numerics;
    res.message = "did not converge to requested accuracy";
    return res;
}

}  // namespace drmdp::ipm
