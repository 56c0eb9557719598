#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace drmdp::ipm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Barrier cone layout for the conelp standard form. Order of blocks inside
/// the s/z vectors is: nonnegative orthant, second-order cones, PSD cones
/// (svec coordinates). Rotated cones and equalities are rewritten by the
/// caller before reaching this layer.
struct ConeSpec {
    int nonneg = 0;
    std::vector<int> soc;  // dims, each >= 1
    std::vector<int> psd;  // matrix orders, each >= 1

    int dim() const;
    int degree() const;
};

struct Settings {
    double feastol = 1e-8;
    double abstol = 1e-8;
    double reltol = 1e-8;
    double feastol_reduced = 1e-4;
    int max_iters = 100;
    double step_frac = 0.99;
    double sigma_min = 1e-4;
    double sigma_max = 0.9999;
    double static_reg = 1e-11;
};

enum class IpmStatus { Optimal, OptimalInaccurate, PrimalInfeasible, DualInfeasible, MaxIters, Numerics };

struct Result {
    IpmStatus status = IpmStatus::Numerics;
    VectorXd x, y, z, s;   // solution, or infeasibility certificate
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double gap = 0.0;      // s'z
    double relgap = 0.0;
    double pres = 0.0;
    double dres = 0.0;
    int iters = 0;
    std::string message;
};

/// Solve   minimize c'x   s.t.  A x = b,   G x + s = h,   s in K
/// with a homogeneous self-dual embedding, Nesterov-Todd scalings and a
/// Mehrotra predictor-corrector. Dense linear algebra throughout; intended
/// for the small per-state programs this toolkit generates.
Result conelp(const VectorXd& c, const MatrixXd& A, const VectorXd& b,
              const MatrixXd& G, const VectorXd& h, const ConeSpec& cones,
              const Settings& settings = {});

}  // namespace drmdp::ipm
