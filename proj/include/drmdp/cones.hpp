#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace drmdp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Cone descriptor used both for confidence-set memberships and for the
/// conic program IR. PSD blocks are handled in scaled-vectorized
/// lower-triangular ("svec") coordinates: a symmetric n x n matrix maps to
/// a vector of length n(n+1)/2 with off-diagonal entries scaled by sqrt(2),
/// so that Euclidean inner products of svec vectors equal trace inner
/// products of the matrices.
struct Cone {
    enum class Kind { Zero, Free, NonNeg, SecondOrder, RotatedSecondOrder, Psd, Product };

    Kind kind = Kind::Zero;
    int size = 0;                 // vector dim; for Psd the matrix order n
    std::vector<Cone> factors;    // Product only

    static Cone zero(int d) { return make(Kind::Zero, d); }
    static Cone free(int d) { return make(Kind::Free, d); }
    static Cone nonneg(int d) { return make(Kind::NonNeg, d); }
    static Cone soc(int d) { return make(Kind::SecondOrder, d); }
    static Cone rsoc(int d) { return make(Kind::RotatedSecondOrder, d); }
    static Cone psd(int n) { return make(Kind::Psd, n); }
    static Cone product(std::vector<Cone> fs);

    /// Total dimension of the membership vector.
    int dim() const;

    /// Flatten nested products into a list of primitive cones.
    std::vector<Cone> flattened() const;

    bool operator==(const Cone& o) const;

private:
    static Cone make(Kind k, int d);
};

/// Dual cone. Zero and Free are each other's duals; the symmetric cones are
/// self-dual (RotatedSecondOrder under the 2*u*v >= |w|^2 normalization).
Cone dual_cone(const Cone& c);

/// svec length for a symmetric matrix of order n.
inline int svec_dim(int n) { return n * (n + 1) / 2; }

/// Pack a symmetric matrix into svec coordinates (lower triangle, column
/// order, off-diagonals scaled by sqrt(2)).
VectorXd svec(const MatrixXd& m);

/// Inverse of svec.
MatrixXd smat(const VectorXd& v);

/// Membership test with slack tolerance; used by verification code and
/// tests, not by the solver hot path.
bool in_cone(const Cone& c, const VectorXd& x, double tol);

std::string cone_name(const Cone& c);

}  // namespace drmdp
