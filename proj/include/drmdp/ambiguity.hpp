#pragma once

#include <optional>
#include <string>
#include <vector>

#include "drmdp/cones.hpp"

namespace drmdp {

/// One conic-representable confidence set
///   O = { (p, r, u) : b - B p - D r - E u  in  cone }
/// carrying a probability interval [prob_lo, prob_hi]. `parent` names the
/// smallest strict superset in the nesting forest (-1 for the root).
struct ConfidenceSet {
    MatrixXd B, D, E;
    VectorXd b;
    Cone cone = Cone::nonneg(1);
    double prob_lo = 1.0;
    double prob_hi = 1.0;
    int parent = -1;

    VectorXd residual(const VectorXd& p, const VectorXd& r, const VectorXd& u) const;
    bool contains(const VectorXd& p, const VectorXd& r, const VectorXd& u, double tol) const;
};

/// Linear expectation constraints E[F p + G r + H u] = c; k may be zero.
struct MomentConstraints {
    MatrixXd F, G, H;
    VectorXd c;

    int rows() const { return static_cast<int>(c.size()); }
    static MomentConstraints none(int np, int nr, int q);
};

/// Standard-form state-wise ambiguity set. The root (index n_s - 1, stored
/// last) must carry prob_lo = prob_hi = 1 and a bounded feasible region;
/// exact-representation lifts may waive boundedness via `lifted`.
struct AmbiguitySet {
    int np = 0, nr = 0, q = 0;
    MomentConstraints moments = MomentConstraints::none(0, 0, 0);
    std::vector<ConfidenceSet> sets;
    bool lifted = false;
    std::optional<std::pair<VectorXd, VectorXd>> point;  // set when degenerate (p0, r0)

    int size() const { return static_cast<int>(sets.size()); }
    int root() const { return size() - 1; }
    int dim() const { return np + nr + q; }
    void validate_shapes() const;

    /// {i} plus all strict ancestors up to the root.
    std::vector<int> ancestors(int i) const;
    /// Direct children of i in the declared forest.
    std::vector<int> children(int i) const;
};

/// Finitely supported joint distribution over (p, r, u) columns.
struct DiscreteDistribution {
    MatrixXd points;   // dim x m
    VectorXd weights;  // on the simplex
};

/// Check moment equalities and set-mass bounds of `dist` against `amb`.
bool feasible_for(const AmbiguitySet& amb, const DiscreteDistribution& dist, double tol);

enum class VerifyMode { DeclaredOnly, Optimize, Sample };

struct EdgeReport {
    int child = -1, parent = -1;
    bool certified = false;
    bool sampled_only = false;
    double margin = 0.0;
    std::string note;
};

struct NestingReport {
    bool structure_ok = false;
    bool ok = false;
    std::vector<EdgeReport> edges;       // declared containments
    std::vector<EdgeReport> disjoint;    // incomparable pairs
    std::string message;
};

/// Structural checks always run; Optimize certifies strict containment of
/// every declared edge (margin >= delta on the rows that differ; shared
/// equality rows are checked for agreement) and disjointness of incomparable
/// pairs by infeasibility of the intersection. Sample mode draws points and
/// reports empirical violations instead of certificates.
NestingReport verify_nesting(const AmbiguitySet& amb, VerifyMode mode, int sample_n = 10000,
                             double delta = 1e-7);

struct RegularityReport {
    bool bounded = false;
    bool root_prob_one = false;
    bool interior_ok = false;   // Slater-type witness found (or vacuous)
    bool ok = false;
    bool boundedness_waived = false;
    std::optional<DiscreteDistribution> witness;
    std::vector<double> witness_masses;  // per set, for the witness
    std::string message;
};

RegularityReport check_regularity(const AmbiguitySet& amb);

/// Degenerate ambiguity set holding a single parameter point.
AmbiguitySet from_point(const VectorXd& p0, const VectorXd& r0);

/// Support-only set (classical robust MDP): the given root with mass one.
AmbiguitySet from_support(ConfidenceSet root, int np, int nr, int q);

/// One interval confidence level on a designated scalar coordinate.
struct IntervalLevel {
    double lo = 0.0, hi = 0.0;
    double prob_lo = 0.0, prob_hi = 1.0;
};

/// Box ambiguity over r with p pinned: root = support box, plus interval
/// levels on coordinate `coord` of r. Levels are nested innermost-first when
/// `nested`, else mutually disjoint children of the root.
AmbiguitySet interval_ambiguity(const VectorXd& p_pin, const VectorXd& r_lo, const VectorXd& r_hi,
                                int coord, const std::vector<IntervalLevel>& levels, bool nested);

/// Transition uncertainty along one direction: p = p_base + theta * p_dir
/// with theta in [lo, hi] and interval levels on theta; r pinned.
AmbiguitySet affine_scalar_ambiguity(const VectorXd& p_base, const VectorXd& p_dir,
                                     const VectorXd& r_pin, double lo, double hi,
                                     const std::vector<IntervalLevel>& levels, bool nested);

/// Mean lifting: q = f.size() auxiliaries u with E[u] = f and
/// G p <=_K u almost surely; p supported on the given box, r pinned.
AmbiguitySet lift_mean(const MatrixXd& G, const VectorXd& f, const Cone& K, const VectorXd& p_lo,
                       const VectorXd& p_hi, const VectorXd& r_pin);

/// Mean/covariance lifting over r (fixed mean m): auxiliaries svec(U) with
/// E[svec(U)] = svec(Sigma), E[r] = m and [[1, (r-m)'], [r-m, U]] psd a.s.;
/// p pinned.
AmbiguitySet lift_mean_covariance(const VectorXd& m, const MatrixXd& sigma, const VectorXd& p_pin,
                                  double r_box_halfwidth);

/// Mean absolute deviation lifting over r: u >= |r - m| a.s., E[u] = f;
/// r supported on [r_lo, r_hi], p pinned.
AmbiguitySet lift_mad(const VectorXd& m, const VectorXd& f, const VectorXd& r_lo,
                      const VectorXd& r_hi, const VectorXd& p_pin);

/// Expected Huber loss lifting over r: E[H_delta(f'r)] <= g encoded with the
/// five auxiliaries (u, v, w, s, t) and one rotated-cone row; p pinned.
AmbiguitySet lift_huber(const VectorXd& f, double g, double delta, const VectorXd& r_lo,
                        const VectorXd& r_hi, const VectorXd& p_pin);

}  // namespace drmdp
