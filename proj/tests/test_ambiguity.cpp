#include <doctest.h>

#include <cmath>
#include <random>

#include "drmdp/ambiguity.hpp"

using namespace drmdp;

namespace {

AmbiguitySet nested_chain_1d() {
    // r scalar; [0.4,0.6] in [0.2,0.8] in [0,1]; p pinned to a point.
    VectorXd p = VectorXd::Ones(1);
    VectorXd lo = VectorXd::Zero(1), hi = VectorXd::Ones(1);
    std::vector<IntervalLevel> levels{{0.4, 0.6, 0.3, 0.5}, {0.2, 0.8, 0.6, 0.9}};
    return interval_ambiguity(p, lo, hi, 0, levels, true);
}

}  // namespace

TEST_CASE("ancestors") {
    SUBCASE("nested chain") {
        auto amb = nested_chain_1d();
        const bool a0 = amb.ancestors(0) == std::vector<int>{0, 1, 2};
        const bool a1 = amb.ancestors(1) == std::vector<int>{1, 2};
        const bool a2 = amb.ancestors(2) == std::vector<int>{2};
        CHECK(a0);
        CHECK(a1);
        CHECK(a2);
    }
    SUBCASE("two disjoint children under the root") {
        VectorXd p = VectorXd::Ones(1), lo = VectorXd::Zero(1), hi = VectorXd::Ones(1);
        std::vector<IntervalLevel> levels{{0.0, 0.1, 0.0, 0.2}, {0.7, 0.8, 0.5, 0.9}};
        auto amb = interval_ambiguity(p, lo, hi, 0, levels, false);
        const bool a0 = amb.ancestors(0) == std::vector<int>{0, 2};
        const bool a1 = amb.ancestors(1) == std::vector<int>{1, 2};
        CHECK(a0);
        CHECK(a1);
    }
    SUBCASE("singleton forest") {
        auto amb = from_point(VectorXd::Ones(1), VectorXd::Zero(1));
        const bool a0 = amb.ancestors(0) == std::vector<int>{0};
        CHECK(a0);
    }
    CHECK_THROWS(nested_chain_1d().ancestors(7));
}

TEST_CASE("verify_nesting certifies interval containment with the right margin") {
    VectorXd p = VectorXd::Ones(1), lo = VectorXd::Zero(1), hi = VectorXd::Constant(1, 2.0);
    std::vector<IntervalLevel> levels{{0.9, 1.1, 0.6, 0.8}};
    auto amb = interval_ambiguity(p, lo, hi, 0, levels, true);
    auto rep = verify_nesting(amb, VerifyMode::Optimize);
    REQUIRE(rep.ok);
    REQUIRE(rep.edges.size() == 1);
    CHECK(rep.edges[0].margin == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("verify_nesting certifies disjointness") {
    VectorXd p = VectorXd::Ones(1), lo = VectorXd::Zero(1), hi = VectorXd::Ones(1);
    std::vector<IntervalLevel> levels{{0.0, 0.1, 0.0, 0.2}, {0.7, 0.8, 0.5, 0.9}};
    auto amb = interval_ambiguity(p, lo, hi, 0, levels, false);
    auto rep = verify_nesting(amb, VerifyMode::Optimize);
    REQUIRE(rep.ok);
    REQUIRE(rep.disjoint.size() == 1);
    CHECK(rep.disjoint[0].certified);
}

TEST_CASE("verify_nesting rejects overlapping incomparable sets") {
    VectorXd p = VectorXd::Ones(1), lo = VectorXd::Zero(1), hi = VectorXd::Ones(1);
    std::vector<IntervalLevel> levels{{0.0, 0.5, 0.0, 0.2}, {0.4, 0.8, 0.5, 0.9}};
    auto amb = interval_ambiguity(p, lo, hi, 0, levels, false);
    auto rep = verify_nesting(amb, VerifyMode::Optimize);
    CHECK_FALSE(rep.ok);
    REQUIRE(rep.disjoint.size() == 1);
    CHECK_FALSE(rep.disjoint[0].certified);
}

TEST_CASE("verify_nesting single root is vacuous") {
    auto amb = from_point(VectorXd::Ones(2), VectorXd::Zero(1));
    auto rep = verify_nesting(amb, VerifyMode::Optimize);
    CHECK(rep.ok);
    CHECK(rep.edges.empty());
}

TEST_CASE("optimize never certifies what sampling refutes") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep_i = 0; rep_i < 12; ++rep_i) {
        VectorXd p = VectorXd::Ones(1), lo = VectorXd::Zero(1), hi = VectorXd::Ones(1);
        const double a = unif(rng) * 0.5, b = a + 0.05 + 0.4 * unif(rng);
        const double c = unif(rng) * 0.8, d = c + 0.05 + unif(rng) * 0.15;
        std::vector<IntervalLevel> levels{{a, b, 0.1, 0.4}, {c, d, 0.5, 0.9}};
        auto amb = interval_ambiguity(p, lo, hi, 0, levels, false);
        auto opt = verify_nesting(amb, VerifyMode::Optimize);
        auto smp = verify_nesting(amb, VerifyMode::Sample, 100000);
        const bool certified_but_refuted = opt.ok && !smp.ok;
        CHECK_FALSE(certified_but_refuted);
    }
}

TEST_CASE("regularity: point ambiguity certifies") {
    auto amb = from_point(VectorXd::Ones(1), VectorXd::Constant(1, 3.0));
    auto rep = check_regularity(amb);
    CHECK(rep.ok);
}

TEST_CASE("regularity: risky-state construction yields the 0.65 witness") {
    const double sigma = std::sqrt(800.0);
    VectorXd p = VectorXd::Ones(1);
    VectorXd lo = VectorXd::Constant(1, 100.0 - 4.0 * sigma);
    VectorXd hi = VectorXd::Constant(1, 100.0 + 4.0 * sigma);
    std::vector<IntervalLevel> levels{{100.0 - 25.06, 100.0 + 25.06, 0.6, 0.7}};
    auto amb = interval_ambiguity(p, lo, hi, 0, levels, true);
    auto rep = check_regularity(amb);
    REQUIRE(rep.ok);
    REQUIRE(rep.witness_masses.size() == 2);
    CHECK(rep.witness_masses[0] == doctest::Approx(0.65).epsilon(1e-6));
    REQUIRE(rep.witness.has_value());
    CHECK(feasible_for(amb, *rep.witness, 1e-7));
}

TEST_CASE("regularity: inner set equal to the root cannot be certified") {
    VectorXd p = VectorXd::Ones(1), lo = VectorXd::Zero(1), hi = VectorXd::Ones(1);
    std::vector<IntervalLevel> levels{{0.0, 1.0, 0.6, 0.7}};
    auto amb = interval_ambiguity(p, lo, hi, 0, levels, true);
    auto rep = check_regularity(amb);
    CHECK_FALSE(rep.ok);
}

TEST_CASE("mixture closure of feasible discrete distributions") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto amb = nested_chain_1d();  // dim 2: p then r
    auto random_feasible = [&]() {
        // Mass mid-levels: inner in [0.3,0.5], middle in [0.6,0.9].
        DiscreteDistribution d;
        d.points.resize(2, 3);
        d.points << 1.0, 1.0, 1.0,                          // p pinned
            0.4 + 0.2 * unif(rng), 0.25 + 0.1 * unif(rng),  // inner, middle ring
            0.9 + 0.05 * unif(rng);                         // outer ring
        const double wi = 0.35 + 0.1 * unif(rng);
        const double wm = 0.3 + 0.05 * unif(rng);
        d.weights.resize(3);
        d.weights << wi, wm, 1.0 - wi - wm;
        return d;
    };
    for (int rep = 0; rep < 20; ++rep) {
        auto d1 = random_feasible(), d2 = random_feasible();
        REQUIRE(feasible_for(amb, d1, 1e-9));
        REQUIRE(feasible_for(amb, d2, 1e-9));
        const double lam = unif(rng);
        DiscreteDistribution mix;
        mix.points.resize(2, 6);
        mix.points << d1.points, d2.points;
        mix.weights.resize(6);
        mix.weights << lam * d1.weights, (1.0 - lam) * d2.weights;
        CHECK(feasible_for(amb, mix, 1e-9));
    }
}

TEST_CASE("lifted mean fragment admits every target-mean distribution") {
    // Any finitely supported mu over p with G E[p] <= f extends to the lifted
    // set by u_i = G p_i + (f - G E[p]).
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int np = 2, M = 2;
    MatrixXd G(M, np);
    G << 1.0, 0.5, -0.3, 1.0;
    for (int rep = 0; rep < 20; ++rep) {
        MatrixXd pts(np, 3);
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < np; ++i) pts(i, k) = unif(rng);
        VectorXd w(3);
        w << unif(rng) + 0.1, unif(rng) + 0.1, unif(rng) + 0.1;
        w /= w.sum();
        VectorXd pbar = pts * w;
        VectorXd f = G * pbar + VectorXd::Constant(M, 0.2 * unif(rng));
        auto amb = lift_mean(G, f, Cone::nonneg(M), VectorXd::Zero(np), VectorXd::Ones(np),
                             VectorXd::Zero(1));
        DiscreteDistribution d;
        d.points.resize(amb.dim(), 3);
        for (int k = 0; k < 3; ++k) {
            VectorXd u = G * pts.col(k) + (f - G * pbar);
            d.points.col(k) << pts.col(k), 0.0, u;
        }
        d.weights = w;
        CHECK(feasible_for(amb, d, 1e-9));
    }
}

TEST_CASE("lift constructors validate inputs") {
    CHECK_THROWS(lift_mad(VectorXd::Ones(1), VectorXd::Constant(1, -0.5), VectorXd::Zero(1),
                          VectorXd::Ones(1), VectorXd::Ones(1)));
    CHECK_THROWS(lift_huber(VectorXd::Ones(1), 1.0, 0.0, VectorXd::Zero(1), VectorXd::Ones(1),
                            VectorXd::Ones(1)));
    MatrixXd bad_sigma(1, 1);
    bad_sigma << -1.0;
    CHECK_THROWS(lift_mean_covariance(VectorXd::Zero(1), bad_sigma, VectorXd::Ones(1), 10.0));
}
