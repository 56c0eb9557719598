#include <doctest.h>

#include <cmath>
#include <random>

#include "drmdp/mdp.hpp"

using namespace drmdp;

namespace {

/// Deterministic chain: states 0..n-1 advance one per stage; the last move
/// pays `terminal_reward`; a lone absorbing state closes the final stage.
struct Chain {
    StateSpace space;
    ActionSpace acts;
    Horizon horizon;
    FixedParameters params;
    Policy policy;
};

Chain make_chain(int n, double terminal_reward, double gamma) {
    Chain c;
    c.horizon = Horizon::finite(n + 1, gamma);
    c.space.num_states = n + 1;
    c.space.initial_state = 0;
    c.space.stage.resize(n + 1);
    c.space.successors.resize(n + 1);
    for (int i = 0; i < n; ++i) {
        c.space.stage[i] = i + 1;
        c.space.successors[i] = {i + 1};
    }
    c.space.stage[n] = n + 1;
    c.acts.actions.assign(n + 1, {"advance"});
    c.params.transition.assign(n + 1, MatrixXd::Ones(1, 1));
    c.params.reward.assign(n + 1, VectorXd::Zero(1));
    c.params.reward[n - 1][0] = terminal_reward;
    c.params.transition[n] = MatrixXd();
    c.params.reward[n] = VectorXd();
    c.policy.pi.assign(n + 1, VectorXd::Ones(1));
    c.space.validate(c.horizon);
    c.acts.validate(c.space);
    return c;
}

}  // namespace

TEST_CASE("absorbing state geometric series") {
    StateSpace space;
    space.num_states = 1;
    space.initial_state = 0;
    space.stage = {1};
    space.successors = {{0}};
    ActionSpace acts{{{"stay"}}};
    Horizon h = Horizon::infinite(0.5);
    FixedParameters params;
    params.transition = {MatrixXd::Ones(1, 1)};
    params.reward = {VectorXd::Ones(1)};
    Policy pol;
    pol.pi = {VectorXd::Ones(1)};
    CHECK(evaluate_policy(space, acts, h, params, pol) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("50-step chain reproduces discounted terminal costs") {
    auto c = make_chain(50, -130.0, 0.8);
    const double got = evaluate_policy(c.space, c.acts, c.horizon, c.params, c.policy);
    CHECK(got == doctest::Approx(-130.0 * std::pow(0.8, 49)).epsilon(1e-12));
    CHECK(got == doctest::Approx(-2.319e-3).epsilon(5e-4));

    auto c2 = make_chain(50, -100.0, 0.8);
    const double got2 = evaluate_policy(c2.space, c2.acts, c2.horizon, c2.params, c2.policy);
    CHECK(got2 == doctest::Approx(-100.0 * std::pow(0.8, 49)).epsilon(1e-12));
    CHECK(got2 == doctest::Approx(-1.784e-3).epsilon(1e-3));
}

TEST_CASE("evaluate_policy is linear in rewards") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 4;
        StateSpace space;
        space.num_states = n;
        space.initial_state = 0;
        space.stage.assign(n, 1);
        space.successors.assign(n, {0, 1, 2, 3});
        ActionSpace acts;
        acts.actions.assign(n, {"a", "b"});
        Horizon h = Horizon::infinite(0.9);
        auto rand_params = [&]() {
            FixedParameters p;
            for (int s = 0; s < n; ++s) {
                MatrixXd t(2, n);
                for (int a = 0; a < 2; ++a) {
                    VectorXd row(n);
                    for (int j = 0; j < n; ++j) row[j] = unif(rng) + 1e-3;
                    t.row(a) = (row / row.sum()).transpose();
                }
                p.transition.push_back(t);
                VectorXd r(2);
                r << gauss(rng), gauss(rng);
                p.reward.push_back(r);
            }
            return p;
        };
        FixedParameters p1 = rand_params();
        FixedParameters p2 = p1;
        for (int s = 0; s < n; ++s) p2.reward[s] = VectorXd::NullaryExpr(2, [&]() { return gauss(rng); });
        Policy pol;
        for (int s = 0; s < n; ++s) {
            VectorXd row(2);
            row << unif(rng) + 1e-3, unif(rng) + 1e-3;
            pol.pi.push_back(row / row.sum());
        }
        const double alpha = gauss(rng), beta = gauss(rng);
        FixedParameters mix = p1;
        for (int s = 0; s < n; ++s) mix.reward[s] = alpha * p1.reward[s] + beta * p2.reward[s];
        const double lhs = evaluate_policy(space, acts, h, mix, pol);
        const double rhs = alpha * evaluate_policy(space, acts, h, p1, pol) +
                           beta * evaluate_policy(space, acts, h, p2, pol);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("continuation matrix blocks") {
    SUBCASE("terminal stage gives a zero matrix") {
        auto cm = build_continuation_matrix(VectorXd::Zero(3), 2, 0.9);
        CHECK(cm.V.isZero(0.0));
    }
    SUBCASE("two actions, two successors") {
        VectorXd v(2);
        v << 1.0, 2.0;
        auto cm = build_continuation_matrix(v, 2, 0.5);
        REQUIRE(cm.V.rows() == 4);
        REQUIRE(cm.V.cols() == 2);
        CHECK(cm.V(0, 0) == doctest::Approx(0.5));
        CHECK(cm.V(1, 0) == doctest::Approx(1.0));
        CHECK(cm.V(2, 0) == 0.0);
        CHECK(cm.V(2, 1) == doctest::Approx(0.5));
        CHECK(cm.V(3, 1) == doctest::Approx(1.0));
        CHECK(cm.V(0, 1) == 0.0);
    }
    SUBCASE("machine-replacement discount weights are exact powers of 0.8") {
        // Folding gamma into V must reproduce 0.8^k exactly when chained.
        double w = 1.0;
        VectorXd v = VectorXd::Ones(1);
        for (int k = 1; k <= 49; ++k) {
            auto cm = build_continuation_matrix(v, 1, 0.8);
            v = VectorXd::Constant(1, cm.V(0, 0));
            w *= 0.8;
            CHECK(v[0] == w);  // bitwise: products of the same doubles
        }
    }
}

TEST_CASE("expectation identity for the continuation matrix") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 50; ++rep) {
        const int na = 1 + static_cast<int>(rng() % 4);
        const int ns = 1 + static_cast<int>(rng() % 5);
        const double gamma = 0.05 + 0.95 * unif(rng);
        VectorXd vnext = VectorXd::NullaryExpr(ns, [&]() { return gauss(rng); });
        auto cm = build_continuation_matrix(vnext, na, gamma);
        VectorXd p(na * ns), r(na), pi(na);
        for (int a = 0; a < na; ++a) {
            VectorXd row = VectorXd::NullaryExpr(ns, [&]() { return unif(rng) + 1e-3; });
            p.segment(a * ns, ns) = row / row.sum();
            r[a] = gauss(rng);
            pi[a] = unif(rng) + 1e-3;
        }
        pi /= pi.sum();
        const double lhs = r.dot(pi) + p.dot(cm.V * pi);
        double rhs = 0.0;
        for (int a = 0; a < na; ++a) {
            double cont = 0.0;
            for (int j = 0; j < ns; ++j) cont += p[a * ns + j] * vnext[j];
            rhs += pi[a] * (r[a] + gamma * cont);
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS(Horizon::infinite(1.0));
    CHECK_THROWS(Horizon::finite(0, 0.9));
    VectorXd bad(2);
    bad << 0.6, 0.6;
    CHECK_THROWS(project_simplex(bad));
    VectorXd fixable(2);
    fixable << 0.5 + 2e-10, 0.5 - 1e-10;
    project_simplex(fixable);
    CHECK(fixable.sum() == doctest::Approx(1.0).epsilon(1e-15));
}
