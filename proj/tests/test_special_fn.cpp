#include "jha/special_fn.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace jha;

namespace {

const std::vector<ParamPair> panel{{-0.5, -0.5}, {0.0, 0.0}, {0.3, 1.7}, {-0.5, 2.0}};

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace

TEST_CASE("degree zero and one")
{
    CHECK(eval_jacobi({0.3, 1.7}, 0, 0.5) == 1.0);
    for (const ParamPair& p : panel)
        for (double x : {-1.0, -0.6, 0.0, 0.25, 0.9, 1.0})
            CHECK(eval_jacobi(p, 1, x) == doctest::Approx(oracle::rodrigues_degree_one(p.alpha(), p.beta(), x)).epsilon(1e-14));
}

TEST_CASE("degree seven against numerical Rodrigues")
{
    const ParamPair p(0.5, -0.25);
    const double ref = oracle::rodrigues_jacobi(7, 0.5, -0.25, 0.9);
    CHECK(rel(eval_jacobi(p, 7, 0.9), ref) < 1e-6);
    for (int n = 2; n <= 9; ++n)
        for (double x : {-0.7, -0.1, 0.4})
            CHECK(rel(eval_jacobi(p, n, x), oracle::rodrigues_jacobi(n, 0.5, -0.25, x)) < 1e-9);
}

TEST_CASE("eval_jacobi rejects x outside [-1,1]")
{
    CHECK_THROWS_AS(eval_jacobi({0.0, 0.0}, 3, 1.01), DomainError);
    CHECK_NOTHROW(eval_jacobi({0.0, 0.0}, 3, 1.0 + 1e-14));
}

TEST_CASE("parameter validation")
{
    CHECK_THROWS_AS(ParamPair(-1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ParamPair(0.0, -1.2), DomainError);
    CHECK(ParamPair(-0.5, -0.5).critical());
    CHECK(ParamPair(-0.5, -0.5).dk_valid());
    CHECK_FALSE(ParamPair(-0.7, 0.2).dk_valid());
    CHECK(ParamPair(-0.7, -0.3).critical());
    CHECK_FALSE(ParamPair(0.3, 1.7).critical());
}

TEST_CASE("norm constants by tanh-sinh quadrature")
{
    // dm_{0,0} = sin(theta)/2 dtheta has total mass 1
    CHECK(oracle::interval_measure_quad(0.0, 0.0, 0.0, kPi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(norm_constant({0.0, 0.0}, 0) == doctest::Approx(1.0).epsilon(1e-15));
    for (ParamPair p : {ParamPair(-0.5, -0.5), ParamPair(-0.7, -0.3), ParamPair(0.3, 1.7), ParamPair(-0.5, 2.0)}) {
        // critical branch included: n = 0 for (-1/2,-1/2) and (-0.7,-0.3)
        const double mass = oracle::interval_measure_quad(p.alpha(), p.beta(), 0.0, kPi);
        CHECK(norm_constant(p, 0) * norm_constant(p, 0) * mass == doctest::Approx(1.0).epsilon(1e-12));
        for (int n : {1, 4, 9}) {
            const double c = norm_constant(p, n);
            const double sq = oracle::theta_integral(p.alpha(), p.beta(), [&](double th) {
                const double v = eval_jacobi(p, n, std::cos(th));
                return v * v;
            });
            CHECK(c * c * sq == doctest::Approx(1.0).epsilon(1e-11));
        }
    }
}

TEST_CASE("log-gamma constants do not overflow")
{
    const double c = norm_constant({0.3, 1.7}, 400);
    CHECK(std::isfinite(c));
    CHECK(c > 0.0);
}

TEST_CASE("normalized polynomials")
{
    const ParamPair p(0.3, 1.7);
    CHECK(eval_normalized(p, 0, 0.4) == doctest::Approx(norm_constant(p, 0)));
    CHECK(eval_normalized(p, 0, 2.9) == doctest::Approx(norm_constant(p, 0)));
    CHECK(eval_normalized(p, -1, 1.0) == 0.0);

    const ParamPair ch(-0.5, -0.5);
    for (int n = 1; n <= 30; ++n)
        for (double th : {0.1, 0.77, 1.5, 2.2, 3.0})
            CHECK(eval_normalized(ch, n, th) == doctest::Approx(std::sqrt(2.0 / kPi) * std::cos(n * th)).scale(1.0).epsilon(1e-13));

    CHECK_THROWS_AS(eval_normalized(p, 2, -0.1), DomainError);
    CHECK_THROWS_AS(eval_normalized(p, 2, 3.2), DomainError);
}

TEST_CASE("recurrence sequence matches closed recurrence")
{
    for (const ParamPair& p : panel)
        for (double th : {0.05, 1.0, 3.0}) {
            const auto seq = normalized_sequence(p, 40, th);
            for (int n = 0; n <= 40; ++n)
                CHECK(seq[n] == doctest::Approx(eval_normalized(p, n, th)).epsilon(1e-11).scale(1.0));
        }
}

TEST_CASE("growth estimate does not trend upward")
{
    for (const ParamPair& p : panel) {
        const double e = p.alpha() + p.beta() + 2.5;
        std::vector<double> sup(51, 0.0);
        for (int i = 0; i <= 2000; ++i) {
            const double th = kPi * i / 2000.0;
            const auto seq = normalized_sequence(p, 50, th);
            for (int n = 0; n <= 50; ++n)
                sup[n] = std::max(sup[n], std::abs(seq[n]) / std::pow(n + 1.0, e));
        }
        double first = 0.0, last = 0.0;
        for (int n = 0; n <= 25; ++n)
            first = std::max(first, sup[n]);
        for (int n = 26; n <= 50; ++n)
            last = std::max(last, sup[n]);
        CHECK(std::isfinite(first));
        CHECK(last <= first * 1.05);
    }
}

TEST_CASE("eigenvalues")
{
    CHECK(eigenvalue({-0.5, -0.5}, 0) == 0.0);
    CHECK(eigenvalue({0.3, 1.7}, 2) == doctest::Approx(12.25).epsilon(1e-15));
    for (const ParamPair& p : panel) {
        for (int n = 0; n < 30; ++n)
            CHECK(eigenvalue(p, n + 1) > eigenvalue(p, n));
        CHECK((eigenvalue(p, 0) == 0.0) == p.critical());
    }
}

TEST_CASE("derivative rule")
{
    for (const ParamPair& p : panel) {
        CHECK(derivative_rule(p, 0, 1.3) == 0.0);
        for (int n = 1; n <= 30; ++n)
            for (double th = 0.2; th < 3.0; th += 0.35) {
                const auto f = [&](double x) { return eval_normalized(p, n, x); };
                const double fd = oracle::diff5(f, th, 1e-3);
                const double d = derivative_rule(p, n, th);
                CHECK(std::abs(d - fd) <= 1e-6 * std::max(1.0, std::abs(d)));
            }
    }
    CHECK_THROWS_AS(derivative_rule({0, 0}, 2, 4.0), DomainError);
}

TEST_CASE("iterated derivative rule against repeated finite differences")
{
    const ParamPair p(0.3, 1.7);
    for (int order = 1; order <= 3; ++order)
        for (int n : {2, 5, 8})
            for (double th : {0.6, 1.4, 2.5}) {
                std::function<double(double)> f = [&](double x) { return eval_normalized(p, n, x); };
                const double h = 2e-3;
                double fd = 0.0;
                if (order == 1)
                    fd = oracle::diff5(f, th, h);
                else if (order == 2)
                    fd = oracle::second_diff(f, th, h);
                else
                    fd = (f(th + 2 * h) - 2 * f(th + h) + 2 * f(th - h) - f(th - 2 * h)) / (2 * h * h * h);
                const double d = delta_power(p, order, n, th);
                CHECK(std::abs(d - fd) <= 1e-4 * std::max(1.0, std::abs(d)));
            }
    // one application equals derivative_rule exactly
    for (double th : {0.3, 2.0})
        CHECK(delta_power(p, 1, 6, th) == doctest::Approx(derivative_rule(p, 6, th)).epsilon(1e-13));
}

TEST_CASE("eigenrelation from two derivative rules")
{
    for (const ParamPair& p : panel) {
        const double a = p.alpha(), b = p.beta(), lam = p.lambda();
        for (int n = 0; n <= 15; ++n)
            for (double th = 0.3; th < 3.0; th += 0.4) {
                const double d1 = derivative_rule(p, n, th);
                double d2 = 0.0;
                if (n >= 1) {
                    const double f = -0.5 * std::sqrt(n * (n + lam));
                    const ParamPair s = p.shifted(1, 1);
                    d2 = f * (std::cos(th) * eval_normalized(s, n - 1, th) + std::sin(th) * derivative_rule(s, n - 1, th));
                }
                const double jf = -d2 - (a - b + lam * std::cos(th)) / std::sin(th) * d1
                                  + lam * lam / 4.0 * eval_normalized(p, n, th);
                const double rhs = eigenvalue(p, n) * eval_normalized(p, n, th);
                CHECK(std::abs(jf - rhs) <= 1e-5 * std::max(1.0, std::abs(rhs)));
            }
    }
}

TEST_CASE("Gegenbauer polynomials")
{
    CHECK(eval_gegenbauer(1.3, 0, 0.4) == 1.0);
    CHECK_THROWS_AS(eval_gegenbauer(0.0, 2, 0.1), DomainError);
    for (double lam : {0.5, 1.0, 2.5, 3.0})
        for (double z : {-0.9, -0.2, 0.35, 1.0}) {
            CHECK(eval_gegenbauer(lam, 1, z) == doctest::Approx(oracle::gegenbauer_taylor(lam, 1, z)).epsilon(1e-12).scale(1.0));
            CHECK(eval_gegenbauer(lam, 2, z) == doctest::Approx(oracle::gegenbauer_taylor(lam, 2, z)).epsilon(1e-12).scale(1.0));
            CHECK(eval_gegenbauer(lam, 7, z) == doctest::Approx(oracle::gegenbauer_taylor(lam, 7, z)).epsilon(1e-10).scale(1.0));
            const auto seq = gegenbauer_sequence(lam, 12, z);
            for (int k = 0; k <= 12; ++k) {
                CHECK(seq[k] == doctest::Approx(eval_gegenbauer(lam, k, z)).epsilon(1e-14).scale(1.0));
                const double sign = k % 2 ? -1.0 : 1.0;
                CHECK(eval_gegenbauer(lam, k, -z) == sign * eval_gegenbauer(lam, k, z));
            }
        }
}

TEST_CASE("Gegenbauer generating function at moderate r")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uz(-1.0, 1.0), ur(0.0, 0.6);
    for (int i = 0; i < 20; ++i) {
        const double z = uz(rng), r = ur(rng);
        for (double lam : {0.5, 1.0, 3.0}) {
            const auto c = gegenbauer_sequence(lam, 200, z);
            double s = 0.0, rk = 1.0;
            for (int k = 0; k <= 200; ++k, rk *= r)
                s += (k + lam) / lam * c[k] * rk;
            const double closed = (1 - r * r) / std::pow(1 - 2 * z * r + r * r, lam + 1);
            CHECK(rel(s, closed) < 1e-12);
        }
    }
}

TEST_CASE("complex gamma")
{
    CHECK(std::abs(complex_gamma({5.0, 0.0}) - 24.0) < 1e-12);
    CHECK(std::abs(complex_gamma({0.5, 0.0}) - std::sqrt(kPi)) < 1e-13);
    // |Gamma(i y)|^2 = pi / (y sinh(pi y))
    for (double y : {0.3, 1.0, 2.0}) {
        const double m2 = std::norm(complex_gamma({0.0, y}));
        CHECK(m2 == doctest::Approx(kPi / (y * std::sinh(kPi * y))).epsilon(1e-12));
    }
}

TEST_CASE("delta power table")
{
    const DeltaPowerTable t(1);
    // delta P = F_1 sin P^(1)
    CHECK(t.coefficient(1, 1) == 1.0);
    CHECK(t.coefficient(1, 0) == 0.0);
    // delta^3, j = 1: derivative of cos P^(1) gives -sin
    CHECK(DeltaPowerTable(3).coefficient(1, 1) == -1.0);
    // delta^2: cos P^(1) + sin^2 P^(2)
    const DeltaPowerTable t2(2);
    CHECK(t2.coefficient(1, 0) == 1.0);
    CHECK(t2.coefficient(2, 2) == 1.0);
    CHECK(DeltaPowerTable::chain_factor({0, 0}, 1, 2) == 0.0);
}
