#include "jha/cz_verifier.hpp"
#include "jha/measure_quad.hpp"
#include "jha/poisson_kernel.hpp"
#include "jha/scalar_kernels.hpp"
#include "jha/special_fn.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

using namespace jha;

namespace {

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

VerifyOptions small_opts()
{
    VerifyOptions o;
    o.grid = {0.05, kPi - 0.05, 14, 0.05};
    o.corner_zoom = false;
    return o;
}

// disc Poisson kernel in the (-1/2,-1/2) normalization, written out directly
double disc(double t, double theta, double phi)
{
    auto p = [&](double x) { return std::sinh(t) / (std::cosh(t) - std::cos(x)); };
    return (p(theta - phi) + p(theta + phi)) / (2.0 * kPi);
}

double disc_dt(double t, double theta, double phi)
{
    auto p = [&](double x) {
        const double c = std::cos(x), den = std::cosh(t) - c;
        return (1.0 - c * std::cosh(t)) / (den * den);
    };
    return (p(theta - phi) + p(theta + phi)) / (2.0 * kPi);
}

// int_0^inf d_theta H_t dt for the disc kernel
double disc_riesz1(double theta, double phi)
{
    return -(1.0 / std::tan((theta - phi) / 2.0) + 1.0 / std::tan((theta + phi) / 2.0)) / (2.0 * kPi);
}

// int_0^inf f(t) dt by tanh-sinh in s = ln t
template <typename F>
double t_integral(F f, double lo = -30.0, double hi = 5.5)
{
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([&](double s) { const double t = std::exp(s); return f(t) * t; }, lo, hi);
}

} // namespace

TEST_CASE("Riesz kernels in the disc case")
{
    const ParamPair p(-0.5, -0.5);
    const RieszKernel r1(p, 1), r2(p, 2);
    for (auto [th, ph] : {std::pair{0.8, 1.3}, {0.05, 0.09}, {3.0, 3.1}, {1.0, 2.9}}) {
        CHECK(rel(r1.value(th, ph), disc_riesz1(th, ph)) < 1e-7);
        const auto [gt, gp] = r1.gradient(th, ph);
        const double h = 1e-3 * std::abs(th - ph);
        CHECK(rel(gt, oracle::diff5([&](double x) { return disc_riesz1(x, ph); }, th, h)) < 1e-6);
        CHECK(rel(gp, oracle::diff5([&](double x) { return disc_riesz1(th, x); }, ph, h)) < 1e-6);
        // second derivative of the disc kernel integrates to a constant off the diagonal
        CHECK(rel(r2.value(th, ph), 1.0 / kPi) < 1e-8);
    }
}

TEST_CASE("scalar kernels against direct t-quadrature")
{
    const ParamPair p(0.0, 0.0);
    const DkRules rules(p);
    const double th = 0.8, ph = 1.3;
    for (int n : {1, 2}) {
        const RieszKernel r(p, n);
        const double ref =
            t_integral([&](double t) { return kernel_dk_integral(p, t, th, ph, 0, n, rules).value * std::pow(t, n - 1); })
            / std::tgamma(n);
        CHECK(rel(r.value(th, ph), ref) < 1e-4);
    }
    const ImaginaryPowerKernel k(p, 1.0);
    auto h = [&](double t) { return kernel_dk_integral(p, t, th, ph, 0, 0, rules).value; };
    const std::complex<double> ref(t_integral([&](double t) { return h(t) * std::cos(2.0 * std::log(t)) / t; }),
                                   t_integral([&](double t) { return h(t) * std::sin(2.0 * std::log(t)) / t; }));
    const auto v = k.value(th, ph);
    CHECK(std::abs(v - ref / complex_gamma({0.0, 2.0})) < 1e-4 * std::abs(v));

    const auto [gt, gp] = k.gradient(th, ph);
    const double e = 1e-3;
    CHECK(std::abs(gt - (k.value(th + e, ph) - k.value(th - e, ph)) / (2 * e)) < 1e-3 * std::abs(gt));
    CHECK(std::abs(gp - (k.value(th, ph + e) - k.value(th, ph - e)) / (2 * e)) < 1e-3 * std::abs(gp));
}

TEST_CASE("scalar kernel preconditions")
{
    CHECK_THROWS_AS(ImaginaryPowerKernel(ParamPair(-0.5, -0.5), 1.0), DomainError);
    CHECK_THROWS_AS(ImaginaryPowerKernel(ParamPair(0.0, 0.0), 0.0), DomainError);
    const RieszKernel r(ParamPair(0.3, 1.7), 1);
    CHECK_THROWS_AS(r.value(1.0, 1.0), SingularityError);
    CHECK_THROWS_AS(r.value(-0.1, 1.0), DomainError);
}

TEST_CASE("vector kernels in the disc case")
{
    const ParamPair p(-0.5, -0.5);
    const VectorKernel maxk(p, 0, 0);
    CHECK(maxk.sup_norm());
    const double th = 0.9, ph = 1.6;
    const auto s = maxk.samples(th, ph);
    REQUIRE(s.size() == maxk.t_nodes().size() + 1);
    double grid_max = 0.0;
    for (std::size_t i = 0; i < maxk.t_nodes().size(); ++i) {
        if (maxk.t_nodes()[i] < VectorKernel::cutoff_ratio * std::abs(th - ph)) {
            CHECK(s[i] == 0.0);
            continue;
        }
        CHECK(std::abs(s[i] - disc(maxk.t_nodes()[i], th, ph)) < 1e-10 * std::abs(s[i]) + 1e-14);
        grid_max = std::max(grid_max, std::abs(disc(maxk.t_nodes()[i], th, ph)));
    }
    CHECK(s.back() == doctest::Approx(1.0 / kPi).epsilon(1e-12));
    CHECK(maxk.norm(s) == doctest::Approx(std::max(grid_max, 1.0 / kPi)).epsilon(1e-10));

    const VectorKernel gv(p, 1, 0);
    const double ref = std::sqrt(t_integral([&](double t) { const double d = disc_dt(t, th, ph); return d * d * t; }));
    // fixed rule, four Gauss points per unit of ln t
    CHECK(rel(gv.norm(gv.samples(th, ph)), ref) < 1e-3);
    CHECK(gv.distance(gv.samples(th, ph), gv.samples(th, ph)) == 0.0);
}

TEST_CASE("vector kernel norms are symmetric in theta and phi")
{
    for (const ParamPair& p : {ParamPair(0.0, 0.0), ParamPair(0.3, 1.7)}) {
        const VectorKernel k(p, 0, 0);
        CHECK(rel(k.norm(k.samples(0.4, 2.2)), k.norm(k.samples(2.2, 0.4))) < 1e-12);
    }
}

TEST_CASE("kernel tags")
{
    for (const auto& k : KernelSpec::standard())
        CHECK(KernelSpec::parse(k.tag()).tag() == k.tag());
    CHECK(KernelSpec::standard().size() == 7);
    CHECK(KernelSpec::parse("g21").dt_order == 2);
    CHECK(KernelSpec::parse("imag0.5").gamma == 0.5);
    CHECK_THROWS_AS(KernelSpec::parse("imag0"), DomainError);
    CHECK_THROWS_AS(KernelSpec::parse("g00"), DomainError);
    CHECK_THROWS_AS(KernelSpec::parse("riesz0"), DomainError);
    CHECK_THROWS_AS(KernelSpec::parse("cauchy"), DomainError);
}

TEST_CASE("grid guards")
{
    GridSpec g;
    CHECK(g.points().size() == 60);
    CHECK(g.refined().count == 119);
    const auto a = g.points(), b = g.refined().points();
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - b[2 * i]) < 1e-15);
    g.sep_min = 0.0;
    CHECK_THROWS_AS(g.validate(), SingularityError);
    VerifyOptions o = small_opts();
    o.grid.sep_min = 0.0;
    CHECK_THROWS_AS(check_growth(KernelSpec::parse("riesz1"), ParamPair(0.0, 0.0), o), SingularityError);
}

TEST_CASE("growth reports: permutation, symmetry, threads")
{
    const ParamPair p(0.3, 1.7);
    const KernelSpec k = KernelSpec::parse("maximal");
    VerifyOptions o = small_opts();
    const EstimateReport base = check_growth(k, p, o);
    CHECK(std::isfinite(base.empirical_sup));
    CHECK(base.empirical_sup > 0.0);

    o.order_seed = 99;
    CHECK(std::abs(check_growth(k, p, o).empirical_sup - base.empirical_sup) <= 1e-12 * base.empirical_sup);
    o.order_seed = 0;
    o.workers = 3;
    CHECK(check_growth(k, p, o).empirical_sup == base.empirical_sup);
    o.workers = 1;
    // the maximal kernel is symmetric, and so is the grid
    o.transpose = true;
    CHECK(std::abs(check_growth(k, p, o).empirical_sup - base.empirical_sup) <= 1e-12 * base.empirical_sup);
}

TEST_CASE("smoothness reports")
{
    const ParamPair p(0.3, 1.7);
    const VerifyOptions o = small_opts();
    const auto r1 = check_smoothness(KernelSpec::parse("riesz1"), p, SmoothnessMode::gradient, o);
    CHECK(std::isfinite(r1.empirical_sup));
    CHECK(r1.estimate_id == "smoothness:riesz1:gradient");

    const auto gv = check_smoothness(KernelSpec::parse("gV"), p, SmoothnessMode::difference, o);
    CHECK(std::isfinite(gv.empirical_sup));
    CHECK(gv.extra("zero_distance_rejections") > 0.0);
    CHECK(gv.extra("combos") > 0.0);
    CHECK_THROWS_AS(check_smoothness(KernelSpec::parse("gV"), p, SmoothnessMode::gradient, o), DomainError);

    const auto r1d = check_smoothness(KernelSpec::parse("riesz1"), p, SmoothnessMode::difference, o);
    CHECK(std::isfinite(r1d.empirical_sup));
    CHECK(r1d.empirical_sup > 0.0);
}

TEST_CASE("fault injection makes growth unbounded")
{
    const ParamPair p(0.0, 0.0);
    const KernelSpec k = KernelSpec::parse("maximal");
    VerifyOptions o = small_opts();
    const auto healthy = check_growth_sweep(k, p, o);
    CHECK(healthy.passed);
    CHECK(healthy.extra("trend") < 1.05);
    o.fault_exponent = 0.25;
    const auto broken = check_growth_sweep(k, p, o);
    CHECK_FALSE(broken.passed);
    CHECK(broken.extra("trend") >= 2.0);
    CHECK_FALSE(check_growth(k, p, o).passed);
}

TEST_CASE("bridge estimate")
{
    const VerifyOptions o = small_opts();
    SUBCASE("atomic case is a four-point sum")
    {
        const ParamPair p(-0.5, -0.5);
        const auto r = check_bridge(p, o);
        REQUIRE(r.size() == 2);
        auto sup_for = [&](const GridSpec& g, double e, bool times_d) {
            const auto pts = g.points();
            double sup = 0.0;
            for (double th : pts)
                for (double ph : pts) {
                    const double d = std::abs(th - ph);
                    if (d < g.sep_min)
                        continue;
                    double s = 0.0;
                    for (double u : {-1.0, 1.0})
                        for (double v : {-1.0, 1.0})
                            s += 0.25 * std::pow(q_value({th, ph, u, v}), -e);
                    const double m = oracle::interval_measure_quad(-0.5, -0.5, std::max(0.0, th - d), std::min(kPi, th + d));
                    sup = std::max(sup, s * m * (times_d ? d : 1.0));
                }
            return sup;
        };
        CHECK(rel(r[0].empirical_sup, sup_for(o.grid, 0.5, false)) < 1e-8);
        CHECK(rel(r[1].empirical_sup, sup_for(o.grid, 1.0, true)) < 1e-8);
        CHECK(rel(r[0].extra("refined_sup"), sup_for(o.grid.refined(), 0.5, false)) < 1e-8);
    }
    SUBCASE("finite, and ordered by the integrand exponent")
    {
        for (const ParamPair& p : {ParamPair(0.3, 1.7), ParamPair(-0.5, 2.0)}) {
            const auto r = check_bridge(p, o);
            CHECK(std::isfinite(r[0].empirical_sup));
            CHECK(std::isfinite(r[1].empirical_sup));
            CHECK(r[1].empirical_sup >= r[0].empirical_sup * o.grid.sep_min / std::sqrt(2.0));
        }
    }
}

TEST_CASE("trig lemma")
{
    // u = v = 1 limit: |q_theta| / sqrt(q) = cos(d/4) / sqrt(2)
    for (double d : {1.0, 0.1, 1e-3}) {
        const QPoint pt{1.2 + d, 1.2, 1.0, 1.0};
        CHECK(std::abs(q_partial_theta(pt)) / std::sqrt(q_value_stst(pt))
              == doctest::Approx(std::cos(d / 4.0) / std::sqrt(2.0)).epsilon(1e-10));
    }
    const auto r = check_trig(20);
    CHECK(r.passed);
    CHECK(r.empirical_sup <= 1.0 / std::sqrt(2.0) + 1e-6);
    CHECK(r.empirical_sup > 0.69);
    CHECK(r.extra("gap_to_inv_sqrt2") >= -1e-6);
}

TEST_CASE("comparability of q")
{
    // theta~ = theta gives ratio exactly 1
    const QPoint a{0.7, 2.0, 0.3, 1.0};
    CHECK(q_value_stst(a) / q_value_stst(a) == 1.0);

    const auto r = check_comp(100000);
    CHECK(r.passed);
    CHECK(r.empirical_sup >= 1.0);
    CHECK(std::isfinite(r.empirical_sup));
    CHECK(check_comp(100000).empirical_sup == r.empirical_sup);

    const auto bad = check_comp(100000, 20240611, true);
    CHECK(bad.negative_control);
    CHECK_FALSE(bad.passed);
    CHECK(bad.as_expected());
    CHECK(bad.empirical_sup > 100.0 * r.empirical_sup);
}

TEST_CASE("Pi-measure integral lemma")
{
    SUBCASE("atomic closed form")
    {
        // ratio = (1 + ((A-B)/(A+B))^lambda) / 2, largest at the smallest B on the grid
        for (double lambda : {0.5, 1.0, 2.5}) {
            const auto r = check_lem58(-0.5, lambda, 40);
            const double x = 1.0 - 1e-6;
            CHECK(r.empirical_sup == doctest::Approx((1.0 + std::pow(x / (2.0 - x), lambda)) / 2.0).epsilon(1e-12));
            CHECK(r.passed);
        }
    }
    SUBCASE("small B limit and a nonatomic case")
    {
        const auto r = check_lem58(1.0, 0.5);
        CHECK(r.passed);
        CHECK(r.extra("small_B_ratio") == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(check_lem58(0.3, 2.0).passed);
    }
    CHECK_THROWS_AS(check_lem58(-0.7, 1.0), DomainError);
    CHECK_THROWS_AS(check_lem58(0.0, 0.0), DomainError);
}

TEST_CASE("Phi derivative bounds")
{
    SUBCASE("critical row in the disc case")
    {
        const auto rows = check_phi_derivative_bounds(ParamPair(-0.5, -0.5), 1, 0);
        const auto it = std::find_if(rows.begin(), rows.end(),
                                     [](const EstimateReport& r) { return r.estimate_id == "phi_bounds:M1N0:t>1,N=0,critical"; });
        REQUIRE(it != rows.end());
        CHECK(it->passed);
    }
    SUBCASE("growth form")
    {
        for (const ParamPair& p : {ParamPair(0.0, 0.0), ParamPair(0.3, 1.7)}) {
            const auto rows = check_phi_derivative_bounds(p, 0, 0);
            CHECK(rows.back().estimate_id == "phi_bounds:M0N0:growth_form");
            for (const auto& r : rows)
                CHECK(r.passed);
        }
    }
    CHECK_THROWS_AS(check_phi_derivative_bounds(ParamPair(0.0, 0.0), 3, 2), DomainError);
}

TEST_CASE("ball measure and doubling")
{
    const VerifyOptions o = small_opts();
    for (const ParamPair& p : {ParamPair(-0.5, -0.5), ParamPair(0.3, 1.7)}) {
        CHECK(check_ball(p, o).passed);
        const auto d = check_doubling(p, o);
        CHECK(d.passed);
        CHECK(d.empirical_sup >= 1.0);
    }
}

TEST_CASE("suite plumbing")
{
    SUBCASE("empty config")
    {
        const SuiteResult r = run_suite(SuiteConfig{});
        CHECK(r.reports.empty());
        CHECK(r.exit_code() == 0);
        CHECK(reports_to_json(r.reports) == "[]");
    }
    SUBCASE("unknown check")
    {
        SuiteConfig c;
        c.checks = {"nonsense"};
        CHECK_THROWS_AS(run_suite(c), DomainError);
    }
    SUBCASE("small run, json fields in order")
    {
        SuiteConfig c;
        c.panel = {ParamPair(0.0, 0.0)};
        c.kernels = {KernelSpec::parse("riesz1")};
        c.checks = {"growth", "ball"};
        c.options = small_opts();
        const SuiteResult r = run_suite(c);
        REQUIRE(r.reports.size() == 3);
        CHECK(r.reports[0].estimate_id == "growth:riesz1");
        const std::string js = reports_to_json(r.reports);
        CHECK(js.find("\"estimate_id\"") < js.find("\"params\""));
        CHECK(js.find("\"passed\"") < js.find("\"threshold_used\""));
        CHECK(reports_to_json(run_suite(c).reports) == js);
    }
    SUBCASE("fault injection fails the suite")
    {
        SuiteConfig c;
        c.panel = {ParamPair(0.0, 0.0)};
        c.kernels = {KernelSpec::parse("maximal")};
        c.checks = {"growth", "sweep"};
        c.options = small_opts();
        CHECK(run_suite(c).exit_code() == 0);
        c.inject_growth_fault = true;
        CHECK(run_suite(c).exit_code() == 1);
    }
    SUBCASE("imaginary powers are skipped where undefined")
    {
        SuiteConfig c;
        c.panel = {ParamPair(-0.5, -0.5)};
        c.kernels = {KernelSpec::parse("imag")};
        c.checks = {"growth"};
        c.options = small_opts();
        CHECK(run_suite(c).reports.empty());
    }
}
