#include "jha/spectral_ops.hpp"
#include "jha/special_fn.hpp"

#include <json.hpp>

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

namespace jha {

double JacobiExpansion::norm() const
{
    double s = 0.0;
    for (const cplx& c : coeffs)
        s += std::norm(c);
    return std::sqrt(s);
}

cplx JacobiExpansion::operator()(double theta) const
{
    return synthesize(*this, theta);
}

cplx synthesize(const JacobiExpansion& f, double theta)
{
    const auto p = normalized_sequence(f.params, f.n_max(), theta);
    cplx acc = 0.0;
    for (int n = 0; n <= f.n_max(); ++n)
        acc += f.coeffs[n] * p[n];
    return acc;
}

JacobiExpansion analyze(const ComplexFn& f, const ParamPair& p, int n_max, int order)
{
    if (n_max < 0)
        throw DomainError("analyze: n_max must be >= 0");
    if (order <= 0)
        order = std::max(128, n_max + 64);
    const QuadratureRule rule = jacobi_measure_rule(p, order);
    std::vector<cplx> c(n_max + 1, 0.0);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const cplx fi = f(rule.nodes[i]);
        const auto seq = normalized_sequence(p, n_max, rule.nodes[i]);
        for (int n = 0; n <= n_max; ++n)
            c[n] += rule.weights[i] * fi * seq[n];
    }
    return {p, std::move(c)};
}

double quadrature_norm(const JacobiExpansion& f, int order)
{
    if (order <= 0)
        order = f.n_max() + 8;
    const QuadratureRule rule = jacobi_measure_rule(f.params, order);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weights[i] * std::norm(synthesize(f, rule.nodes[i]));
    return std::sqrt(s);
}

JacobiExpansion unit_vector(const ParamPair& p, int n, int n_max)
{
    std::vector<cplx> c(std::max(n_max, n) + 1, 0.0);
    c[n] = 1.0;
    return {p, std::move(c)};
}

JacobiExpansion random_expansion(const ParamPair& p, int n_max, std::uint64_t seed, bool unit_norm)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<cplx> c(n_max + 1);
    for (cplx& x : c) {
        const double re = nd(rng);
        const double im = nd(rng);
        x = {re, im};
    }
    JacobiExpansion f(p, std::move(c));
    if (unit_norm) {
        const double nrm = f.norm();
        for (cplx& x : f.coeffs)
            x /= nrm;
    }
    return f;
}

JacobiExpansion project_zero_mode(const JacobiExpansion& f)
{
    JacobiExpansion g = f;
    if (f.params.critical() && !g.coeffs.empty()) {
        g.coeffs[0] = 0.0;
        g.projected = true;
    }
    return g;
}

JacobiExpansion apply_imaginary_power(const JacobiExpansion& f, double gamma)
{
    if (gamma == 0.0)
        throw DomainError("imaginary power requires gamma != 0");
    JacobiExpansion g = project_zero_mode(f);
    for (int n = 0; n <= g.n_max(); ++n) {
        const double mu = frequency(g.params, n);
        if (mu == 0.0)
            continue;
        g.coeffs[n] *= std::exp(cplx(0.0, -2.0 * gamma * std::log(mu)));
    }
    return g;
}

JacobiExpansion apply_semigroup(const JacobiExpansion& f, double t)
{
    if (!(t > 0.0))
        throw DomainError("semigroup requires t > 0");
    JacobiExpansion g = f;
    for (int n = 0; n <= g.n_max(); ++n)
        g.coeffs[n] *= std::exp(-t * frequency(g.params, n));
    return g;
}

RieszTransform::RieszTransform(JacobiExpansion f, int order) : f_(std::move(f)), order_(order)
{
    if (order < 1)
        throw DomainError("Riesz transform order must be >= 1");
}

cplx RieszTransform::operator()(double theta) const
{
    const auto d = delta_power_sequence(f_.params, order_, f_.n_max(), theta);
    cplx acc = 0.0;
    for (int n = 1; n <= f_.n_max(); ++n)
        acc += std::pow(frequency(f_.params, n), -order_) * f_.coeffs[n] * d[n];
    return acc;
}

double RieszTransform::l2_norm(int quad_order) const
{
    if (quad_order <= 0)
        quad_order = f_.n_max() + order_ + 4;
    const QuadratureRule rule = jacobi_measure_rule(f_.params, quad_order);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weights[i] * std::norm((*this)(rule.nodes[i]));
    return std::sqrt(s);
}

RieszTransform apply_riesz(const JacobiExpansion& f, int order)
{
    return RieszTransform(f, order);
}

FforCoefficients ffor_coefficients(const ParamPair& p, int n)
{
    const double a = p.alpha(), b = p.beta();
    const double nn = n;
    FforCoefficients c;
    c.A = (a + 1.0) * (b + 1.0) * (a + b + 2.0 * nn);
    c.B = std::sqrt(std::max((nn - 1.0) * (nn + a + b + 2.0), 0.0))
          * ((nn - 1.0) * (a + b + 2.0) + (a + 1.0) * (a + 1.0) + (b + 1.0) * (b + 1.0));
    c.C = (b - a) * std::sqrt((nn + b) * (nn + a + 1.0)) * (nn + a);
    c.D = (b - a) * std::sqrt((nn + a) * (nn + b + 1.0)) * (nn + b);
    c.E = std::sqrt(nn * (nn + a + b + 1.0)) * ((nn - 1.0) * (a + b + 2.0) + 2.0 * (a + 1.0) * (b + 1.0));
    return c;
}

namespace {

long double normalized_ld(const ParamPair& p, int n, double theta)
{
    if (n < 0)
        return 0.0L;
    return normalized_sequence_ld(p, n, theta)[n];
}

} // namespace

double ffor_residual(const ParamPair& p, int n, double theta)
{
    theta = clamp_theta(theta);
    const FforCoefficients k = ffor_coefficients(p, n);
    const long double th = theta;
    const long double s = std::sin(th / 2), c = std::cos(th / 2);
    const long double lhs = k.A * std::cos(th) * normalized_ld(p.shifted(1, 1), n - 1, theta);
    const long double rhs = k.B * s * s * c * c * normalized_ld(p.shifted(2, 2), n - 2, theta)
                            + k.C * s * s * normalized_ld(p.shifted(2, 0), n - 1, theta)
                            + k.D * c * c * normalized_ld(p.shifted(0, 2), n - 1, theta)
                            + k.E * normalized_ld(p, n, theta);
    return static_cast<double>(lhs - rhs);
}

std::vector<DecompTerm> decompose_delta_N(const ParamPair& params, int n, int order)
{
    if (order < 1)
        throw DomainError("decompose_delta_N: order must be >= 1");
    if (n < 0)
        throw DomainError("decompose_delta_N: negative degree");
    struct Pending {
        double coef;
        int nu, eta, pc, k, a_off, b_off;
    };
    const DeltaPowerTable table(order);
    std::vector<Pending> work;
    for (int j = 1; j <= order; ++j) {
        const double f = DeltaPowerTable::chain_factor(params, n, j);
        if (f == 0.0)
            continue;
        for (int s = 0; s <= j; ++s) {
            const double k = table.coefficient(j, s);
            if (k == 0.0)
                continue;
            // sin^s = 2^s (sin/2)^s (cos/2)^s
            work.push_back({f * k * std::pow(2.0, s), s, s, j - s, n - j, j, j});
        }
    }
    std::map<std::tuple<int, int, int>, double> done;
    while (!work.empty()) {
        const Pending w = work.back();
        work.pop_back();
        if (w.k < 0 || w.coef == 0.0)
            continue;
        if (w.pc == 0) {
            done[{w.nu, w.eta, n - w.k}] += w.coef;
            continue;
        }
        // cos P_k^{a',b'} via the identity with base parameters (a'-1, b'-1)
        const ParamPair base = params.shifted(w.a_off - 1, w.b_off - 1);
        const FforCoefficients c = ffor_coefficients(base, w.k + 1);
        const double s = w.coef / c.A;
        work.push_back({s * c.B, w.nu + 2, w.eta + 2, w.pc - 1, w.k - 1, w.a_off + 1, w.b_off + 1});
        work.push_back({s * c.C, w.nu + 2, w.eta, w.pc - 1, w.k, w.a_off + 1, w.b_off - 1});
        work.push_back({s * c.D, w.nu, w.eta + 2, w.pc - 1, w.k, w.a_off - 1, w.b_off + 1});
        work.push_back({s * c.E, w.nu, w.eta, w.pc - 1, w.k + 1, w.a_off - 1, w.b_off - 1});
    }
    std::vector<DecompTerm> out;
    for (const auto& [key, coef] : done)
        if (coef != 0.0)
            out.push_back({coef, std::get<0>(key), std::get<1>(key), std::get<2>(key)});
    return out;
}

double eval_decomposition(const ParamPair& params, int n, const std::vector<DecompTerm>& terms, double theta)
{
    theta = clamp_theta(theta);
    const long double th = theta;
    const long double s = std::sin(th / 2), c = std::cos(th / 2);
    long double acc = 0.0L;
    for (const DecompTerm& t : terms)
        acc += t.coef * std::pow(s, t.nu) * std::pow(c, t.eta)
               * normalized_ld(params.shifted(t.nu, t.eta), n - t.p, theta);
    return static_cast<double>(acc);
}

TGrid TGrid::log_spaced(double t_min, double t_max, int count)
{
    if (!(t_min > 0.0) || !(t_max > t_min) || count < 2)
        throw DomainError("TGrid: invalid range");
    TGrid g;
    g.t_min = t_min;
    g.t_max = t_max;
    const double lo = std::log(t_min), hi = std::log(t_max);
    for (int i = 0; i < count; ++i)
        g.points.push_back(std::exp(lo + (hi - lo) * i / (count - 1)));
    return g;
}

TGrid TGrid::refined() const
{
    TGrid g;
    g.t_min = t_min;
    g.t_max = t_max;
    for (std::size_t i = 0; i < points.size(); ++i) {
        g.points.push_back(points[i]);
        if (i + 1 < points.size())
            g.points.push_back(std::sqrt(points[i] * points[i + 1]));
    }
    return g;
}

double maximal_operator(const JacobiExpansion& f, double theta, const TGrid& grid)
{
    const auto p = normalized_sequence(f.params, f.n_max(), theta);
    std::vector<cplx> a(f.coeffs.size());
    std::vector<double> mu(f.coeffs.size());
    cplx at_zero = 0.0, at_inf = 0.0;
    for (int n = 0; n <= f.n_max(); ++n) {
        a[n] = f.coeffs[n] * p[n];
        mu[n] = frequency(f.params, n);
        at_zero += a[n];
        if (mu[n] == 0.0)
            at_inf += a[n];
    }
    auto modulus = [&](double t) {
        cplx s = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n)
            s += std::exp(-t * mu[n]) * a[n];
        return std::abs(s);
    };
    double best = std::max(std::abs(at_zero), std::abs(at_inf));
    const std::vector<double>& t = grid.points;
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        v[i] = modulus(t[i]);
        best = std::max(best, v[i]);
    }
    // polish interior discrete peaks in log t
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        if (v[i] < v[i - 1] || v[i] < v[i + 1])
            continue;
        const auto r = boost::math::tools::brent_find_minima(
            [&](double s) { return -modulus(std::exp(s)); }, std::log(t[i - 1]), std::log(t[i + 1]), 52);
        best = std::max(best, -r.second);
    }
    return best;
}

double square_function_t_max(const JacobiExpansion& f, int dt_order, int dtheta_order)
{
    double mu_min = std::numeric_limits<double>::infinity();
    for (int n = std::max(dtheta_order > 0 ? 1 : 0, 0); n <= f.n_max(); ++n) {
        const double mu = frequency(f.params, n);
        if (f.coeffs[n] != 0.0 && mu > 0.0)
            mu_min = std::min(mu_min, mu);
    }
    if (!std::isfinite(mu_min))
        return 1.0;
    const int k = 2 * dt_order + 2 * dtheta_order - 1;
    double t = 1.0;
    for (int it = 0; it < 50; ++it)
        t = std::max(1.0, (std::log(1e18) + k * std::log(t)) / (2.0 * mu_min));
    return t;
}

QuadratureRule square_function_rule(const JacobiExpansion& f, int dt_order, int dtheta_order)
{
    return log_t_rule(1e-6, square_function_t_max(f, dt_order, dtheta_order), 1.0, 20);
}

double square_function(const JacobiExpansion& f, double theta, int dt_order, int dtheta_order,
                       const QuadratureRule& t_quad)
{
    if (dt_order < 0 || dtheta_order < 0 || dt_order + dtheta_order == 0)
        throw DomainError("square function requires M + N > 0");
    const auto d = delta_power_sequence(f.params, dtheta_order, f.n_max(), theta);
    std::vector<cplx> a(f.coeffs.size());
    std::vector<double> mu(f.coeffs.size());
    for (int n = 0; n <= f.n_max(); ++n) {
        mu[n] = frequency(f.params, n);
        a[n] = f.coeffs[n] * d[n] * std::pow(-mu[n], dt_order);
    }
    const int k = 2 * dt_order + 2 * dtheta_order - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < t_quad.size(); ++i) {
        const double t = t_quad.nodes[i];
        cplx s = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n)
            s += std::exp(-t * mu[n]) * a[n];
        acc += t_quad.weights[i] * std::norm(s) * std::pow(t, k);
    }
    return std::sqrt(acc);
}

double square_function(const JacobiExpansion& f, double theta, int dt_order, int dtheta_order)
{
    return square_function(f, theta, dt_order, dtheta_order, square_function_rule(f, dt_order, dtheta_order));
}

namespace {

void require_adjoint_range(const ParamPair& p)
{
    if (!(p.alpha() + p.beta() > -0.5))
        throw DomainError("adjoint demo requires alpha + beta > -1/2");
}

double adjoint_factor(const ParamPair& p, double theta)
{
    // delta* P_0 / P_0, since delta P_0 = 0
    return -(p.alpha() + 0.5) / std::tan(theta / 2.0) + (p.beta() + 0.5) * std::tan(theta / 2.0);
}

} // namespace

double adjoint_delta_demo(const ParamPair& p, double theta)
{
    require_adjoint_range(p);
    theta = clamp_theta(theta);
    return std::abs(adjoint_factor(p, theta)) * norm_constant(p, 0) / std::abs(p.lambda());
}

double adjoint_delta_direct(const ParamPair& p, double theta, const QuadratureRule& t_quad)
{
    require_adjoint_range(p);
    theta = clamp_theta(theta);
    const double mu0 = frequency(p, 0);
    const double g = adjoint_factor(p, theta) * norm_constant(p, 0);
    double acc = 0.0;
    for (std::size_t i = 0; i < t_quad.size(); ++i) {
        const double t = t_quad.nodes[i];
        const double v = std::exp(-t * mu0) * g;
        acc += t_quad.weights[i] * v * v * t;
    }
    return std::sqrt(acc);
}

std::string to_json(const JacobiExpansion& f)
{
    nlohmann::ordered_json j;
    j["alpha"] = f.params.alpha();
    j["beta"] = f.params.beta();
    j["n_max"] = f.n_max();
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const cplx& c : f.coeffs)
        arr.push_back({c.real(), c.imag()});
    j["coeffs"] = arr;
    return j.dump();
}

JacobiExpansion expansion_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError(std::string("expansion JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("alpha") || !j.contains("beta") || !j.contains("coeffs")
        || !j["coeffs"].is_array())
        throw DomainError("expansion JSON: expected {alpha, beta, n_max, coeffs}");
    const ParamPair p(j["alpha"].get<double>(), j["beta"].get<double>());
    std::vector<cplx> c;
    for (const auto& e : j["coeffs"]) {
        if (e.is_number())
            c.emplace_back(e.get<double>(), 0.0);
        else if (e.is_array() && e.size() == 2)
            c.emplace_back(e[0].get<double>(), e[1].get<double>());
        else
            throw DomainError("expansion JSON: each coefficient must be [re, im]");
    }
    if (c.empty())
        throw DomainError("expansion JSON: empty coefficient list");
    if (j.contains("n_max") && j["n_max"].get<int>() != static_cast<int>(c.size()) - 1)
        throw DomainError("expansion JSON: n_max does not match the coefficient count");
    return {p, std::move(c)};
}

void write_samples_csv(std::ostream& os, const std::vector<double>& thetas, const std::vector<cplx>& values)
{
    os << "theta,re,im\n";
    char buf[128];
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", thetas[i], values[i].real(), values[i].imag());
        os << buf;
    }
}

} // namespace jha
