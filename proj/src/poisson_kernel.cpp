#include "jha/poisson_kernel.hpp"
#include "jha/phi_derivatives.hpp"
#include "jha/special_fn.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace jha {

double q_value(const QPoint& p)
{
    return 1.0 - p.u * std::sin(p.theta / 2.0) * std::sin(p.phi / 2.0)
           - p.v * std::cos(p.theta / 2.0) * std::cos(p.phi / 2.0);
}

double q_value_stst(const QPoint& p)
{
    const double h = std::sin((p.theta - p.phi) / 4.0);
    return 2.0 * h * h + (1.0 - p.u) * std::sin(p.theta / 2.0) * std::sin(p.phi / 2.0)
           + (1.0 - p.v) * std::cos(p.theta / 2.0) * std::cos(p.phi / 2.0);
}

double q_partial_theta(const QPoint& p)
{
    return 0.5 * (-p.u * std::cos(p.theta / 2.0) * std::sin(p.phi / 2.0)
                  + p.v * std::sin(p.theta / 2.0) * std::cos(p.phi / 2.0));
}

double q_partial_phi(const QPoint& p)
{
    return q_partial_theta({p.phi, p.theta, p.u, p.v});
}

double q_partial_theta_phi(const QPoint& p)
{
    return -0.25 * (p.u * std::cos(p.theta / 2.0) * std::cos(p.phi / 2.0)
                    + p.v * std::sin(p.theta / 2.0) * std::sin(p.phi / 2.0));
}

std::string to_string(Representation r)
{
    switch (r) {
    case Representation::series: return "series";
    case Representation::dk_integral: return "dk_integral";
    case Representation::closed_form: return "closed_form";
    }
    return "unknown";
}

void check_off_diagonal(double t, double theta, double phi)
{
    if (std::abs(theta - phi) < 1e-4 && t < 0.05)
        throw SingularityError("kernel evaluation too close to the diagonal for small t");
}

// ---------------------------------------------------------------- series

SeriesKernel::SeriesKernel(const ParamPair& p, int max_theta_order, SeriesOptions opts)
    : params_(p), max_order_(max_theta_order), opts_(opts)
{
    if (max_theta_order < 0)
        throw DomainError("SeriesKernel: negative order");
    constexpr int n_sample = 40;
    constexpr int n_theta = 200;
    std::vector<double> thetas{1e-8, kPi - 1e-8};
    for (int i = 0; i < n_theta; ++i)
        thetas.push_back(kPi * (i + 0.5) / n_theta);
    for (int j = 0; j <= max_theta_order; ++j) {
        const ParamPair s = p.shifted(j, j);
        const double e = std::max({s.alpha() + s.beta() + 2.5, s.alpha() + 0.5, s.beta() + 0.5, 0.0});
        double g = 0.0;
        for (double th : thetas) {
            const auto seq = normalized_sequence(s, n_sample, th);
            for (int n = 0; n <= n_sample; ++n)
                g = std::max(g, std::abs(seq[n]) / std::pow(n + 1.0, e));
        }
        growth_.push_back(2.0 * g);
        exponent_.push_back(e);
    }
    for (int order = 0; order <= max_theta_order; ++order) {
        const DeltaPowerTable table(order);
        std::vector<double> tb(order + 1);
        for (int j = 0; j <= order; ++j)
            tb[j] = table.trig_bound(j);
        trig_bounds_.push_back(tb);
    }
}

double SeriesKernel::theta_factor_bound(int order, int n) const
{
    if (order == 0)
        return growth_[0] * std::pow(n + 1.0, exponent_[0]);
    double acc = 0.0;
    for (int j = 1; j <= order; ++j)
        acc += std::abs(DeltaPowerTable::chain_factor(params_, n, j)) * trig_bounds_[order][j] * growth_[j]
               * std::pow(n + 1.0, exponent_[j]);
    return acc;
}

KernelEvaluation SeriesKernel::evaluate(double t, double theta, double phi, int dt_order, int dtheta_order) const
{
    if (!(t > 0.0))
        throw DomainError("kernel_series: t must be positive");
    if (dt_order < 0 || dtheta_order < 0 || dtheta_order > max_order_)
        throw DomainError("kernel_series: derivative order out of range");
    check_off_diagonal(t, theta, phi);
    theta = clamp_theta(theta);
    phi = clamp_theta(phi);

    auto bound = [&](int n) {
        const double mu = frequency(params_, n);
        return std::pow(mu, dt_order) * std::exp(-t * mu) * theta_factor_bound(dtheta_order, n)
               * theta_factor_bound(0, n);
    };

    KernelEvaluation out;
    out.t = t;
    out.theta = theta;
    out.phi = phi;
    out.dt_order = dt_order;
    out.dtheta_order = dtheta_order;
    out.representation = Representation::series;

    int n_stop = opts_.cap;
    double tail = std::numeric_limits<double>::infinity();
    double b_n = bound(0);
    for (int n = 0; n < opts_.cap; ++n) {
        const double b_next = bound(n + 1);
        if (n >= dtheta_order && b_n > 0.0) {
            const double r = b_next / b_n;
            if (r < 1.0 && b_n / (1.0 - r) < opts_.tol) {
                n_stop = n;
                tail = b_n / (1.0 - r);
                break;
            }
        }
        b_n = b_next;
    }
    if (n_stop == opts_.cap) {
        out.converged = false;
        const double r = bound(opts_.cap + 1) / bound(opts_.cap);
        tail = r < 1.0 ? bound(opts_.cap) / (1.0 - r) : std::numeric_limits<double>::infinity();
    }

    const int n_max = std::max(n_stop - 1, 0);
    const auto p_phi = normalized_sequence_ld(params_, n_max, phi);
    const auto p_theta = delta_power_sequence_ld(params_, dtheta_order, n_max, theta);
    long double acc = 0.0L, mag = 0.0L;
    for (int n = 0; n < n_stop; ++n) {
        const long double mu = frequency(params_, n);
        long double w = std::exp(-static_cast<long double>(t) * mu);
        for (int i = 0; i < dt_order; ++i)
            w *= -mu;
        const long double term = w * p_theta[n] * p_phi[n];
        acc += term;
        mag += std::abs(term);
    }
    out.value = static_cast<double>(acc);
    out.magnitude = static_cast<double>(mag);
    out.truncation_or_order = n_stop;
    out.est_error = tail;
    return out;
}

KernelEvaluation kernel_series(const ParamPair& p, double t, double theta, double phi, int dt_order,
                               int dtheta_order, double tol)
{
    SeriesOptions opts;
    opts.tol = tol;
    return SeriesKernel(p, std::max(dtheta_order, 0), opts).evaluate(t, theta, phi, dt_order, dtheta_order);
}

// ---------------------------------------------------------------- graded Pi rules

GradedPiRule::GradedPiRule(double gamma, int bulk_order, int panel_order, int end_order, double ratio,
                           int max_level)
    : gamma_(gamma), atomic_(gamma == -0.5), ratio_(ratio)
{
    if (!(gamma >= -0.5))
        throw DomainError("GradedPiRule: gamma must be >= -1/2");
    if (!(ratio > 0.0 && ratio < 1.0) || max_level < 0)
        throw DomainError("GradedPiRule: invalid grading");
    if (atomic_) {
        levels_.push_back({{-1.0, 2.0, 0.5}, {1.0, 0.0, 0.5}});
        return;
    }
    using boost::math::lgamma;
    const double e = gamma - 0.5;
    const double cg = std::exp(lgamma(gamma + 1.0) - lgamma(gamma + 0.5)) / std::sqrt(kPi);

    // [-1, 0] with the (1+u)^e endpoint factor in the rule
    const QuadratureRule bulk = gauss_jacobi(bulk_order, 0.0, e);
    std::vector<PiNode> bulk_nodes;
    for (std::size_t i = 0; i < bulk.size(); ++i) {
        const double x = bulk.nodes[i];
        const double u = (x - 1.0) / 2.0;
        const double omu = (3.0 - x) / 2.0;
        bulk_nodes.push_back({u, omu, cg * bulk.weights[i] * std::pow(0.5, e + 1.0) * std::pow(omu, e)});
    }
    const QuadratureRule gl = gauss_legendre(panel_order);
    const QuadratureRule end = gauss_jacobi(end_order, e, 0.0);

    for (int level = 0; level <= max_level; ++level) {
        std::vector<PiNode> nodes = bulk_nodes;
        double hi_om = 1.0; // 1 - left end of the current panel
        for (int k = 0; k < level; ++k) {
            const double lo_om = hi_om * ratio; // 1 - right end
            const double len = hi_om - lo_om;
            for (std::size_t i = 0; i < gl.size(); ++i) {
                const double omu = lo_om + len * (1.0 - gl.nodes[i]) / 2.0;
                const double u = 1.0 - omu;
                nodes.push_back({u, omu, cg * gl.weights[i] * len / 2.0 * std::pow(omu * (2.0 - omu), e)});
            }
            hi_om = lo_om;
        }
        const double h = hi_om;
        for (std::size_t i = 0; i < end.size(); ++i) {
            const double omu = h * (1.0 - end.nodes[i]) / 2.0;
            nodes.push_back(
                {1.0 - omu, omu, cg * end.weights[i] * std::pow(h / 2.0, e + 1.0) * std::pow(2.0 - omu, e)});
        }
        std::sort(nodes.begin(), nodes.end(), [](const PiNode& x, const PiNode& y) { return x.u < y.u; });
        levels_.push_back(std::move(nodes));
    }
}

GradedPiRule::GradedPiRule(double gamma, const DkAccuracy& acc)
    : GradedPiRule(gamma, acc.bulk_order, acc.panel_order, acc.end_order, acc.ratio, acc.max_level)
{
}

int GradedPiRule::level_for(double distance) const
{
    if (atomic_ || !(distance < 2.0))
        return 0;
    if (!(distance > 0.0))
        return max_level();
    const int level = static_cast<int>(std::ceil(std::log(distance / 2.0) / std::log(ratio_)));
    return std::clamp(level, 0, max_level());
}

const std::vector<PiNode>& GradedPiRule::nodes(int level) const
{
    return levels_[std::clamp(level, 0, max_level())];
}

double dk_constant(const ParamPair& p)
{
    return std::pow(2.0, -p.alpha() - p.beta() - 1.0) / jacobi_total_mass(p);
}

DkRules::DkRules(const ParamPair& p, const DkAccuracy& acc)
    : params_(p), acc_(acc), alpha_(p.alpha(), acc), beta_(p.beta(), acc), constant_(dk_constant(p))
{
    if (!p.dk_valid())
        throw DomainError("double-integral representation requires alpha, beta >= -1/2");
    if (acc.richardson) {
        DkAccuracy fine = acc;
        fine.bulk_order *= 2;
        fine.panel_order *= 2;
        fine.end_order *= 2;
        alpha_fine_.emplace(p.alpha(), fine);
        beta_fine_.emplace(p.beta(), fine);
    }
}

DkGeometry::DkGeometry(double theta, double phi)
    : s_theta(std::sin(theta / 2.0)), c_theta(std::cos(theta / 2.0)), s_phi(std::sin(phi / 2.0)),
      c_phi(std::cos(phi / 2.0))
{
    a = s_theta * s_phi;
    b = c_theta * c_phi;
    const double h = std::sin((theta - phi) / 4.0);
    base = 2.0 * h * h;
}

double DkGeometry::q_theta(const PiNode& nu, const PiNode& nv) const
{
    return 0.5 * (-nu.u * c_theta * s_phi + nv.u * s_theta * c_phi);
}

double DkGeometry::q_phi(const PiNode& nu, const PiNode& nv) const
{
    return 0.5 * (-nu.u * s_theta * c_phi + nv.u * c_theta * s_phi);
}

double DkGeometry::q_theta_phi(const PiNode& nu, const PiNode& nv) const
{
    return -0.25 * (nu.u * c_theta * c_phi + nv.u * s_theta * s_phi);
}

std::pair<int, int> dk_levels(const DkGeometry& g, double t_shift, const GradedPiRule& ru, const GradedPiRule& rv)
{
    const double delta = t_shift + g.base;
    const double inf = std::numeric_limits<double>::infinity();
    const double du = g.a > 0.0 ? delta / g.a : inf;
    const double dv = g.b > 0.0 ? delta / g.b : inf;
    return {ru.level_for(du), rv.level_for(dv)};
}

namespace {

struct DkSum {
    double value = 0.0;
    double magnitude = 0.0;
    int nodes = 0;
};

DkSum dk_sum(const ParamPair& p, double t, const DkGeometry& g, int dt_order, int dtheta_order, bool dphi,
             const std::vector<PiNode>& nu, const std::vector<PiNode>& nv)
{
    const double kappa = p.alpha() + p.beta() + 2.0;
    const double t_shift = cosh_shift(t);
    DkSum s;
    s.nodes = static_cast<int>(nu.size() * nv.size());
    if (dt_order == 0 && dtheta_order == 0 && !dphi) {
        const double sh = std::sinh(t / 2.0);
        for (const PiNode& x : nu)
            for (const PiNode& y : nv) {
                const double term = x.w * y.w * sh * std::pow(t_shift + g.q(x, y), -kappa);
                s.value += term;
            }
        s.magnitude = s.value;
        return s;
    }
    const TimeFactor tf(t, dt_order);
    for (const PiNode& x : nu)
        for (const PiNode& y : nv) {
            const double q = g.q(x, y);
            const double d = phi_derivative(kappa, tf, t_shift, q, g.q_theta(x, y), g.q_phi(x, y),
                                            g.q_theta_phi(x, y), dtheta_order, dphi);
            const double term = x.w * y.w * d;
            s.value += term;
            s.magnitude += std::abs(term);
        }
    return s;
}

} // namespace

KernelEvaluation kernel_dk_integral(const ParamPair& p, double t, double theta, double phi, int dt_order,
                                    int dtheta_order, const DkRules& rules, bool dphi)
{
    if (!p.dk_valid())
        throw DomainError("double-integral representation requires alpha, beta >= -1/2");
    if (!(t > 0.0))
        throw DomainError("kernel_dk_integral: t must be positive");
    if (dt_order < 0 || dtheta_order < 0 || dt_order > kMaxDerivativeOrder || dtheta_order > kMaxDerivativeOrder)
        throw DomainError("kernel_dk_integral: derivative order out of range");
    check_off_diagonal(t, theta, phi);
    theta = clamp_theta(theta);
    phi = clamp_theta(phi);

    const DkGeometry g(theta, phi);
    const double t_shift = cosh_shift(t);
    const double c = rules.constant();

    auto run = [&](bool refined) {
        const GradedPiRule& ru = rules.alpha_rule(refined);
        const GradedPiRule& rv = rules.beta_rule(refined);
        const auto [lu, lv] = dk_levels(g, t_shift, ru, rv);
        return dk_sum(p, t, g, dt_order, dtheta_order, dphi, ru.nodes(lu), rv.nodes(lv));
    };

    KernelEvaluation out;
    out.t = t;
    out.theta = theta;
    out.phi = phi;
    out.dt_order = dt_order;
    out.dtheta_order = dtheta_order;
    out.representation = Representation::dk_integral;
    const DkSum base = run(false);
    if (rules.accuracy().richardson) {
        const DkSum fine = run(true);
        out.value = c * fine.value;
        out.magnitude = c * fine.magnitude;
        out.est_error = c * std::abs(fine.value - base.value);
        out.truncation_or_order = fine.nodes;
        out.accuracy_warning = out.est_error > 1e-8 * out.magnitude;
    } else {
        out.value = c * base.value;
        out.magnitude = c * base.magnitude;
        out.est_error = std::numeric_limits<double>::quiet_NaN();
        out.truncation_or_order = base.nodes;
    }
    return out;
}

KernelEvaluation kernel_dk_integral(const ParamPair& p, double t, double theta, double phi, int dt_order,
                                    int dtheta_order)
{
    const DkRules rules(p);
    return kernel_dk_integral(p, t, theta, phi, dt_order, dtheta_order, rules);
}

KernelEvaluation kernel_dk_integral(const ParamPair& p, double t, double theta, double phi, int dt_order,
                                    int dtheta_order, const QuadratureRule& rule_u, const QuadratureRule& rule_v)
{
    if (!p.dk_valid())
        throw DomainError("double-integral representation requires alpha, beta >= -1/2");
    check_off_diagonal(t, theta, phi);
    theta = clamp_theta(theta);
    phi = clamp_theta(phi);
    auto to_nodes = [](const QuadratureRule& r) {
        std::vector<PiNode> nodes;
        for (std::size_t i = 0; i < r.size(); ++i)
            nodes.push_back({r.nodes[i], 1.0 - r.nodes[i], r.weights[i]});
        return nodes;
    };
    const DkGeometry g(theta, phi);
    const DkSum s = dk_sum(p, t, g, dt_order, dtheta_order, false, to_nodes(rule_u), to_nodes(rule_v));
    KernelEvaluation out;
    out.t = t;
    out.theta = theta;
    out.phi = phi;
    out.dt_order = dt_order;
    out.dtheta_order = dtheta_order;
    out.representation = Representation::dk_integral;
    const double c = dk_constant(p);
    out.value = c * s.value;
    out.magnitude = c * s.magnitude;
    out.truncation_or_order = s.nodes;
    out.est_error = std::numeric_limits<double>::quiet_NaN();
    return out;
}

double kernel_closed_form(double t, double theta, double phi)
{
    if (!(t > 0.0))
        throw DomainError("kernel_closed_form: t must be positive");
    const double sh = std::sinh(t);
    const double ht = std::sinh(t / 2.0);
    const double hm = std::sin((theta - phi) / 2.0);
    const double hp = std::sin((theta + phi) / 2.0);
    // cosh t - cos x = 2 sinh^2(t/2) + 2 sin^2(x/2)
    return (sh / (2.0 * ht * ht + 2.0 * hm * hm) + sh / (2.0 * ht * ht + 2.0 * hp * hp)) / (2.0 * kPi);
}

double dk_product_formula_check(const ParamPair& p, int n, double s, double t, int order)
{
    if (!(p.alpha() > -0.5 && p.beta() > -0.5))
        throw DomainError("product formula check requires alpha, beta > -1/2");
    if (!(s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0) || n < 0)
        throw DomainError("product formula check: s, t must lie in (0,1)");
    using boost::math::lgamma;
    const double a = p.alpha(), b = p.beta();
    const double lhs = eval_jacobi(p, n, 1.0 - 2.0 * s * s) * eval_jacobi(p, n, 1.0 - 2.0 * t * t);
    const double log_pref = lgamma(a + b + 1.0) + lgamma(n + a + 1.0) + lgamma(n + b + 1.0) - std::log(kPi)
                            - lgamma(n + 1.0) - lgamma(n + a + b + 1.0) - lgamma(a + 0.5) - lgamma(b + 0.5);
    // integrals of (1-u^2)^{a-1/2} over [-1,1], so the Pi rules can carry the weight
    const double log_wa = 0.5 * std::log(kPi) + lgamma(a + 0.5) - lgamma(a + 1.0);
    const double log_wb = 0.5 * std::log(kPi) + lgamma(b + 0.5) - lgamma(b + 1.0);
    const int q_order = order > 0 ? order : n + 2;
    const QuadratureRule ru = pi_measure_rule(a, q_order);
    const QuadratureRule rv = pi_measure_rule(b, q_order);
    const double lam = a + b + 1.0;
    const double rs = std::sqrt(1.0 - s * s) * std::sqrt(1.0 - t * t);
    double acc = 0.0;
    for (std::size_t i = 0; i < ru.size(); ++i)
        for (std::size_t j = 0; j < rv.size(); ++j)
            acc += ru.weights[i] * rv.weights[j]
                   * eval_gegenbauer(lam, 2 * n, ru.nodes[i] * s * t + rv.nodes[j] * rs);
    const double rhs = std::exp(log_pref + log_wa + log_wb) * acc;
    return std::abs(lhs - rhs);
}

void write_kernel_csv_header(std::ostream& os, bool with_disagreement)
{
    os << "t,theta,phi,M,N,value,est_error,representation";
    if (with_disagreement)
        os << ",disagreement";
    os << "\n";
}

void write_kernel_csv_row(std::ostream& os, const KernelEvaluation& e)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%s", e.t, e.theta, e.phi, e.dt_order,
                  e.dtheta_order, e.value, e.est_error, to_string(e.representation).c_str());
    os << buf;
}

} // namespace jha
