#include "jha/measure_quad.hpp"
#include "jha/special_fn.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace jha {

std::string MeasureId::str() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
    case Kind::jacobi_measure: os << "jacobi_measure(" << a << "," << b << ")"; break;
    case Kind::pi_measure: os << "pi_measure(" << a << ")"; break;
    case Kind::t_panel: os << "t_panel"; break;
    case Kind::interval: os << "interval"; break;
    }
    return os.str();
}

double QuadratureRule::total_mass() const
{
    double s = 0.0;
    for (double w : weights)
        s += w;
    return s;
}

namespace {

double log_weight_mass(double a, double b)
{
    using boost::math::lgamma;
    return (a + b + 1.0) * std::log(2.0) + lgamma(a + 1.0) + lgamma(b + 1.0) - lgamma(a + b + 2.0);
}

// orthonormal p_n and its derivative, p_0 = 1
std::pair<double, double> orthonormal_with_derivative(double a, double b, int n, double x)
{
    double pm1 = 0.0, p = 1.0, dpm1 = 0.0, dp = 0.0;
    for (int k = 0; k < n; ++k) {
        const double ak = jacobi_diag(a, b, k);
        const double bk = jacobi_offdiag(a, b, k);
        const double bk1 = jacobi_offdiag(a, b, k + 1);
        const double pn = ((x - ak) * p - bk * pm1) / bk1;
        const double dpn = ((x - ak) * dp + p - bk * dpm1) / bk1;
        pm1 = p;
        p = pn;
        dpm1 = dp;
        dp = dpn;
    }
    return {p, dp};
}

} // namespace

QuadratureRule gauss_jacobi(int order, double a, double b)
{
    return gauss_jacobi(order, a, b, std::exp(log_weight_mass(a, b)));
}

QuadratureRule gauss_jacobi(int order, double a, double b, double mass)
{
    if (order < 1)
        throw DomainError("gauss_jacobi: order must be >= 1");
    if (!(a > -1.0) || !(b > -1.0))
        throw DomainError("gauss_jacobi: exponents must exceed -1");
    Eigen::VectorXd diag(order);
    Eigen::VectorXd sub(std::max(order - 1, 0));
    for (int k = 0; k < order; ++k)
        diag[k] = jacobi_diag(a, b, k);
    for (int k = 1; k < order; ++k)
        sub[k - 1] = jacobi_offdiag(a, b, k);

    std::vector<double> x(order);
    if (order == 1) {
        x[0] = diag[0];
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        for (int i = 0; i < order; ++i)
            x[i] = es.eigenvalues()[i];
    }

    // Newton polish on p_order
    for (double& xi : x) {
        for (int it = 0; it < 3; ++it) {
            const auto [p, dp] = orthonormal_with_derivative(a, b, order, xi);
            if (dp == 0.0)
                break;
            const double step = p / dp;
            const double next = std::clamp(xi - step, -1.0, 1.0);
            if (std::abs(next - xi) > 1e-3 * (1.0 - std::abs(xi)) + 1e-300)
                break; // refuse wild steps
            xi = next;
        }
    }
    std::sort(x.begin(), x.end());

    QuadratureRule rule;
    rule.order = order;
    rule.measure = {MeasureId::Kind::interval, a, b};
    rule.nodes = x;
    rule.weights.resize(order);
    const double p0 = 1.0 / std::sqrt(mass);
    for (int i = 0; i < order; ++i) {
        // Christoffel numbers
        double pm1 = 0.0, p = p0, sum = p0 * p0;
        for (int k = 0; k + 1 < order; ++k) {
            const double pn = ((x[i] - jacobi_diag(a, b, k)) * p - jacobi_offdiag(a, b, k) * pm1)
                              / jacobi_offdiag(a, b, k + 1);
            pm1 = p;
            p = pn;
            sum += p * p;
        }
        rule.weights[i] = 1.0 / sum;
    }
    return rule;
}

QuadratureRule gauss_legendre(int order)
{
    return gauss_jacobi(order, 0.0, 0.0, 2.0);
}

double jacobi_total_mass(const ParamPair& p)
{
    using boost::math::lgamma;
    const double a = p.alpha(), b = p.beta();
    return std::exp(lgamma(a + 1.0) + lgamma(b + 1.0) - lgamma(a + b + 2.0));
}

QuadratureRule jacobi_measure_rule(const ParamPair& p, int order)
{
    QuadratureRule x = gauss_jacobi(order, p.alpha(), p.beta(), jacobi_total_mass(p));
    QuadratureRule rule;
    rule.order = order;
    rule.measure = {MeasureId::Kind::jacobi_measure, p.alpha(), p.beta()};
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[order - 1 - i] = std::acos(x.nodes[i]);
        rule.weights[order - 1 - i] = x.weights[i];
    }
    return rule;
}

QuadratureRule pi_measure_rule(double gamma, int order)
{
    if (!(gamma >= -0.5))
        throw DomainError("pi_measure_rule: gamma must be >= -1/2");
    QuadratureRule rule;
    rule.measure = {MeasureId::Kind::pi_measure, gamma, 0.0};
    if (gamma == -0.5) {
        rule.order = 2;
        rule.nodes = {-1.0, 1.0};
        rule.weights = {0.5, 0.5};
        return rule;
    }
    QuadratureRule g = gauss_jacobi(order, gamma - 0.5, gamma - 0.5, 1.0);
    g.measure = rule.measure;
    return g;
}

QuadratureRule log_t_rule(double t_min, double t_max, double panels_per_unit, int order)
{
    if (!(t_min > 0.0) || !(t_max > t_min) || order < 1 || !(panels_per_unit > 0.0))
        throw DomainError("log_t_rule: invalid range");
    const double lo = std::log(t_min), hi = std::log(t_max);
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) * panels_per_unit)));
    const double h = (hi - lo) / panels;
    const QuadratureRule gl = gauss_legendre(order);
    QuadratureRule rule;
    rule.order = order;
    rule.measure = {MeasureId::Kind::t_panel, t_min, t_max};
    rule.nodes.reserve(static_cast<std::size_t>(panels) * order);
    rule.weights.reserve(rule.nodes.capacity());
    for (int k = 0; k < panels; ++k) {
        const double a = lo + k * h;
        for (int i = 0; i < order; ++i) {
            const double s = a + 0.5 * h * (gl.nodes[i] + 1.0);
            const double t = std::exp(s);
            rule.nodes.push_back(t);
            rule.weights.push_back(0.5 * h * gl.weights[i] * t);
        }
    }
    return rule;
}

double inner_product(const RealFn& f, const RealFn& g, const QuadratureRule& rule)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc += rule.weights[i] * f(rule.nodes[i]) * g(rule.nodes[i]);
    return acc;
}

std::complex<double> inner_product(const ComplexFn& f, const ComplexFn& g, const QuadratureRule& rule)
{
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc += rule.weights[i] * f(rule.nodes[i]) * std::conj(g(rule.nodes[i]));
    return acc;
}

double interval_measure(const ParamPair& p, double lo, double hi)
{
    lo = std::clamp(lo, 0.0, kPi);
    hi = std::clamp(hi, 0.0, kPi);
    if (!(hi > lo))
        return 0.0;
    // dm = y^a (1-y)^b dy with y = sin^2(theta/2)
    const double a1 = p.alpha() + 1.0, b1 = p.beta() + 1.0;
    const double mass = jacobi_total_mass(p);
    auto lower = [&](double th) {
        const double s = std::sin(th / 2.0);
        return boost::math::ibeta(a1, b1, s * s);
    };
    auto upper = [&](double th) {
        const double c = std::cos(th / 2.0);
        return boost::math::ibeta(b1, a1, c * c);
    };
    if (lo <= kPi / 2.0)
        return mass * (lower(hi) - lower(lo));
    return mass * (upper(lo) - upper(hi));
}

double ball_measure(const ParamPair& p, double theta, double r)
{
    if (!(r > 0.0))
        return 0.0;
    return interval_measure(p, theta - r, theta + r);
}

bool classify_ap(const ParamPair& p, const DoublePowerWeight& w, double exponent)
{
    if (!(exponent >= 1.0))
        throw DomainError("classify_ap: p must be >= 1");
    const double ra = 2.0 * p.alpha() + 2.0, rb = 2.0 * p.beta() + 2.0;
    if (exponent == 1.0)
        return -ra < w.r && w.r <= 0.0 && -rb < w.s && w.s <= 0.0;
    const double pm1 = exponent - 1.0;
    return -ra < w.r && w.r < ra * pm1 && -rb < w.s && w.s < rb * pm1;
}

void write_rule(std::ostream& os, const QuadratureRule& rule)
{
    os << std::setprecision(17);
    for (std::size_t i = 0; i < rule.size(); ++i)
        os << rule.nodes[i] << ' ' << rule.weights[i] << '\n';
}

QuadratureRule read_rule(std::istream& is, MeasureId id)
{
    QuadratureRule rule;
    rule.measure = id;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        double x, w;
        if (!(ls >> x >> w))
            throw DomainError("read_rule: malformed line: " + line);
        rule.nodes.push_back(x);
        rule.weights.push_back(w);
    }
    rule.order = static_cast<int>(rule.nodes.size());
    return rule;
}

} // namespace jha
