#include "jha/scalar_kernels.hpp"
#include "jha/measure_quad.hpp"
#include "jha/phi_derivatives.hpp"
#include "jha/special_fn.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace jha {

namespace {

void check_pair(double theta, double phi)
{
    if (!(theta > 0.0 && theta < kPi && phi > 0.0 && phi < kPi))
        throw DomainError("kernel arguments must lie in (0, pi)");
    if (theta == phi)
        throw SingularityError("kernel evaluated on the diagonal");
}

const ParamPair& imaginary_power_params(const ParamPair& p, double gamma)
{
    if (!p.dk_valid())
        throw DomainError("ImaginaryPowerKernel: requires alpha, beta >= -1/2");
    if (!(p.alpha() + p.beta() > -1.0))
        throw DomainError("ImaginaryPowerKernel: requires alpha + beta > -1");
    if (gamma == 0.0)
        throw DomainError("ImaginaryPowerKernel: gamma must be nonzero");
    return p;
}

double upper_t(double p, double re_s)
{
    double t = 100.0;
    for (int i = 0; i < 4; ++i)
        t = (90.0 + 2.0 * std::max(re_s, 0.0) * std::log(t)) / (p - 1.0) + 10.0;
    return t;
}

std::vector<double> spline_part(const std::vector<cplx>& v, bool imag)
{
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = imag ? v[i].imag() : v[i].real();
    return out;
}

struct TableData {
    cplx e;
    double x0, h;
    std::vector<cplx> g;
};

TableData build_table(double p, cplx s, double q_min, double q_max, double step)
{
    if (!(p > 1.0))
        throw DomainError("TimeIntegralTable: the t-integral needs p > 1");
    if (!(q_min > 0.0) || !(q_max > q_min) || !(step > 0.0))
        throw DomainError("TimeIntegralTable: bad range");
    TableData d;
    const cplx e = 1.0 + s / 2.0 - p;
    d.e = cplx(std::min(e.real(), 0.0), e.imag());
    d.x0 = std::log(q_min);
    const double x1 = std::log(q_max);
    const int n = static_cast<int>(std::ceil((x1 - d.x0) / step)) + 1;
    d.h = (x1 - d.x0) / (n - 1);
    d.g.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = d.x0 + i * d.h;
        d.g[i] = TimeIntegralTable::direct(p, s, std::exp(x)) * std::exp(-d.e * x);
    }
    return d;
}

} // namespace

cplx TimeIntegralTable::direct(double p, cplx s, double q)
{
    if (!(p > 1.0) || !(q > 0.0))
        throw DomainError("TimeIntegralTable::direct: need p > 1 and q > 0");
    const double t_lo = 1e-8 * std::sqrt(q);
    const double t_hi = upper_t(p, s.real());
    const QuadratureRule rule = log_t_rule(t_lo, t_hi, 2.0, 12);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double t = rule.nodes[i];
        const double f = std::sinh(t / 2.0) * std::pow(cosh_shift(t) + q, -p);
        acc += rule.weights[i] * f * std::exp(s * std::log(t));
    }
    // (0, t_lo): sinh(t/2) ~ t/2 and the shift is negligible against q
    acc += std::pow(q, -p) * std::exp((s + 2.0) * std::log(t_lo)) / (2.0 * (s + 2.0));
    return acc;
}

TimeIntegralTable::TimeIntegralTable(double p, cplx s, double q_min, double q_max, double step)
    : p_(p), s_(s), q_min_(q_min), q_max_(q_max)
{
    const TableData d = build_table(p, s, q_min, q_max, step);
    e_ = d.e;
    const auto re = spline_part(d.g, false);
    const auto im = spline_part(d.g, true);
    re_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(re.begin(), re.end(), d.x0, d.h);
    im_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(im.begin(), im.end(), d.x0, d.h);
}

cplx TimeIntegralTable::operator()(double q) const
{
    if (q < q_min_ || q > q_max_)
        return direct(p_, s_, q);
    const double x = std::log(q);
    return cplx(re_(x), im_(x)) * std::exp(e_ * x);
}

// ---------------------------------------------------------------- imaginary powers

ImaginaryPowerKernel::ImaginaryPowerKernel(const ParamPair& p, double gamma, const DkAccuracy& acc)
    : params_(imaginary_power_params(p, gamma)), gamma_(gamma), ru_(p.alpha(), acc), rv_(p.beta(), acc),
      t0_(p.alpha() + p.beta() + 2.0, cplx(-1.0, 2.0 * gamma)),
      t1_(p.alpha() + p.beta() + 3.0, cplx(-1.0, 2.0 * gamma))
{
    scale_ = dk_constant(p) / complex_gamma(cplx(0.0, 2.0 * gamma_));
}

cplx ImaginaryPowerKernel::value(double theta, double phi) const
{
    check_pair(theta, phi);
    const DkGeometry g(theta, phi);
    cplx acc = 0.0;
    for_each_dk_node(g, 0.0, ru_, rv_, [&](const PiNode& x, const PiNode& y) { acc += x.w * y.w * t0_(g.q(x, y)); });
    return scale_ * acc;
}

std::pair<cplx, cplx> ImaginaryPowerKernel::gradient(double theta, double phi) const
{
    check_pair(theta, phi);
    const DkGeometry g(theta, phi);
    const double kappa = params_.alpha() + params_.beta() + 2.0;
    cplx dt = 0.0, dp = 0.0;
    for_each_dk_node(g, 0.0, ru_, rv_, [&](const PiNode& x, const PiNode& y) {
        const cplx d = -kappa * x.w * y.w * t1_(g.q(x, y));
        dt += d * g.q_theta(x, y);
        dp += d * g.q_phi(x, y);
    });
    return {scale_ * dt, scale_ * dp};
}

// ---------------------------------------------------------------- Riesz

RieszKernel::RieszKernel(const ParamPair& p, int order, const DkAccuracy& acc)
    : params_(p), order_(order), ru_(p.alpha(), acc), rv_(p.beta(), acc)
{
    if (!p.dk_valid())
        throw DomainError("RieszKernel: requires alpha, beta >= -1/2");
    if (order < 1 || order + 1 > kMaxDerivativeOrder)
        throw DomainError("RieszKernel: order out of range");
    scale_ = dk_constant(p) / std::tgamma(static_cast<double>(order));
    const double kappa = p.alpha() + p.beta() + 2.0;
    for (int k = 1; k <= order + 1; ++k)
        tables_.emplace_back(kappa + k, cplx(order - 1.0, 0.0));
}

double RieszKernel::sum(double theta, double phi, int order_theta, bool with_phi) const
{
    check_pair(theta, phi);
    const DkGeometry g(theta, phi);
    const double kappa = params_.alpha() + params_.beta() + 2.0;
    // (-1)^k (kappa)_k
    std::array<double, kMaxDerivativeOrder + 2> rising{};
    rising[0] = 1.0;
    for (int k = 1; k <= order_theta + 1 && k < static_cast<int>(rising.size()); ++k)
        rising[k] = -rising[k - 1] * (kappa + k - 1);
    double acc = 0.0;
    Coeffs c;
    for_each_dk_node(g, 0.0, ru_, rv_, [&](const PiNode& x, const PiNode& y) {
        const double q = g.q(x, y);
        const int kmax = theta_coefficients(order_theta, with_phi, q, g.q_theta(x, y), g.q_phi(x, y),
                                            g.q_theta_phi(x, y), c);
        double s = 0.0;
        for (int k = 1; k <= kmax; ++k)
            if (c[k] != 0.0)
                s += c[k] * rising[k] * tables_[k - 1](q).real();
        acc += x.w * y.w * s;
    });
    return scale_ * acc;
}

double RieszKernel::value(double theta, double phi) const
{
    return sum(theta, phi, order_, false);
}

std::pair<double, double> RieszKernel::gradient(double theta, double phi) const
{
    return {sum(theta, phi, order_ + 1, false), sum(theta, phi, order_, true)};
}

// ---------------------------------------------------------------- vector kernels

VectorKernel::VectorKernel(const ParamPair& p, int dt_order, int dtheta_order, const DkAccuracy& acc)
    : params_(p), dt_(dt_order), dth_(dtheta_order), sup_norm_(dt_order == 0 && dtheta_order == 0),
      ru_(p.alpha(), acc), rv_(p.beta(), acc), c_(dk_constant(p)), kappa_(p.alpha() + p.beta() + 2.0)
{
    if (!p.dk_valid())
        throw DomainError("VectorKernel: requires alpha, beta >= -1/2");
    if (dt_order < 0 || dtheta_order < 0 || dt_order > kMaxDerivativeOrder || dtheta_order > kMaxDerivativeOrder)
        throw DomainError("VectorKernel: derivative order out of range");
    if (sup_norm_) {
        const double lo = std::log(1e-4), hi = std::log(40.0);
        const int n = static_cast<int>(std::ceil(6.0 * (hi - lo))) + 1;
        for (int i = 0; i < n; ++i)
            t_.push_back(std::exp(lo + (hi - lo) * i / (n - 1)));
        scale_.assign(t_.size(), 1.0);
        if (p.critical())
            limit_ = c_;
        return;
    }
    // slowest surviving exponential rate
    const double lam = p.lambda();
    const bool zero_mode = dtheta_order == 0 && !(p.critical() && dt_order > 0);
    const double mu = zero_mode ? std::abs(lam / 2.0) : std::abs(1.0 + lam / 2.0);
    const double t_hi = 50.0 / (2.0 * mu) + 10.0;
    const QuadratureRule rule = log_t_rule(1e-5, t_hi, 1.0, 4);
    const int power = 2 * dt_order + 2 * dtheta_order - 1;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        t_.push_back(rule.nodes[i]);
        scale_.push_back(std::sqrt(rule.weights[i] * std::pow(rule.nodes[i], power)));
    }
}

std::vector<double> VectorKernel::samples(double theta, double phi) const
{
    check_pair(theta, phi);
    const DkGeometry g(theta, phi);
    const double cut = cutoff_ratio * std::abs(theta - phi);
    std::vector<double> out(t_.size() + (sup_norm_ ? 1 : 0), 0.0);
    Coeffs c{}, pw;
    for (std::size_t i = 0; i < t_.size(); ++i) {
        const double t = t_[i];
        if (t < cut)
            continue;
        const double shift = cosh_shift(t);
        double acc = 0.0;
        if (sup_norm_) {
            for_each_dk_node(g, shift, ru_, rv_, [&](const PiNode& x, const PiNode& y) {
                acc += x.w * y.w * std::pow(shift + g.q(x, y), -kappa_);
            });
            acc *= std::sinh(t / 2.0);
        } else {
            const TimeFactor tf(t, dt_);
            for_each_dk_node(g, shift, ru_, rv_, [&](const PiNode& x, const PiNode& y) {
                const double q = g.q(x, y);
                int kmax = 0;
                if (dth_ == 0) {
                    c[0] = 1.0;
                } else if (dth_ == 1) {
                    c[0] = 0.0;
                    c[1] = g.q_theta(x, y);
                    kmax = 1;
                } else {
                    kmax = theta_coefficients(dth_, false, q, g.q_theta(x, y), g.q_phi(x, y), g.q_theta_phi(x, y), c);
                }
                power_derivatives(kappa_, shift + q, kmax + dt_, pw);
                double s = 0.0;
                for (int j = 0; j <= dt_; ++j)
                    for (int k = 0; k <= kmax; ++k)
                        s += tf.coefficient(j) * c[k] * pw[j + k];
                acc += x.w * y.w * s;
            });
        }
        out[i] = scale_[i] * c_ * acc;
    }
    if (sup_norm_)
        out.back() = limit_;
    return out;
}

double VectorKernel::norm(const std::vector<double>& s) const
{
    double acc = 0.0;
    for (double x : s)
        acc = sup_norm_ ? std::max(acc, std::abs(x)) : acc + x * x;
    return sup_norm_ ? acc : std::sqrt(acc);
}

double VectorKernel::distance(const std::vector<double>& a, const std::vector<double>& b) const
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc = sup_norm_ ? std::max(acc, std::abs(d)) : acc + d * d;
    }
    return sup_norm_ ? acc : std::sqrt(acc);
}

} // namespace jha
