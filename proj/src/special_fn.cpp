#include "jha/special_fn.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace jha {

std::string ParamPair::str() const
{
    std::ostringstream os;
    os.precision(17);
    os << "(" << alpha_ << "," << beta_ << ")";
    return os.str();
}

namespace {

template <typename Real>
Real diag_t(Real a, Real b, int k)
{
    if (k == 0)
        return (b - a) / (a + b + 2);
    const Real s = 2 * Real(k) + a + b;
    return (b * b - a * a) / (s * (s + 2));
}

template <typename Real>
Real offdiag_t(Real a, Real b, int k)
{
    using std::sqrt;
    if (k <= 0)
        return 0;
    if (k == 1) // the general formula is 0/0 when a + b = -1
        return 2 / (a + b + 2) * sqrt((a + 1) * (b + 1) / (a + b + 3));
    const Real kk = k;
    const Real s = 2 * kk + a + b;
    return 2 / s * sqrt(kk * (kk + a) * (kk + b) * (kk + a + b) / ((s - 1) * (s + 1)));
}

template <typename Real>
std::vector<Real> sequence_t(const ParamPair& p, int n_max, Real x)
{
    std::vector<Real> out(std::max(n_max + 1, 0));
    if (n_max < 0)
        return out;
    const Real a = p.alpha(), b = p.beta();
    out[0] = norm_constant(p, 0);
    if (n_max == 0)
        return out;
    out[1] = (x - diag_t(a, b, 0)) * out[0] / offdiag_t(a, b, 1);
    for (int k = 1; k < n_max; ++k)
        out[k + 1] = ((x - diag_t(a, b, k)) * out[k] - offdiag_t(a, b, k) * out[k - 1]) / offdiag_t(a, b, k + 1);
    return out;
}

template <typename Real>
std::vector<Real> delta_sequence_t(const ParamPair& p, int order, int n_max, double theta)
{
    using std::cos;
    using std::sqrt;
    theta = clamp_theta(theta);
    const Real th = theta;
    if (order == 0)
        return sequence_t<Real>(p, n_max, cos(th));
    const DeltaPowerTable table(order);
    std::vector<Real> out(std::max(n_max + 1, 0), Real(0));
    const Real lam = p.lambda();
    const Real sn = std::sin(th), cs = cos(th);
    for (int j = 1; j <= order && j <= n_max; ++j) {
        Real q = 0;
        for (int k = 0; k <= j; ++k) {
            Real m = table.coefficient(j, k);
            for (int i = 0; i < k; ++i)
                m *= sn;
            for (int i = 0; i < j - k; ++i)
                m *= cs;
            q += m;
        }
        if (q == 0)
            continue;
        const auto seq = sequence_t<Real>(p.shifted(j, j), n_max - j, cos(th));
        for (int n = j; n <= n_max; ++n) {
            Real f = 1;
            for (int i = 0; i < j; ++i)
                f *= Real(-0.5) * sqrt(Real(n - i) * (Real(n + i) + lam));
            out[n] += f * q * seq[n - j];
        }
    }
    return out;
}

} // namespace

double jacobi_diag(double a, double b, int k)
{
    return diag_t(a, b, k);
}

double jacobi_offdiag(double a, double b, int k)
{
    return offdiag_t(a, b, k);
}

std::vector<long double> normalized_sequence_ld(const ParamPair& p, int n_max, double theta)
{
    const long double th = clamp_theta(theta);
    return sequence_t<long double>(p, n_max, std::cos(th));
}

std::vector<long double> delta_power_sequence_ld(const ParamPair& p, int order, int n_max, double theta)
{
    return delta_sequence_t<long double>(p, order, n_max, theta);
}

double eval_jacobi(const ParamPair& p, int n, double x)
{
    if (!(x >= -1.0 - 1e-12 && x <= 1.0 + 1e-12))
        throw DomainError("eval_jacobi: x outside [-1,1]");
    if (n < 0)
        return 0.0;
    x = std::clamp(x, -1.0, 1.0);
    const double a = p.alpha(), b = p.beta();
    double pm1 = 1.0;
    if (n == 0)
        return pm1;
    double pk = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for (int k = 2; k <= n; ++k) {
        const double s = 2.0 * k + a + b;
        const double c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        const double c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        const double c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        const double next = (c2 * pk - c3 * pm1) / c1;
        pm1 = pk;
        pk = next;
    }
    return pk;
}

double log_norm_constant(const ParamPair& p, int n)
{
    using boost::math::lgamma;
    const double a = p.alpha(), b = p.beta();
    if (n == 0) // (lambda) Gamma(lambda) = Gamma(a+b+2), also in the critical case
        return 0.5 * (lgamma(a + b + 2.0) - lgamma(a + 1.0) - lgamma(b + 1.0));
    const double nn = n;
    return 0.5 * (std::log(2.0 * nn + a + b + 1.0) + lgamma(nn + a + b + 1.0) + lgamma(nn + 1.0)
                  - lgamma(nn + a + 1.0) - lgamma(nn + b + 1.0));
}

double norm_constant(const ParamPair& p, int n)
{
    if (n < 0)
        throw DomainError("norm_constant: negative degree");
    return std::exp(log_norm_constant(p, n));
}

double clamp_theta(double theta, double margin)
{
    if (!(theta >= 0.0 && theta <= kPi))
        throw DomainError("theta outside (0,pi)");
    return std::clamp(theta, margin, kPi - margin);
}

double eval_normalized(const ParamPair& p, int n, double theta)
{
    theta = clamp_theta(theta);
    if (n < 0)
        return 0.0;
    return norm_constant(p, n) * eval_jacobi(p, n, std::cos(theta));
}

std::vector<double> normalized_sequence_x(const ParamPair& p, int n_max, double x)
{
    std::vector<double> out(std::max(n_max + 1, 0));
    if (n_max < 0)
        return out;
    const double a = p.alpha(), b = p.beta();
    out[0] = norm_constant(p, 0);
    if (n_max == 0)
        return out;
    out[1] = (x - jacobi_diag(a, b, 0)) * out[0] / jacobi_offdiag(a, b, 1);
    for (int k = 1; k < n_max; ++k)
        out[k + 1] = ((x - jacobi_diag(a, b, k)) * out[k] - jacobi_offdiag(a, b, k) * out[k - 1])
                     / jacobi_offdiag(a, b, k + 1);
    return out;
}

std::vector<double> normalized_sequence(const ParamPair& p, int n_max, double theta)
{
    return normalized_sequence_x(p, n_max, std::cos(clamp_theta(theta)));
}

double frequency(const ParamPair& p, int n)
{
    if (p.critical() && n == 0)
        return 0.0;
    return std::abs(n + p.lambda() / 2.0);
}

double eigenvalue(const ParamPair& p, int n)
{
    const double mu = frequency(p, n);
    return mu * mu;
}

double derivative_rule(const ParamPair& p, int n, double theta)
{
    theta = clamp_theta(theta);
    if (n <= 0)
        return 0.0;
    return -0.5 * std::sqrt(n * (n + p.lambda())) * std::sin(theta)
           * eval_normalized(p.shifted(1.0, 1.0), n - 1, theta);
}

double eval_gegenbauer(double lambda, int k, double z)
{
    if (!(lambda > 0.0))
        throw DomainError("eval_gegenbauer: lambda must be positive");
    if (k < 0)
        return 0.0;
    double cm1 = 1.0;
    if (k == 0)
        return cm1;
    double ck = 2.0 * lambda * z;
    for (int j = 2; j <= k; ++j) {
        const double next = (2.0 * z * (j + lambda - 1.0) * ck - (j + 2.0 * lambda - 2.0) * cm1) / j;
        cm1 = ck;
        ck = next;
    }
    return ck;
}

std::vector<double> gegenbauer_sequence(double lambda, int k_max, double z)
{
    if (!(lambda > 0.0))
        throw DomainError("gegenbauer_sequence: lambda must be positive");
    std::vector<double> c(std::max(k_max + 1, 0));
    if (k_max >= 0)
        c[0] = 1.0;
    if (k_max >= 1)
        c[1] = 2.0 * lambda * z;
    for (int j = 2; j <= k_max; ++j)
        c[j] = (2.0 * z * (j + lambda - 1.0) * c[j - 1] - (j + 2.0 * lambda - 2.0) * c[j - 2]) / j;
    return c;
}

std::complex<double> complex_gamma(std::complex<double> z)
{
    // Lanczos, g = 7
    static constexpr std::array<double, 9> c{0.99999999999980993,  676.5203681218851,
                                             -1259.1392167224028,  771.32342877765313,
                                             -176.61502916214059,  12.507343278686905,
                                             -0.13857109526572012, 9.9843695780195716e-6,
                                             1.5056327351493116e-7};
    if (z.real() < 0.5)
        return kPi / (std::sin(kPi * z) * complex_gamma(1.0 - z));
    z -= 1.0;
    std::complex<double> x = c[0];
    for (int i = 1; i < 9; ++i)
        x += c[i] / (z + static_cast<double>(i));
    const std::complex<double> t = z + 7.5;
    return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

DeltaPowerTable::DeltaPowerTable(int order) : order_(order)
{
    if (order < 0)
        throw DomainError("DeltaPowerTable: negative order");
    k_.assign(order + 1, std::vector<double>(order + 1, 0.0));
    k_[0][0] = 1.0;
    for (int step = 0; step < order; ++step) {
        std::vector<std::vector<double>> next(order + 1, std::vector<double>(order + 1, 0.0));
        for (int j = 0; j <= step; ++j) {
            for (int s = 0; s <= j; ++s) {
                const double c = k_[j][s];
                if (c == 0.0)
                    continue;
                const int pc = j - s;
                if (s > 0)
                    next[j][s - 1] += c * s;
                if (pc > 0)
                    next[j][s + 1] -= c * pc;
                next[j + 1][s + 1] += c; // jacdiff on the polynomial factor
            }
        }
        k_ = std::move(next);
    }
}

double DeltaPowerTable::chain_factor(const ParamPair& p, int n, int j)
{
    if (n < j)
        return 0.0;
    double f = 1.0;
    for (int i = 0; i < j; ++i)
        f *= -0.5 * std::sqrt((n - i) * (n + i + p.lambda()));
    return f;
}

double DeltaPowerTable::trig_factor(int j, double theta) const
{
    const double s = std::sin(theta), c = std::cos(theta);
    double acc = 0.0;
    for (int k = 0; k <= j; ++k)
        if (k_[j][k] != 0.0)
            acc += k_[j][k] * std::pow(s, k) * std::pow(c, j - k);
    return acc;
}

double DeltaPowerTable::trig_bound(int j) const
{
    double acc = 0.0;
    for (int k = 0; k <= j; ++k)
        acc += std::abs(k_[j][k]);
    return acc;
}

std::vector<double> delta_power_sequence(const ParamPair& p, int order, int n_max, double theta)
{
    theta = clamp_theta(theta);
    if (order == 0)
        return normalized_sequence(p, n_max, theta);
    const DeltaPowerTable table(order);
    std::vector<double> out(std::max(n_max + 1, 0), 0.0);
    for (int j = 1; j <= order && j <= n_max; ++j) {
        const double q = table.trig_factor(j, theta);
        if (q == 0.0)
            continue;
        const auto seq = normalized_sequence(p.shifted(j, j), n_max - j, theta);
        for (int n = j; n <= n_max; ++n)
            out[n] += DeltaPowerTable::chain_factor(p, n, j) * q * seq[n - j];
    }
    return out;
}

double delta_power(const ParamPair& p, int order, int n, double theta)
{
    if (n < 0)
        return 0.0;
    return delta_power_sequence(p, order, n, theta)[n];
}

} // namespace jha
