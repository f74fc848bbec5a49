#include "jha/phi_derivatives.hpp"

#include <cmath>

namespace jha {

namespace {

double binom(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

void check_order(int order)
{
    if (order < 0 || order > kMaxDerivativeOrder)
        throw DomainError("derivative order out of supported range");
}

} // namespace

void bell_table(int order, const double* x, BellTable& b)
{
    for (auto& row : b)
        row.fill(0.0);
    b[0][0] = 1.0;
    for (int n = 1; n <= order; ++n)
        for (int k = 1; k <= n; ++k) {
            double acc = 0.0;
            for (int i = 1; i <= n - k + 1; ++i)
                acc += binom(n - 1, i - 1) * x[i] * b[n - i][k - 1];
            b[n][k] = acc;
        }
}

double q_theta_derivative(int i, double q, double q_theta)
{
    if (i == 0)
        return q;
    if (i % 2 == 0)
        return std::pow(-4.0, -i / 2) * (q - 1.0);
    return std::pow(-4.0, -(i - 1) / 2) * q_theta;
}

double q_theta_phi_derivative(int i, double q_phi, double q_theta_phi)
{
    if (i % 2 == 0)
        return std::pow(-4.0, -i / 2) * q_phi;
    return std::pow(-4.0, -(i - 1) / 2) * q_theta_phi;
}

TimeFactor::TimeFactor(double t, int order_t) : order_(order_t)
{
    check_order(order_t);
    const double sh = std::sinh(t / 2.0), ch = std::cosh(t / 2.0);
    // S^{(i)} and C^{(i)}
    std::array<double, kMaxDerivativeOrder + 2> s{}, c{};
    for (int i = 0; i <= order_t; ++i) {
        const double scale = std::pow(0.5, i);
        s[i] = scale * (i % 2 == 0 ? sh : ch);
        c[i] = scale * (i % 2 == 0 ? ch : sh);
    }
    BellTable b;
    bell_table(order_t, c.data(), b);
    for (int i = 0; i <= order_t; ++i)
        for (int m = 0; m <= order_t - i; ++m)
            w_[m] += binom(order_t, i) * s[i] * b[order_t - i][m];
}

int theta_coefficients(int order_theta, bool with_phi, double q, double q_theta, double q_phi,
                       double q_theta_phi, Coeffs& c)
{
    check_order(order_theta);
    c.fill(0.0);
    std::array<double, kMaxDerivativeOrder + 2> x{};
    for (int i = 1; i <= order_theta + 1; ++i)
        x[i] = q_theta_derivative(i, q, q_theta);
    BellTable b;
    bell_table(order_theta, x.data(), b);
    if (!with_phi) {
        for (int k = 0; k <= order_theta; ++k)
            c[k] = b[order_theta][k];
        return order_theta;
    }
    // d/dphi of sum_k h^{(k)}(q) B_{N,k}(x)
    for (int k = 0; k <= order_theta; ++k) {
        c[k + 1] += q_phi * b[order_theta][k];
        if (k == 0)
            continue;
        for (int i = 1; i <= order_theta - k + 1; ++i)
            c[k] += binom(order_theta, i) * b[order_theta - i][k - 1]
                    * q_theta_phi_derivative(i, q_phi, q_theta_phi);
    }
    return order_theta + 1;
}

void power_derivatives(double kappa, double d, int m_max, Coeffs& out)
{
    const double inv = 1.0 / d;
    double p = std::pow(d, -kappa);
    for (int m = 0; m <= m_max; ++m) {
        out[m] = p;
        p *= (-kappa - m) * inv;
    }
}

double phi_derivative(double kappa, const TimeFactor& tf, double t_shift, double q, double q_theta,
                      double q_phi, double q_theta_phi, int order_theta, bool with_phi)
{
    Coeffs c, g;
    const int kmax = theta_coefficients(order_theta, with_phi, q, q_theta, q_phi, q_theta_phi, c);
    const int mmax = kmax + tf.order();
    power_derivatives(kappa, t_shift + q, mmax, g);
    double acc = 0.0;
    for (int j = 0; j <= tf.order(); ++j) {
        const double wj = tf.coefficient(j);
        if (wj == 0.0)
            continue;
        for (int k = 0; k <= kmax; ++k)
            acc += wj * c[k] * g[j + k];
    }
    return acc;
}

double power_theta_derivative(double kappa, double t_shift, double q, double q_theta, double q_phi,
                              double q_theta_phi, int order_theta, bool with_phi)
{
    Coeffs c, g;
    const int kmax = theta_coefficients(order_theta, with_phi, q, q_theta, q_phi, q_theta_phi, c);
    power_derivatives(kappa, t_shift + q, kmax, g);
    double acc = 0.0;
    for (int k = 0; k <= kmax; ++k)
        acc += c[k] * g[k];
    return acc;
}

} // namespace jha
