#pragma once

#include "jha/common.hpp"

#include <array>

namespace jha {

inline constexpr int kMaxDerivativeOrder = 10;

using Coeffs = std::array<double, 2 * kMaxDerivativeOrder + 3>;
using BellTable = std::array<std::array<double, kMaxDerivativeOrder + 2>, kMaxDerivativeOrder + 2>;

// B[n][k] = partial Bell polynomial B_{n,k}(x[1], ..., x[n-k+1]), n <= order
void bell_table(int order, const double* x, BellTable& b);

// d^i/dtheta^i q for i >= 1, from q and its first derivative
double q_theta_derivative(int i, double q, double q_theta);
// d/dphi d^i/dtheta^i q, from q_phi and the mixed derivative
double q_theta_phi_derivative(int i, double q_phi, double q_theta_phi);

// Coefficients w[m] with
//   d^M/dt^M [sinh(t/2) h(cosh(t/2) - 1 + .)] = sum_m w[m] sinh-free h^{(m)}
// i.e. sum_i binom(M,i) S^{(i)} B_{M-i,m}(C', C'', ...).
class TimeFactor {
public:
    TimeFactor(double t, int order_t);
    int order() const { return order_; }
    double coefficient(int m) const { return w_[m]; }

private:
    int order_;
    Coeffs w_{};
};

// theta-side coefficients c[k] for d^N/dtheta^N (and optionally d/dphi) of h(q):
//   sum_k c[k] h^{(k)}(q). Returns the highest k.
int theta_coefficients(int order_theta, bool with_phi, double q, double q_theta, double q_phi,
                       double q_theta_phi, Coeffs& c);

// h^{(m)}(D) for h(x) = x^{-kappa}, m = 0..m_max, written into out
void power_derivatives(double kappa, double d, int m_max, Coeffs& out);

// d_t^M d_theta^N [d_phi] Phi(t, q) with Phi = sinh(t/2) (cosh(t/2) - 1 + q)^{-kappa}
double phi_derivative(double kappa, const TimeFactor& tf, double t_shift, double q, double q_theta,
                      double q_phi, double q_theta_phi, int order_theta, bool with_phi);

// d_theta^N [d_phi] (cosh(t/2) - 1 + q)^{-kappa}
double power_theta_derivative(double kappa, double t_shift, double q, double q_theta, double q_phi,
                              double q_theta_phi, int order_theta, bool with_phi);

// cosh(t/2) - 1 computed without cancellation
inline double cosh_shift(double t)
{
    const double s = std::sinh(t / 4.0);
    return 2.0 * s * s;
}

} // namespace jha
