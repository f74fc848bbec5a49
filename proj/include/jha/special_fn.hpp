#pragma once

#include "jha/common.hpp"

#include <complex>
#include <vector>

namespace jha {

// Coefficients of the orthonormal recurrence
//   x p_k = off(k+1) p_{k+1} + diag(k) p_k + off(k) p_{k-1}
// for the weight (1-x)^a (1+x)^b.
double jacobi_diag(double a, double b, int k);
double jacobi_offdiag(double a, double b, int k);

// P_n^{a,b}(x) by the three-term recurrence.
double eval_jacobi(const ParamPair& p, int n, double x);

double log_norm_constant(const ParamPair& p, int n);
double norm_constant(const ParamPair& p, int n);

// Clamp into [margin, pi - margin]; throws outside [0, pi].
double clamp_theta(double theta, double margin = kDefaultTolerances.theta_margin);

// normalized trigonometric polynomial c_n P_n(cos theta)
double eval_normalized(const ParamPair& p, int n, double theta);

// values of the normalized system for n = 0..n_max at a single theta
std::vector<double> normalized_sequence(const ParamPair& p, int n_max, double theta);

// same, but in the variable x = cos(theta) (no clamping, x in [-1,1])
std::vector<double> normalized_sequence_x(const ParamPair& p, int n_max, double x);

double eigenvalue(const ParamPair& p, int n);
// |n + lambda/2|, the square root of the eigenvalue
double frequency(const ParamPair& p, int n);

double derivative_rule(const ParamPair& p, int n, double theta);

double eval_gegenbauer(double lambda, int k, double z);
std::vector<double> gegenbauer_sequence(double lambda, int k_max, double z);

std::complex<double> complex_gamma(std::complex<double> z);

// delta^N P_n = sum_j F_j(n) Q_j(theta) P_{n-j}^{a+j,b+j}(theta),
// Q_j a trigonometric polynomial sum_s K[j][s] sin^s cos^{j-s}.
class DeltaPowerTable {
public:
    explicit DeltaPowerTable(int order);

    int order() const { return order_; }
    // integer coefficient of sin^s cos^{j-s} P^{(j)}
    double coefficient(int j, int s) const { return k_[j][s]; }
    // product of the jacdiff factors, zero when n < j
    static double chain_factor(const ParamPair& p, int n, int j);
    double trig_factor(int j, double theta) const;
    // sum_j |Q_j| sup bound
    double trig_bound(int j) const;

private:
    int order_;
    std::vector<std::vector<double>> k_;
};

std::vector<double> delta_power_sequence(const ParamPair& p, int order, int n_max, double theta);
double delta_power(const ParamPair& p, int order, int n, double theta);

// Extended-precision variants used where long sums cancel heavily.
std::vector<long double> normalized_sequence_ld(const ParamPair& p, int n_max, double theta);
std::vector<long double> delta_power_sequence_ld(const ParamPair& p, int order, int n_max, double theta);

} // namespace jha
