#pragma once

// Independent reference computations used by the tests. None of these call into
// the library's polynomial or quadrature code.

#include <functional>
#include <vector>

namespace oracle {

// P_n^{a,b}(x) from the Rodrigues formula, the n-th derivative taken by a Cauchy
// integral on a small circle around x (trapezoid rule in the angle).
double rodrigues_jacobi(int n, double a, double b, double x);

// P_1^{a,b}(x) written out from d/dx[(1-x)^{a+1}(1+x)^{b+1}]
double rodrigues_degree_one(double a, double b, double x);

// integral of f over [-1,1] against (1-u^2)^e by the double-exponential trapezoid rule
double de_trapezoid_weighted(const std::function<double(double)>& f, double e, double h = 1.0 / 64.0);

// Taylor coefficient of r^k in (1 - 2 z r + r^2)^{-lambda}, by a Cauchy integral in r
double gegenbauer_taylor(double lambda, int k, double z);

// m_{a,b}(lo, hi) by tanh-sinh quadrature in theta
double interval_measure_quad(double alpha, double beta, double lo, double hi);
// integral of f against dm_{a,b} over (0, pi), tanh-sinh
double theta_integral(double alpha, double beta, const std::function<double(double)>& f);

double central_diff(const std::function<double(double)>& f, double x, double h);
double second_diff(const std::function<double(double)>& f, double x, double h);
// five-point first derivative
double diff5(const std::function<double(double)>& f, double x, double h);

// Brute-force A_p test for w = sin(theta/2)^r cos(theta/2)^s against dm_{a,b}.
// Averages over (eps*h, h) near each endpoint, h on three dyadic scales, with eps
// swept over several decades. Returns true when the averaged products stay bounded.
struct ApSweep {
    bool finite;
    double worst_growth; // largest ratio between consecutive cutoffs
    double log_constant; // log of the largest product seen at the finest cutoff
};
ApSweep ap_brute_force(double alpha, double beta, double r, double s, double p);

struct ApCase {
    double alpha, beta, r, s, p;
};
// random (r, s, p) with every classification boundary at least `margin` away,
// parameters drawn from the default panel
std::vector<ApCase> ap_cases(unsigned long long seed, int count, double margin);

} // namespace oracle
