#pragma once

#include "jha/common.hpp"
#include "jha/poisson_kernel.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace jha {

using cplx = std::complex<double>;

// Walk the (u, v) product rule with levels picked per u node: for fixed u the
// v-singularity sits at distance (shift + base + a (1-u)) / b from v = 1.
template <typename F>
void for_each_dk_node(const DkGeometry& g, double shift, const GradedPiRule& ru, const GradedPiRule& rv, F&& f)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double d0 = shift + g.base;
    const int lu = ru.level_for(g.a > 0.0 ? d0 / g.a : inf);
    for (const PiNode& x : ru.nodes(lu)) {
        const double d = d0 + g.a * x.omu;
        const int lv = rv.level_for(g.b > 0.0 ? d / g.b : inf);
        for (const PiNode& y : rv.nodes(lv))
            f(x, y);
    }
}

// T(q) = int_0^inf sinh(t/2) (cosh(t/2) - 1 + q)^{-p} t^s dt, tabulated in x = ln q.
// Near q = 0, T ~ C q^{1 + s/2 - p}; the table stores T q^{-e} with e that power
// (real part clipped at 0), which is smooth in x.
class TimeIntegralTable {
public:
    TimeIntegralTable(double p, cplx s, double q_min = 1e-10, double q_max = 2.5, double step = 0.04);

    cplx operator()(double q) const;
    double p() const { return p_; }
    cplx s() const { return s_; }
    double q_min() const { return q_min_; }

    // t-quadrature at a single q, no interpolation
    static cplx direct(double p, cplx s, double q);

private:
    double p_;
    cplx s_;
    cplx e_;
    double q_min_, q_max_;
    boost::math::interpolators::cardinal_cubic_b_spline<double> re_, im_;
};

// kernel of J^{-i gamma}: (1/Gamma(2 i gamma)) int_0^inf H_t t^{2 i gamma - 1} dt
class ImaginaryPowerKernel {
public:
    ImaginaryPowerKernel(const ParamPair& p, double gamma, const DkAccuracy& acc = DkAccuracy::fast());

    cplx value(double theta, double phi) const;
    // (d/dtheta, d/dphi)
    std::pair<cplx, cplx> gradient(double theta, double phi) const;
    const ParamPair& params() const { return params_; }

private:
    ParamPair params_;
    double gamma_;
    GradedPiRule ru_, rv_;
    cplx scale_;
    TimeIntegralTable t0_, t1_;
};

// kernel of delta^N J^{-N/2}: (1/Gamma(N)) int_0^inf d_theta^N H_t t^{N-1} dt
class RieszKernel {
public:
    RieszKernel(const ParamPair& p, int order, const DkAccuracy& acc = DkAccuracy::fast());

    double value(double theta, double phi) const;
    std::pair<double, double> gradient(double theta, double phi) const;
    int order() const { return order_; }
    const ParamPair& params() const { return params_; }

private:
    double sum(double theta, double phi, int order_theta, bool with_phi) const;

    ParamPair params_;
    int order_;
    GradedPiRule ru_, rv_;
    double scale_;
    std::vector<TimeIntegralTable> tables_; // k = 1 .. order + 1
};

// t -> d_t^M d_theta^N H_t(theta, phi) sampled so that the Banach norm becomes a
// plain vector norm: max-abs on a log t grid for the maximal kernel, weighted l2
// (weights sqrt(w_i t_i^{2M+2N-1})) for the square-function kernels.
class VectorKernel {
public:
    VectorKernel(const ParamPair& p, int dt_order, int dtheta_order, const DkAccuracy& acc = DkAccuracy::fast());

    bool sup_norm() const { return sup_norm_; }
    const std::vector<double>& t_nodes() const { return t_; }
    std::vector<double> samples(double theta, double phi) const;
    double norm(const std::vector<double>& s) const;
    double distance(const std::vector<double>& a, const std::vector<double>& b) const;
    // t below this multiple of |theta - phi| is not evaluated (negligible)
    static constexpr double cutoff_ratio = 0.01;

private:
    ParamPair params_;
    int dt_, dth_;
    bool sup_norm_;
    GradedPiRule ru_, rv_;
    double c_;
    double kappa_;
    std::vector<double> t_, scale_;
    double limit_ = 0.0; // t -> infinity value of H_t, nonzero only in the critical case
};

} // namespace jha
