#pragma once

#include "jha/common.hpp"

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace jha {

struct MeasureId {
    enum class Kind { jacobi_measure, pi_measure, t_panel, interval };
    Kind kind = Kind::interval;
    double a = 0.0; // alpha, or gamma for pi_measure
    double b = 0.0;

    std::string str() const;
    friend bool operator==(const MeasureId&, const MeasureId&) = default;
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    MeasureId measure;
    int order = 0;

    std::size_t size() const { return nodes.size(); }
    double total_mass() const;
};

// Gauss rule for (1-x)^a (1+x)^b on (-1,1), nodes ascending. Weights are scaled so
// they sum to `mass` (default: the true mass of the weight).
QuadratureRule gauss_jacobi(int order, double a, double b);
QuadratureRule gauss_jacobi(int order, double a, double b, double mass);
QuadratureRule gauss_legendre(int order);

double jacobi_total_mass(const ParamPair& p);

QuadratureRule jacobi_measure_rule(const ParamPair& p, int order = 128);
QuadratureRule pi_measure_rule(double gamma, int order = 128);

// composite Gauss-Legendre in s = ln t on [ln t_min, ln t_max]; weights include the Jacobian t
QuadratureRule log_t_rule(double t_min, double t_max, double panels_per_unit, int order);

using RealFn = std::function<double(double)>;
using ComplexFn = std::function<std::complex<double>(double)>;

double inner_product(const RealFn& f, const RealFn& g, const QuadratureRule& rule);
std::complex<double> inner_product(const ComplexFn& f, const ComplexFn& g, const QuadratureRule& rule);

// m_{a,b}((theta - r, theta + r) intersected with (0, pi))
double ball_measure(const ParamPair& p, double theta, double r);
// m_{a,b}((lo, hi)) for 0 <= lo <= hi <= pi
double interval_measure(const ParamPair& p, double lo, double hi);

struct DoublePowerWeight {
    double r = 0.0;
    double s = 0.0;
};

bool classify_ap(const ParamPair& p, const DoublePowerWeight& w, double exponent);

void write_rule(std::ostream& os, const QuadratureRule& rule);
QuadratureRule read_rule(std::istream& is, MeasureId id = {});

} // namespace jha
