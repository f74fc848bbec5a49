#pragma once

#include "jha/common.hpp"
#include "jha/measure_quad.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace jha {

using cplx = std::complex<double>;

struct JacobiExpansion {
    ParamPair params;
    std::vector<cplx> coeffs;
    bool projected = false; // Pi_0 has been applied

    JacobiExpansion() = default;
    JacobiExpansion(const ParamPair& p, std::vector<cplx> c) : params(p), coeffs(std::move(c)) {}

    int n_max() const { return static_cast<int>(coeffs.size()) - 1; }
    double norm() const;
    cplx operator()(double theta) const;
};

JacobiExpansion analyze(const ComplexFn& f, const ParamPair& p, int n_max, int order = 0);
cplx synthesize(const JacobiExpansion& f, double theta);
// L^2(dm) norm of the synthesized function by quadrature
double quadrature_norm(const JacobiExpansion& f, int order = 0);

JacobiExpansion unit_vector(const ParamPair& p, int n, int n_max);
JacobiExpansion random_expansion(const ParamPair& p, int n_max, std::uint64_t seed, bool unit_norm = true);

// zero coefficient 0 in the critical case
JacobiExpansion project_zero_mode(const JacobiExpansion& f);

JacobiExpansion apply_imaginary_power(const JacobiExpansion& f, double gamma);
JacobiExpansion apply_semigroup(const JacobiExpansion& f, double t);

class RieszTransform {
public:
    RieszTransform(JacobiExpansion f, int order);
    cplx operator()(double theta) const;
    double l2_norm(int quad_order = 0) const;
    int order() const { return order_; }

private:
    JacobiExpansion f_;
    int order_;
};

RieszTransform apply_riesz(const JacobiExpansion& f, int order);

struct DecompTerm {
    double coef;
    int nu;  // power of sin(theta/2), also the alpha shift
    int eta; // power of cos(theta/2), also the beta shift
    int p;   // degree drop
};

std::vector<DecompTerm> decompose_delta_N(const ParamPair& params, int n, int order);
double eval_decomposition(const ParamPair& params, int n, const std::vector<DecompTerm>& terms, double theta);

struct FforCoefficients {
    double A, B, C, D, E;
};
FforCoefficients ffor_coefficients(const ParamPair& p, int n);
// A cos P_{n-1}^{a+1,b+1} minus the right-hand side
double ffor_residual(const ParamPair& p, int n, double theta);

struct TGrid {
    std::vector<double> points;
    double t_min = 0.0;
    double t_max = 0.0;
    int count() const { return static_cast<int>(points.size()); }

    static TGrid log_spaced(double t_min, double t_max, int count);
    static TGrid maximal_default() { return log_spaced(1e-4, 40.0, 400); }
    // midpoints in log t inserted, so the old points are kept
    TGrid refined() const;
};

// max over the grid, discrete peaks polished by a local search in log t, plus the t -> 0 and t -> infinity limits
double maximal_operator(const JacobiExpansion& f, double theta, const TGrid& grid);

double square_function_t_max(const JacobiExpansion& f, int dt_order, int dtheta_order);
QuadratureRule square_function_rule(const JacobiExpansion& f, int dt_order, int dtheta_order);
double square_function(const JacobiExpansion& f, double theta, int dt_order, int dtheta_order,
                       const QuadratureRule& t_quad);
double square_function(const JacobiExpansion& f, double theta, int dt_order, int dtheta_order);

// closed form of the square function built from the adjoint of delta, applied to P_0
double adjoint_delta_demo(const ParamPair& p, double theta);
// the same quantity by t-quadrature of delta* H_t P_0
double adjoint_delta_direct(const ParamPair& p, double theta, const QuadratureRule& t_quad);

std::string to_json(const JacobiExpansion& f);
JacobiExpansion expansion_from_json(const std::string& text);
void write_samples_csv(std::ostream& os, const std::vector<double>& thetas, const std::vector<cplx>& values);

} // namespace jha
