#pragma once

#include "jha/common.hpp"
#include "jha/measure_quad.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace jha {

struct QPoint {
    double theta = 0.0;
    double phi = 0.0;
    double u = 1.0;
    double v = 1.0;
};

double q_value(const QPoint& p);
// 1 - cos((theta-phi)/2) + (1-u) sin sin + (1-v) cos cos
double q_value_stst(const QPoint& p);
double q_partial_theta(const QPoint& p);
double q_partial_phi(const QPoint& p);
double q_partial_theta_phi(const QPoint& p);

enum class Representation { series, dk_integral, closed_form };
std::string to_string(Representation r);

struct KernelEvaluation {
    double value = 0.0;
    double t = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    int dt_order = 0;
    int dtheta_order = 0;
    Representation representation = Representation::series;
    int truncation_or_order = 0;
    double est_error = 0.0;
    // integral (or sum) of absolute values, a natural scale for relative comparisons
    double magnitude = 0.0;
    bool converged = true;
    bool accuracy_warning = false;
};

struct SeriesOptions {
    double tol = 1e-14;
    int cap = 10000;
    double t_min = 0.01;
};

// Reject points too close to the diagonal at small t.
void check_off_diagonal(double t, double theta, double phi);

// Spectral series with a tail bound built from sampled growth constants.
class SeriesKernel {
public:
    SeriesKernel(const ParamPair& p, int max_theta_order = 4, SeriesOptions opts = {});

    KernelEvaluation evaluate(double t, double theta, double phi, int dt_order, int dtheta_order) const;
    // bound on |d^N P_n(theta)| used for truncation
    double theta_factor_bound(int order, int n) const;
    double growth_constant(int shift) const { return growth_[shift]; }
    double growth_exponent(int shift) const { return exponent_[shift]; }
    const ParamPair& params() const { return params_; }
    const SeriesOptions& options() const { return opts_; }

private:
    ParamPair params_;
    int max_order_;
    SeriesOptions opts_;
    std::vector<double> growth_;
    std::vector<double> exponent_;
    std::vector<std::vector<double>> trig_bounds_; // [order][j]
};

KernelEvaluation kernel_series(const ParamPair& p, double t, double theta, double phi, int dt_order = 0,
                               int dtheta_order = 0, double tol = 1e-14);

struct DkAccuracy {
    double ratio = 0.5;  // geometric grading factor towards u = 1
    int bulk_order = 16; // on [-1, 0]
    int panel_order = 10;
    int end_order = 10;
    bool richardson = true;
    int max_level = 60;

    static DkAccuracy accurate() { return {}; }
    static DkAccuracy fast() { return {0.25, 8, 6, 6, false, 40}; }
};

struct PiNode {
    double u;
    double omu; // 1 - u, kept separately for accuracy near u = 1
    double w;
};

// Pi_gamma rule graded geometrically towards u = 1; level L refines down to ratio^L.
class GradedPiRule {
public:
    GradedPiRule(double gamma, int bulk_order, int panel_order, int end_order, double ratio, int max_level);
    GradedPiRule(double gamma, const DkAccuracy& acc);

    double gamma() const { return gamma_; }
    bool atomic() const { return atomic_; }
    int max_level() const { return static_cast<int>(levels_.size()) - 1; }
    // smallest level whose end panel is at most half the distance d to the singularity
    int level_for(double distance) const;
    const std::vector<PiNode>& nodes(int level) const;

private:
    double gamma_;
    bool atomic_;
    double ratio_;
    std::vector<std::vector<PiNode>> levels_;
};

class DkRules {
public:
    DkRules(const ParamPair& p, const DkAccuracy& acc = DkAccuracy::accurate());

    const ParamPair& params() const { return params_; }
    const DkAccuracy& accuracy() const { return acc_; }
    const GradedPiRule& alpha_rule(bool refined = false) const { return refined ? *alpha_fine_ : alpha_; }
    const GradedPiRule& beta_rule(bool refined = false) const { return refined ? *beta_fine_ : beta_; }
    // normalizing constant 2^{-a-b-1} / m(0, pi)
    double constant() const { return constant_; }

private:
    ParamPair params_;
    DkAccuracy acc_;
    GradedPiRule alpha_, beta_;
    std::optional<GradedPiRule> alpha_fine_, beta_fine_;
    double constant_;
};

double dk_constant(const ParamPair& p);

// Geometry shared by all double integrals over (u, v).
struct DkGeometry {
    double s_theta, c_theta, s_phi, c_phi;
    double a, b;  // sin sin and cos cos products
    double base;  // 1 - cos((theta - phi)/2)
    DkGeometry(double theta, double phi);
    double q(const PiNode& nu, const PiNode& nv) const { return base + nu.omu * a + nv.omu * b; }
    double q_theta(const PiNode& nu, const PiNode& nv) const;
    double q_phi(const PiNode& nu, const PiNode& nv) const;
    double q_theta_phi(const PiNode& nu, const PiNode& nv) const;
};

// levels for the u and v rules given the minimum of t_shift + q over the square
std::pair<int, int> dk_levels(const DkGeometry& g, double t_shift, const GradedPiRule& ru,
                              const GradedPiRule& rv);

KernelEvaluation kernel_dk_integral(const ParamPair& p, double t, double theta, double phi, int dt_order,
                                    int dtheta_order, const DkRules& rules, bool dphi = false);
KernelEvaluation kernel_dk_integral(const ParamPair& p, double t, double theta, double phi, int dt_order = 0,
                                    int dtheta_order = 0);
// plain product of two Pi rules, no grading
KernelEvaluation kernel_dk_integral(const ParamPair& p, double t, double theta, double phi, int dt_order,
                                    int dtheta_order, const QuadratureRule& rule_u,
                                    const QuadratureRule& rule_v);

double kernel_closed_form(double t, double theta, double phi);

double dk_product_formula_check(const ParamPair& p, int n, double s, double t, int order = 0);

void write_kernel_csv_header(std::ostream& os, bool with_disagreement = false);
void write_kernel_csv_row(std::ostream& os, const KernelEvaluation& e);

} // namespace jha
