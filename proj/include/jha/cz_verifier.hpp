#pragma once

#include "jha/common.hpp"
#include "jha/poisson_kernel.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace jha {

enum class KernelFamily { imaginary_power, riesz, maximal, square };

struct KernelSpec {
    KernelFamily family = KernelFamily::maximal;
    double gamma = 1.0; // imaginary powers
    int order = 1;      // Riesz order N
    int dt_order = 0;   // square functions: d_t^M d_theta^N
    int dtheta_order = 0;

    bool scalar() const { return family == KernelFamily::imaginary_power || family == KernelFamily::riesz; }
    // imag, riesz<N>, maximal, gV, gH, g<M><N>
    std::string tag() const;
    static KernelSpec parse(const std::string& tag);
    // K_1, R_1, R_2, maximal, g_V, g_H, g_{1,1}
    static std::vector<KernelSpec> standard();
};

struct GridSpec {
    double lo = 0.02;
    double hi = kPi - 0.02;
    int count = 60;
    double sep_min = 0.02;

    std::vector<double> points() const;
    // spacing halved, old points kept
    GridSpec refined() const;
    void validate() const;
    std::string describe() const;
};

struct EstimateReport {
    std::string estimate_id;
    std::optional<ParamPair> params;
    std::string grid_spec;
    double empirical_sup = 0.0;
    double refinement_delta = 0.0;
    bool passed = false;
    double threshold_used = 0.05;
    // a control that is supposed to fail
    bool negative_control = false;
    std::vector<std::pair<std::string, double>> extras;

    bool as_expected() const { return passed != negative_control; }
    double extra(const std::string& key) const;
};

enum class SmoothnessMode { gradient, difference };

struct VerifyOptions {
    GridSpec grid;
    double stability = 0.05;
    int workers = 1;
    // growth checks multiply the kernel norm by |theta - phi|^{-fault_exponent}
    double fault_exponent = 0.0;
    // evaluate K(phi, theta) in place of K(theta, phi)
    bool transpose = false;
    // nonzero: shuffle the pair enumeration order
    std::uint64_t order_seed = 0;
    bool corner_zoom = true;
    DkAccuracy accuracy = DkAccuracy::fast();
};

// deterministic: fn(i) for i < n, results are whatever fn writes at index i
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

EstimateReport check_growth(const KernelSpec& kernel, const ParamPair& p, const VerifyOptions& opts = {});
EstimateReport check_smoothness(const KernelSpec& kernel, const ParamPair& p, SmoothnessMode mode,
                                const VerifyOptions& opts = {});
// growth and smoothness from one sweep (gradient mode for scalar kernels, difference otherwise)
std::pair<EstimateReport, EstimateReport> check_kernel(const KernelSpec& kernel, const ParamPair& p,
                                                       const VerifyOptions& opts = {});
// growth sup along |theta - phi| = sep_min 2^{-k}, k = 0..halvings
EstimateReport check_growth_sweep(const KernelSpec& kernel, const ParamPair& p, const VerifyOptions& opts = {},
                                  int halvings = 6);

// two reports: exponent a+b+3/2 times the ball measure, exponent a+b+2 times |theta-phi| and the ball measure
std::vector<EstimateReport> check_bridge(const ParamPair& p, const VerifyOptions& opts = {});
EstimateReport check_trig(int count = 40, double stability = 0.05);
EstimateReport check_comp(std::size_t samples = 1000000, std::uint64_t seed = 20240611, bool violate = false,
                          double stability = 0.05);
EstimateReport check_lem58(double gamma, double lambda, int count = 40, double stability = 0.05);
// one report per regime row
std::vector<EstimateReport> check_phi_derivative_bounds(const ParamPair& p, int dt_order, int dtheta_order,
                                                        double stability = 0.05);
EstimateReport check_ball(const ParamPair& p, const VerifyOptions& opts = {});
EstimateReport check_doubling(const ParamPair& p, const VerifyOptions& opts = {});

struct SuiteConfig {
    std::vector<ParamPair> panel;
    std::vector<KernelSpec> kernels;
    // growth smoothness sweep bridge lem58 phi_bounds ball trig comp
    std::set<std::string> checks;
    VerifyOptions options;
    std::size_t comp_samples = 1000000;
    int trig_count = 40;
    std::uint64_t seed = 20240611;
    bool inject_growth_fault = false;

    static std::vector<ParamPair> default_panel();
    static const std::set<std::string>& all_checks();
    static SuiteConfig defaults();
    void validate() const;
};

struct SuiteResult {
    std::vector<EstimateReport> reports;
    bool all_passed() const;
    // 0 all as expected, 1 otherwise
    int exit_code() const { return all_passed() ? 0 : 1; }
};

SuiteResult run_suite(const SuiteConfig& config);

std::string reports_to_json(const std::vector<EstimateReport>& reports);
void write_report_table(std::ostream& os, const std::vector<EstimateReport>& reports);

} // namespace jha
