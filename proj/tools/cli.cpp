#include "jha/cli.hpp"
#include "jha/cz_verifier.hpp"
#include "jha/measure_quad.hpp"
#include "jha/poisson_kernel.hpp"
#include "jha/special_fn.hpp"
#include "jha/spectral_ops.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace jha::cli {

namespace {

using ojson = nlohmann::ordered_json;

// bad flags or unreadable input
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty())
            out.push_back(cur);
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// writes to --output when given, else to out
class Sink {
public:
    Sink(const std::string& path, std::ostream& out) : out_(&out)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_)
                throw UsageError("cannot write " + path);
            out_ = file_.get();
        }
    }
    std::ostream& os() { return *out_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

ParamPair make_params(double a, double b)
{
    try {
        return ParamPair(a, b);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

std::vector<ParamPair> parse_panel(const std::string& s)
{
    if (s == "default")
        return SuiteConfig::default_panel();
    std::vector<ParamPair> out;
    for (const auto& item : split(s, ';')) {
        const auto ab = split(item, ',');
        if (ab.size() != 2)
            throw UsageError("panel entries are alpha,beta pairs separated by ';'");
        try {
            out.push_back(make_params(std::stod(ab[0]), std::stod(ab[1])));
        } catch (const std::invalid_argument&) {
            throw UsageError("panel: not a number in '" + item + "'");
        }
    }
    if (out.empty())
        throw UsageError("empty panel");
    return out;
}

// ------------------------------------------------------------------ kernel

struct KernelArgs {
    std::optional<double> alpha, beta, t, theta, phi;
    int dt = 0, dth = 0;
    std::string reps;
    std::string grid;
    double tol = 1e-8;
    std::string format = "csv";
    std::string output;
};

struct KernelRow {
    ParamPair p;
    KernelEvaluation e;
    double disagreement = 0.0;
};

KernelRow evaluate_point(const ParamPair& p, double t, double th, double ph, int m, int n,
                         const std::vector<Representation>& reps)
{
    std::vector<KernelEvaluation> ev;
    for (Representation r : reps) {
        switch (r) {
        case Representation::series: ev.push_back(kernel_series(p, t, th, ph, m, n)); break;
        case Representation::dk_integral: ev.push_back(kernel_dk_integral(p, t, th, ph, m, n)); break;
        case Representation::closed_form: {
            KernelEvaluation e;
            e.value = kernel_closed_form(t, th, ph);
            e.t = t;
            e.theta = th;
            e.phi = ph;
            e.representation = r;
            e.magnitude = std::abs(e.value);
            ev.push_back(e);
            break;
        }
        }
    }
    KernelRow row{p, ev.front(), 0.0};
    double scale = 0.0;
    for (const auto& e : ev)
        scale = std::max({scale, std::abs(e.value), e.magnitude});
    for (std::size_t i = 1; i < ev.size(); ++i)
        row.disagreement = std::max(row.disagreement, std::abs(ev[i].value - ev[0].value) / std::max(scale, 1e-300));
    return row;
}

std::vector<Representation> parse_reps(const std::string& s, const ParamPair& p, int m, int n)
{
    const bool disc = p.alpha() == -0.5 && p.beta() == -0.5 && m == 0 && n == 0;
    std::vector<Representation> out;
    if (s.empty() || s == "all") {
        out = {Representation::series, Representation::dk_integral};
        if (disc)
            out.push_back(Representation::closed_form);
        return out;
    }
    for (const auto& r : split(s, ',')) {
        if (r == "series")
            out.push_back(Representation::series);
        else if (r == "dk" || r == "integral" || r == "dk_integral")
            out.push_back(Representation::dk_integral);
        else if (r == "closed" || r == "closed_form") {
            if (!disc)
                throw UsageError("closed form exists only for alpha = beta = -1/2 and M = N = 0");
            out.push_back(Representation::closed_form);
        } else
            throw UsageError("unknown representation: " + r);
    }
    if (out.empty())
        throw UsageError("no representation selected");
    return out;
}

int cmd_kernel(const KernelArgs& a, std::ostream& out)
{
    if (a.dt < 0 || a.dth < 0)
        throw UsageError("--M and --N must be >= 0");
    if (!(a.tol > 0.0))
        throw UsageError("--tol must be positive");
    std::vector<ParamPair> panel;
    if (a.alpha.has_value() != a.beta.has_value())
        throw UsageError("give both --alpha and --beta");
    if (a.alpha)
        panel.push_back(make_params(*a.alpha, *a.beta));

    struct Point {
        double t, theta, phi;
    };
    std::vector<Point> pts;
    if (!a.grid.empty()) {
        if (a.grid != "default")
            throw UsageError("--grid accepts 'default'");
        if (panel.empty())
            panel = SuiteConfig::default_panel();
        for (int i = 0; i < 10; ++i) {
            const double t = 0.05 * std::pow(100.0, i / 9.0);
            for (int j = 0; j < 10; ++j)
                for (int k = 0; k < 10; ++k) {
                    const double th = 0.1 + (kPi - 0.2) * j / 9.0, ph = 0.1 + (kPi - 0.2) * k / 9.0;
                    if (std::abs(th - ph) >= 0.05)
                        pts.push_back({t, th, ph});
                }
        }
    } else {
        if (!a.t || !a.theta || !a.phi)
            throw UsageError("--t, --theta and --phi are required without --grid");
        if (panel.empty())
            throw UsageError("--alpha and --beta are required without --grid");
        if (!(*a.t > 0.0) || !(*a.theta > 0.0 && *a.theta < kPi) || !(*a.phi > 0.0 && *a.phi < kPi))
            throw UsageError("need t > 0 and theta, phi in (0, pi)");
        pts.push_back({*a.t, *a.theta, *a.phi});
    }

    std::vector<KernelRow> rows;
    for (const ParamPair& p : panel) {
        const auto reps = parse_reps(a.reps, p, a.dt, a.dth);
        for (const Point& x : pts)
            rows.push_back(evaluate_point(p, x.t, x.theta, x.phi, a.dt, a.dth, reps));
    }

    bool ok = true;
    for (const auto& r : rows)
        ok = ok && r.disagreement <= a.tol;

    if (a.format == "csv") {
        out << "alpha,beta,";
        write_kernel_csv_header(out, true);
        for (const auto& r : rows) {
            out << num(r.p.alpha()) << "," << num(r.p.beta()) << ",";
            write_kernel_csv_row(out, r.e);
            out << "," << num(r.disagreement) << "\n";
        }
    } else if (a.format == "json") {
        ojson arr = ojson::array();
        for (const auto& r : rows)
            arr.push_back({{"alpha", r.p.alpha()}, {"beta", r.p.beta()}, {"t", r.e.t}, {"theta", r.e.theta},
                           {"phi", r.e.phi}, {"M", r.e.dt_order}, {"N", r.e.dtheta_order}, {"value", r.e.value},
                           {"est_error", r.e.est_error}, {"representation", to_string(r.e.representation)},
                           {"disagreement", r.disagreement}});
        out << arr.dump(2) << "\n";
    } else {
        out << std::setw(6) << "alpha" << std::setw(6) << "beta" << std::setw(10) << "t" << std::setw(10) << "theta"
            << std::setw(10) << "phi" << std::setw(3) << "M" << std::setw(3) << "N" << std::setw(24) << "value"
            << std::setw(12) << "disagree" << "\n";
        for (const auto& r : rows)
            out << std::setw(6) << r.p.alpha() << std::setw(6) << r.p.beta() << std::setw(10) << r.e.t << std::setw(10)
                << r.e.theta << std::setw(10) << r.e.phi << std::setw(3) << r.e.dt_order << std::setw(3)
                << r.e.dtheta_order << std::setw(24) << std::setprecision(17) << r.e.value << std::setw(12)
                << std::setprecision(3) << r.disagreement << std::setprecision(6) << "\n";
    }
    return ok ? 0 : 1;
}

// ------------------------------------------------------------------ apply

struct ApplyArgs {
    std::string op;
    std::string input;
    std::optional<double> alpha, beta;
    std::optional<int> unit;
    std::optional<std::uint64_t> random;
    int n_max = 20;
    double gamma = 1.0;
    int order = 1;
    double t = 1.0;
    int dt = 1, dth = 0;
    int samples = 50;
    std::string format = "json";
    std::string output;
};

JacobiExpansion load_expansion(const ApplyArgs& a)
{
    const int sources = !a.input.empty() + a.unit.has_value() + a.random.has_value();
    if (sources != 1)
        throw UsageError("give exactly one of --input, --unit, --random");
    if (!a.input.empty()) {
        try {
            return expansion_from_json(read_file(a.input));
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        } catch (const nlohmann::json::exception& e) {
            throw UsageError(std::string("expansion JSON: ") + e.what());
        }
    }
    if (!a.alpha || !a.beta)
        throw UsageError("--alpha and --beta are required with --unit or --random");
    const ParamPair p = make_params(*a.alpha, *a.beta);
    if (a.n_max < 0)
        throw UsageError("--nmax must be >= 0");
    if (a.unit) {
        if (*a.unit < 0 || *a.unit > a.n_max)
            throw UsageError("--unit must lie in [0, nmax]");
        return unit_vector(p, *a.unit, a.n_max);
    }
    return random_expansion(p, a.n_max, *a.random);
}

// L^2(dm) norm of theta -> g(theta)
template <typename Fn>
double sampled_l2(const ParamPair& p, Fn g, int order)
{
    const QuadratureRule rule = jacobi_measure_rule(p, order);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weights[i] * std::norm(g(rule.nodes[i]));
    return std::sqrt(s);
}

int cmd_apply(const ApplyArgs& a, std::ostream& out)
{
    const JacobiExpansion f = load_expansion(a);
    if (a.samples < 1)
        throw UsageError("--samples must be >= 1");
    static const std::vector<std::string> ops{"imaginary-power", "riesz", "semigroup", "maximal", "gfunction"};
    if (std::find(ops.begin(), ops.end(), a.op) == ops.end())
        throw UsageError("unknown operator: " + a.op);
    if (a.format != "json" && a.format != "csv")
        throw UsageError("apply writes json or csv");

    std::vector<double> thetas(a.samples);
    for (int i = 0; i < a.samples; ++i)
        thetas[i] = kPi * (i + 0.5) / a.samples;

    // operator preconditions surface as DomainError and map to exit 1 in run()
    std::optional<JacobiExpansion> result;
    std::function<cplx(double)> sample;
    std::unique_ptr<RieszTransform> riesz;
    QuadratureRule tq;
    TGrid tg;
    if (a.op == "imaginary-power") {
        result = apply_imaginary_power(f, a.gamma);
    } else if (a.op == "semigroup") {
        result = apply_semigroup(f, a.t);
    } else if (a.op == "riesz") {
        riesz = std::make_unique<RieszTransform>(apply_riesz(f, a.order));
        sample = [&](double th) { return (*riesz)(th); };
    } else if (a.op == "maximal") {
        tg = TGrid::maximal_default();
        sample = [&](double th) { return cplx(maximal_operator(f, th, tg), 0.0); };
    } else {
        tq = square_function_rule(f, a.dt, a.dth);
        sample = [&](double th) { return cplx(square_function(f, th, a.dt, a.dth, tq), 0.0); };
    }
    if (result && a.format == "json") {
        out << to_json(*result) << "\n";
        return 0;
    }
    if (result)
        sample = [&](double th) { return synthesize(*result, th); };

    std::vector<cplx> values(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i)
        values[i] = sample(thetas[i]);
    if (a.format == "csv") {
        write_samples_csv(out, thetas, values);
        return 0;
    }
    const int order = std::max(40, f.n_max() + 20);
    // Pi_0 f is what the square functions see in the critical case
    const double in_norm = project_zero_mode(f).norm();
    const double out_norm = sampled_l2(f.params, sample, order);
    ojson j;
    j["operator"] = a.op;
    j["alpha"] = f.params.alpha();
    j["beta"] = f.params.beta();
    j["n_max"] = f.n_max();
    j["input_norm"] = in_norm;
    j["output_norm"] = out_norm;
    j["norm_ratio_squared"] = in_norm > 0.0 ? out_norm * out_norm / (in_norm * in_norm) : 0.0;
    ojson s = ojson::array();
    for (std::size_t i = 0; i < thetas.size(); ++i)
        s.push_back({{"theta", thetas[i]}, {"re", values[i].real()}, {"im", values[i].imag()}});
    j["samples"] = s;
    out << j.dump(2) << "\n";
    return 0;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
    std::string panel = "default";
    std::string only;
    std::string kernels;
    std::optional<int> grid_count;
    std::optional<double> grid_lo, grid_hi, sep_min;
    double stability = 0.05;
    std::uint64_t seed = 20240611;
    std::optional<std::size_t> comp_samples;
    std::optional<int> trig_count;
    int workers = 0;
    std::string inject_fault;
    std::string config;
    std::string format = "table";
    std::string output;
};

void apply_config_file(const std::string& path, SuiteConfig& c)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
        if (!j.is_object())
            throw UsageError("config must be a JSON object");
        if (j.contains("panel")) {
            c.panel.clear();
            for (const auto& e : j["panel"])
                c.panel.push_back(make_params(e.at(0).get<double>(), e.at(1).get<double>()));
        }
        if (j.contains("kernels")) {
            c.kernels.clear();
            for (const auto& e : j["kernels"])
                c.kernels.push_back(KernelSpec::parse(e.get<std::string>()));
        }
        if (j.contains("checks"))
            c.checks = j["checks"].get<std::set<std::string>>();
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            c.options.grid.lo = g.value("lo", c.options.grid.lo);
            c.options.grid.hi = g.value("hi", c.options.grid.hi);
            c.options.grid.count = g.value("count", c.options.grid.count);
            c.options.grid.sep_min = g.value("sep_min", c.options.grid.sep_min);
        }
        c.options.stability = j.value("stability", c.options.stability);
        c.options.workers = j.value("workers", c.options.workers);
        c.seed = j.value("seed", c.seed);
        c.comp_samples = j.value("comp_samples", c.comp_samples);
        c.trig_count = j.value("trig_count", c.trig_count);
        if (j.contains("inject_fault")) {
            const auto f = j["inject_fault"].get<std::string>();
            if (f != "growth" && f != "none")
                throw UsageError("inject_fault: only 'growth' is supported");
            c.inject_growth_fault = f == "growth";
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    } catch (const DomainError& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

int cmd_verify(const VerifyArgs& a, std::ostream& out)
{
    SuiteConfig c = SuiteConfig::defaults();
    c.panel = parse_panel(a.panel);
    if (!a.only.empty()) {
        c.checks.clear();
        for (const auto& s : split(a.only, ','))
            c.checks.insert(s);
    }
    if (!a.kernels.empty()) {
        c.kernels.clear();
        try {
            for (const auto& s : split(a.kernels, ','))
                c.kernels.push_back(KernelSpec::parse(s));
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }
    if (a.grid_count)
        c.options.grid.count = *a.grid_count;
    if (a.grid_lo)
        c.options.grid.lo = *a.grid_lo;
    if (a.grid_hi)
        c.options.grid.hi = *a.grid_hi;
    if (a.sep_min)
        c.options.grid.sep_min = *a.sep_min;
    c.options.stability = a.stability;
    c.options.workers = a.workers > 0 ? a.workers : std::max(1u, std::thread::hardware_concurrency());
    c.seed = a.seed;
    if (a.comp_samples)
        c.comp_samples = *a.comp_samples;
    if (a.trig_count)
        c.trig_count = *a.trig_count;
    if (!a.inject_fault.empty()) {
        if (a.inject_fault != "growth")
            throw UsageError("--inject-fault supports 'growth'");
        c.inject_growth_fault = true;
    }
    if (!a.config.empty())
        apply_config_file(a.config, c);
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    const SuiteResult r = run_suite(c);
    if (a.format == "json") {
        out << reports_to_json(r.reports) << "\n";
    } else if (a.format == "csv") {
        out << "estimate_id,alpha,beta,empirical_sup,refinement_delta,passed,threshold_used,negative_control\n";
        for (const auto& x : r.reports)
            out << x.estimate_id << "," << (x.params ? num(x.params->alpha()) : "") << ","
                << (x.params ? num(x.params->beta()) : "") << "," << num(x.empirical_sup) << ","
                << num(x.refinement_delta) << "," << (x.passed ? "true" : "false") << "," << num(x.threshold_used)
                << "," << (x.negative_control ? "true" : "false") << "\n";
    } else {
        write_report_table(out, r.reports);
        out << (r.all_passed() ? "all checks as expected" : "some checks failed") << "\n";
    }
    return r.exit_code();
}

// ------------------------------------------------------------------ poly

struct PolyArgs {
    double alpha = 0.0, beta = 0.0;
    int n_max = 5;
    int count = 11;
    std::string format = "csv";
    std::string output;
};

int cmd_poly(const PolyArgs& a, std::ostream& out)
{
    const ParamPair p = make_params(a.alpha, a.beta);
    if (a.n_max < 0 || a.count < 2)
        throw UsageError("need --nmax >= 0 and --count >= 2");
    std::vector<double> thetas(a.count);
    for (int i = 0; i < a.count; ++i)
        thetas[i] = kPi * i / (a.count - 1);
    if (a.format == "json") {
        ojson j;
        j["alpha"] = a.alpha;
        j["beta"] = a.beta;
        j["n_max"] = a.n_max;
        ojson rows = ojson::array();
        for (double th : thetas)
            rows.push_back({{"theta", th}, {"values", normalized_sequence(p, a.n_max, th)}});
        j["rows"] = rows;
        out << j.dump(2) << "\n";
        return 0;
    }
    out << "theta";
    for (int n = 0; n <= a.n_max; ++n)
        out << ",P" << n;
    out << "\n";
    for (double th : thetas) {
        out << num(th);
        for (double v : normalized_sequence(p, a.n_max, th))
            out << "," << num(v);
        out << "\n";
    }
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Jacobi-Poisson kernels, spectral operators and standard-estimate checks", "jacobi-cz"};
    app.require_subcommand(1);

    KernelArgs ka;
    auto* kernel = app.add_subcommand("kernel", "evaluate H_t and its derivatives by several routes");
    kernel->add_option("--alpha", ka.alpha);
    kernel->add_option("--beta", ka.beta);
    kernel->add_option("--t", ka.t);
    kernel->add_option("--theta", ka.theta);
    kernel->add_option("--phi", ka.phi);
    kernel->add_option("--M", ka.dt, "t-derivative order");
    kernel->add_option("--N", ka.dth, "theta-derivative order");
    kernel->add_option("--reps", ka.reps, "comma list of series, dk, closed (default: all that apply)");
    kernel->add_option("--grid", ka.grid, "'default': 10x10x10 grid, t in [0.05, 5]");
    kernel->add_option("--tol", ka.tol, "largest relative disagreement accepted");
    kernel->add_option("--format", ka.format)->check(CLI::IsMember({"csv", "json", "table"}));
    kernel->add_option("--output", ka.output);

    ApplyArgs aa;
    auto* apply = app.add_subcommand("apply", "apply a spectral operator to an expansion");
    apply->add_option("--op", aa.op, "imaginary-power | riesz | semigroup | maximal | gfunction")->required();
    apply->add_option("--input", aa.input, "expansion JSON {alpha, beta, n_max, coeffs}");
    apply->add_option("--alpha", aa.alpha);
    apply->add_option("--beta", aa.beta);
    apply->add_option("--unit", aa.unit, "use the n-th basis vector");
    apply->add_option("--random", aa.random, "use a random unit expansion with this seed");
    apply->add_option("--nmax", aa.n_max);
    apply->add_option("--gamma", aa.gamma);
    apply->add_option("--order", aa.order, "Riesz order");
    apply->add_option("--t", aa.t);
    apply->add_option("--M", aa.dt);
    apply->add_option("--N", aa.dth);
    apply->add_option("--samples", aa.samples, "theta samples for sampled output");
    apply->add_option("--format", aa.format)->check(CLI::IsMember({"json", "csv"}));
    apply->add_option("--output", aa.output);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run the standard-estimate checks");
    verify->add_option("--panel", va.panel, "'default' or a;b pairs like '0,0;0.3,1.7'");
    verify->add_option("--only", va.only, "comma list of checks");
    verify->add_option("--kernels", va.kernels, "comma list of kernel tags");
    verify->add_option("--grid-count", va.grid_count);
    verify->add_option("--grid-lo", va.grid_lo);
    verify->add_option("--grid-hi", va.grid_hi);
    verify->add_option("--sep-min", va.sep_min);
    verify->add_option("--stability", va.stability);
    verify->add_option("--seed", va.seed);
    verify->add_option("--comp-samples", va.comp_samples);
    verify->add_option("--trig-count", va.trig_count);
    verify->add_option("--workers", va.workers, "0: all hardware threads");
    verify->add_option("--inject-fault", va.inject_fault, "growth");
    verify->add_option("--config", va.config, "JSON file, overrides flags");
    verify->add_option("--format", va.format)->check(CLI::IsMember({"table", "json", "csv"}));
    verify->add_option("--output", va.output);

    PolyArgs pa;
    auto* poly = app.add_subcommand("poly", "table of normalized Jacobi polynomials");
    poly->add_option("--alpha", pa.alpha);
    poly->add_option("--beta", pa.beta);
    poly->add_option("--nmax", pa.n_max);
    poly->add_option("--count", pa.count, "theta points on [0, pi]");
    poly->add_option("--format", pa.format)->check(CLI::IsMember({"csv", "json"}));
    poly->add_option("--output", pa.output);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    auto usage = [&](CLI::App* sub) { err << sub->help(); };
    CLI::App* active = app.get_subcommands().front();
    try {
        if (active == kernel) {
            Sink s(ka.output, out);
            return cmd_kernel(ka, s.os());
        }
        if (active == apply) {
            Sink s(aa.output, out);
            return cmd_apply(aa, s.os());
        }
        if (active == verify) {
            Sink s(va.output, out);
            return cmd_verify(va, s.os());
        }
        Sink s(pa.output, out);
        return cmd_poly(pa, s.os());
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        usage(active);
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const SingularityError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace jha::cli
