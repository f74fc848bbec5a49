#include "jha/cz_verifier.hpp"
#include "jha/measure_quad.hpp"
#include "jha/phi_derivatives.hpp"
#include "jha/scalar_kernels.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace jha {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double rel_change(double coarse, double fine)
{
    if (!std::isfinite(coarse) || !std::isfinite(fine))
        return kInf;
    if (coarse == 0.0)
        return fine == 0.0 ? 0.0 : kInf;
    return std::abs(fine - coarse) / std::abs(coarse);
}

void finish(EstimateReport& r, double coarse, double fine, double stability)
{
    r.empirical_sup = coarse;
    r.refinement_delta = rel_change(coarse, fine);
    r.threshold_used = stability;
    r.passed = std::isfinite(coarse) && std::isfinite(fine) && r.refinement_delta < stability;
    r.extras.emplace_back("refined_sup", fine);
}

// ---------------------------------------------------------------- kernel probes

struct PairValue {
    double norm = 0.0;
    double gradient = 0.0;
    std::vector<double> samples;
};

class KernelProbe {
public:
    KernelProbe(const KernelSpec& spec, const ParamPair& p, const DkAccuracy& acc) : spec_(spec)
    {
        switch (spec.family) {
        case KernelFamily::imaginary_power: imag_ = std::make_unique<ImaginaryPowerKernel>(p, spec.gamma, acc); break;
        case KernelFamily::riesz: riesz_ = std::make_unique<RieszKernel>(p, spec.order, acc); break;
        case KernelFamily::maximal: vec_ = std::make_unique<VectorKernel>(p, 0, 0, acc); break;
        case KernelFamily::square:
            if (spec.dt_order + spec.dtheta_order < 1)
                throw DomainError("square-function kernel needs M + N > 0");
            vec_ = std::make_unique<VectorKernel>(p, spec.dt_order, spec.dtheta_order, acc);
            break;
        }
    }

    PairValue eval(double theta, double phi, bool smooth, SmoothnessMode mode) const
    {
        PairValue out;
        if (vec_) {
            out.samples = vec_->samples(theta, phi);
            out.norm = vec_->norm(out.samples);
            return out;
        }
        cplx v;
        double g = 0.0;
        if (imag_) {
            v = imag_->value(theta, phi);
            if (smooth && mode == SmoothnessMode::gradient) {
                const auto [a, b] = imag_->gradient(theta, phi);
                g = std::abs(a) + std::abs(b);
            }
        } else {
            v = riesz_->value(theta, phi);
            if (smooth && mode == SmoothnessMode::gradient) {
                const auto [a, b] = riesz_->gradient(theta, phi);
                g = std::abs(a) + std::abs(b);
            }
        }
        out.norm = std::abs(v);
        out.gradient = g;
        if (smooth && mode == SmoothnessMode::difference)
            out.samples = {v.real(), v.imag()};
        return out;
    }

    double distance(const std::vector<double>& a, const std::vector<double>& b) const
    {
        if (vec_)
            return vec_->distance(a, b);
        return std::hypot(a[0] - b[0], a[1] - b[1]);
    }

private:
    KernelSpec spec_;
    std::unique_ptr<ImaginaryPowerKernel> imag_;
    std::unique_ptr<RieszKernel> riesz_;
    std::unique_ptr<VectorKernel> vec_;
};

struct SweepResult {
    double growth = 0.0;
    double smooth = 0.0;
    long pairs = 0;
    long combos = 0;
    long zero_distance = 0;
};

std::vector<std::pair<int, int>> grid_pairs(const std::vector<double>& pts, double sep, std::uint64_t order_seed)
{
    std::vector<std::pair<int, int>> pairs;
    const int n = static_cast<int>(pts.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(pts[i] - pts[j]) >= sep)
                pairs.emplace_back(i, j);
    if (order_seed != 0) {
        std::mt19937_64 rng(order_seed);
        std::shuffle(pairs.begin(), pairs.end(), rng);
    }
    return pairs;
}

SweepResult sweep(const KernelProbe& probe, const ParamPair& p, const GridSpec& grid, const VerifyOptions& opts,
                  bool smooth, SmoothnessMode mode)
{
    grid.validate();
    const std::vector<double> pts = grid.points();
    const int n = static_cast<int>(pts.size());
    const auto pairs = grid_pairs(pts, grid.sep_min, opts.order_seed);
    std::vector<PairValue> val(static_cast<std::size_t>(n) * n);
    std::vector<char> have(val.size(), 0);
    std::vector<double> ball(val.size(), 0.0);
    parallel_for(pairs.size(), opts.workers, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const std::size_t idx = static_cast<std::size_t>(i) * n + j;
        const double th = pts[i], ph = pts[j];
        val[idx] = opts.transpose ? probe.eval(ph, th, smooth, mode) : probe.eval(th, ph, smooth, mode);
        ball[idx] = ball_measure(p, th, std::abs(th - ph));
        have[idx] = 1;
    });

    SweepResult r;
    r.pairs = static_cast<long>(pairs.size());
    for (const auto& [i, j] : pairs) {
        const std::size_t idx = static_cast<std::size_t>(i) * n + j;
        const double d = std::abs(pts[i] - pts[j]);
        const double fault = opts.fault_exponent != 0.0 ? std::pow(d, -opts.fault_exponent) : 1.0;
        r.growth = std::max(r.growth, val[idx].norm * fault * ball[idx]);
        if (smooth && mode == SmoothnessMode::gradient)
            r.smooth = std::max(r.smooth, val[idx].gradient * d * ball[idx]);
    }
    if (!smooth || mode == SmoothnessMode::gradient)
        return r;

    // |theta - phi| > 2 |theta - theta'| (and the phi version), partners taken from the grid
    for (const auto& [i, j] : pairs) {
        const std::size_t idx = static_cast<std::size_t>(i) * n + j;
        const double d = std::abs(pts[i] - pts[j]);
        for (int k = 0; k < n; ++k) {
            if (k == i) {
                ++r.zero_distance;
            } else {
                const double e = std::abs(pts[i] - pts[k]);
                const std::size_t other = static_cast<std::size_t>(k) * n + j;
                if (d > 2.0 * e && have[other]) {
                    ++r.combos;
                    r.smooth = std::max(r.smooth, probe.distance(val[idx].samples, val[other].samples) * (d / e) * ball[idx]);
                }
            }
            if (k == j) {
                ++r.zero_distance;
            } else {
                const double e = std::abs(pts[j] - pts[k]);
                const std::size_t other = static_cast<std::size_t>(i) * n + k;
                if (d > 2.0 * e && have[other]) {
                    ++r.combos;
                    r.smooth = std::max(r.smooth, probe.distance(val[idx].samples, val[other].samples) * (d / e) * ball[idx]);
                }
            }
        }
    }
    return r;
}

} // namespace

// ---------------------------------------------------------------- small types

std::string KernelSpec::tag() const
{
    switch (family) {
    case KernelFamily::imaginary_power: return gamma == 1.0 ? "imag" : "imag" + fmt(gamma);
    case KernelFamily::riesz: return "riesz" + std::to_string(order);
    case KernelFamily::maximal: return "maximal";
    case KernelFamily::square:
        if (dt_order == 1 && dtheta_order == 0)
            return "gV";
        if (dt_order == 0 && dtheta_order == 1)
            return "gH";
        return "g" + std::to_string(dt_order) + std::to_string(dtheta_order);
    }
    return "unknown";
}

KernelSpec KernelSpec::parse(const std::string& tag)
{
    KernelSpec k;
    auto digits = [&](const std::string& s) {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
            throw DomainError("unknown kernel tag: " + tag);
        return s;
    };
    if (tag == "maximal") {
        k.family = KernelFamily::maximal;
    } else if (tag == "gV") {
        k = {KernelFamily::square, 1.0, 1, 1, 0};
    } else if (tag == "gH") {
        k = {KernelFamily::square, 1.0, 1, 0, 1};
    } else if (tag.rfind("imag", 0) == 0) {
        k.family = KernelFamily::imaginary_power;
        if (tag.size() > 4) {
            std::size_t used = 0;
            try {
                k.gamma = std::stod(tag.substr(4), &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tag.size() - 4)
                throw DomainError("unknown kernel tag: " + tag);
        }
        if (k.gamma == 0.0)
            throw DomainError("imaginary power needs gamma != 0");
    } else if (tag.rfind("riesz", 0) == 0) {
        k.family = KernelFamily::riesz;
        k.order = std::stoi(digits(tag.substr(5)));
        if (k.order < 1)
            throw DomainError("Riesz order must be >= 1");
    } else if (tag.size() == 3 && tag[0] == 'g') {
        digits(tag.substr(1));
        k = {KernelFamily::square, 1.0, 1, tag[1] - '0', tag[2] - '0'};
        if (k.dt_order + k.dtheta_order < 1)
            throw DomainError("square-function kernel needs M + N > 0");
    } else {
        throw DomainError("unknown kernel tag: " + tag);
    }
    return k;
}

std::vector<KernelSpec> KernelSpec::standard()
{
    return {parse("imag"), parse("riesz1"), parse("riesz2"), parse("maximal"), parse("gV"), parse("gH"), parse("g11")};
}

std::vector<double> GridSpec::points() const
{
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return out;
}

GridSpec GridSpec::refined() const
{
    GridSpec g = *this;
    g.count = 2 * count - 1;
    return g;
}

void GridSpec::validate() const
{
    if (!(sep_min > 0.0))
        throw SingularityError("grid must keep a positive distance from the diagonal (sep_min > 0)");
    if (!(lo > 0.0) || !(hi < kPi) || !(hi > lo) || count < 2)
        throw DomainError("grid must be a nondegenerate range inside (0, pi)");
}

std::string GridSpec::describe() const
{
    std::ostringstream os;
    os << "theta,phi in [" << fmt(lo) << ", " << fmt(hi) << "], " << count << " points, |theta-phi| >= " << fmt(sep_min);
    return os.str();
}

double EstimateReport::extra(const std::string& key) const
{
    for (const auto& [k, v] : extras)
        if (k == key)
            return v;
    return std::numeric_limits<double>::quiet_NaN();
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn)
{
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(w);
    for (std::size_t k = 0; k < w; ++k)
        pool.emplace_back([&, k] {
            try {
                for (std::size_t i = k; i < n; i += w)
                    fn(i);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// ---------------------------------------------------------------- kernel estimates

std::pair<EstimateReport, EstimateReport> check_kernel(const KernelSpec& kernel, const ParamPair& p,
                                                       const VerifyOptions& opts)
{
    const SmoothnessMode mode = kernel.scalar() ? SmoothnessMode::gradient : SmoothnessMode::difference;
    const KernelProbe probe(kernel, p, opts.accuracy);
    const SweepResult c = sweep(probe, p, opts.grid, opts, true, mode);
    const SweepResult f = sweep(probe, p, opts.grid.refined(), opts, true, mode);

    EstimateReport g;
    g.estimate_id = "growth:" + kernel.tag();
    g.params = p;
    g.grid_spec = opts.grid.describe();
    finish(g, c.growth, f.growth, opts.stability);
    g.extras.emplace_back("pairs", static_cast<double>(c.pairs));
    if (opts.fault_exponent != 0.0)
        g.extras.emplace_back("fault_exponent", opts.fault_exponent);
    if (opts.corner_zoom) {
        const GridSpec corner{0.002, 0.2, 20, 0.002};
        g.extras.emplace_back("corner_zoom_sup", sweep(probe, p, corner, opts, false, mode).growth);
    }

    EstimateReport s;
    s.estimate_id = "smoothness:" + kernel.tag() + (mode == SmoothnessMode::gradient ? ":gradient" : ":difference");
    s.params = p;
    s.grid_spec = opts.grid.describe();
    finish(s, c.smooth, f.smooth, opts.stability);
    if (mode == SmoothnessMode::difference) {
        s.extras.emplace_back("combos", static_cast<double>(c.combos));
        s.extras.emplace_back("zero_distance_rejections", static_cast<double>(c.zero_distance));
    }
    return {g, s};
}

EstimateReport check_growth(const KernelSpec& kernel, const ParamPair& p, const VerifyOptions& opts)
{
    const KernelProbe probe(kernel, p, opts.accuracy);
    const SmoothnessMode mode = SmoothnessMode::gradient;
    const SweepResult c = sweep(probe, p, opts.grid, opts, false, mode);
    const SweepResult f = sweep(probe, p, opts.grid.refined(), opts, false, mode);
    EstimateReport g;
    g.estimate_id = "growth:" + kernel.tag();
    g.params = p;
    g.grid_spec = opts.grid.describe();
    finish(g, c.growth, f.growth, opts.stability);
    g.extras.emplace_back("pairs", static_cast<double>(c.pairs));
    if (opts.fault_exponent != 0.0)
        g.extras.emplace_back("fault_exponent", opts.fault_exponent);
    if (opts.corner_zoom) {
        const GridSpec corner{0.002, 0.2, 20, 0.002};
        g.extras.emplace_back("corner_zoom_sup", sweep(probe, p, corner, opts, false, mode).growth);
    }
    return g;
}

EstimateReport check_smoothness(const KernelSpec& kernel, const ParamPair& p, SmoothnessMode mode,
                                const VerifyOptions& opts)
{
    if (mode == SmoothnessMode::gradient && !kernel.scalar())
        throw DomainError("gradient mode applies to scalar kernels only");
    const KernelProbe probe(kernel, p, opts.accuracy);
    const SweepResult c = sweep(probe, p, opts.grid, opts, true, mode);
    const SweepResult f = sweep(probe, p, opts.grid.refined(), opts, true, mode);
    EstimateReport s;
    s.estimate_id = "smoothness:" + kernel.tag() + (mode == SmoothnessMode::gradient ? ":gradient" : ":difference");
    s.params = p;
    s.grid_spec = opts.grid.describe();
    finish(s, c.smooth, f.smooth, opts.stability);
    if (mode == SmoothnessMode::difference) {
        s.extras.emplace_back("combos", static_cast<double>(c.combos));
        s.extras.emplace_back("zero_distance_rejections", static_cast<double>(c.zero_distance));
    }
    return s;
}

EstimateReport check_growth_sweep(const KernelSpec& kernel, const ParamPair& p, const VerifyOptions& opts,
                                  int halvings)
{
    opts.grid.validate();
    if (halvings < 1)
        throw DomainError("check_growth_sweep: need at least one halving");
    const KernelProbe probe(kernel, p, opts.accuracy);
    const std::vector<double> pts = opts.grid.points();
    std::vector<double> sups;
    for (int k = 0; k <= halvings; ++k) {
        const double d = opts.grid.sep_min * std::pow(0.5, k);
        std::vector<std::pair<double, double>> pairs;
        for (double th : pts)
            for (double ph : {th - d, th + d})
                if (ph >= opts.grid.lo && ph <= opts.grid.hi)
                    pairs.emplace_back(th, ph);
        std::vector<double> v(pairs.size());
        parallel_for(pairs.size(), opts.workers, [&](std::size_t i) {
            const auto [th, ph] = pairs[i];
            const double norm = (opts.transpose ? probe.eval(ph, th, false, SmoothnessMode::gradient)
                                                : probe.eval(th, ph, false, SmoothnessMode::gradient))
                                    .norm;
            const double fault = opts.fault_exponent != 0.0 ? std::pow(d, -opts.fault_exponent) : 1.0;
            v[i] = norm * fault * ball_measure(p, th, d);
        });
        sups.push_back(*std::max_element(v.begin(), v.end()));
    }
    EstimateReport r;
    r.estimate_id = "sweep:" + kernel.tag();
    r.params = p;
    r.grid_spec = "theta on " + opts.grid.describe() + ", |theta-phi| = sep_min/2^k, k <= " + std::to_string(halvings);
    r.empirical_sup = *std::max_element(sups.begin(), sups.end());
    double delta = 0.0;
    bool finite = true;
    for (std::size_t k = 0; k < sups.size(); ++k) {
        finite = finite && std::isfinite(sups[k]);
        // only growth counts: a sup that shrinks towards the diagonal is fine
        if (k > 0)
            delta = std::max(delta, sups[k] > sups[k - 1] ? rel_change(sups[k - 1], sups[k]) : 0.0);
        r.extras.emplace_back("sup_" + std::to_string(k), sups[k]);
    }
    r.extras.emplace_back("trend", sups.back() / sups.front());
    if (opts.fault_exponent != 0.0)
        r.extras.emplace_back("fault_exponent", opts.fault_exponent);
    r.refinement_delta = delta;
    r.threshold_used = opts.stability;
    r.passed = finite && delta < opts.stability;
    return r;
}

// ---------------------------------------------------------------- lemmas

std::vector<EstimateReport> check_bridge(const ParamPair& p, const VerifyOptions& opts)
{
    if (!p.dk_valid())
        throw DomainError("check_bridge: requires alpha, beta >= -1/2");
    const GradedPiRule ru(p.alpha(), opts.accuracy), rv(p.beta(), opts.accuracy);
    const double e1 = p.alpha() + p.beta() + 1.5, e2 = p.alpha() + p.beta() + 2.0;
    auto run = [&](const GridSpec& grid) {
        grid.validate();
        const std::vector<double> pts = grid.points();
        const auto pairs = grid_pairs(pts, grid.sep_min, opts.order_seed);
        std::vector<std::array<double, 2>> v(pairs.size());
        parallel_for(pairs.size(), opts.workers, [&](std::size_t k) {
            const double th = pts[pairs[k].first], ph = pts[pairs[k].second];
            const DkGeometry g = opts.transpose ? DkGeometry(ph, th) : DkGeometry(th, ph);
            double s1 = 0.0, s2 = 0.0;
            for_each_dk_node(g, 0.0, ru, rv, [&](const PiNode& x, const PiNode& y) {
                const double q = g.q(x, y);
                const double w = x.w * y.w;
                s1 += w * std::pow(q, -e1);
                s2 += w * std::pow(q, -e2);
            });
            const double d = std::abs(th - ph);
            const double m = ball_measure(p, th, d);
            v[k] = {s1 * m, s2 * d * m};
        });
        std::array<double, 2> sup{0.0, 0.0};
        for (const auto& x : v) {
            sup[0] = std::max(sup[0], x[0]);
            sup[1] = std::max(sup[1], x[1]);
        }
        return sup;
    };
    const auto c = run(opts.grid), f = run(opts.grid.refined());
    std::vector<EstimateReport> out(2);
    const char* ids[] = {"bridge:a+b+3/2", "bridge:a+b+2"};
    for (int k = 0; k < 2; ++k) {
        out[k].estimate_id = ids[k];
        out[k].params = p;
        out[k].grid_spec = opts.grid.describe();
        finish(out[k], c[k], f[k], opts.stability);
    }
    return out;
}

namespace {

double trig_sup(int count)
{
    std::vector<double> s(count), c(count), u(count);
    for (int i = 0; i < count; ++i) {
        const double th = kPi * (i + 0.5) / count;
        s[i] = std::sin(th / 2.0);
        c[i] = std::cos(th / 2.0);
        u[i] = -1.0 + 2.0 * i / (count - 1);
    }
    double sup = 0.0;
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j) {
            const double th = kPi * (i + 0.5) / count, ph = kPi * (j + 0.5) / count;
            const double h = std::sin((th - ph) / 4.0);
            const double base = 2.0 * h * h;
            const double a = s[i] * s[j], b = c[i] * c[j];
            for (int k = 0; k < count; ++k)
                for (int l = 0; l < count; ++l) {
                    const double q = base + (1.0 - u[k]) * a + (1.0 - u[l]) * b;
                    if (!(q > 0.0))
                        continue;
                    const double qt = 0.5 * (-u[k] * c[i] * s[j] + u[l] * s[i] * c[j]);
                    const double qp = 0.5 * (-u[k] * s[i] * c[j] + u[l] * c[i] * s[j]);
                    sup = std::max(sup, std::max(std::abs(qt), std::abs(qp)) / std::sqrt(q));
                }
        }
    return sup;
}

} // namespace

EstimateReport check_trig(int count, double stability)
{
    if (count < 2)
        throw DomainError("check_trig: need at least 2 points per dimension");
    const double bound = 1.0 / std::sqrt(2.0) + 1e-6;
    const double c = trig_sup(count), f = trig_sup(2 * count);
    EstimateReport r;
    r.estimate_id = "trig";
    r.grid_spec = std::to_string(count) + "^4 grid: theta,phi at (k+1/2)pi/n, u,v equispaced on [-1,1], q = 0 excluded";
    finish(r, c, f, stability);
    r.threshold_used = bound;
    r.passed = r.passed && c <= bound && f <= bound;
    r.extras.emplace_back("stability", stability);
    r.extras.emplace_back("gap_to_inv_sqrt2", 1.0 / std::sqrt(2.0) - c);
    return r;
}

namespace {

double radical_inverse(std::size_t i)
{
    double x = 0.0, f = 0.5;
    for (; i != 0; i >>= 1, f *= 0.5)
        if (i & 1)
            x += f;
    return x;
}

} // namespace

EstimateReport check_comp(std::size_t samples, std::uint64_t seed, bool violate, double stability)
{
    if (samples == 0)
        throw DomainError("check_comp: need samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw_uv = [&] { return unit(rng) < 0.25 ? 1.0 : -1.0 + 2.0 * unit(rng); };
    double sup = 0.0, sup_first = 0.0;
    std::size_t drawn = 0;
    while (drawn < 2 * samples) {
        const bool phi_side = drawn % 2 == 1;
        const double th = kPi * unit(rng), ph = kPi * unit(rng);
        // the violated control is adversarial: u = v = 1, where q vanishes on the diagonal
        const double u = violate ? 1.0 : draw_uv(), v = violate ? 1.0 : draw_uv();
        const double d = std::abs(th - ph);
        // the moving point is theta (or phi); push it towards or away from the other one
        const double from = phi_side ? ph : th, to = phi_side ? th : ph;
        double moved;
        if (violate) {
            // radical inverse: doubling the sample count halves the closest approach to the other point
            const double rho = 1.0 + radical_inverse(drawn / 2);
            moved = from + (to > from ? 1.0 : -1.0) * rho * d / 2.0;
        } else {
            const double rho = unit(rng);
            moved = from + (unit(rng) < 0.5 ? -1.0 : 1.0) * rho * d / 2.0;
        }
        if (!(moved > 0.0 && moved < kPi) || d == 0.0)
            continue;
        const QPoint a{th, ph, u, v};
        const QPoint b = phi_side ? QPoint{th, moved, u, v} : QPoint{moved, ph, u, v};
        const double qa = q_value_stst(a), qb = q_value_stst(b);
        const double ratio = (qa > 0.0 && qb > 0.0) ? std::max(qa / qb, qb / qa) : kInf;
        sup = std::max(sup, ratio);
        ++drawn;
        if (drawn == samples)
            sup_first = sup;
    }
    EstimateReport r;
    r.estimate_id = violate ? "comp:violated" : "comp";
    r.grid_spec = std::to_string(samples) + " random tuples (theta and phi versions), seed " + std::to_string(seed)
                  + (violate ? ", u = v = 1, constraint |theta-phi| > 2|theta-theta~| violated" : "");
    finish(r, sup_first, sup, stability);
    r.negative_control = violate;
    return r;
}

EstimateReport check_lem58(double gamma, double lambda, int count, double stability)
{
    if (!(gamma >= -0.5) || !(lambda > 0.0) || count < 2)
        throw DomainError("check_lem58: need gamma >= -1/2, lambda > 0");
    const GradedPiRule rule(gamma, DkAccuracy::accurate());
    const double power = gamma + 0.5 + lambda;
    auto ratio = [&](double a, double b) {
        // A - B s = (A - B) + B (1 - s)
        double lhs = 0.0;
        for (const PiNode& nd : rule.nodes(rule.level_for((a - b) / b)))
            lhs += nd.w * std::pow((a - b) + b * nd.omu, -power);
        return lhs * std::pow(a, gamma + 0.5) * std::pow(a - b, lambda);
    };
    auto run = [&](int n) {
        double sup = 0.0;
        for (double a : {0.25, 1.0, 4.0})
            for (int i = 0; i < n; ++i) {
                // 1 - B/A log-spaced on [1e-6, 1 - 1e-6]
                const double x = std::exp(std::log(1e-6) + (std::log1p(-1e-6) - std::log(1e-6)) * i / (n - 1));
                sup = std::max(sup, ratio(a, a * (1.0 - x)));
            }
        return sup;
    };
    EstimateReport r;
    r.estimate_id = "lem58:gamma=" + fmt(gamma) + ",lambda=" + fmt(lambda);
    r.grid_spec = "A in {1/4, 1, 4}, 1 - B/A log-spaced on [1e-6, 1 - 1e-6], " + std::to_string(count) + " points";
    finish(r, run(count), run(2 * count - 1), stability);
    r.extras.emplace_back("small_B_ratio", ratio(1.0, 1e-9));
    return r;
}

std::vector<EstimateReport> check_phi_derivative_bounds(const ParamPair& p, int dt_order, int dtheta_order,
                                                        double stability)
{
    if (!p.dk_valid())
        throw DomainError("check_phi_derivative_bounds: requires alpha, beta >= -1/2");
    if (dt_order < 0 || dtheta_order < 0 || dt_order + dtheta_order > 4)
        throw DomainError("check_phi_derivative_bounds: need M, N >= 0 and M + N <= 4");
    const double ab = p.alpha() + p.beta();
    const double kappa = ab + 2.0;
    const int M = dt_order, N = dtheta_order;
    const double half = (M + N) / 2.0;

    struct Row {
        std::string id;
        bool small_t;
        bool with_phi;
        double exponent; // bound (D + q)^{-exponent}
    };
    std::vector<Row> rows;
    rows.push_back({"t<=1", true, false, ab + 1.5 + half});
    if (N >= 1)
        rows.push_back({"t>1,N>=1", false, false, ab + 1.5});
    else if (M >= 1 && p.critical())
        rows.push_back({"t>1,N=0,critical", false, false, 1.0});
    else
        rows.push_back({"t>1,N=0", false, false, ab + 1.0});
    rows.push_back({"dphi,t<=1", true, true, ab + 2.0 + half});
    rows.push_back({"dphi,t>1", false, true, ab + 1.5});

    auto run = [&](const Row& row, int nt, int nang, bool growth_form) {
        const int nuv = nt == 16 ? 9 : 17;
        double sup = 0.0;
        for (int it = 0; it < nt; ++it) {
            // [1e-3, 1] and [1, 30], log-spaced; the sup of the t > 1 rows sits at t -> 1+
            const double x = static_cast<double>(it) / (nt - 1);
            const double t = row.small_t ? std::exp(std::log(1e-3) * (1.0 - x)) : std::exp(std::log(30.0) * x);
            const TimeFactor tf(t, M);
            const double shift = cosh_shift(t);
            for (int i = 0; i < nang; ++i)
                for (int j = 0; j < nang; ++j) {
                    const double th = 0.02 + (kPi - 0.04) * i / (nang - 1), ph = 0.02 + (kPi - 0.04) * j / (nang - 1);
                    for (int k = 0; k < nuv; ++k)
                        for (int l = 0; l < nuv; ++l) {
                            const QPoint pt{th, ph, -1.0 + 2.0 * k / (nuv - 1), -1.0 + 2.0 * l / (nuv - 1)};
                            const double q = q_value_stst(pt);
                            if (!(q > 0.0))
                                continue;
                            const double d = phi_derivative(kappa, tf, shift, q, q_partial_theta(pt), q_partial_phi(pt),
                                                            q_partial_theta_phi(pt), N, row.with_phi);
                            const double bound = growth_form ? std::pow(q, -(ab + 1.5)) : std::pow(shift + q, -row.exponent);
                            sup = std::max(sup, std::abs(d) / bound);
                        }
                }
        }
        return sup;
    };

    std::vector<EstimateReport> out;
    const std::string tag = "phi_bounds:M" + std::to_string(M) + "N" + std::to_string(N) + ":";
    const std::string grid = "t log-spaced on [1e-3, 1] and [1, 30] (16 points each), theta,phi 10 points on [0.02, pi-0.02], u,v 9 points";
    for (const Row& row : rows) {
        EstimateReport r;
        r.estimate_id = tag + row.id;
        r.params = p;
        r.grid_spec = grid;
        finish(r, run(row, 16, 10, false), run(row, 31, 19, false), stability);
        r.extras.emplace_back("bound_exponent", row.exponent);
        out.push_back(std::move(r));
    }
    if (M == 0 && N == 0) {
        // sinh(t/2) (D + q)^{-a-b-2} <~ q^{-a-b-3/2} uniformly in t
        EstimateReport r;
        r.estimate_id = tag + "growth_form";
        r.params = p;
        r.grid_spec = grid + ", both t regimes";
        const Row lo{"", true, false, 0.0}, hi{"", false, false, 0.0};
        const double c = std::max(run(lo, 16, 10, true), run(hi, 16, 10, true));
        const double f = std::max(run(lo, 31, 19, true), run(hi, 31, 19, true));
        finish(r, c, f, stability);
        out.push_back(std::move(r));
    }
    return out;
}

EstimateReport check_ball(const ParamPair& p, const VerifyOptions& opts)
{
    auto run = [&](const GridSpec& grid) {
        grid.validate();
        const auto pts = grid.points();
        double sup = 0.0;
        for (const auto& [i, j] : grid_pairs(pts, grid.sep_min, 0)) {
            const double th = pts[i], ph = pts[j], d = std::abs(th - ph);
            const double m = ball_measure(p, th, d);
            const double model = d * std::pow(th + d, 2.0 * p.alpha() + 1.0)
                                 * std::pow(kPi - th + d, 2.0 * p.beta() + 1.0);
            sup = std::max({sup, m / model, model / m});
        }
        return sup;
    };
    EstimateReport r;
    r.estimate_id = "ball";
    r.params = p;
    r.grid_spec = opts.grid.describe();
    finish(r, run(opts.grid), run(opts.grid.refined()), opts.stability);
    return r;
}

EstimateReport check_doubling(const ParamPair& p, const VerifyOptions& opts)
{
    auto run = [&](const GridSpec& grid) {
        grid.validate();
        const auto pts = grid.points();
        double sup = 0.0;
        for (const auto& [i, j] : grid_pairs(pts, grid.sep_min, 0)) {
            const double d = std::abs(pts[i] - pts[j]);
            sup = std::max(sup, ball_measure(p, pts[i], 2.0 * d) / ball_measure(p, pts[i], d));
        }
        return sup;
    };
    EstimateReport r;
    r.estimate_id = "doubling";
    r.params = p;
    r.grid_spec = opts.grid.describe();
    finish(r, run(opts.grid), run(opts.grid.refined()), opts.stability);
    return r;
}

// ---------------------------------------------------------------- suite

std::vector<ParamPair> SuiteConfig::default_panel()
{
    return {{-0.5, -0.5}, {0.0, 0.0}, {0.3, 1.7}, {-0.5, 2.0}};
}

const std::set<std::string>& SuiteConfig::all_checks()
{
    static const std::set<std::string> all{"growth", "smoothness", "sweep", "bridge", "lem58",
                                           "phi_bounds", "ball", "trig", "comp"};
    return all;
}

SuiteConfig SuiteConfig::defaults()
{
    SuiteConfig c;
    c.panel = default_panel();
    c.kernels = KernelSpec::standard();
    c.checks = all_checks();
    return c;
}

void SuiteConfig::validate() const
{
    for (const auto& name : checks)
        if (!all_checks().count(name))
            throw DomainError("unknown check: " + name);
    for (const auto& p : panel)
        if (!p.dk_valid())
            throw DomainError("panel parameters must satisfy alpha, beta >= -1/2");
    options.grid.validate();
    if (!(options.stability > 0.0))
        throw DomainError("stability bound must be positive");
    if (comp_samples == 0 || trig_count < 2)
        throw DomainError("sample counts must be positive");
}

bool SuiteResult::all_passed() const
{
    return std::all_of(reports.begin(), reports.end(), [](const EstimateReport& r) { return r.as_expected(); });
}

SuiteResult run_suite(const SuiteConfig& config)
{
    config.validate();
    SuiteResult out;
    auto& reps = out.reports;
    const auto has = [&](const char* name) { return config.checks.count(name) > 0; };
    const double stab = config.options.stability;
    VerifyOptions growth_opts = config.options;
    if (config.inject_growth_fault)
        growth_opts.fault_exponent = 0.25;

    for (const ParamPair& p : config.panel) {
        for (const KernelSpec& k : config.kernels) {
            if (k.family == KernelFamily::imaginary_power && !(p.alpha() + p.beta() > -1.0))
                continue;
            if (has("growth") && has("smoothness") && !config.inject_growth_fault) {
                auto [g, s] = check_kernel(k, p, config.options);
                reps.push_back(std::move(g));
                reps.push_back(std::move(s));
            } else {
                if (has("growth"))
                    reps.push_back(check_growth(k, p, growth_opts));
                if (has("smoothness"))
                    reps.push_back(check_smoothness(
                        k, p, k.scalar() ? SmoothnessMode::gradient : SmoothnessMode::difference, config.options));
            }
            if (has("sweep"))
                reps.push_back(check_growth_sweep(k, p, growth_opts));
        }
        if (has("bridge"))
            for (auto& r : check_bridge(p, config.options))
                reps.push_back(std::move(r));
        if (has("ball")) {
            reps.push_back(check_ball(p, config.options));
            reps.push_back(check_doubling(p, config.options));
        }
        if (has("lem58")) {
            // the two applications in the bridge estimate
            std::vector<std::pair<double, double>> gl{{p.beta(), p.alpha() + 1.0}, {p.alpha(), 0.5}};
            if (gl[1] == gl[0])
                gl.pop_back();
            for (const auto& [g, l] : gl) {
                reps.push_back(check_lem58(g, l, 40, stab));
                reps.back().params = p;
            }
        }
        if (has("phi_bounds"))
            for (const auto& [m, n] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}})
                for (auto& r : check_phi_derivative_bounds(p, m, n, stab))
                    reps.push_back(std::move(r));
    }
    if (has("trig"))
        reps.push_back(check_trig(config.trig_count, stab));
    if (has("comp")) {
        reps.push_back(check_comp(config.comp_samples, config.seed, false, stab));
        reps.push_back(check_comp(config.comp_samples, config.seed, true, stab));
    }
    return out;
}

std::string reports_to_json(const std::vector<EstimateReport>& reports)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["estimate_id"] = r.estimate_id;
        if (r.params)
            j["params"] = {{"alpha", r.params->alpha()}, {"beta", r.params->beta()}};
        else
            j["params"] = nullptr;
        j["grid_spec"] = r.grid_spec;
        j["empirical_sup"] = r.empirical_sup;
        j["refinement_delta"] = r.refinement_delta;
        j["passed"] = r.passed;
        j["threshold_used"] = r.threshold_used;
        j["negative_control"] = r.negative_control;
        nlohmann::ordered_json ex = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r.extras)
            ex[k] = v;
        j["extras"] = ex;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

void write_report_table(std::ostream& os, const std::vector<EstimateReport>& reports)
{
    os << std::left << std::setw(34) << "estimate" << std::setw(14) << "params" << std::right << std::setw(14)
       << "sup" << std::setw(12) << "delta" << std::setw(12) << "threshold" << "  status\n";
    for (const auto& r : reports) {
        std::ostringstream pp;
        if (r.params)
            pp << "(" << r.params->alpha() << "," << r.params->beta() << ")";
        const char* status = r.passed ? "PASS" : "FAIL";
        os << std::left << std::setw(34) << r.estimate_id << std::setw(14) << pp.str() << std::right
           << std::setw(14) << std::setprecision(6) << r.empirical_sup << std::setw(12) << std::setprecision(3)
           << r.refinement_delta << std::setw(12) << std::setprecision(4) << r.threshold_used << "  " << status
           << (r.negative_control ? (r.passed ? " (control should fail)" : " (expected)") : "") << "\n";
    }
}

} // namespace jha
