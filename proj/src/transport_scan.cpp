#include "nasm/transport_scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "nasm/parallel.hpp"

namespace nasm {

void ScanConfig::validate() const {
    if (num_seeds == 0 || max_iterations == 0) {
        throw std::invalid_argument("scan needs M >= 1 and N >= 1");
    }
    if (!(threshold >= 2.0)) {
        throw std::invalid_argument("escape threshold must be at least 2");
    }
    if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min)) {
        throw std::invalid_argument("seed box is empty");
    }
}

std::vector<PhasePoint> scan_seeds(const ScanConfig& cfg) {
    std::vector<PhasePoint> seeds(cfg.num_seeds);
    const double wx = cfg.box.x_max - cfg.box.x_min;
    const double wy = cfg.box.y_max - cfg.box.y_min;
    if (cfg.seeding == SeedMode::Lattice) {
        // R2 sequence: additive recurrence with the plastic number.
        constexpr double g = 1.32471795724474602596;
        constexpr double a1 = 1.0 / g;
        constexpr double a2 = 1.0 / (g * g);
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const double k = static_cast<double>(i);
            double u = 0.5 + a1 * k;
            double v = 0.5 + a2 * k;
            u -= std::floor(u);
            v -= std::floor(v);
            seeds[i] = {cfg.box.x_min + wx * u, cfg.box.y_min + wy * v};
        }
    } else {
        std::mt19937_64 rng(cfg.rng_seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (auto& s : seeds) {
            const double u = uni(rng);
            const double v = uni(rng);
            s = {cfg.box.x_min + wx * u, cfg.box.y_min + wy * v};
        }
    }
    return seeds;
}

namespace {

constexpr std::size_t kPollInterval = 4096;

// Iterates one seed; returns the escaping iterate or 0. Gives up early once
// a lower-index seed has escaped.
std::size_t escape_iterate(const MapParams& params, const ScanConfig& cfg, PhasePoint seed, std::size_t index,
                           const std::atomic<std::size_t>& best, double& displacement) {
    const double c1 = params.kappa1 / kTwoPi;
    const double c2 = params.kappa2 / kTwoPi;
    double lo = seed.y - cfg.threshold;
    double hi = seed.y + cfg.threshold;
    if (cfg.rule == EscapeRule::AbsoluteWindow) {
        lo = cfg.box.y_min - cfg.threshold;
        hi = cfg.box.y_max + cfg.threshold;
    }
    double x = seed.x - std::round(seed.x);
    double y = seed.y;
    for (std::size_t n = 1; n <= cfg.max_iterations; ++n) {
        y += c1 * std::sin(kTwoPi * x);
        x += y;
        x -= std::round(x);
        y += c2 * std::sin(kTwoPi * x);
        x += y;
        x -= std::round(x);
        if (y > hi || y < lo) {
            displacement = y - seed.y;
            return n;
        }
        if (n % kPollInterval == 0 && best.load(std::memory_order_relaxed) < index) {
            return 0;
        }
    }
    return 0;
}

}  // namespace

TransportResult detect_global_transport(const MapParams& params, const ScanConfig& cfg) {
    cfg.validate();
    const auto seeds = scan_seeds(cfg);
    const unsigned threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::atomic<std::size_t> best{none};
    std::mutex record_mutex;
    EscapeRecord record;
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        if (best.load(std::memory_order_relaxed) < i) {
            return;
        }
        double disp = 0.0;
        const std::size_t n = escape_iterate(params, cfg, seeds[i], i, best, disp);
        if (n == 0) {
            return;
        }
        std::lock_guard lock(record_mutex);
        if (i < best.load()) {
            best.store(i);
            record = {i, seeds[i], n, disp};
        }
    });
    TransportResult result;
    if (best.load() != none) {
        result.transport = true;
        result.escape = record;
    }
    return result;
}

double twist_edge_radius(double angle) {
    const double m = std::max(std::abs(std::cos(angle)), std::abs(std::sin(angle)));
    return 2.0 / m * (1.0 - 1e-9);
}

RayBisection critical_ray_bisection(double angle, const ScanConfig& cfg, double radial_tol,
                                    std::optional<std::pair<double, double>> bracket) {
    if (!(radial_tol > 0.0)) {
        throw std::invalid_argument("radial tolerance must be positive");
    }
    RayBisection out;
    double lo = 0.0;
    double hi = twist_edge_radius(angle);
    if (bracket) {
        lo = bracket->first;
        hi = bracket->second;
        if (!(lo >= 0.0 && hi > lo)) {
            throw std::invalid_argument("ray bracket must satisfy 0 <= lo < hi");
        }
    }
    auto transport_at = [&](double r) {
        ++out.evaluations;
        return detect_global_transport(ray_point(angle, r), cfg).transport;
    };
    if (!transport_at(hi)) {
        throw BracketError("no transport at outer radius " + std::to_string(hi));
    }
    if (lo > 0.0 && transport_at(lo)) {
        throw BracketError("transport already at inner radius " + std::to_string(lo));
    }
    while (hi - lo > radial_tol) {
        const double mid = 0.5 * (lo + hi);
        if (transport_at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.r_lo = lo;
    out.r_hi = hi;
    out.r_c = 0.5 * (lo + hi);
    return out;
}

BoundaryCurve trace_cb_gt(const std::vector<double>& angles, const ScanConfig& cfg, double radial_tol) {
    if (angles.empty()) {
        throw std::invalid_argument("no rays to trace");
    }
    for (double a : angles) {
        if (!(a >= 0.0 && a <= std::numbers::pi)) {
            throw std::invalid_argument("ray angles must lie in [0, pi]");
        }
    }
    const unsigned threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
    // Parallelize over rays when there are enough of them, over seeds otherwise.
    ScanConfig ray_cfg = cfg;
    unsigned outer = 1;
    if (threads > 1 && angles.size() >= threads) {
        outer = threads;
        ray_cfg.threads = 1;
    } else {
        ray_cfg.threads = threads;
    }
    std::vector<std::optional<BoundaryPoint>> points(angles.size());
    std::vector<std::string> errors(angles.size());
    parallel_for(angles.size(), outer, [&](std::size_t i) {
        try {
            const RayBisection b = critical_ray_bisection(angles[i], ray_cfg, radial_tol);
            BoundaryPoint p;
            p.angle = angles[i];
            p.r_c = b.r_c;
            const MapParams k = ray_point(angles[i], b.r_c);
            p.kappa1 = k.kappa1;
            p.kappa2 = k.kappa2;
            p.method = BoundaryMethod::Direct;
            p.tol = b.r_hi - b.r_lo;
            p.n_or_modes = cfg.max_iterations;
            p.m = cfg.num_seeds;
            points[i] = p;
        } catch (const BracketError& e) {
            errors[i] = e.what();
        }
    });
    BoundaryCurve curve;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (points[i]) {
            curve.points.push_back(*points[i]);
        } else {
            curve.failures.push_back({angles[i], errors[i]});
        }
    }
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const BoundaryPoint& a, const BoundaryPoint& b) { return a.angle < b.angle; });
    return curve;
}

ExponentFit fit_convergence_exponent(const std::vector<std::pair<double, double>>& samples, double kappa_ref) {
    if (samples.size() < 3) {
        throw std::invalid_argument("exponent fit needs at least 3 samples");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [n, kappa] : samples) {
        const double diff = kappa - kappa_ref;
        if (!(diff > 0.0) || !(n > 0.0)) {
            throw std::invalid_argument("exponent fit needs N > 0 and kappa_N above the reference");
        }
        const double lx = std::log(n);
        const double ly = std::log(diff);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double m = static_cast<double>(samples.size());
    const double vxx = sxx - sx * sx / m;
    const double vxy = sxy - sx * sy / m;
    const double vyy = syy - sy * sy / m;
    if (!(vxx > 0.0)) {
        throw std::invalid_argument("exponent fit needs distinct N values");
    }
    ExponentFit fit;
    fit.slope = vxy / vxx;
    fit.intercept = (sy - fit.slope * sx) / m;
    fit.eta = -1.0 / fit.slope;
    fit.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
    return fit;
}

}  // namespace nasm
