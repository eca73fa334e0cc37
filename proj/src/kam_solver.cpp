#include "nasm/kam_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nasm/parallel.hpp"
#include "nasm/transport_scan.hpp"

namespace nasm {

Increment LiftMap::increment(PhasePoint p) const {
    if (kind == Kind::Composed) {
        return composed_increment(params, p);
    }
    const double kick = eps / kTwoPi * sin_2pi(p.x);
    return {p.y + kick, kick};
}

Jacobian2 LiftMap::jacobian(PhasePoint p) const {
    return kind == Kind::Composed ? nasm::jacobian(params, p) : std_jacobian(eps, p);
}

namespace {

constexpr Real kTwoPiL = 2.0L * std::numbers::pi_v<Real>;

Real sin_2pi_l(Real x) { return std::sin(kTwoPiL * (x - std::round(x))); }

struct IncrementL {
    Real dx, dy;
};

// Extended-precision increments, mirroring composed_increment and std_step.
IncrementL increment_l(const LiftMap& map, Real x, Real y) {
    if (map.kind == LiftMap::Kind::Composed) {
        const Real s1 = static_cast<Real>(map.params.kappa1) / kTwoPiL * sin_2pi_l(x);
        const Real f2 = s1 + static_cast<Real>(map.params.kappa2) / kTwoPiL * sin_2pi_l(x + y + s1);
        return {2.0L * y + s1 + f2, f2};
    }
    const Real kick = static_cast<Real>(map.eps) / kTwoPiL * sin_2pi_l(x);
    return {y + kick, kick};
}

Real mean_of(const std::vector<Real>& v) {
    Real s = 0.0L;
    for (Real x : v) {
        s += x;
    }
    return s / static_cast<Real>(v.size());
}

}  // namespace

// --- FourierCircle -----------------------------------------------------------

FourierCircle FourierCircle::flat(std::size_t n, double omega, Real c) {
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("circle grid size must be a power of two");
    }
    FourierCircle K;
    K.omega = omega;
    K.c = c;
    K.ux.assign(n / 2 + 1, Complex{});
    K.uy.assign(n / 2 + 1, Complex{});
    return K;
}

FourierCircle FourierCircle::resampled(std::size_t n) const {
    FourierCircle K = *this;
    K.ux = spectral_resample(ux, n);
    K.uy = spectral_resample(uy, n);
    return K;
}

std::vector<PhasePoint> FourierCircle::samples() const {
    const std::size_t n = modes();
    const Fft fft(n);
    const auto x = fft.inverse(ux);
    const auto y = fft.inverse(uy);
    std::vector<PhasePoint> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = {static_cast<double>(static_cast<Real>(j) / static_cast<Real>(n) + x[j]), static_cast<double>(c + y[j])};
    }
    return out;
}

PhasePoint FourierCircle::at(double theta) const {
    return {static_cast<double>(theta + spectral_evaluate(ux, theta)), static_cast<double>(c + spectral_evaluate(uy, theta))};
}

double FourierCircle::tail() const {
    // Median of max(|ux_k|, |uy_k|) over the band. Rounding noise amplified by
    // small divisors shows up as isolated spikes near resonant k, which a max
    // would mistake for an unresolved spectrum.
    const std::size_t n = modes();
    std::vector<double> band;
    for (std::size_t k = n / 4 + 1; k < n / 2; ++k) {
        band.push_back(static_cast<double>(std::max(std::abs(ux[k]), std::abs(uy[k]))));
    }
    if (band.empty()) {
        return 0.0;
    }
    auto mid = band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2);
    std::nth_element(band.begin(), mid, band.end());
    return *mid;
}

FourierCircle circle_from_samples(std::span<const PhasePoint> points, double omega) {
    const std::size_t n = points.size();
    const Fft fft(n);
    std::vector<Real> vx(n), vy(n);
    for (std::size_t j = 0; j < n; ++j) {
        vx[j] = static_cast<Real>(points[j].x) - static_cast<Real>(j) / static_cast<Real>(n);
        vy[j] = points[j].y;
    }
    Spectrum sx = fft.forward(vx);
    Spectrum sy = fft.forward(vy);
    const Real m = sx[0].real();
    sx[0] = 0.0;
    // Re-phase theta -> theta - m so the x-average moves into the identity part.
    FourierCircle K;
    K.omega = omega;
    K.ux = spectral_shift(sx, -m);
    K.uy = spectral_shift(sy, -m);
    K.c = K.uy[0].real();
    K.uy[0] = 0.0;
    return K;
}

// --- Error and frame --------------------------------------------------------

namespace {

struct GridCircle {
    std::vector<Real> x;  // u_x on the grid
    std::vector<Real> y;  // u_y on the grid
    std::vector<Real> x_shift, y_shift;  // u(theta + omega)
};

GridCircle grid_values(const Fft& fft, const FourierCircle& K) {
    GridCircle g;
    g.x = fft.inverse(K.ux);
    g.y = fft.inverse(K.uy);
    g.x_shift = fft.inverse(spectral_shift(K.ux, K.omega));
    g.y_shift = fft.inverse(spectral_shift(K.uy, K.omega));
    return g;
}

ErrorField error_on_grid(const LiftMap& map, const FourierCircle& K, const GridCircle& g) {
    const std::size_t n = K.modes();
    ErrorField e;
    e.ex.resize(n);
    e.ey.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Real theta = static_cast<Real>(j) / static_cast<Real>(n);
        const IncrementL inc = increment_l(map, theta + g.x[j], K.c + g.y[j]);
        // theta + u_x + dx - (theta + omega + u_x(theta + omega)), theta cancelled analytically.
        e.ex[j] = g.x[j] + inc.dx - static_cast<Real>(K.omega) - g.x_shift[j];
        e.ey[j] = g.y[j] + inc.dy - g.y_shift[j];
        e.sup = std::max({e.sup, static_cast<double>(std::abs(e.ex[j])), static_cast<double>(std::abs(e.ey[j]))});
    }
    if (!std::isfinite(e.sup)) {
        e.sup = std::numeric_limits<double>::infinity();
    }
    return e;
}

struct FrameData {
    AdaptedFrame frame;
    std::vector<Real> dkx_s, dky_s, norm_s;  // at theta + omega
};

FrameData frame_on_grid(const LiftMap& map, const FourierCircle& K, const Fft& fft, const GridCircle& g) {
    const std::size_t n = K.modes();
    const Spectrum dux = spectral_derivative(K.ux);
    const Spectrum duy = spectral_derivative(K.uy);
    FrameData d;
    AdaptedFrame& f = d.frame;
    f.dkx = fft.inverse(dux);
    f.dky = fft.inverse(duy);
    d.dkx_s = fft.inverse(spectral_shift(dux, K.omega));
    d.dky_s = fft.inverse(spectral_shift(duy, K.omega));
    f.norm.resize(n);
    d.norm_s.resize(n);
    f.torsion.resize(n);
    Real residual = 0.0L;
    Real torsion_sum = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
        f.dkx[j] += 1.0;
        d.dkx_s[j] += 1.0;
        const Real len2 = f.dkx[j] * f.dkx[j] + f.dky[j] * f.dky[j];
        const Real len2_s = d.dkx_s[j] * d.dkx_s[j] + d.dky_s[j] * d.dky_s[j];
        if (!(len2 > 1e-24) || !(len2_s > 1e-24) || !std::isfinite(len2) || !std::isfinite(len2_s)) {
            throw SingularFrameError("tangent DK vanishes at grid point " + std::to_string(j));
        }
        f.norm[j] = 1.0L / len2;
        d.norm_s[j] = 1.0L / len2_s;
        const Real theta = static_cast<Real>(j) / static_cast<Real>(n);
        const Jacobian2 dt = map.jacobian({static_cast<double>(theta + g.x[j]), static_cast<double>(K.c + g.y[j])});
        struct V {
            Real x, y;
        };
        auto apply = [&](V v) { return V{dt.a * v.x + dt.b * v.y, dt.c * v.x + dt.d * v.y}; };
        // Columns of M(theta): DK and N J^-1 DK = N (-DK_y, DK_x).
        const V t1 = apply({f.dkx[j], f.dky[j]});
        const V t2 = apply({-f.norm[j] * f.dky[j], f.norm[j] * f.dkx[j]});
        // Rows of M(theta + omega)^-1: N_s DK_s^T and (-DK_y,s, DK_x,s).
        auto row1 = [&](V v) { return d.norm_s[j] * (d.dkx_s[j] * v.x + d.dky_s[j] * v.y); };
        auto row2 = [&](V v) { return -d.dky_s[j] * v.x + d.dkx_s[j] * v.y; };
        const Real a11 = row1(t1), a12 = row1(t2), a21 = row2(t1), a22 = row2(t2);
        f.torsion[j] = a12;
        torsion_sum += a12;
        residual = std::max({residual, std::abs(a11 - 1.0L), std::abs(a21), std::abs(a22 - 1.0L)});
    }
    f.reduction_residual = static_cast<double>(residual);
    f.mean_torsion = static_cast<double>(torsion_sum / static_cast<Real>(n));
    return d;
}

}  // namespace

ErrorField invariance_error(const LiftMap& map, const FourierCircle& K) {
    const Fft fft(K.modes());
    return error_on_grid(map, K, grid_values(fft, K));
}

AdaptedFrame adapted_frame(const LiftMap& map, const FourierCircle& K) {
    const Fft fft(K.modes());
    return frame_on_grid(map, K, fft, grid_values(fft, K)).frame;
}

// --- Cohomological equations -------------------------------------------------

SmallDivisorError::SmallDivisorError(std::size_t k, double divisor)
    : KamError("small divisor |1 - exp(2 pi i k omega)| = " + std::to_string(divisor) + " at k = " +
               std::to_string(k)),
      k_(k) {}

Spectrum cohomology_solve(const Spectrum& rhs, double omega, double threshold) {
    Spectrum w(rhs.size());
    for (std::size_t k = 1; k + 1 < rhs.size(); ++k) {
        Real phase = static_cast<Real>(k) * static_cast<Real>(omega);
        phase -= std::round(phase);
        const Complex divisor = 1.0L - std::polar(1.0L, kTwoPiL * phase);
        const double size = static_cast<double>(std::abs(divisor));
        if (size < threshold) {
            throw SmallDivisorError(k, size);
        }
        w[k] = rhs[k] / divisor;
    }
    return w;
}

std::vector<double> cohomology_solve(std::span<const double> rhs, double omega, bool zero_mean_enforced,
                                     double threshold) {
    const Fft fft(rhs.size());
    const std::vector<Real> values(rhs.begin(), rhs.end());
    Spectrum r = fft.forward(values);
    if (!zero_mean_enforced) {
        double scale = 0.0;
        for (double v : rhs) {
            scale = std::max(scale, std::abs(v));
        }
        const double mean = static_cast<double>(r[0].real());
        if (std::abs(mean) > 1e-13 * std::max(1.0, scale)) {
            throw KamError("cohomological equation has no solution: right-hand side mean " + std::to_string(mean) +
                           " is nonzero");
        }
    }
    r[0] = 0.0L;
    const std::vector<Real> w = fft.inverse(cohomology_solve(r, omega, threshold));
    return {w.begin(), w.end()};
}

// --- Newton step -------------------------------------------------------------

NewtonStepResult newton_step(const LiftMap& map, const FourierCircle& K, double small_divisor) {
    const std::size_t n = K.modes();
    const Fft fft(n);
    const GridCircle g = grid_values(fft, K);
    const ErrorField e = error_on_grid(map, K, g);
    const FrameData fd = frame_on_grid(map, K, fft, g);
    const AdaptedFrame& f = fd.frame;

    NewtonStepResult out;
    out.error_before = e.sup;
    out.reduction_residual = f.reduction_residual;
    out.mean_torsion = f.mean_torsion;

    // eta = -M(theta + omega)^-1 e.
    std::vector<Real> eta1(n), eta2(n);
    for (std::size_t j = 0; j < n; ++j) {
        eta1[j] = -fd.norm_s[j] * (fd.dkx_s[j] * e.ex[j] + fd.dky_s[j] * e.ey[j]);
        eta2[j] = -(-fd.dky_s[j] * e.ex[j] + fd.dkx_s[j] * e.ey[j]);
    }
    Spectrum eta2_hat = fft.forward(eta2);
    out.exactness_witness = static_cast<double>(std::abs(eta2_hat[0].real()));
    eta2_hat[0] = 0.0L;
    std::vector<Real> w2 = fft.inverse(cohomology_solve(eta2_hat, K.omega, small_divisor));

    // W2 average chosen so the W1 equation has zero-mean right-hand side.
    if (std::abs(f.mean_torsion) < 1e-12) {
        throw DegenerateTwistError("average torsion vanishes");
    }
    std::vector<Real> rhs1(n);
    for (std::size_t j = 0; j < n; ++j) {
        rhs1[j] = eta1[j] - f.torsion[j] * w2[j];
    }
    const Real a = mean_of(rhs1) / mean_of(f.torsion);
    out.w2_average = static_cast<double>(a);
    for (std::size_t j = 0; j < n; ++j) {
        w2[j] += a;
        rhs1[j] -= a * f.torsion[j];
    }
    Spectrum rhs1_hat = fft.forward(rhs1);
    rhs1_hat[0] = 0.0L;
    std::vector<Real> w1 = fft.inverse(cohomology_solve(rhs1_hat, K.omega, small_divisor));

    // Delta = M W; the free W1 average is a phase shift and is set so that
    // Delta_x keeps zero mean.
    std::vector<Real> dx(n), dy(n);
    for (std::size_t j = 0; j < n; ++j) {
        dx[j] = f.dkx[j] * w1[j] - f.norm[j] * f.dky[j] * w2[j];
    }
    const Real b = -mean_of(dx) / mean_of(f.dkx);
    for (std::size_t j = 0; j < n; ++j) {
        w1[j] += b;
        dx[j] = f.dkx[j] * w1[j] - f.norm[j] * f.dky[j] * w2[j];
        dy[j] = f.dky[j] * w1[j] + f.norm[j] * f.dkx[j] * w2[j];
    }

    FourierCircle next = K;
    const Spectrum dx_hat = fft.forward(dx);
    const Spectrum dy_hat = fft.forward(dy);
    next.c += dy_hat[0].real();
    for (std::size_t k = 1; k + 1 < next.ux.size(); ++k) {
        next.ux[k] += dx_hat[k];
        next.uy[k] += dy_hat[k];
    }
    out.next = std::move(next);
    out.error_after = invariance_error(map, out.next).sup;
    return out;
}

double sobolev_seminorm(const FourierCircle& K, double s) {
    if (s < 0.0) {
        throw std::invalid_argument("Sobolev index must be nonnegative");
    }
    Real sum = 0.0L;
    for (std::size_t k = 1; k < K.ux.size(); ++k) {
        const Real w = std::pow(static_cast<Real>(k), 2.0L * static_cast<Real>(s));
        sum += 2.0L * w * (std::norm(K.ux[k]) + std::norm(K.uy[k]));
    }
    return static_cast<double>(std::sqrt(sum));
}

// --- Solve and continuation --------------------------------------------------

SolveResult solve_invariant_circle(const LiftMap& map, const FourierCircle& K_init, const SolveOptions& opts) {
    SolveResult res;
    SolveReport& rep = res.report;
    FourierCircle K = K_init;
    double err = invariance_error(map, K).sup;
    rep.error_history.push_back(err);
    const double diverged = std::max(1.0, 1e3 * err);
    for (;;) {
        rep.modes = K.modes();
        rep.final_error = err;
        const double tail = K.tail();
        if (tail > opts.tail_tolerance && K.modes() < opts.max_modes) {
            K = K.resampled(2 * K.modes());
            err = invariance_error(map, K).sup;
            continue;
        }
        if (err < opts.tolerance) {
            if (tail > opts.tail_tolerance) {
                rep.failure = "coefficient tail " + std::to_string(tail) + " above tolerance at the mode cap";
                break;
            }
            rep.converged = true;
            break;
        }
        if (rep.iterations >= opts.max_iterations) {
            rep.failure = "maximum Newton iterations reached";
            break;
        }
        try {
            NewtonStepResult step;
            if (opts.padding) {
                step = newton_step(map, K.resampled(2 * K.modes()), opts.small_divisor);
                step.next = step.next.resampled(K.modes());
                step.error_after = invariance_error(map, step.next).sup;
            } else {
                step = newton_step(map, K, opts.small_divisor);
            }
            K = std::move(step.next);
            err = step.error_after;
            rep.witness_history.push_back(step.exactness_witness);
        } catch (const KamError& ex) {
            rep.failure = ex.what();
            break;
        }
        ++rep.iterations;
        rep.error_history.push_back(err);
        rep.sobolev_history.push_back(sobolev_seminorm(K, opts.sobolev_s));
        if (!std::isfinite(err) || err > diverged) {
            rep.failure = "Newton iteration diverged";
            rep.blowup = true;
            break;
        }
    }
    rep.final_error = err;
    rep.modes = K.modes();
    res.circle = std::move(K);
    return res;
}

const char* to_string(BreakdownReason r) {
    switch (r) {
    case BreakdownReason::Blowup: return "blowup";
    case BreakdownReason::NewtonFailure: return "newton-failure";
    case BreakdownReason::ReachedLimit: return "reached-limit";
    }
    return "?";
}

namespace {

FourierCircle secant_guess(const FourierCircle& cur, const FourierCircle& prev, double ratio) {
    FourierCircle p = prev.modes() == cur.modes() ? prev : prev.resampled(cur.modes());
    FourierCircle g = cur;
    const Real r = ratio;
    g.c += r * (cur.c - p.c);
    for (std::size_t k = 0; k < g.ux.size(); ++k) {
        g.ux[k] += r * (cur.ux[k] - p.ux[k]);
        g.uy[k] += r * (cur.uy[k] - p.uy[k]);
    }
    return g;
}

}  // namespace

ContinuationResult continue_to_breakdown(double angle, double omega, const ContinuationOptions& opts) {
    const double s_max = opts.s_max > 0.0 ? opts.s_max : twist_edge_radius(angle);
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    auto map_at = [&](double s) { return LiftMap::composed({s * ca, s * sa}); };

    ContinuationResult out;
    SolveResult origin = solve_invariant_circle(map_at(0.0), FourierCircle::integrable(opts.initial_modes, omega),
                                                opts.solve);
    if (!origin.report.converged) {
        throw KamError("no invariant circle at the ray origin: " + origin.report.failure);
    }
    FourierCircle K = origin.circle;
    std::optional<FourierCircle> K_prev;
    double s = 0.0;
    double s_prev = 0.0;
    double step = opts.initial_step;
    out.history.push_back({0.0, true, origin.report.final_error, origin.report.iterations, K.modes(),
                           sobolev_seminorm(K, opts.solve.sobolev_s)});
    BreakdownReason last_rejection = BreakdownReason::ReachedLimit;
    double first_rejected = s_max;
    for (;;) {
        if (s >= s_max) {
            out.reason = BreakdownReason::ReachedLimit;
            first_rejected = s_max;
            break;
        }
        if (step < opts.min_step) {
            out.reason = last_rejection;
            break;
        }
        const double s_try = std::min(s + step, s_max);
        FourierCircle guess = K;
        if (opts.secant_predictor && K_prev && s > s_prev) {
            guess = secant_guess(K, *K_prev, (s_try - s) / (s - s_prev));
        }
        const SolveResult r = solve_invariant_circle(map_at(s_try), guess, opts.solve);
        const double norm = r.report.converged ? sobolev_seminorm(r.circle, opts.solve.sobolev_s) : 0.0;
        const bool blown = r.report.converged && norm > opts.blowup_threshold;
        const bool ok = r.report.converged && !blown;
        out.history.push_back({s_try, ok, r.report.final_error, r.report.iterations, r.report.modes, norm});
        if (ok) {
            K_prev = K;
            s_prev = s;
            K = r.circle;
            s = s_try;
            step = std::min(step * opts.growth, opts.max_step);
        } else {
            last_rejection = blown ? BreakdownReason::Blowup : BreakdownReason::NewtonFailure;
            first_rejected = s_try;
            step *= 0.5;
        }
    }
    out.last_accepted = s;
    out.first_rejected = first_rejected;
    out.circle = std::move(K);
    return out;
}

BoundaryCurve trace_cb_omega(double omega, const std::vector<double>& angles, const ContinuationOptions& opts,
                             unsigned threads) {
    if (angles.empty()) {
        throw std::invalid_argument("no rays to trace");
    }
    const unsigned workers = threads == 0 ? default_thread_count() : threads;
    std::vector<std::optional<BoundaryPoint>> points(angles.size());
    std::vector<std::string> errors(angles.size());
    parallel_for(angles.size(), workers, [&](std::size_t i) {
        try {
            const ContinuationResult c = continue_to_breakdown(angles[i], omega, opts);
            if (c.reason == BreakdownReason::ReachedLimit) {
                errors[i] = "no breakdown before the twist-region edge";
                return;
            }
            BoundaryPoint p;
            p.angle = angles[i];
            p.r_c = c.last_accepted;
            const MapParams k = ray_point(angles[i], c.last_accepted);
            p.kappa1 = k.kappa1;
            p.kappa2 = k.kappa2;
            p.method = BoundaryMethod::Kam;
            p.omega = omega;
            p.tol = c.first_rejected - c.last_accepted;
            p.n_or_modes = c.circle.modes();
            points[i] = p;
        } catch (const KamError& e) {
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

FourierCircle p4_transport(const FourierCircle& K) {
    FourierCircle out = K;
    out.c += 0.5L;
    out.omega += 1.0;
    return out;
}

FourierCircle conjugate_transport(const MapParams& params, const FourierCircle& K) {
    const auto pts = K.samples();
    std::vector<PhasePoint> mapped(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) {
        mapped[j] = std_inverse_step(params.kappa2, pts[j]);
    }
    return circle_from_samples(mapped, K.omega);
}

}  // namespace nasm
