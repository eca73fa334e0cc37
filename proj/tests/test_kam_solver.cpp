#include <doctest.h>

#include <numbers>

#include "nasm/kam_solver.hpp"
#include "nasm/rotation.hpp"
#include "oracles.hpp"

using namespace nasm;

namespace {

const double kGamma = oracle::golden();

SolveResult solve_at(const MapParams& k, double omega = kGamma, std::size_t n = 256) {
    return solve_invariant_circle(LiftMap::composed(k), FourierCircle::integrable(n, omega));
}

}  // namespace

TEST_CASE("fft against a direct DFT") {
    oracle::Sampler s(31);
    std::vector<Real> v(64);
    std::vector<double> d(64);
    for (std::size_t j = 0; j < v.size(); ++j) {
        d[j] = s.uniform(-1, 1);
        v[j] = d[j];
    }
    const Fft fft(64);
    const Spectrum c = fft.forward(v);
    for (long k = 0; k <= 32; ++k) {
        const auto ref = oracle::dft(d, k);
        CHECK(std::abs(std::complex<double>(c[k]) - ref) < 1e-14);
    }
    const auto back = fft.inverse(c);
    for (std::size_t j = 0; j < v.size(); ++j) CHECK(std::abs(static_cast<double>(back[j] - v[j])) < 1e-15);
    CHECK_THROWS((void)Fft(48));
}

TEST_CASE("spectral shift, derivative and resample") {
    Spectrum s(17, 0.0L);
    s[1] = {0.3L, -0.2L};
    s[3] = {0.0L, 0.1L};
    const Real shift = 0.137L;
    const Spectrum t = spectral_shift(s, shift);
    const Spectrum r = spectral_resample(s, 64);
    const Spectrum dr = spectral_derivative(s);
    for (double th : {0.0, 0.21, 0.77}) {
        CHECK(std::abs(static_cast<double>(spectral_evaluate(t, th) - spectral_evaluate(s, th + shift))) < 1e-15);
        CHECK(std::abs(static_cast<double>(spectral_evaluate(r, th) - spectral_evaluate(s, th))) < 1e-15);
        const double h = 1e-6;
        const double fd =
            static_cast<double>(spectral_evaluate(s, th + h) - spectral_evaluate(s, th - h)) / (2 * h);
        CHECK(std::abs(static_cast<double>(spectral_evaluate(dr, th)) - fd) < 1e-8);
    }
}

TEST_CASE("cohomological equation") {
    const std::vector<double> zero(32, 0.0);
    for (double w : cohomology_solve(zero, kGamma, false)) CHECK(w == 0.0);
    std::vector<double> cosine(32);
    for (std::size_t j = 0; j < 32; ++j) cosine[j] = std::cos(oracle::two_pi * static_cast<double>(j) / 32.0);
    const auto w = cohomology_solve(cosine, kGamma, false);
    // W_1 = r_1 / (1 - e^{2 pi i gamma}) with r_1 = 1/2.
    const std::complex<double> w1 = 0.5 / (1.0 - std::polar(1.0, oracle::two_pi * kGamma));
    CHECK(std::abs(oracle::dft(w, 1) - w1) < 1e-14);
    for (std::size_t j = 0; j < 32; ++j) {
        const double th = static_cast<double>(j) / 32.0;
        const double wj = 2.0 * (w1 * std::polar(1.0, oracle::two_pi * th)).real();
        const double wjs = 2.0 * (w1 * std::polar(1.0, oracle::two_pi * (th + kGamma))).real();
        CHECK(std::abs(wj - w[j]) < 1e-13);
        CHECK(std::abs(wj - wjs - cosine[j]) < 1e-13);
    }
    std::vector<double> shifted = cosine;
    for (double& x : shifted) x += 0.25;
    CHECK_THROWS_AS((void)cohomology_solve(shifted, kGamma, false), KamError);
    const auto enforced = cohomology_solve(shifted, kGamma, true);
    CHECK(std::abs(oracle::dft(enforced, 1) - w1) < 1e-14);
    // omega = 1/4 is resonant at k = 4.
    std::vector<double> mode4(32);
    for (std::size_t j = 0; j < 32; ++j) mode4[j] = std::sin(4 * oracle::two_pi * static_cast<double>(j) / 32.0);
    try {
        (void)cohomology_solve(mode4, 0.25, false);
        FAIL("expected a small divisor");
    } catch (const SmallDivisorError& e) {
        CHECK(e.mode() == 4);
    }
}

TEST_CASE("integrable circle") {
    const FourierCircle K = FourierCircle::integrable(64, kGamma);
    CHECK(invariance_error(MapParams{0.0, 0.0}, K).sup < 1e-16);
    const AdaptedFrame f = adapted_frame(MapParams{0.0, 0.0}, K);
    for (Real s : f.torsion) CHECK(std::abs(static_cast<double>(s) - 2.0) < 1e-15);
    CHECK(f.mean_torsion == doctest::Approx(2.0));
    const SolveResult r = solve_at({0.0, 0.0}, 0.3);
    CHECK(r.report.converged);
    CHECK(r.report.iterations <= 1);
    const NewtonStepResult st = newton_step(LiftMap::composed({0.0, 0.0}), K);
    CHECK(st.error_before == 0.0);
    CHECK(st.next.c == K.c);
    for (std::size_t k = 0; k < K.ux.size(); ++k) CHECK(std::abs(st.next.ux[k]) == 0.0L);
}

TEST_CASE("singular frame is reported") {
    FourierCircle K = FourierCircle::integrable(64, kGamma);
    K.ux[1] = {0.0L, 1.0L / (4.0L * std::numbers::pi_v<Real>)};  // 1 + u_x' = 1 - cos(2 pi theta)
    CHECK_THROWS_AS((void)adapted_frame(MapParams{0.1, 0.0}, K), SingularFrameError);
}

TEST_CASE("solve on the kappa2 = 0 axis matches the rescaled standard map circle") {
    const SolveResult r = solve_at({0.3, 0.0});
    REQUIRE(r.report.converged);
    CHECK(r.report.final_error < 1e-11);
    CHECK(invariance_error(MapParams{0.3, 0.0}, r.circle).sup < 1e-11);
    const SolveResult s =
        solve_invariant_circle(LiftMap::standard(0.6), FourierCircle::flat(256, kGamma, kGamma), SolveOptions{});
    REQUIRE(s.report.converged);
    const std::size_t n = std::max(r.circle.modes(), s.circle.modes());
    const auto a = r.circle.resampled(n).samples();
    const auto b = s.circle.resampled(n).samples();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        worst = std::max({worst, std::abs(a[j].x - b[j].x), std::abs(a[j].y - 0.5 * b[j].y)});
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("newton contract along a solve") {
    const LiftMap map = LiftMap::composed({0.35, 0.2});
    FourierCircle K = FourierCircle::integrable(256, kGamma);
    double prev = invariance_error(map, K).sup;
    double C = 0.0;
    for (int i = 0; i < 8 && prev > 1e-13; ++i) {
        const NewtonStepResult st = newton_step(map, K);
        CHECK(st.error_before == doctest::Approx(prev).epsilon(1e-12));
        // The reported error is the error of the returned circle, recomputed.
        CHECK(std::abs(invariance_error(map, st.next).sup - st.error_after) < 1e-14);
        CHECK(st.exactness_witness <= 10.0 * prev * prev + 1e-15);
        if (st.error_after > 1e-13) C = std::max(C, st.error_after / (prev * prev));
        K = st.next;
        prev = st.error_after;
    }
    CHECK(prev < 1e-12);
    // Quadratic, but the sup-norm ratio drifts up as the error moves to higher
    // modes (about 70 at the last step for this start). Bound it loosely.
    CHECK(C < 1000.0);
}

TEST_CASE("perturbation response is linear") {
    const SolveResult r = solve_at({0.3, 0.1});
    REQUIRE(r.report.converged);
    for (Real d : {1e-6L, 1e-7L}) {
        FourierCircle K = r.circle;
        K.ux[3] += d;
        const double e = invariance_error(MapParams{0.3, 0.1}, K).sup;
        CHECK(e > 0.5 * static_cast<double>(d));
        CHECK(e < 20.0 * static_cast<double>(d));
    }
}

TEST_CASE("symmetry transport of circles") {
    const MapParams k{0.3, 0.25};
    const SolveResult r = solve_at(k);
    REQUIRE(r.report.converged);
    const FourierCircle p4 = p4_transport(r.circle);
    CHECK(p4.omega == doctest::Approx(kGamma + 1.0));
    CHECK(invariance_error(MapParams{0.3, -0.25}, p4).sup < 1e-11);
    const FourierCircle cj = conjugate_transport(k, r.circle);
    CHECK(invariance_error(k.swapped(), cj).sup < 1e-10);
    // Orbits launched on the circle rotate at omega.
    const auto est = estimate_rotation_number(k, r.circle.at(0.123), 100000);
    CHECK(std::abs(est.value - kGamma) < 1e-8);
    // Sample round trip.
    const auto pts = r.circle.samples();
    const FourierCircle back = circle_from_samples(pts, kGamma);
    CHECK(std::abs(static_cast<double>(back.c - r.circle.c)) < 1e-14);
    CHECK(invariance_error(k, back).sup < 1e-11);
}

TEST_CASE("sobolev seminorm") {
    FourierCircle K = FourierCircle::integrable(32, kGamma);
    CHECK(sobolev_seminorm(K, 2.0) == 0.0);
    K.ux[1] = {0.3L, 0.4L};
    for (double s : {0.0, 1.0, 2.0}) CHECK(sobolev_seminorm(K, s) == doctest::Approx(0.5 * std::sqrt(2.0)));
    K.uy[2] = {0.1L, 0.0L};
    CHECK(sobolev_seminorm(K, 1.0) == doctest::Approx(std::sqrt(2 * (0.25 + 4 * 0.01))));
}

TEST_CASE("tail and mode doubling") {
    SolveOptions o;
    o.max_modes = 64;
    const SolveResult capped =
        solve_invariant_circle(LiftMap::composed({0.45, 0.0}), FourierCircle::integrable(32, kGamma), o);
    CHECK_FALSE(capped.report.converged);
    CHECK_FALSE(capped.report.failure.empty());
    const SolveResult grown = solve_at({0.4, 0.0}, kGamma, 32);
    CHECK(grown.report.converged);
    CHECK(grown.report.modes > 32);
    CHECK(grown.circle.tail() <= SolveOptions{}.tail_tolerance);
}

TEST_CASE("continuation reaches an interior point and stops before the axis critical value") {
    ContinuationOptions co;
    co.s_max = 0.3;
    const ContinuationResult ok = continue_to_breakdown(0.0, kGamma, co);
    CHECK(ok.reason == BreakdownReason::ReachedLimit);
    CHECK(ok.last_accepted == 0.3);
    CHECK(invariance_error(MapParams{0.3, 0.0}, ok.circle).sup < 1e-11);
    co.s_max = 0.5;
    co.solve.max_modes = 1 << 12;
    const ContinuationResult br = continue_to_breakdown(0.0, kGamma, co);
    CHECK(br.reason != BreakdownReason::ReachedLimit);
    CHECK(br.last_accepted < 0.4858178);
    CHECK(br.last_accepted > 0.47);
    CHECK(br.first_rejected - br.last_accepted < 1e-5);
    for (std::size_t i = 1; i < br.history.size(); ++i) {
        CHECK(br.history[i].s > 0.0);
    }
}

TEST_CASE("trace_cb_omega records rays and failures") {
    ContinuationOptions co;
    co.solve.max_modes = 1 << 10;
    co.min_step = 1e-3;
    const BoundaryCurve c = trace_cb_omega(kGamma, {std::numbers::pi / 2, 0.0}, co, 2);
    REQUIRE(c.points.size() + c.failures.size() == 2);
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[0].angle == 0.0);
    for (const auto& p : c.points) {
        CHECK(p.method == BoundaryMethod::Kam);
        REQUIRE(p.omega.has_value());
        CHECK(*p.omega == kGamma);
        CHECK(p.tol > 0.0);
        CHECK(p.r_c > 0.4);
        CHECK(p.r_c < 0.4858178);
    }
}
