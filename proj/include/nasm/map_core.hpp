#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace nasm {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Standard-map critical value of the golden-mean circle.
inline constexpr double kKappaGolden = 0.971635406;

/// Point on the lift R x R of the cylinder. No coordinate is ever reduced
/// implicitly; use `cell()` when a representative in the unit cell is wanted.
struct PhasePoint {
    double x = 0.0;
    double y = 0.0;

    [[nodiscard]] PhasePoint cell(bool reduce_y = false) const;

    friend PhasePoint operator+(PhasePoint a, PhasePoint b) { return {a.x + b.x, a.y + b.y}; }
    friend PhasePoint operator-(PhasePoint a, PhasePoint b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// Distance in the max norm.
[[nodiscard]] inline double max_dist(PhasePoint a, PhasePoint b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

/// Kick strengths of the two alternating standard maps.
struct MapParams {
    double kappa1 = 0.0;
    double kappa2 = 0.0;

    [[nodiscard]] bool finite() const { return std::isfinite(kappa1) && std::isfinite(kappa2); }
    [[nodiscard]] bool twist_region() const {
        return std::abs(kappa1) < 2.0 && std::abs(kappa2) < 2.0;
    }
    /// Parameters of the conjugate realization with the kicks swapped.
    [[nodiscard]] MapParams swapped() const { return {kappa2, kappa1}; }

    friend bool operator==(const MapParams&, const MapParams&) = default;
};

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Jacobian2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    [[nodiscard]] double det() const { return a * d - b * c; }
    [[nodiscard]] double trace() const { return a + d; }
    [[nodiscard]] static Jacobian2 identity() { return {}; }

    [[nodiscard]] PhasePoint apply(PhasePoint v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    friend Jacobian2 operator*(const Jacobian2& l, const Jacobian2& r) {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
                l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
};

/// sin(2 pi x) and cos(2 pi x) after exact reduction of x to [-1/2, 1/2].
/// The reduction is odd-symmetric, so sin_2pi(-x) == -sin_2pi(x) bit for bit.
/// Arguments past a quarter turn are folded back, so half-integers give exact zeros.
[[nodiscard]] inline double sin_2pi(double x) {
    const double r = x - std::round(x);
    const double a = std::abs(r) > 0.25 ? std::copysign(0.5 - std::abs(r), r) : r;
    return std::sin(kTwoPi * a);
}
[[nodiscard]] inline double cos_2pi(double x) { return std::cos(kTwoPi * (x - std::round(x))); }

// Single standard map S_eps and its inverse, both on the lift.
[[nodiscard]] PhasePoint std_step(double eps, PhasePoint p);
[[nodiscard]] PhasePoint std_inverse_step(double eps, PhasePoint p);
[[nodiscard]] Jacobian2 std_jacobian(double eps, PhasePoint p);

/// Autonomous realization T = S_{kappa2} o S_{kappa1}, evaluated through the
/// closed forms x' = x + 2y + F1, y' = y + F2.
[[nodiscard]] PhasePoint composed_step(const MapParams& params, PhasePoint p);

/// Inverse of composed_step, S_{kappa1}^{-1} o S_{kappa2}^{-1}.
[[nodiscard]] PhasePoint composed_inverse_step(const MapParams& params, PhasePoint p);

/// Periodic increments of composed_step: x' - x and y' - y.
struct Increment {
    double dx;
    double dy;
};
[[nodiscard]] Increment composed_increment(const MapParams& params, PhasePoint p);

/// Derivative of composed_step at p (chain rule through both kicks).
[[nodiscard]] Jacobian2 jacobian(const MapParams& params, PhasePoint p);

/// Derivative of the n-fold composition along the orbit of p.
[[nodiscard]] Jacobian2 jacobian_power(const MapParams& params, PhasePoint p, std::size_t n);

/// dx'/dy of composed_step; positive everywhere when |kappa2| < 2.
[[nodiscard]] double twist_derivative(const MapParams& params, PhasePoint p);

/// n steps of composed_step.
[[nodiscard]] PhasePoint composed_iterate(const MapParams& params, PhasePoint p, std::size_t n);

/// Kick strength used at raw step n: kappa1 on even n, kappa2 on odd n.
[[nodiscard]] inline double nasm_kick(const MapParams& params, std::size_t n) {
    return (n % 2 == 0) ? params.kappa1 : params.kappa2;
}

/// Raw nonautonomous orbit p0, p1, ..., pn (n + 1 points). Even entries
/// coincide with composed_step iterates.
[[nodiscard]] std::vector<PhasePoint> nasm_trajectory(const MapParams& params, PhasePoint p0,
                                                      std::size_t n);

/// Same as above, writing into a caller buffer of size n + 1.
void nasm_trajectory(const MapParams& params, PhasePoint p0, std::span<PhasePoint> out);

// --- Exact lattice arithmetic -------------------------------------------
//
// Coordinates stored as integers in units of 2^-kLatticeBits. Sums are exact,
// the sine argument is reduced to the first quadrant with integer operations
// and kicks are rounded ties-to-even, so reflections, integer and half-integer
// translations and the inverse map commute with the step bit for bit.

inline constexpr int kLatticeBits = 48;
inline constexpr std::int64_t kLatticeOne = std::int64_t{1} << kLatticeBits;

struct LatticePoint {
    std::int64_t x = 0;
    std::int64_t y = 0;

    /// Nearest lattice point; |x|, |y| must stay below 2^14.
    [[nodiscard]] static LatticePoint from(PhasePoint p);
    [[nodiscard]] PhasePoint to_phase() const;

    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

/// Lattice kick round(eps / 2pi * sin(2 pi x)) in lattice units.
[[nodiscard]] std::int64_t lattice_kick(double eps, std::int64_t x);
[[nodiscard]] LatticePoint lattice_std_step(double eps, LatticePoint p);
[[nodiscard]] LatticePoint lattice_std_inverse_step(double eps, LatticePoint p);
[[nodiscard]] LatticePoint lattice_composed_step(const MapParams& params, LatticePoint p);

// --- Rotating (quasi-periodically kicked) variant -------------------------

struct RotatingMapParams {
    double kbar = 0.0;
    double dkappa = 0.0;
    double omega = 0.5;
    double phi0 = 0.0;

    /// kbar = (k1 + k2)/2, dkappa = (k2 - k1)/2, Omega = 1/2, phi0 = 0.
    [[nodiscard]] static RotatingMapParams from_nasm(const MapParams& params);
};

struct RotatingState {
    double x = 0.0;
    double y = 0.0;
    double phi = 0.0;
};

/// One step of the three-dimensional map: kick with kbar + dkappa cos(2 pi phi),
/// then advance phi by Omega modulo 1.
[[nodiscard]] RotatingState rotating_step(const RotatingMapParams& rp, RotatingState s);

}  // namespace nasm
