#include "nasm/map_core.hpp"

namespace nasm {

PhasePoint PhasePoint::cell(bool reduce_y) const {
    PhasePoint r{x - std::floor(x), y};
    if (reduce_y) {
        r.y = y - std::floor(y);
    }
    return r;
}

PhasePoint std_step(double eps, PhasePoint p) {
    const double kick = eps / kTwoPi * sin_2pi(p.x);
    const double y = p.y + kick;
    return {p.x + y, y};
}

PhasePoint std_inverse_step(double eps, PhasePoint p) {
    const double x = p.x - p.y;
    return {x, p.y - eps / kTwoPi * sin_2pi(x)};
}

Jacobian2 std_jacobian(double eps, PhasePoint p) {
    const double k = eps * cos_2pi(p.x);
    return {1.0 + k, 1.0, k, 1.0};
}

Increment composed_increment(const MapParams& params, PhasePoint p) {
    const double s1 = params.kappa1 / kTwoPi * sin_2pi(p.x);
    const double inner = p.x + p.y + s1;
    const double f2 = s1 + params.kappa2 / kTwoPi * sin_2pi(inner);
    const double f1 = s1 + f2;
    return {2.0 * p.y + f1, f2};
}

PhasePoint composed_step(const MapParams& params, PhasePoint p) {
    // x' = x + 2y + F1, y' = y + F2, grouped as (x + y1) + (y1 + s2) with
    // y1 = y + s1 so the result is bit-identical to two single kicks.
    const double s1 = params.kappa1 / kTwoPi * sin_2pi(p.x);
    const double y1 = p.y + s1;
    const double x1 = p.x + y1;
    const double y2 = y1 + params.kappa2 / kTwoPi * sin_2pi(x1);
    return {x1 + y2, y2};
}

PhasePoint composed_inverse_step(const MapParams& params, PhasePoint p) {
    return std_inverse_step(params.kappa1, std_inverse_step(params.kappa2, p));
}

Jacobian2 jacobian(const MapParams& params, PhasePoint p) {
    const PhasePoint mid = std_step(params.kappa1, p);
    return std_jacobian(params.kappa2, mid) * std_jacobian(params.kappa1, p);
}

Jacobian2 jacobian_power(const MapParams& params, PhasePoint p, std::size_t n) {
    Jacobian2 acc = Jacobian2::identity();
    for (std::size_t i = 0; i < n; ++i) {
        acc = jacobian(params, p) * acc;
        p = composed_step(params, p);
    }
    return acc;
}

double twist_derivative(const MapParams& params, PhasePoint p) {
    const double inner = p.x + p.y + params.kappa1 / kTwoPi * sin_2pi(p.x);
    return 2.0 + params.kappa2 * cos_2pi(inner);
}

PhasePoint composed_iterate(const MapParams& params, PhasePoint p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        p = composed_step(params, p);
    }
    return p;
}

void nasm_trajectory(const MapParams& params, PhasePoint p0, std::span<PhasePoint> out) {
    if (out.empty()) {
        return;
    }
    out[0] = p0;
    for (std::size_t n = 1; n < out.size(); ++n) {
        out[n] = std_step(nasm_kick(params, n - 1), out[n - 1]);
    }
}

std::vector<PhasePoint> nasm_trajectory(const MapParams& params, PhasePoint p0, std::size_t n) {
    std::vector<PhasePoint> out(n + 1);
    nasm_trajectory(params, p0, out);
    return out;
}

LatticePoint LatticePoint::from(PhasePoint p) {
    const double scale = static_cast<double>(kLatticeOne);
    return {static_cast<std::int64_t>(std::nearbyint(p.x * scale)),
            static_cast<std::int64_t>(std::nearbyint(p.y * scale))};
}

PhasePoint LatticePoint::to_phase() const {
    const double scale = 1.0 / static_cast<double>(kLatticeOne);
    return {static_cast<double>(x) * scale, static_cast<double>(y) * scale};
}

std::int64_t lattice_kick(double eps, std::int64_t x) {
    constexpr std::int64_t half = kLatticeOne / 2;
    constexpr std::int64_t quarter = kLatticeOne / 4;
    std::int64_t f = x & (kLatticeOne - 1);
    double sign = 1.0;
    if (f >= half) {
        f -= half;
        sign = -1.0;
    }
    if (f > quarter) {
        f = half - f;
    }
    const double s = sign * std::sin(kTwoPi * (static_cast<double>(f) / static_cast<double>(kLatticeOne)));
    return static_cast<std::int64_t>(std::nearbyint(eps / kTwoPi * s * static_cast<double>(kLatticeOne)));
}

LatticePoint lattice_std_step(double eps, LatticePoint p) {
    const std::int64_t y = p.y + lattice_kick(eps, p.x);
    return {p.x + y, y};
}

LatticePoint lattice_std_inverse_step(double eps, LatticePoint p) {
    const std::int64_t x = p.x - p.y;
    return {x, p.y - lattice_kick(eps, x)};
}

LatticePoint lattice_composed_step(const MapParams& params, LatticePoint p) {
    return lattice_std_step(params.kappa2, lattice_std_step(params.kappa1, p));
}

RotatingMapParams RotatingMapParams::from_nasm(const MapParams& params) {
    return {0.5 * (params.kappa1 + params.kappa2), 0.5 * (params.kappa2 - params.kappa1), 0.5, 0.0};
}

RotatingState rotating_step(const RotatingMapParams& rp, RotatingState s) {
    const double k = rp.kbar + rp.dkappa * cos_2pi(s.phi);
    const PhasePoint p = std_step(k, {s.x, s.y});
    double phi = s.phi + rp.omega;
    phi -= std::floor(phi);
    return {p.x, p.y, phi};
}

}  // namespace nasm
