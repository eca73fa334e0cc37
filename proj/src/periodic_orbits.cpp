#include "nasm/periodic_orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nasm {

namespace {

constexpr double kPeriodicTolerance = 1e-10;
constexpr std::size_t kBracketPoints = std::size_t{1} << 12;

double distance_to_integer(double v) { return std::abs(v - std::round(v)); }

}  // namespace

std::vector<PhasePoint> primary_fixed_points() {
    return {{0.5, 0.0}, {0.0, 0.0}, {0.0, 0.5}, {0.0, -0.5}, {0.5, 0.5}, {0.5, -0.5}};
}

double residue_of_orbit(const MapParams& params, std::span<const PhasePoint> orbit) {
    if (orbit.empty()) {
        throw OrbitError("empty orbit");
    }
    Jacobian2 monodromy = Jacobian2::identity();
    for (std::size_t i = 0; i < orbit.size(); ++i) {
        const PhasePoint next = composed_step(params, orbit[i]);
        const PhasePoint expected = orbit[(i + 1) % orbit.size()];
        const PhasePoint diff = next - expected;
        if (distance_to_integer(diff.x) > kPeriodicTolerance || distance_to_integer(diff.y) > kPeriodicTolerance) {
            throw OrbitError("orbit is not periodic: step " + std::to_string(i) + " misses by (" +
                             std::to_string(diff.x) + ", " + std::to_string(diff.y) + ")");
        }
        monodromy = jacobian(params, orbit[i]) * monodromy;
    }
    return residue_from_trace(monodromy.trace());
}

PointClass parse_point_class(const std::string& s) {
    if (s == "I" || s == "1") return PointClass::I;
    if (s == "II" || s == "2") return PointClass::II;
    if (s == "III" || s == "3") return PointClass::III;
    if (s == "IV" || s == "4") return PointClass::IV;
    throw std::invalid_argument("unknown point class '" + s + "'");
}

std::string to_string(PointClass c) {
    switch (c) {
    case PointClass::I: return "I";
    case PointClass::II: return "II";
    case PointClass::III: return "III";
    case PointClass::IV: return "IV";
    }
    return "?";
}

PhasePoint class_representative(PointClass c) {
    switch (c) {
    case PointClass::I: return {0.0, 0.0};
    case PointClass::II: return {0.5, 0.0};
    case PointClass::III: return {0.0, 0.5};
    case PointClass::IV: return {0.5, 0.5};
    }
    return {};
}

double stability_quantity(PointClass c, const MapParams& p) {
    const double k1 = p.kappa1;
    const double k2 = p.kappa2;
    const double cross = 0.5 * k1 * k2;
    switch (c) {
    case PointClass::I: return -k1 - k2 - cross;
    case PointClass::II: return k1 + k2 - cross;
    case PointClass::III: return k2 - k1 + cross;
    case PointClass::IV: return k1 - k2 + cross;
    }
    return 0.0;
}

bool closed_form_stable(PointClass c, const MapParams& params) {
    const double q = stability_quantity(c, params);
    return q > 0.0 && q < 2.0;
}

PointClass p3_partner(PointClass c) {
    switch (c) {
    case PointClass::I: return PointClass::II;
    case PointClass::II: return PointClass::I;
    case PointClass::III: return PointClass::IV;
    case PointClass::IV: return PointClass::III;
    }
    return c;
}

PointClass p4_partner(PointClass c) {
    switch (c) {
    case PointClass::I: return PointClass::III;
    case PointClass::III: return PointClass::I;
    case PointClass::II: return PointClass::IV;
    case PointClass::IV: return PointClass::II;
    }
    return c;
}

MapParams StabilityGrid::center(std::size_t i, std::size_t j) const {
    const double res = static_cast<double>(resolution);
    const double h1 = (box.k1_max - box.k1_min) / res;
    const double h2 = (box.k2_max - box.k2_min) / res;
    const double m1 = 0.5 * (box.k1_min + box.k1_max);
    const double m2 = 0.5 * (box.k2_min + box.k2_max);
    // Offsets are half-integers, exact and antisymmetric about the middle.
    const double o1 = static_cast<double>(i) + 0.5 - 0.5 * res;
    const double o2 = static_cast<double>(j) + 0.5 - 0.5 * res;
    return {m1 + o1 * h1, m2 + o2 * h2};
}

bool StabilityGrid::interior(std::size_t i, std::size_t j) const {
    if (i == 0 || j == 0 || i + 1 >= resolution || j + 1 >= resolution) {
        return false;
    }
    const char v = closed_form[index(i, j)];
    for (std::size_t a = i - 1; a <= i + 1; ++a) {
        for (std::size_t b = j - 1; b <= j + 1; ++b) {
            if (closed_form[index(a, b)] != v) {
                return false;
            }
        }
    }
    return true;
}

std::size_t StabilityGrid::interior_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            n += interior(i, j) ? 1 : 0;
        }
    }
    return n;
}

std::size_t StabilityGrid::interior_disagreements() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            if (interior(i, j) && closed_form[index(i, j)] != residue[index(i, j)]) {
                ++n;
            }
        }
    }
    return n;
}

StabilityGrid stability_region(PointClass c, const ParamBox& box, std::size_t resolution) {
    if (resolution == 0) {
        throw std::invalid_argument("resolution must be positive");
    }
    StabilityGrid grid;
    grid.point_class = c;
    grid.box = box;
    grid.resolution = resolution;
    grid.closed_form.assign(resolution * resolution, 0);
    grid.residue.assign(resolution * resolution, 0);
    const PhasePoint z = class_representative(c);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            const MapParams p = grid.center(i, j);
            const std::array<PhasePoint, 1> orbit{z};
            grid.closed_form[grid.index(i, j)] = closed_form_stable(c, p) ? 1 : 0;
            grid.residue[grid.index(i, j)] = residue_stable(residue_of_orbit(p, orbit)) ? 1 : 0;
        }
    }
    return grid;
}

double secondary_equation(const MapParams& params, double x) {
    const double s = sin_2pi(x);
    return params.kappa1 * s + params.kappa2 * std::sin(kTwoPi * (x - std::round(x)) + 0.5 * params.kappa1 * s);
}

namespace {

// The secondary equation divided by sin(2 pi x): the primary roots at
// x = 0 and 1/2 are removable, so every sign change is a secondary root.
double reduced_secondary(const MapParams& params, double x) {
    return secondary_equation(params, x) / sin_2pi(x);
}

double bisect(const MapParams& params, double a, double b) {
    double fa = reduced_secondary(params, a);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) {
            break;
        }
        const double fm = reduced_secondary(params, mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

std::vector<FixedPointRecord> solve_secondary_period1(const MapParams& params) {
    std::vector<FixedPointRecord> out;
    if (!params.finite()) {
        return out;
    }
    const double h = 1.0 / static_cast<double>(kBracketPoints);
    auto node = [&](std::size_t j) { return (static_cast<double>(j) + 0.5) * h; };
    double x_prev = node(0);
    double f_prev = reduced_secondary(params, x_prev);
    for (std::size_t j = 1; j <= kBracketPoints; ++j) {
        // j == kBracketPoints wraps to the first node shifted by one period.
        const double x = (j == kBracketPoints) ? node(0) + 1.0 : node(j);
        const double f = reduced_secondary(params, x);
        if (f_prev != 0.0 && f != 0.0 && ((f < 0.0) != (f_prev < 0.0))) {
            double root = bisect(params, x_prev, x);
            root -= std::floor(root);
            const double y = -params.kappa1 / (2.0 * kTwoPi) * sin_2pi(root);
            // y* lies in (-1/2, 1/2] already: |kappa1| sin / 4 pi < 1/2 unless |kappa1| > 2 pi.
            double y_red = y - std::ceil(y - 0.5);
            FixedPointRecord rec;
            rec.location = {root, y_red};
            rec.period = 1;
            const PhasePoint image = composed_step(params, rec.location);
            rec.winding = std::lround(image.x - root);
            rec.residue = residue_from_trace(jacobian(params, rec.location).trace());
            rec.stable = residue_stable(rec.residue);
            out.push_back(rec);
        }
        x_prev = x;
        f_prev = f;
    }
    std::sort(out.begin(), out.end(),
              [](const FixedPointRecord& a, const FixedPointRecord& b) { return a.location.x < b.location.x; });
    return out;
}

double z_star_quotient(const MapParams& params) {
    const double k1 = params.kappa1;
    const double k2 = params.kappa2;
    const double numerator = 6.0 * k1 + 6.0 * k2 - 3.0 * k1 * k2;
    const double a = 1.0 - 0.5 * k1;
    const double denominator = k1 - 0.5 * k1 * k2 + k2 * a * a * a;
    if (numerator == 0.0) {
        return 0.0;
    }
    if (denominator == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return numerator / denominator;
}

std::optional<double> z_star_estimate(const MapParams& params) {
    const double q = z_star_quotient(params);
    if (std::isnan(q) || q < 0.0) {
        return std::nullopt;
    }
    return std::sqrt(q);
}

FixedPointRecord find_periodic_orbit(const MapParams& params, long m, std::size_t n, PhasePoint guess,
                                     const NewtonOptions& opts) {
    if (n == 0) {
        throw std::invalid_argument("period must be at least 1");
    }
    PhasePoint z = guess;
    const double shift = static_cast<double>(m);
    for (std::size_t it = 0; it <= opts.max_iterations; ++it) {
        const PhasePoint image = composed_iterate(params, z, n);
        const PhasePoint g{image.x - z.x - shift, image.y - z.y};
        const double err = std::max(std::abs(g.x), std::abs(g.y));
        if (!std::isfinite(err)) {
            break;
        }
        const Jacobian2 dt = jacobian_power(params, z, n);
        if (err < opts.tolerance) {
            FixedPointRecord rec;
            rec.location = z;
            rec.period = n;
            rec.winding = m;
            rec.residue = residue_from_trace(dt.trace());
            rec.stable = residue_stable(rec.residue);
            return rec;
        }
        const Jacobian2 lin{dt.a - 1.0, dt.b, dt.c, dt.d - 1.0};
        const double det = lin.det();
        if (std::abs(det) < 1e-14) {
            throw OrbitError("singular linearization in periodic-orbit Newton");
        }
        PhasePoint step{(lin.d * g.x - lin.b * g.y) / det, (-lin.c * g.x + lin.a * g.y) / det};
        const double len = std::max(std::abs(step.x), std::abs(step.y));
        if (len > 0.1) {
            step = {step.x * 0.1 / len, step.y * 0.1 / len};
        }
        z = z - step;
    }
    throw OrbitError("periodic-orbit Newton did not converge");
}

std::vector<PhasePoint> orbit_points(const MapParams& params, PhasePoint z, std::size_t n) {
    std::vector<PhasePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(z);
        z = composed_step(params, z);
    }
    return out;
}

}  // namespace nasm
