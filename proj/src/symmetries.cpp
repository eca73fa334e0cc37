#include "nasm/symmetries.hpp"

#include <algorithm>

namespace nasm {

SymmetryTransform::SymmetryTransform(SymmetryId id, long r, long s) : id_(id), r_(r), s_(s) {
    switch (id) {
    case SymmetryId::Reflect:
    case SymmetryId::Translate:
    case SymmetryId::TranslateReflect:
    case SymmetryId::P3Shift:
    case SymmetryId::P4Shift:
    case SymmetryId::P34Shift:
        break;
    default:
        throw SymmetryError("unknown symmetry id " + std::to_string(static_cast<int>(id)));
    }
    if (id != SymmetryId::Translate && (r != 0 || s != 0)) {
        throw SymmetryError("integer shifts only apply to Translate");
    }
}

std::string SymmetryTransform::name() const {
    switch (id_) {
    case SymmetryId::Reflect: return "reflect";
    case SymmetryId::Translate: return "translate(" + std::to_string(r_) + "," + std::to_string(s_) + ")";
    case SymmetryId::TranslateReflect: return "translate-reflect";
    case SymmetryId::P3Shift: return "p3";
    case SymmetryId::P4Shift: return "p4";
    case SymmetryId::P34Shift: return "p34";
    }
    return "?";
}

PhasePoint SymmetryTransform::apply(PhasePoint p) const {
    switch (id_) {
    case SymmetryId::Reflect: return {-p.x, -p.y};
    case SymmetryId::Translate: return {p.x + static_cast<double>(r_), p.y + static_cast<double>(s_)};
    case SymmetryId::TranslateReflect: return {1.0 - p.x, 1.0 - p.y};
    case SymmetryId::P3Shift: return {p.x + 0.5, p.y};
    case SymmetryId::P4Shift: return {p.x, p.y + 0.5};
    case SymmetryId::P34Shift: return {p.x + 0.5, p.y + 0.5};
    }
    return p;
}

MapParams SymmetryTransform::apply(const MapParams& params) const {
    switch (id_) {
    case SymmetryId::P3Shift: return {-params.kappa1, -params.kappa2};
    case SymmetryId::P4Shift: return {params.kappa1, -params.kappa2};
    case SymmetryId::P34Shift: return {-params.kappa1, params.kappa2};
    default: return params;
    }
}

PhasePoint SymmetryTransform::predict(PhasePoint zn, std::size_t n) const {
    const double dn = static_cast<double>(n);
    switch (id_) {
    case SymmetryId::Reflect: return {-zn.x, -zn.y};
    case SymmetryId::Translate:
        return {zn.x + static_cast<double>(r_) + 2.0 * dn * static_cast<double>(s_), zn.y + static_cast<double>(s_)};
    case SymmetryId::TranslateReflect: return {1.0 - zn.x + 2.0 * dn, 1.0 - zn.y};
    case SymmetryId::P3Shift: return {zn.x + 0.5, zn.y};
    case SymmetryId::P4Shift: return {zn.x + dn, zn.y + 0.5};
    case SymmetryId::P34Shift: return {zn.x + 0.5 + dn, zn.y + 0.5};
    }
    return zn;
}

LatticePoint SymmetryTransform::apply(LatticePoint p) const {
    constexpr std::int64_t one = kLatticeOne;
    constexpr std::int64_t half = kLatticeOne / 2;
    switch (id_) {
    case SymmetryId::Reflect: return {-p.x, -p.y};
    case SymmetryId::Translate: return {p.x + r_ * one, p.y + s_ * one};
    case SymmetryId::TranslateReflect: return {one - p.x, one - p.y};
    case SymmetryId::P3Shift: return {p.x + half, p.y};
    case SymmetryId::P4Shift: return {p.x, p.y + half};
    case SymmetryId::P34Shift: return {p.x + half, p.y + half};
    }
    return p;
}

LatticePoint SymmetryTransform::predict(LatticePoint zn, std::size_t n) const {
    constexpr std::int64_t one = kLatticeOne;
    constexpr std::int64_t half = kLatticeOne / 2;
    const auto dn = static_cast<std::int64_t>(n);
    switch (id_) {
    case SymmetryId::Reflect: return {-zn.x, -zn.y};
    case SymmetryId::Translate: return {zn.x + (r_ + 2 * dn * s_) * one, zn.y + s_ * one};
    case SymmetryId::TranslateReflect: return {one - zn.x + 2 * dn * one, one - zn.y};
    case SymmetryId::P3Shift: return {zn.x + half, zn.y};
    case SymmetryId::P4Shift: return {zn.x + dn * one, zn.y + half};
    case SymmetryId::P34Shift: return {zn.x + half + dn * one, zn.y + half};
    }
    return zn;
}

RotationAction SymmetryTransform::rotation_action() const {
    switch (id_) {
    case SymmetryId::Reflect: return {-1.0, 0.0};
    case SymmetryId::Translate: return {1.0, 2.0 * static_cast<double>(s_)};
    case SymmetryId::TranslateReflect: return {-1.0, 2.0};
    case SymmetryId::P3Shift: return {1.0, 0.0};
    case SymmetryId::P4Shift:
    case SymmetryId::P34Shift: return {1.0, 1.0};
    }
    throw SymmetryError("symmetry without rotation-number action");
}

SymmetryTransform parse_symmetry(const std::string& name) {
    if (name == "reflect") return SymmetryTransform(SymmetryId::Reflect);
    if (name == "translate-reflect") return SymmetryTransform(SymmetryId::TranslateReflect);
    if (name == "p3") return SymmetryTransform(SymmetryId::P3Shift);
    if (name == "p4") return SymmetryTransform(SymmetryId::P4Shift);
    if (name == "p34") return SymmetryTransform(SymmetryId::P34Shift);
    if (name.rfind("translate(", 0) == 0 && name.back() == ')') {
        const auto body = name.substr(10, name.size() - 11);
        const auto comma = body.find(',');
        if (comma != std::string::npos) {
            try {
                return SymmetryTransform::translate(std::stol(body.substr(0, comma)), std::stol(body.substr(comma + 1)));
            } catch (const std::logic_error&) {
                // fall through to the error below
            }
        }
    }
    throw SymmetryError("unknown symmetry '" + name + "'");
}

std::pair<PhasePoint, MapParams> apply_symmetry(const SymmetryTransform& t, PhasePoint p, const MapParams& params) {
    return {t.apply(p), t.apply(params)};
}

namespace {

double lattice_dist(LatticePoint a, LatticePoint b) {
    return max_dist(a.to_phase(), b.to_phase());
}

double check_orbit_symmetry_lattice(const SymmetryTransform& t, const MapParams& params, PhasePoint p0,
                                    std::size_t n) {
    const MapParams params_t = t.apply(params);
    LatticePoint z = LatticePoint::from(p0);
    LatticePoint w = t.apply(z);
    double worst = lattice_dist(w, t.predict(z, 0));
    for (std::size_t k = 1; k <= n; ++k) {
        z = lattice_composed_step(params, z);
        w = lattice_composed_step(params_t, w);
        worst = std::max(worst, lattice_dist(w, t.predict(z, k)));
    }
    return worst;
}

double conjugate_by_std_lattice(const MapParams& params, PhasePoint p, std::size_t n) {
    const MapParams swapped = params.swapped();
    LatticePoint direct = LatticePoint::from(p);
    LatticePoint lifted = lattice_std_step(params.kappa2, direct);
    double worst = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        lifted = lattice_composed_step(params, lifted);
        direct = lattice_composed_step(swapped, direct);
        worst = std::max(worst, lattice_dist(lattice_std_inverse_step(params.kappa2, lifted), direct));
    }
    return worst;
}

}  // namespace

double check_orbit_symmetry(const SymmetryTransform& t, const MapParams& params, PhasePoint p0, std::size_t n,
                            Arithmetic arithmetic) {
    if (arithmetic == Arithmetic::Lattice) {
        return check_orbit_symmetry_lattice(t, params, p0, n);
    }
    const auto [q0, params_t] = apply_symmetry(t, p0, params);
    PhasePoint z = p0;
    PhasePoint w = q0;
    double worst = max_dist(w, t.predict(z, 0));
    for (std::size_t k = 1; k <= n; ++k) {
        z = composed_step(params, z);
        w = composed_step(params_t, w);
        worst = std::max(worst, max_dist(w, t.predict(z, k)));
    }
    return worst;
}

double rotation_symmetry_predict(const SymmetryTransform& t, double omega) {
    if (!std::isfinite(omega)) {
        throw SymmetryError("rotation number must be finite");
    }
    return t.rotation_action()(omega);
}

double conjugate_by_std(const MapParams& params, PhasePoint p, std::size_t n, Arithmetic arithmetic) {
    if (arithmetic == Arithmetic::Lattice) {
        return conjugate_by_std_lattice(params, p, n);
    }
    const MapParams swapped = params.swapped();
    PhasePoint lifted = std_step(params.kappa2, p);
    PhasePoint direct = p;
    double worst = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        lifted = composed_step(params, lifted);
        direct = composed_step(swapped, direct);
        worst = std::max(worst, max_dist(std_inverse_step(params.kappa2, lifted), direct));
    }
    return worst;
}

PhasePoint rescale_axis_case(double kappa1, PhasePoint p) {
    const PhasePoint q = std_step(2.0 * kappa1, {p.x, 2.0 * p.y});
    return {q.x, 0.5 * q.y};
}

PhasePoint to_kappa2_axis_coords(PhasePoint p) { return {p.x + p.y, 2.0 * p.y}; }

PhasePoint from_kappa2_axis_coords(PhasePoint q) { return {q.x - 0.5 * q.y, 0.5 * q.y}; }

PhasePoint rescale_kappa2_axis_case(double kappa2, PhasePoint p) {
    return from_kappa2_axis_coords(std_step(2.0 * kappa2, to_kappa2_axis_coords(p)));
}

}  // namespace nasm
