#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "nasm/map_core.hpp"

namespace nasm {

enum class SymmetryId {
    Reflect,           // (x, y) -> (-x, -y)
    Translate,         // (x, y) -> (x + r, y + s), r, s integers
    TranslateReflect,  // (x, y) -> (1 - x, 1 - y)
    P3Shift,           // (x + 1/2, y), kappa -> (-k1, -k2)
    P4Shift,           // (x, y + 1/2), kappa -> (k1, -k2)
    P34Shift,          // (x + 1/2, y + 1/2), kappa -> (-k1, k2)
};

/// Arithmetic used when iterating orbits for identity checks. Floating runs the
/// double-precision map and is only meaningful on regular orbits, since
/// rounding differences grow at the Lyapunov rate. Lattice runs the exact
/// fixed-point map, on which every identity below holds bit for bit.
enum class Arithmetic { Floating, Lattice };

class SymmetryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Affine action omega -> scale * omega + shift on rotation numbers.
struct RotationAction {
    double scale = 1.0;
    double shift = 0.0;

    [[nodiscard]] double operator()(double omega) const { return scale * omega + shift; }
};

/// One of the coordinate/parameter symmetries of the composed map, together
/// with the orbit identity it implies on the lift.
class SymmetryTransform {
public:
    explicit SymmetryTransform(SymmetryId id, long r = 0, long s = 0);

    static SymmetryTransform translate(long r, long s) { return SymmetryTransform(SymmetryId::Translate, r, s); }

    [[nodiscard]] SymmetryId id() const { return id_; }
    [[nodiscard]] std::string name() const;

    [[nodiscard]] PhasePoint apply(PhasePoint p) const;
    [[nodiscard]] MapParams apply(const MapParams& params) const;

    /// Image of the n-th iterate predicted by the orbit identity: if z_n is the
    /// n-th iterate of p0 under params, the transformed system started at
    /// apply(p0) sits at predict(z_n, n).
    [[nodiscard]] PhasePoint predict(PhasePoint zn, std::size_t n) const;

    [[nodiscard]] LatticePoint apply(LatticePoint p) const;
    [[nodiscard]] LatticePoint predict(LatticePoint zn, std::size_t n) const;

    [[nodiscard]] RotationAction rotation_action() const;

private:
    SymmetryId id_;
    long r_ = 0;
    long s_ = 0;
};

[[nodiscard]] SymmetryTransform parse_symmetry(const std::string& name);

[[nodiscard]] std::pair<PhasePoint, MapParams> apply_symmetry(const SymmetryTransform& t, PhasePoint p,
                                                              const MapParams& params);

/// Largest deviation from the orbit identity over the first n iterates.
[[nodiscard]] double check_orbit_symmetry(const SymmetryTransform& t, const MapParams& params, PhasePoint p0,
                                          std::size_t n, Arithmetic arithmetic = Arithmetic::Floating);

/// Rotation number of the associated orbit of the transformed system.
[[nodiscard]] double rotation_symmetry_predict(const SymmetryTransform& t, double omega);

/// max_k |S_{k2}^{-1} T_{k1 k2}^k S_{k2}(p) - T_{k2 k1}^k(p)| for k = 1..n.
[[nodiscard]] double conjugate_by_std(const MapParams& params, PhasePoint p, std::size_t n,
                                      Arithmetic arithmetic = Arithmetic::Floating);

/// P_{1/2} o S_{2 kappa1} o P_2 applied to p, where P_xi(x, y) = (x, xi y).
/// Equals composed_step({kappa1, 0}, p).
[[nodiscard]] PhasePoint rescale_axis_case(double kappa1, PhasePoint p);

/// Coordinates (X, Y) = (x + y, 2y) turning T_{0 k2} into S_{2 k2}.
[[nodiscard]] PhasePoint to_kappa2_axis_coords(PhasePoint p);
[[nodiscard]] PhasePoint from_kappa2_axis_coords(PhasePoint q);

/// Inverse conjugation of the kappa2-axis case, equals composed_step({0, kappa2}, p).
[[nodiscard]] PhasePoint rescale_kappa2_axis_case(double kappa2, PhasePoint p);

}  // namespace nasm
