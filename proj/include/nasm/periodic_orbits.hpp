#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nasm/map_core.hpp"

namespace nasm {

struct FixedPointRecord {
    PhasePoint location;
    std::size_t period = 1;
    long winding = 0;
    double residue = 0.0;
    bool stable = false;
};

class OrbitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Residue R = (2 - Tr M) / 4 and the elliptic test 0 < R < 1.
[[nodiscard]] inline double residue_from_trace(double trace) { return 0.25 * (2.0 - trace); }
[[nodiscard]] inline bool residue_stable(double residue) { return residue > 0.0 && residue < 1.0; }

/// The six period-one orbits that exist for every (kappa1, kappa2).
[[nodiscard]] std::vector<PhasePoint> primary_fixed_points();

/// Residue of a periodic orbit given as consecutive points z_0, ..., z_{n-1}.
/// Each step must land on the next point up to integer shifts (tolerance 1e-10).
[[nodiscard]] double residue_of_orbit(const MapParams& params, std::span<const PhasePoint> orbit);

// --- Primary stability classes -------------------------------------------

enum class PointClass { I, II, III, IV };

[[nodiscard]] PointClass parse_point_class(const std::string& s);
[[nodiscard]] std::string to_string(PointClass c);

/// Representative primary fixed point of a class: (0,0), (1/2,0), (0,1/2), (1/2,1/2).
[[nodiscard]] PhasePoint class_representative(PointClass c);

/// The quantity Q with "stable iff 0 < Q < 2"; for these orbits R = Q/2.
[[nodiscard]] double stability_quantity(PointClass c, const MapParams& params);
[[nodiscard]] bool closed_form_stable(PointClass c, const MapParams& params);

/// Class mapped to by the symmetries that flip parameter signs.
[[nodiscard]] PointClass p3_partner(PointClass c);
[[nodiscard]] PointClass p4_partner(PointClass c);

struct ParamBox {
    double k1_min = -2.0, k1_max = 2.0;
    double k2_min = -2.0, k2_max = 2.0;
};

/// Row-major grid of cells; cell (i, j) has kappa1 index i and kappa2 index j.
struct StabilityGrid {
    PointClass point_class = PointClass::I;
    ParamBox box;
    std::size_t resolution = 0;
    std::vector<char> closed_form;  // inequality verdict per cell
    std::vector<char> residue;      // verdict from residue_of_orbit per cell

    [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const { return i * resolution + j; }
    /// Cell centre. Symmetric boxes give exactly negated centres for mirrored cells.
    [[nodiscard]] MapParams center(std::size_t i, std::size_t j) const;
    /// Cells whose closed-form verdict matches all eight neighbours.
    [[nodiscard]] bool interior(std::size_t i, std::size_t j) const;
    [[nodiscard]] std::size_t interior_count() const;
    [[nodiscard]] std::size_t interior_disagreements() const;
};

[[nodiscard]] StabilityGrid stability_region(PointClass c, const ParamBox& box, std::size_t resolution);

// --- Secondary period-one orbits -----------------------------------------

/// Left minus right side of the secondary fixed-point equation,
/// kappa1 sin(2 pi x) + kappa2 sin(2 pi x + kappa1/2 sin(2 pi x)).
[[nodiscard]] double secondary_equation(const MapParams& params, double x);

/// Secondary period-one orbits in x in [0,1), y in (-1/2, 1/2], sorted by x.
[[nodiscard]] std::vector<FixedPointRecord> solve_secondary_period1(const MapParams& params);

/// Cubic-truncation estimate of |z*| = |2 pi x* - pi| for the orbits born at
/// (1/2, 0). Empty when the quotient is negative or its denominator vanishes.
[[nodiscard]] std::optional<double> z_star_estimate(const MapParams& params);

/// Numerator over denominator of the z*^2 estimate (NaN for a zero denominator).
[[nodiscard]] double z_star_quotient(const MapParams& params);

// --- General periodic orbits ----------------------------------------------

struct NewtonOptions {
    std::size_t max_iterations = 50;
    double tolerance = 1e-12;
};

/// Newton on T^n(z) - z - (m, 0) on the lift.
[[nodiscard]] FixedPointRecord find_periodic_orbit(const MapParams& params, long m, std::size_t n,
                                                   PhasePoint guess, const NewtonOptions& opts = {});

/// The n points of the orbit through a periodic point.
[[nodiscard]] std::vector<PhasePoint> orbit_points(const MapParams& params, PhasePoint z, std::size_t n);

}  // namespace nasm
