#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace nasm {

enum class BoundaryMethod { Direct, Kam };

[[nodiscard]] inline const char* to_string(BoundaryMethod m) { return m == BoundaryMethod::Direct ? "direct" : "kam"; }

/// One critical point on a ray (kappa1, kappa2) = r (cos angle, sin angle).
struct BoundaryPoint {
    double angle = 0.0;
    double r_c = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    BoundaryMethod method = BoundaryMethod::Direct;
    std::optional<double> omega;  // CB_omega only
    double tol = 0.0;             // bisection width or continuation bracket width
    std::size_t n_or_modes = 0;   // iterations N (direct) or final mode count (kam)
    std::size_t m = 0;            // seed count (direct only)
};

struct RayFailure {
    double angle = 0.0;
    std::string reason;
};

/// Critical boundary CB_gt or CB_omega, points sorted by angle.
struct BoundaryCurve {
    std::vector<BoundaryPoint> points;
    std::vector<RayFailure> failures;
};

}  // namespace nasm
