#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nasm/boundary.hpp"
#include "nasm/fourier.hpp"
#include "nasm/map_core.hpp"

namespace nasm {

/// Lift map seen by the solver through its increments (x' - x, y' - y) and
/// Jacobian. The standard map is included as an independent reference.
struct LiftMap {
    enum class Kind { Composed, Standard };
    Kind kind = Kind::Composed;
    MapParams params;
    double eps = 0.0;

    static LiftMap composed(const MapParams& p) { return {Kind::Composed, p, 0.0}; }
    static LiftMap standard(double e) { return {Kind::Standard, {}, e}; }

    [[nodiscard]] Increment increment(PhasePoint p) const;
    [[nodiscard]] Jacobian2 jacobian(PhasePoint p) const;
};

/// K(theta) = (theta + u_x(theta), c + u_y(theta)) on an n-point grid, with
/// zero-mean u_x, u_y stored as half spectra (index 0 and Nyquist kept zero).
struct FourierCircle {
    double omega = 0.0;
    Real c = 0.0;
    Spectrum ux;
    Spectrum uy;

    /// u = 0, grid size n.
    [[nodiscard]] static FourierCircle flat(std::size_t n, double omega, Real c);
    /// Invariant circle y = omega/2 of the composed map at kappa = 0.
    [[nodiscard]] static FourierCircle integrable(std::size_t n, double omega) { return flat(n, omega, 0.5 * omega); }

    [[nodiscard]] std::size_t modes() const { return grid_size(ux); }
    [[nodiscard]] FourierCircle resampled(std::size_t n) const;
    /// K at the grid points theta_j = j/n.
    [[nodiscard]] std::vector<PhasePoint> samples() const;
    [[nodiscard]] PhasePoint at(double theta) const;
    /// Median of max(|ux_k|, |uy_k|) over n/4 < k < n/2.
    [[nodiscard]] double tail() const;
};

struct ErrorField {
    std::vector<Real> ex;
    std::vector<Real> ey;
    double sup = 0.0;
};

[[nodiscard]] ErrorField invariance_error(const LiftMap& map, const FourierCircle& K);
[[nodiscard]] inline ErrorField invariance_error(const MapParams& params, const FourierCircle& K) {
    return invariance_error(LiftMap::composed(params), K);
}

class KamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SmallDivisorError : public KamError {
public:
    SmallDivisorError(std::size_t k, double divisor);
    [[nodiscard]] std::size_t mode() const { return k_; }

private:
    std::size_t k_;
};

class DegenerateTwistError : public KamError {
public:
    using KamError::KamError;
};

class SingularFrameError : public KamError {
public:
    using KamError::KamError;
};

/// Frame M(theta) = [DK | J^-1 DK N] with N = 1/|DK|^2 (det M = 1), and the
/// reduced linear dynamics A = M(theta+omega)^-1 DT(K) M(theta) ~ [[1, S], [0, 1]].
struct AdaptedFrame {
    std::vector<Real> dkx, dky;  // DK(theta)
    std::vector<Real> norm;      // N(theta)
    std::vector<Real> torsion;   // S(theta) = A_12
    double reduction_residual = 0.0;
    double mean_torsion = 0.0;
};

[[nodiscard]] AdaptedFrame adapted_frame(const LiftMap& map, const FourierCircle& K);
[[nodiscard]] inline AdaptedFrame adapted_frame(const MapParams& params, const FourierCircle& K) {
    return adapted_frame(LiftMap::composed(params), K);
}

inline constexpr double kSmallDivisorThreshold = 1e-9;

/// Solves W(theta) - W(theta + omega) = rhs on the grid, returning zero-mean W.
/// Without enforcement a nonzero mean of rhs is an error.
[[nodiscard]] std::vector<double> cohomology_solve(std::span<const double> rhs, double omega, bool zero_mean_enforced,
                                                   double threshold = kSmallDivisorThreshold);
/// Spectral form; the k = 0 coefficient of the result is zero.
[[nodiscard]] Spectrum cohomology_solve(const Spectrum& rhs, double omega, double threshold = kSmallDivisorThreshold);

struct NewtonStepResult {
    FourierCircle next;
    double error_before = 0.0;
    double error_after = 0.0;
    double exactness_witness = 0.0;  // |mean of the second transformed error component|
    double reduction_residual = 0.0;
    double mean_torsion = 0.0;
    double w2_average = 0.0;
};

[[nodiscard]] NewtonStepResult newton_step(const LiftMap& map, const FourierCircle& K,
                                           double small_divisor = kSmallDivisorThreshold);

/// sqrt(sum_{k != 0} |k|^{2s} (|ux_k|^2 + |uy_k|^2)) over both signs of k.
[[nodiscard]] double sobolev_seminorm(const FourierCircle& K, double s);

struct SolveOptions {
    double tolerance = 1e-11;
    std::size_t max_iterations = 40;
    double tail_tolerance = 1e-14;
    std::size_t max_modes = std::size_t{1} << 16;
    double small_divisor = kSmallDivisorThreshold;
    bool padding = false;  // run each Newton step on a 2x grid
    double sobolev_s = 2.0;
};

struct SolveReport {
    bool converged = false;
    double final_error = 0.0;
    std::size_t iterations = 0;
    std::size_t modes = 0;
    std::vector<double> error_history;
    std::vector<double> sobolev_history;
    std::vector<double> witness_history;
    bool blowup = false;
    std::string failure;
};

struct SolveResult {
    FourierCircle circle;
    SolveReport report;
};

/// Newton iteration from K_init (target omega taken from K_init) until the
/// invariance error drops below tolerance with a resolved coefficient tail.
[[nodiscard]] SolveResult solve_invariant_circle(const LiftMap& map, const FourierCircle& K_init,
                                                 const SolveOptions& opts = {});

struct ContinuationOptions {
    double initial_step = 0.02;
    double max_step = 0.05;
    double min_step = 1e-6;
    double growth = 1.5;
    double blowup_threshold = 1e3;
    double s_max = 0.0;  // 0: edge of the twist region along the ray
    std::size_t initial_modes = 64;
    bool secant_predictor = false;
    SolveOptions solve;
};

enum class BreakdownReason { Blowup, NewtonFailure, ReachedLimit };

[[nodiscard]] const char* to_string(BreakdownReason r);

struct ContinuationStep {
    double s = 0.0;
    bool accepted = false;
    double error = 0.0;
    std::size_t iterations = 0;
    std::size_t modes = 0;
    double sobolev = 0.0;
};

struct ContinuationResult {
    double last_accepted = 0.0;
    double first_rejected = 0.0;
    BreakdownReason reason = BreakdownReason::ReachedLimit;
    FourierCircle circle;  // at last_accepted
    std::vector<ContinuationStep> history;
};

/// Continuation along (kappa1, kappa2) = s (cos angle, sin angle) from s = 0.
/// Steps whose circle exceeds the blow-up threshold or whose solve fails are
/// rejected and the step halved; breakdown is declared once the step falls
/// below min_step, leaving [last_accepted, first_rejected] as the bracket.
[[nodiscard]] ContinuationResult continue_to_breakdown(double angle, double omega, const ContinuationOptions& opts);

[[nodiscard]] BoundaryCurve trace_cb_omega(double omega, const std::vector<double>& angles,
                                           const ContinuationOptions& opts, unsigned threads = 0);

/// Circle for (kappa1, -kappa2) with rotation omega + 1: K + (0, 1/2).
[[nodiscard]] FourierCircle p4_transport(const FourierCircle& K);

/// S_{kappa2}^{-1} o K, re-phased to zero-mean u_x: invariant for the swapped parameters.
[[nodiscard]] FourierCircle conjugate_transport(const MapParams& params, const FourierCircle& K);

/// Samples arbitrary points into a FourierCircle of size n: x_j - theta_j and y_j become u_x, c + u_y.
[[nodiscard]] FourierCircle circle_from_samples(std::span<const PhasePoint> points, double omega);

}  // namespace nasm
