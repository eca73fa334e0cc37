#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nasm/map_core.hpp"

namespace nasm {

/// (a + b sqrt(d)) / c with integer coefficients, c != 0, d > 0 not a square.
struct QuadraticSurd {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::int64_t c = 1;
    std::int64_t d = 5;

    [[nodiscard]] double value() const;
    /// First `count` continued-fraction terms, computed exactly.
    [[nodiscard]] std::vector<std::int64_t> continued_fraction(std::size_t count) const;
};

struct RotationNumber {
    double value = 0.0;
    std::vector<std::int64_t> cf_terms;
    std::optional<double> diophantine_nu;
    std::optional<double> diophantine_tau;
    std::optional<QuadraticSurd> exact;

    /// All terms after `from` equal one.
    [[nodiscard]] bool ones_tail_from(std::size_t from) const;
};

/// Number of continued-fraction terms stored for catalog values; enough for
/// the convergents to pin the value below 1e-15.
inline constexpr std::size_t kCatalogTerms = 40;

[[nodiscard]] RotationNumber make_rotation_number(const QuadraticSurd& s, std::size_t terms = kCatalogTerms);

/// gamma, 1-gamma, 2-gamma, gamma+1, 2gamma, 2gamma+1, 2-2gamma, 2gamma-1,
/// 3-2gamma, (5gamma+6)/(4gamma+5), (gamma+1)/(4gamma+5).
[[nodiscard]] const std::map<std::string, RotationNumber>& special_rotation_numbers();

/// Lookup by catalog name, with "golden" as an alias for gamma, or a decimal literal.
[[nodiscard]] RotationNumber rotation_number_from_string(const std::string& s);

[[nodiscard]] double cf_value(const std::vector<std::int64_t>& terms);

struct Rational {
    std::int64_t p = 0;
    std::int64_t q = 1;
    [[nodiscard]] double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

[[nodiscard]] std::vector<Rational> convergents(const RotationNumber& r, std::size_t k);

/// Keeps a0..a_depth of the expansion of `value` and replaces the rest by ones.
[[nodiscard]] RotationNumber tail_of_ones(double value, std::size_t depth);

/// Continued fraction of a double, stopping after `count` terms or when the
/// remainder drops below floating-point resolution.
[[nodiscard]] std::vector<std::int64_t> continued_fraction_of(double value, std::size_t count);

enum class RotationEstimator { WeightedBirkhoff, Plain };

struct RotationEstimate {
    double value = 0.0;
    double half_window_value = 0.0;  // same estimator on the first n/2 steps
    bool converged = false;
};

/// Estimate of lim (x_n - x_0) / n. Flags non-convergence when the n/2 and n
/// estimates differ by more than `tolerance`.
[[nodiscard]] RotationEstimate estimate_rotation_number(const MapParams& params, PhasePoint p0, std::size_t n,
                                                        RotationEstimator estimator = RotationEstimator::WeightedBirkhoff,
                                                        double tolerance = 1e-8);

/// Weighted Birkhoff average of per-step increments dx_0..dx_{n-1}.
[[nodiscard]] double weighted_birkhoff_mean(const std::vector<double>& increments, std::size_t count);

}  // namespace nasm
