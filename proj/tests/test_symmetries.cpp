#include <doctest.h>

#include "nasm/rotation.hpp"
#include "nasm/symmetries.hpp"
#include "oracles.hpp"

using namespace nasm;

namespace {

// Orbit identities written out by hand, independent of SymmetryTransform::predict.
PhasePoint expected(const std::string& name, PhasePoint z, double n) {
    if (name == "reflect") return {-z.x, -z.y};
    if (name == "translate-reflect") return {1.0 - z.x + 2.0 * n, 1.0 - z.y};
    if (name == "p3") return {z.x + 0.5, z.y};
    if (name == "p4") return {z.x + n, z.y + 0.5};
    if (name == "p34") return {z.x + 0.5 + n, z.y + 0.5};
    if (name == "translate(2,-1)") return {z.x + 2.0 - 2.0 * n, z.y - 1.0};
    return z;
}

MapParams expected_params(const std::string& name, MapParams k) {
    if (name == "p3") return {-k.kappa1, -k.kappa2};
    if (name == "p4") return {k.kappa1, -k.kappa2};
    if (name == "p34") return {-k.kappa1, k.kappa2};
    return k;
}

const char* kNames[] = {"reflect", "translate(2,-1)", "translate-reflect", "p3", "p4", "p34"};

}  // namespace

TEST_CASE("apply_symmetry examples") {
    auto [p, k] = apply_symmetry(parse_symmetry("reflect"), {0.2, 0.3}, {0.4, 0.6});
    CHECK(p == PhasePoint{-0.2, -0.3});
    CHECK(k == MapParams{0.4, 0.6});
    auto [p4, k4] = apply_symmetry(parse_symmetry("p4"), {0.2, 0.3}, {0.4, 0.6});
    CHECK(p4 == PhasePoint{0.2, 0.8});
    CHECK(k4 == MapParams{0.4, -0.6});
    auto [p0, k0] = apply_symmetry(SymmetryTransform::translate(0, 0), {0.2, 0.3}, {0.4, 0.6});
    CHECK(p0 == PhasePoint{0.2, 0.3});
    CHECK(k0 == MapParams{0.4, 0.6});
    CHECK_THROWS_AS((void)parse_symmetry("p5"), SymmetryError);
}

TEST_CASE("predictions match the hand-written identities") {
    oracle::Sampler s(21);
    for (const char* name : kNames) {
        const SymmetryTransform t = parse_symmetry(name);
        for (int i = 0; i < 20; ++i) {
            const PhasePoint z = s.point();
            const std::size_t n = static_cast<std::size_t>(s.uniform(0, 50));
            CHECK(max_dist(t.predict(z, n), expected(name, z, static_cast<double>(n))) < 1e-13);
            const MapParams k = s.params();
            CHECK(t.apply(k) == expected_params(name, k));
            CHECK(t.apply(t.apply(k)) == k);  // parameter action is an involution
        }
    }
}

TEST_CASE("integrable case, every transform") {
    oracle::Sampler s(1);
    for (const char* name : kNames) {
        CHECK(check_orbit_symmetry(parse_symmetry(name), {0.0, 0.0}, s.point(), 100) < 1e-12);
    }
}

TEST_CASE("floating identities on regular orbits") {
    CHECK(check_orbit_symmetry(parse_symmetry("p3"), {0.5, 0.7}, {0.5, 0.05}, 1000) < 1e-9);
    CHECK(check_orbit_symmetry(parse_symmetry("translate-reflect"), {0.5, 0.7}, {0.45, 0.02}, 1000) < 1e-9);
    oracle::Sampler s(8);
    for (int i = 0; i < 200; ++i) {
        const MapParams k{s.uniform(-0.2, 0.2), s.uniform(-0.2, 0.2)};
        const PhasePoint p = s.point();
        for (const char* name : kNames) {
            CHECK(check_orbit_symmetry(parse_symmetry(name), k, p, 200) < 1e-9);
        }
    }
}

TEST_CASE("lattice identities are exact across the twist region") {
    oracle::Sampler s(99);
    for (int i = 0; i < 100; ++i) {
        const MapParams k = s.params();
        const PhasePoint p = s.point();
        for (const char* name : kNames) {
            CHECK(check_orbit_symmetry(parse_symmetry(name), k, p, 1000, Arithmetic::Lattice) == 0.0);
        }
        CHECK(conjugate_by_std(k, p, 100, Arithmetic::Lattice) == 0.0);
    }
}

TEST_CASE("rotation number actions") {
    const double g = oracle::golden();
    CHECK(rotation_symmetry_predict(parse_symmetry("p4"), g) == doctest::Approx(g + 1.0));
    CHECK(rotation_symmetry_predict(parse_symmetry("translate-reflect"), 2 * g) == doctest::Approx(2.0 - 2.0 * g));
    CHECK(rotation_symmetry_predict(parse_symmetry("p3"), 0.3) == 0.3);
    CHECK(rotation_symmetry_predict(parse_symmetry("p34"), 0.3) == doctest::Approx(1.3));
    CHECK(rotation_symmetry_predict(parse_symmetry("reflect"), 0.3) == -0.3);
    CHECK(rotation_symmetry_predict(parse_symmetry("translate(1,2)"), 0.3) == doctest::Approx(4.3));
    CHECK_THROWS_AS((void)rotation_symmetry_predict(parse_symmetry("p3"), NAN), SymmetryError);
    // Applying p4 twice shifts by an integer.
    const auto t = parse_symmetry("p4");
    const double twice = rotation_symmetry_predict(t, rotation_symmetry_predict(t, 0.37));
    CHECK(std::abs(twice - 0.37 - std::round(twice - 0.37)) < 1e-15);
    // Catalog pairs.
    const auto& cat = special_rotation_numbers();
    CHECK(rotation_symmetry_predict(t, cat.at("gamma").value) == doctest::Approx(cat.at("gamma+1").value));
    CHECK(rotation_symmetry_predict(parse_symmetry("translate-reflect"), cat.at("2gamma").value) ==
          doctest::Approx(cat.at("2-2gamma").value));
}

TEST_CASE("rotation numbers of reflected orbits") {
    const MapParams k{0.3, 0.2};
    const PhasePoint p{0.1, 0.3};
    const auto a = estimate_rotation_number(k, p, 20000);
    const auto b = estimate_rotation_number(k, {1.0 - p.x, 1.0 - p.y}, 20000);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(std::abs(b.value - (2.0 - a.value)) < 2e-8);
}

TEST_CASE("conjugacy by the standard map") {
    CHECK(conjugate_by_std({0.0, 0.0}, {0.3, 0.1}, 50) < 1e-13);
    CHECK(conjugate_by_std({0.5, 0.35}, {0.3, 0.1}, 1) < 1e-13);
    oracle::Sampler s(4);
    for (int i = 0; i < 50; ++i) {
        // Regular orbit near the elliptic point.
        CHECK(conjugate_by_std({0.35, 0.5}, {0.5 + s.uniform(-0.05, 0.05), s.uniform(-0.05, 0.05)}, 100) < 1e-9);
    }
}

TEST_CASE("axis reductions") {
    CHECK(max_dist(rescale_axis_case(0.0, {0.2, 0.1}), composed_step({0.0, 0.0}, {0.2, 0.1})) < 1e-15);
    CHECK(max_dist(rescale_axis_case(0.3, {0.2, 0.1}), composed_step({0.3, 0.0}, {0.2, 0.1})) < 1e-13);
    oracle::Sampler s(12);
    for (int i = 0; i < 100; ++i) {
        const double k = s.uniform(-1.9, 1.9);
        const PhasePoint p = s.point();
        CHECK(max_dist(rescale_axis_case(k, p), composed_step({k, 0.0}, p)) < 1e-13);
        CHECK(max_dist(rescale_kappa2_axis_case(k, p), composed_step({0.0, k}, p)) < 1e-13);
        CHECK(max_dist(from_kappa2_axis_coords(to_kappa2_axis_coords(p)), p) < 1e-15);
    }
}
