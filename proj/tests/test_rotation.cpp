#include <doctest.h>

#include "nasm/rotation.hpp"
#include "nasm/symmetries.hpp"
#include "oracles.hpp"

using namespace nasm;

TEST_CASE("catalog values") {
    const auto& cat = special_rotation_numbers();
    CHECK(cat.size() == 11);
    const double g = oracle::golden();
    CHECK(cat.at("gamma").value == 0.6180339887498949);
    // Correctly rounded sqrt(5) - 1; doubling the double gamma lands one ulp lower.
    CHECK(cat.at("2gamma").value == doctest::Approx(1.2360679774997896).epsilon(2e-16));
    const std::pair<const char*, double> expect[] = {
        {"1-gamma", 1 - g}, {"2-gamma", 2 - g},         {"gamma+1", g + 1},       {"2gamma+1", 2 * g + 1},
        {"2-2gamma", 2 - 2 * g}, {"2gamma-1", 2 * g - 1}, {"3-2gamma", 3 - 2 * g},
        {"(5gamma+6)/(4gamma+5)", (5 * g + 6) / (4 * g + 5)}, {"(gamma+1)/(4gamma+5)", (g + 1) / (4 * g + 5)}};
    for (const auto& [name, v] : expect) {
        CHECK(cat.at(name).value == doctest::Approx(v).epsilon(1e-15));
    }
    // Evaluated at full precision; 1.2229075 does not follow from this expression.
    CHECK(cat.at("(5gamma+6)/(4gamma+5)").value == doctest::Approx(1.2165423).epsilon(1e-7));
    for (const auto& [name, r] : cat) {
        CAPTURE(name);
        CHECK(std::abs(cf_value(r.cf_terms) - r.value) < 1e-14);
        // gamma-type values are noble; 2 gamma = sqrt 5 - 1 = [1; 4, 4, ...] has a tail of fours.
        if (std::string(name).find("2gamma") == std::string::npos && std::string(name).find("2-2gamma") == std::string::npos) {
            CHECK(r.ones_tail_from(6));
        } else {
            CHECK(r.cf_terms.back() == 4);
        }
        REQUIRE(r.diophantine_nu.has_value());
        CHECK(*r.diophantine_nu > 0.0);
    }
    CHECK(rotation_number_from_string("golden").value == cat.at("gamma").value);
    CHECK(rotation_number_from_string("0.25").value == 0.25);
    CHECK_THROWS_AS((void)rotation_number_from_string("gamma^2"), std::invalid_argument);
}

TEST_CASE("convergents") {
    const auto c = convergents(special_rotation_numbers().at("gamma"), 6);
    const Rational fib[] = {{0, 1}, {1, 1}, {1, 2}, {2, 3}, {3, 5}, {5, 8}};
    REQUIRE(c.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(c[i].p == fib[i].p);
        CHECK(c[i].q == fib[i].q);
    }
    for (const auto& [name, r] : special_rotation_numbers()) {
        const auto cs = convergents(r, 20);
        for (const auto& q : cs) {
            const double d = static_cast<double>(q.q);
            CHECK(std::abs(r.value - static_cast<double>(q.p) / d) <= 1.0 / (d * d) + 2e-16);
        }
    }
    const auto c2 = convergents(special_rotation_numbers().at("2gamma"), 25);
    CHECK(static_cast<double>(c2.back().p) / static_cast<double>(c2.back().q) ==
          doctest::Approx(1.2360679774997896).epsilon(1e-12));
    CHECK_THROWS((void)convergents(special_rotation_numbers().at("gamma"), 0));
}

TEST_CASE("tail of ones") {
    const RotationNumber r = tail_of_ones(0.6180339887498949, 3);
    CHECK(r.value == doctest::Approx(oracle::golden()).epsilon(1e-15));
    const RotationNumber s = tail_of_ones(0.5463, 2);  // [0; 1, 1, phi]
    CHECK(s.cf_terms[0] == 0);
    CHECK(s.ones_tail_from(1));
    REQUIRE(s.exact.has_value());
    CHECK(s.exact->value() == doctest::Approx(s.value).epsilon(1e-14));
    CHECK(std::abs(cf_value(s.cf_terms) - s.value) < 1e-14);
}

TEST_CASE("rotation number estimates") {
    const auto e0 = estimate_rotation_number({0.0, 0.0}, {0.3, 0.2}, 1000);
    CHECK(e0.value == doctest::Approx(0.4).epsilon(1e-14));
    const auto plain = estimate_rotation_number({0.0, 0.0}, {0.3, 0.2}, 1000, RotationEstimator::Plain);
    CHECK(plain.value == doctest::Approx(0.4).epsilon(1e-14));
    // Island orbit: consistent across window lengths.
    const auto a = estimate_rotation_number({0.35, 0.5}, {0.0, 0.55}, 10000);
    const auto b = estimate_rotation_number({0.35, 0.5}, {0.0, 0.55}, 100000);
    CHECK(std::abs(a.value - b.value) < 1e-6);
    CHECK(b.converged);
    // Axis reduction: T_{k 0} is conjugate to S_{2k} with y doubled.
    const double k = 0.971635406 / 4.0;
    const PhasePoint p{0.0, 0.3};
    const auto t = estimate_rotation_number({k, 0.0}, p, 50000);
    std::vector<double> inc;
    PhasePoint q{p.x, 2.0 * p.y};
    for (int i = 0; i < 50000; ++i) {
        const PhasePoint n = oracle::std_step(2.0 * k, q);
        inc.push_back(n.x - q.x);
        q = n;
    }
    CHECK(std::abs(t.value - weighted_birkhoff_mean(inc, inc.size())) < 1e-9);
    CHECK_THROWS_AS((void)estimate_rotation_number({0.0, 0.0}, p, 50), std::invalid_argument);
    // Chaotic orbit flags non-convergence.
    const auto c = estimate_rotation_number({1.9, 1.9}, {0.1, 0.1}, 20000);
    CHECK_FALSE(c.converged);
}
