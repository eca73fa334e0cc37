#include "nasm/rotation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nasm {

namespace {

__extension__ typedef __int128 i128;

i128 isqrt(i128 n) {
    if (n < 0) {
        throw std::invalid_argument("isqrt of negative number");
    }
    auto r = static_cast<i128>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

}  // namespace

double QuadraticSurd::value() const {
    return (static_cast<double>(a) + static_cast<double>(b) * std::sqrt(static_cast<double>(d))) /
           static_cast<double>(c);
}

std::vector<std::int64_t> QuadraticSurd::continued_fraction(std::size_t count) const {
    if (c == 0 || d <= 0) {
        throw std::invalid_argument("malformed quadratic surd");
    }
    const i128 root_d = isqrt(d);
    if (root_d * root_d == d) {
        throw std::invalid_argument("surd radicand is a perfect square");
    }
    // Rewrite as (P + sqrt(D)) / Q with Q | D - P^2.
    i128 aa = a, bb = b, cc = c;
    if (bb < 0) {
        aa = -aa;
        bb = -bb;
        cc = -cc;
    }
    const i128 abs_c = cc < 0 ? -cc : cc;
    i128 P = aa * abs_c;
    i128 Q = cc * abs_c;
    const i128 D = bb * bb * d * cc * cc;
    const i128 r = isqrt(D);
    std::vector<std::int64_t> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        i128 term;
        if (Q > 0) {
            term = floor_div(P + r, Q);
        } else {
            term = -floor_div(P + r, -Q) - 1;
        }
        out.push_back(static_cast<std::int64_t>(term));
        P = term * Q - P;
        Q = (D - P * P) / Q;
    }
    return out;
}

bool RotationNumber::ones_tail_from(std::size_t from) const {
    for (std::size_t i = from; i < cf_terms.size(); ++i) {
        if (cf_terms[i] != 1) {
            return false;
        }
    }
    return from < cf_terms.size();
}

namespace {

void attach_diophantine(RotationNumber& r) {
    std::int64_t largest = 1;
    for (std::size_t i = 1; i < r.cf_terms.size(); ++i) {
        largest = std::max(largest, r.cf_terms[i]);
    }
    // Bounded partial quotients A give |q w - p| > 1 / ((A + 2) q).
    r.diophantine_nu = 1.0 / (static_cast<double>(largest) + 2.0);
    r.diophantine_tau = 1.0;
}

}  // namespace

RotationNumber make_rotation_number(const QuadraticSurd& s, std::size_t terms) {
    RotationNumber r;
    r.value = s.value();
    r.cf_terms = s.continued_fraction(terms);
    r.exact = s;
    attach_diophantine(r);
    return r;
}

const std::map<std::string, RotationNumber>& special_rotation_numbers() {
    static const std::map<std::string, RotationNumber> catalog = [] {
        std::map<std::string, RotationNumber> m;
        m["gamma"] = make_rotation_number({-1, 1, 2, 5});
        m["1-gamma"] = make_rotation_number({3, -1, 2, 5});
        m["2-gamma"] = make_rotation_number({5, -1, 2, 5});
        m["gamma+1"] = make_rotation_number({1, 1, 2, 5});
        m["2gamma"] = make_rotation_number({-1, 1, 1, 5});
        m["2gamma+1"] = make_rotation_number({0, 1, 1, 5});
        m["2-2gamma"] = make_rotation_number({3, -1, 1, 5});
        m["2gamma-1"] = make_rotation_number({-2, 1, 1, 5});
        m["3-2gamma"] = make_rotation_number({4, -1, 1, 5});
        m["(5gamma+6)/(4gamma+5)"] = make_rotation_number({29, -1, 22, 5});
        m["(gamma+1)/(4gamma+5)"] = make_rotation_number({7, -1, 22, 5});
        return m;
    }();
    return catalog;
}

RotationNumber rotation_number_from_string(const std::string& s) {
    const auto& cat = special_rotation_numbers();
    const std::string key = (s == "golden") ? "gamma" : s;
    if (auto it = cat.find(key); it != cat.end()) {
        return it->second;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used != s.size() || !std::isfinite(v)) {
        throw std::invalid_argument("unknown rotation number '" + s + "'");
    }
    RotationNumber r;
    r.value = v;
    r.cf_terms = continued_fraction_of(v, 24);
    return r;
}

double cf_value(const std::vector<std::int64_t>& terms) {
    if (terms.empty()) {
        throw std::invalid_argument("empty continued fraction");
    }
    double x = static_cast<double>(terms.back());
    for (std::size_t i = terms.size() - 1; i-- > 0;) {
        x = static_cast<double>(terms[i]) + 1.0 / x;
    }
    return x;
}

std::vector<Rational> convergents(const RotationNumber& r, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("need at least one convergent");
    }
    if (r.cf_terms.empty()) {
        throw std::invalid_argument("rotation number has no continued fraction");
    }
    std::vector<Rational> out;
    std::int64_t p_prev = 1, q_prev = 0;
    std::int64_t p = r.cf_terms[0], q = 1;
    out.push_back({p, q});
    for (std::size_t i = 1; i < r.cf_terms.size() && out.size() < k; ++i) {
        const std::int64_t a = r.cf_terms[i];
        const std::int64_t p_next = a * p + p_prev;
        const std::int64_t q_next = a * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        out.push_back({p, q});
    }
    return out;
}

std::vector<std::int64_t> continued_fraction_of(double value, std::size_t count) {
    std::vector<std::int64_t> out;
    double x = value;
    for (std::size_t i = 0; i < count; ++i) {
        const double a = std::floor(x);
        out.push_back(static_cast<std::int64_t>(a));
        const double frac = x - a;
        if (frac < 1e-12 || !std::isfinite(1.0 / frac)) {
            break;
        }
        x = 1.0 / frac;
    }
    return out;
}

RotationNumber tail_of_ones(double value, std::size_t depth) {
    const auto prefix = continued_fraction_of(value, depth + 1);
    RotationNumber r;
    r.cf_terms = prefix;
    while (r.cf_terms.size() < kCatalogTerms) {
        r.cf_terms.push_back(1);
    }
    // [a0; ..., a_d, phi] with phi = [1; 1, 1, ...] = (1 + sqrt 5) / 2.
    std::int64_t p_prev = 1, q_prev = 0, p = prefix[0], q = 1;
    for (std::size_t i = 1; i < prefix.size(); ++i) {
        const std::int64_t pn = prefix[i] * p + p_prev;
        const std::int64_t qn = prefix[i] * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
    }
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    r.value = (static_cast<double>(p) * phi + static_cast<double>(p_prev)) /
              (static_cast<double>(q) * phi + static_cast<double>(q_prev));
    // Exact form: (A + B sqrt5) / (C + D sqrt5), rationalized.
    const i128 A = p + 2 * static_cast<i128>(p_prev), B = p, C = q + 2 * static_cast<i128>(q_prev), D = q;
    const i128 num_a = A * C - 5 * B * D;
    const i128 num_b = B * C - A * D;
    const i128 den = C * C - 5 * D * D;
    const i128 limit = static_cast<i128>(1) << 40;
    auto small = [&](i128 v) { return v < limit && v > -limit; };
    if (den != 0 && small(num_a) && small(num_b) && small(den)) {
        i128 g = std::gcd(static_cast<std::int64_t>(num_a), static_cast<std::int64_t>(num_b));
        g = std::gcd(static_cast<std::int64_t>(g), static_cast<std::int64_t>(den));
        if (g == 0) g = 1;
        r.exact = QuadraticSurd{static_cast<std::int64_t>(num_a / g), static_cast<std::int64_t>(num_b / g),
                                static_cast<std::int64_t>(den / g), 5};
    }
    attach_diophantine(r);
    return r;
}

double weighted_birkhoff_mean(const std::vector<double>& increments, std::size_t count) {
    if (count < 2 || count > increments.size()) {
        throw std::invalid_argument("weighted Birkhoff mean needs 2 <= count <= size");
    }
    double sum = 0.0;
    double norm = 0.0;
    const double n = static_cast<double>(count);
    for (std::size_t j = 1; j < count; ++j) {
        const double t = static_cast<double>(j) / n;
        const double w = std::exp(-1.0 / (t * (1.0 - t)));
        sum += w * increments[j];
        norm += w;
    }
    return sum / norm;
}

RotationEstimate estimate_rotation_number(const MapParams& params, PhasePoint p0, std::size_t n,
                                          RotationEstimator estimator, double tolerance) {
    if (n < 100) {
        throw std::invalid_argument("rotation estimate needs at least 100 iterations");
    }
    std::vector<double> dx(n);
    PhasePoint p = p0;
    for (std::size_t i = 0; i < n; ++i) {
        const Increment inc = composed_increment(params, p);
        dx[i] = inc.dx;
        // x enters only through sin(2 pi x), so it may be kept reduced.
        p = {p.x + inc.dx, p.y + inc.dy};
        p.x -= std::floor(p.x);
    }
    RotationEstimate est;
    const std::size_t half = n / 2;
    if (estimator == RotationEstimator::WeightedBirkhoff) {
        est.value = weighted_birkhoff_mean(dx, n);
        est.half_window_value = weighted_birkhoff_mean(dx, half);
    } else {
        double s_half = 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += dx[i];
            if (i + 1 == half) {
                s_half = s;
            }
        }
        est.value = s / static_cast<double>(n);
        est.half_window_value = s_half / static_cast<double>(half);
    }
    est.converged = std::isfinite(est.value) && std::abs(est.value - est.half_window_value) <= tolerance;
    return est;
}

}  // namespace nasm
