#include "nasm/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace nasm {

namespace {

constexpr Real kPi = std::numbers::pi_v<Real>;

struct PlanPair {
    fftwl_plan r2c = nullptr;
    fftwl_plan c2r = nullptr;
};

// FFTW's planner is not thread-safe; plans live for the whole process.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

PlanPair plans_for(std::size_t n) {
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(planner_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    const int ni = static_cast<int>(n);
    long double* in = fftwl_alloc_real(n);
    fftwl_complex* out = fftwl_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.r2c = fftwl_plan_dft_r2c_1d(ni, in, out, flags);
    p.c2r = fftwl_plan_dft_c2r_1d(ni, out, in, flags | FFTW_DESTROY_INPUT);
    fftwl_free(in);
    fftwl_free(out);
    if (p.r2c == nullptr || p.c2r == nullptr) {
        throw std::runtime_error("FFTW planning failed for n=" + std::to_string(n));
    }
    cache.emplace(n, p);
    return p;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

Fft::Fft(std::size_t n) : n_(n), r2c_(nullptr), c2r_(nullptr) {
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("transform size must be a power of two >= 2");
    }
    const PlanPair p = plans_for(n);
    r2c_ = p.r2c;
    c2r_ = p.c2r;
}

Spectrum Fft::forward(std::span<const Real> values) const {
    if (values.size() != n_) {
        throw std::invalid_argument("forward transform size mismatch");
    }
    std::vector<Real> in(values.begin(), values.end());
    Spectrum out(n_ / 2 + 1);
    fftwl_execute_dft_r2c(static_cast<fftwl_plan>(r2c_), in.data(), reinterpret_cast<fftwl_complex*>(out.data()));
    const Real scale = 1.0L / static_cast<Real>(n_);
    for (auto& c : out) {
        c *= scale;
    }
    return out;
}

std::vector<Real> Fft::inverse(std::span<const Complex> spectrum) const {
    if (spectrum.size() != n_ / 2 + 1) {
        throw std::invalid_argument("inverse transform size mismatch");
    }
    Spectrum in(spectrum.begin(), spectrum.end());
    std::vector<Real> out(n_);
    fftwl_execute_dft_c2r(static_cast<fftwl_plan>(c2r_), reinterpret_cast<fftwl_complex*>(in.data()), out.data());
    return out;
}

Spectrum spectral_derivative(const Spectrum& s) {
    Spectrum out(s.size());
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        out[k] = s[k] * Complex(0.0L, 2.0L * kPi * static_cast<Real>(k));
    }
    return out;
}

Spectrum spectral_shift(const Spectrum& s, Real shift) {
    Spectrum out(s.size());
    out[0] = s[0];
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        // Reduce k * shift modulo 1 before forming the phase.
        Real phase = static_cast<Real>(k) * shift;
        phase -= std::round(phase);
        out[k] = s[k] * std::polar(1.0L, 2.0L * kPi * phase);
    }
    return out;
}

Spectrum spectral_resample(const Spectrum& s, std::size_t n) {
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("resample size must be a power of two >= 2");
    }
    Spectrum out(n / 2 + 1);
    const std::size_t keep = std::min(out.size(), s.size()) - 1;  // drop either Nyquist term
    for (std::size_t k = 0; k < keep; ++k) {
        out[k] = s[k];
    }
    return out;
}

Real spectral_evaluate(const Spectrum& s, Real theta) {
    Real v = s[0].real();
    const std::size_t n = grid_size(s);
    for (std::size_t k = 1; k < s.size(); ++k) {
        Real phase = static_cast<Real>(k) * theta;
        phase -= std::round(phase);
        const Real w = (k == n / 2) ? 1.0L : 2.0L;
        v += w * (s[k] * std::polar(1.0L, 2.0L * kPi * phase)).real();
    }
    return v;
}

}  // namespace nasm
