#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nasm {

/// Spectral data is kept in extended precision: rounding noise in the
/// invariance error is amplified by small divisors, twice per Newton step.
using Real = long double;
using Complex = std::complex<Real>;

/// Half spectrum c_0..c_{n/2} of a real function sampled at theta_j = j/n,
/// normalized so that f(theta) = sum_k c_k exp(2 pi i k theta).
using Spectrum = std::vector<Complex>;

/// Real-to-complex transforms of one size. Plans are created once per size
/// and shared; executing them is thread-safe.
class Fft {
public:
    explicit Fft(std::size_t n);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] Spectrum forward(std::span<const Real> values) const;
    [[nodiscard]] std::vector<Real> inverse(std::span<const Complex> spectrum) const;

private:
    std::size_t n_;
    void* r2c_;
    void* c2r_;
};

[[nodiscard]] inline std::size_t grid_size(const Spectrum& s) { return 2 * (s.size() - 1); }

/// d/dtheta, with the Nyquist coefficient dropped.
[[nodiscard]] Spectrum spectral_derivative(const Spectrum& s);

/// Coefficients of f(theta + shift); the Nyquist coefficient is dropped.
[[nodiscard]] Spectrum spectral_shift(const Spectrum& s, Real shift);

/// Zero-pads or truncates to grid size n (a power of two).
[[nodiscard]] Spectrum spectral_resample(const Spectrum& s, std::size_t n);

/// Direct evaluation of the trigonometric sum at theta.
[[nodiscard]] Real spectral_evaluate(const Spectrum& s, Real theta);

[[nodiscard]] bool is_power_of_two(std::size_t n);

}  // namespace nasm
