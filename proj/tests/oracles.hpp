#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "gibbsim/core/image.hpp"

namespace oracle {

using gibbsim::Complex;
using gibbsim::ComplexImage;
using gibbsim::RealImage;

/// Direct centered DFT, O(N^4). sign = -1 forward, +1 inverse (unscaled).
inline ComplexImage direct_dft(const ComplexImage& x, int sign)
{
    const std::size_t h = x.height(), w = x.width();
    const double ch = static_cast<double>(h / 2), cw = static_cast<double>(w / 2);
    ComplexImage out(h, w);
    for (std::size_t u = 0; u < h; ++u)
        for (std::size_t v = 0; v < w; ++v) {
            Complex acc{};
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t c = 0; c < w; ++c) {
                    const double ph = 2.0 * std::numbers::pi *
                                      ((u - ch) * (r - ch) / static_cast<double>(h) +
                                       (v - cw) * (c - cw) / static_cast<double>(w));
                    acc += x(r, c) * std::polar(1.0, sign * ph);
                }
            out(u, v) = acc;
        }
    return out;
}

inline ComplexImage random_complex(std::size_t h, std::size_t w, unsigned seed)
{
    std::mt19937 gen(seed);
    std::normal_distribution<double> n;
    ComplexImage out(h, w);
    for (auto& v : out)
        v = Complex(n(gen), n(gen));
    return out;
}

inline RealImage random_real(std::size_t h, std::size_t w, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u;
    RealImage out(h, w);
    for (auto& v : out)
        v = u(gen);
    return out;
}

inline double max_abs_diff(const auto& a, const auto& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.storage()[i] - b.storage()[i]));
    return m;
}

/// Truncated Fourier series of a unit step sampled on `hi` points (1 for
/// n >= hi/2): keeps the centered frequencies [-lo/2, lo/2) of its length
/// `hi` DFT and evaluates the real part at fractional positions of the `hi`
/// grid.
struct StepSeries {
    std::size_t hi, lo;
    std::vector<Complex> coeff;

    StepSeries(std::size_t hi_, std::size_t lo_) : hi(hi_), lo(lo_)
    {
        const double c = static_cast<double>(hi / 2);
        for (long k = kmin(); k < kmin() + static_cast<long>(lo); ++k) {
            Complex x{};
            for (std::size_t n = hi / 2; n < hi; ++n)
                x += std::polar(1.0, -2.0 * std::numbers::pi * k * (static_cast<double>(n) - c) / hi);
            coeff.push_back(x);
        }
    }

    long kmin() const { return -static_cast<long>(lo / 2); }

    double operator()(double x) const
    {
        const double c = static_cast<double>(hi / 2);
        Complex acc{};
        for (std::size_t i = 0; i < coeff.size(); ++i)
            acc += coeff[i] * std::polar(1.0, 2.0 * std::numbers::pi * (kmin() + static_cast<long>(i)) * (x - c) / hi);
        return acc.real() / static_cast<double>(hi);
    }

    /// Largest value past the edge at hi/2 - 1/2, within a quarter period.
    double overshoot(double step_hi = 0.01) const
    {
        double peak = -1.0;
        const double edge = static_cast<double>(hi / 2) - 0.5;
        for (double x = edge + step_hi; x <= edge + hi / 4.0; x += step_hi)
            peak = std::max(peak, (*this)(x));
        return peak - 1.0;
    }
};

} // namespace oracle
