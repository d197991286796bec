#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gibbsim/core/image.hpp"

namespace gibbsim {

/// BT.601 luma: 0.299 R + 0.587 G + 0.114 B.
inline RealImage grayscale_bt601(const RgbImage& rgb)
{
    if (!rgb.r.same_shape(rgb.g) || !rgb.r.same_shape(rgb.b))
        throw DimensionError("grayscale_bt601: channel dimensions differ");
    RealImage out(rgb.height(), rgb.width());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.storage()[i] = 0.299 * rgb.r.storage()[i] + 0.587 * rgb.g.storage()[i] +
                           0.114 * rgb.b.storage()[i];
    }
    return out;
}

namespace detail {

// Source coordinate of output sample i with half-pixel (align-corners-false) centers.
inline double source_coordinate(std::size_t i, std::size_t in, std::size_t out)
{
    return (static_cast<double>(i) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
}

// Resample each row of `img` to `out_w` samples with a 1D kernel functor.
template <class Resample1D>
RealImage resample_rows(const RealImage& img, std::size_t out_w, Resample1D&& resample)
{
    RealImage out(img.height(), out_w);
    std::vector<double> line(img.width());
    for (std::size_t r = 0; r < img.height(); ++r) {
        auto src = img.row(r);
        std::copy(src.begin(), src.end(), line.begin());
        resample(line, out.row(r));
    }
    return out;
}

struct BilinearLine {
    void operator()(const std::vector<double>& in, std::span<double> out) const
    {
        const std::size_t n = in.size();
        for (std::size_t i = 0; i < out.size(); ++i) {
            double x = std::max(source_coordinate(i, n, out.size()), 0.0);
            auto x0 = std::min(static_cast<std::size_t>(x), n - 1);
            std::size_t x1 = std::min(x0 + 1, n - 1);
            double t = x - static_cast<double>(x0);
            out[i] = in[x0] * (1.0 - t) + in[x1] * t;
        }
    }
};

// Catmull-Rom (Keys, a = -0.5).
inline double cubic_weight(double x)
{
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0)
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0)
        return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

// Out-of-range taps are extrapolated linearly from the two nearest samples,
// which keeps linear signals exact up to the borders.
struct CubicLine {
    void operator()(const std::vector<double>& in, std::span<double> out) const
    {
        const auto n = static_cast<std::ptrdiff_t>(in.size());
        auto sample = [&](std::ptrdiff_t k) {
            if (k < 0)
                return in[0] + static_cast<double>(k) * (in[1] - in[0]);
            if (k >= n)
                return in[n - 1] + static_cast<double>(k - n + 1) * (in[n - 1] - in[n - 2]);
            return in[k];
        };
        for (std::size_t i = 0; i < out.size(); ++i) {
            double x = source_coordinate(i, in.size(), out.size());
            auto base = static_cast<std::ptrdiff_t>(std::floor(x));
            double acc = 0.0;
            for (std::ptrdiff_t k = base - 1; k <= base + 2; ++k)
                acc += sample(k) * cubic_weight(x - static_cast<double>(k));
            out[i] = acc;
        }
    }
};

} // namespace detail

/// Separable bilinear resize, half-pixel centers, edge samples replicated
/// (the convention of common deep-learning resizers).
inline RealImage bilinear_resize(const RealImage& img, std::size_t out_h, std::size_t out_w)
{
    if (img.height() < 1 || img.width() < 1)
        throw DimensionError("bilinear_resize: empty input");
    if (out_h < 2 || out_w < 2)
        throw DimensionError("bilinear_resize: output must be at least 2x2");
    if (img.height() == out_h && img.width() == out_w)
        return img;
    RealImage tmp = detail::resample_rows(img, out_w, detail::BilinearLine{});
    return transpose(detail::resample_rows(transpose(tmp), out_h, detail::BilinearLine{}));
}

/// Separable Catmull-Rom cubic resize.
inline RealImage cubic_spline_resize(const RealImage& img, std::size_t out_h, std::size_t out_w)
{
    if (img.height() < 4 || img.width() < 4)
        throw DimensionError("cubic_spline_resize: input must be at least 4x4");
    if (out_h < 1 || out_w < 1)
        throw DimensionError("cubic_spline_resize: empty output");
    RealImage tmp = detail::resample_rows(img, out_w, detail::CubicLine{});
    return transpose(detail::resample_rows(transpose(tmp), out_h, detail::CubicLine{}));
}

/// First row/column of the centered window of size `out` inside `in`.
inline std::size_t crop_origin(std::size_t in, std::size_t out)
{
    return in / 2 - out / 2;
}

/// Keeps the out_h x out_w window around the DC index; DC lands on
/// (out_h/2, out_w/2).
inline ComplexImage center_crop_kspace(const ComplexImage& ksp, std::size_t out_h, std::size_t out_w)
{
    if (out_h > ksp.height() || out_w > ksp.width())
        throw DimensionError("center_crop_kspace: output " + std::to_string(out_h) + "x" +
                             std::to_string(out_w) + " larger than input " +
                             std::to_string(ksp.height()) + "x" + std::to_string(ksp.width()));
    const std::size_t r0 = crop_origin(ksp.height(), out_h);
    const std::size_t c0 = crop_origin(ksp.width(), out_w);
    ComplexImage out(out_h, out_w);
    for (std::size_t r = 0; r < out_h; ++r)
        for (std::size_t c = 0; c < out_w; ++c)
            out(r, c) = ksp(r0 + r, c0 + c);
    return out;
}

/// Adjoint of center_crop_kspace: embeds `ksp` in a zero grid.
inline ComplexImage zero_pad_kspace(const ComplexImage& ksp, std::size_t out_h, std::size_t out_w)
{
    if (out_h < ksp.height() || out_w < ksp.width())
        throw DimensionError("zero_pad_kspace: output smaller than input");
    const std::size_t r0 = crop_origin(out_h, ksp.height());
    const std::size_t c0 = crop_origin(out_w, ksp.width());
    ComplexImage out(out_h, out_w);
    for (std::size_t r = 0; r < ksp.height(); ++r)
        for (std::size_t c = 0; c < ksp.width(); ++c)
            out(r0 + r, c0 + c) = ksp(r, c);
    return out;
}

inline RealImage magnitude(const ComplexImage& img)
{
    RealImage out(img.height(), img.width());
    std::transform(img.begin(), img.end(), out.begin(), [](const Complex& v) { return std::abs(v); });
    return out;
}

template <class T>
struct Normalized {
    ComplexImage x;
    std::vector<Image<T>> companions;
    double scale = 1.0; ///< the divisor max|x|
};

/// Divides `x` and every companion by max|x|.
template <class T = double>
Normalized<T> normalize_by_max_abs(ComplexImage x, std::vector<Image<T>> companions = {})
{
    const double m = max_abs(x);
    if (!(m > 0.0))
        throw DegenerateError("normalize_by_max_abs: input is all zero");
    const double inv = 1.0 / m;
    for (auto& v : x)
        v *= inv;
    for (auto& img : companions)
        for (auto& v : img)
            v *= inv;
    return {std::move(x), std::move(companions), m};
}

} // namespace gibbsim
