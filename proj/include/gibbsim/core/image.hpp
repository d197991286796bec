#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gibbsim/core/error.hpp"

namespace gibbsim {

using Complex = std::complex<double>;

/// Row-major 2D grid. Rows index the partial Fourier (phase-encode) axis.
template <class T>
class Image {
public:
    using value_type = T;

    Image() = default;

    Image(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), data_(height * width, fill)
    {
    }

    Image(std::size_t height, std::size_t width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data))
    {
        if (data_.size() != height_ * width_) {
            throw DimensionError("image data length " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(height_) + "x" +
                                 std::to_string(width_));
        }
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * width_, width_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * width_, width_}; }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool same_shape(const auto& other) const noexcept
    {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> data_;
};

using RealImage = Image<double>;
using ComplexImage = Image<Complex>;

/// Three equally sized channels with values in [0, 1].
struct RgbImage {
    RealImage r, g, b;

    std::size_t height() const noexcept { return r.height(); }
    std::size_t width() const noexcept { return r.width(); }
};

template <class T>
void require_same_shape(const Image<T>& a, const auto& b, const char* what)
{
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) +
                             "x" + std::to_string(a.width()) + " vs " +
                             std::to_string(b.height()) + "x" + std::to_string(b.width()));
    }
}

inline bool all_finite(const RealImage& img)
{
    return std::all_of(img.begin(), img.end(), [](double v) { return std::isfinite(v); });
}

inline bool all_finite(const ComplexImage& img)
{
    return std::all_of(img.begin(), img.end(), [](const Complex& v) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
}

inline ComplexImage to_complex(const RealImage& img)
{
    ComplexImage out(img.height(), img.width());
    std::transform(img.begin(), img.end(), out.begin(), [](double v) { return Complex(v, 0.0); });
    return out;
}

inline RealImage real_part(const ComplexImage& img)
{
    RealImage out(img.height(), img.width());
    std::transform(img.begin(), img.end(), out.begin(), [](const Complex& v) { return v.real(); });
    return out;
}

inline RealImage imag_part(const ComplexImage& img)
{
    RealImage out(img.height(), img.width());
    std::transform(img.begin(), img.end(), out.begin(), [](const Complex& v) { return v.imag(); });
    return out;
}

template <class T>
Image<T> transpose(const Image<T>& img)
{
    Image<T> out(img.width(), img.height());
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c)
            out(c, r) = img(r, c);
    return out;
}

template <class T>
Image<T> flip_horizontal(const Image<T>& img)
{
    Image<T> out(img.height(), img.width());
    for (std::size_t r = 0; r < img.height(); ++r) {
        auto src = img.row(r);
        std::reverse_copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

template <class T>
Image<T> scaled(Image<T> img, double factor)
{
    for (auto& v : img)
        v *= factor;
    return img;
}

template <class T>
double max_abs(const Image<T>& img)
{
    double m = 0.0;
    for (const auto& v : img)
        m = std::max(m, static_cast<double>(std::abs(v)));
    return m;
}

template <class T>
double sum_squared_abs(const Image<T>& img)
{
    double s = 0.0;
    for (const auto& v : img)
        s += std::norm(v);
    return s;
}

inline double mean(const RealImage& img)
{
    double s = 0.0;
    for (double v : img)
        s += v;
    return img.empty() ? 0.0 : s / static_cast<double>(img.size());
}

} // namespace gibbsim
