#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "gibbsim/core/image.hpp"

namespace gibbsim {

namespace detail {

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)))
    {
        if (!ptr)
            throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* ptr;
};

// The FFTW planner is not reentrant; execution with fftw_execute_dft is.
// Plans are made with FFTW_ESTIMATE so the chosen algorithm (and therefore
// every output bit) depends only on the size and buffer alignment.
class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t h, std::size_t w, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(h, w, sign);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        FftwBuffer in(h * w), out(h * w);
        fftw_plan p = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), in.ptr, out.ptr,
                                       sign, FFTW_ESTIMATE);
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache()
    {
        for (auto& [key, p] : plans_)
            fftw_destroy_plan(p);
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

// Shift by floor(n/2): ifftshift on the way in, fftshift on the way out, so
// that index floor(n/2) is the origin in both domains.
inline ComplexImage centered_transform(const ComplexImage& img, int sign)
{
    const std::size_t h = img.height(), w = img.width();
    ComplexImage out(h, w);
    if (img.empty())
        return out;
    const std::size_t ch = h / 2, cw = w / 2;
    FftwBuffer in(h * w), res(h * w);
    for (std::size_t r = 0; r < h; ++r) {
        const std::size_t rr = (r + h - ch) % h;
        for (std::size_t c = 0; c < w; ++c) {
            const std::size_t cc = (c + w - cw) % w;
            const Complex v = img(r, c);
            in.ptr[rr * w + cc][0] = v.real();
            in.ptr[rr * w + cc][1] = v.imag();
        }
    }
    fftw_execute_dft(PlanCache::instance().get(h, w, sign), in.ptr, res.ptr);
    for (std::size_t r = 0; r < h; ++r) {
        const std::size_t rr = (r + ch) % h;
        for (std::size_t c = 0; c < w; ++c) {
            const std::size_t cc = (c + cw) % w;
            out(rr, cc) = Complex(res.ptr[r * w + c][0], res.ptr[r * w + c][1]);
        }
    }
    return out;
}

} // namespace detail

/// Unnormalized forward 2D DFT, origin at (floor(H/2), floor(W/2)) in both
/// the image and frequency grids.
inline ComplexImage dft2_centered(const ComplexImage& img)
{
    return detail::centered_transform(img, FFTW_FORWARD);
}

inline ComplexImage dft2_centered(const RealImage& img)
{
    return dft2_centered(to_complex(img));
}

/// Inverse of dft2_centered, including the 1/(H*W) factor.
inline ComplexImage idft2_centered(const ComplexImage& ksp)
{
    ComplexImage out = detail::centered_transform(ksp, FFTW_BACKWARD);
    if (out.empty())
        return out;
    const double norm = 1.0 / static_cast<double>(out.size());
    for (auto& v : out)
        v *= norm;
    return out;
}

} // namespace gibbsim
