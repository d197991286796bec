#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gibbsim/core/fft.hpp"
#include "gibbsim/core/ops.hpp"
#include "gibbsim/core/image.hpp"
#include "gibbsim/pf_fraction.hpp"
#include "gibbsim/phase_field.hpp"

namespace gibbsim {

enum class ApodizationWindow {
    Triangle, ///< Bartlett; its kernel is nonnegative, so nonnegative objects get a zero phase estimate
    Hamming,
};

struct PfReconConfig {
    PfFraction fraction = kFullySampled;
    /// Lines of linear ramp at each edge of the symmetric band.
    std::size_t transition_width = 4;
    ApodizationWindow phase_window = ApodizationWindow::Triangle;
    bool clamp_negative = true;
};

/// Row geometry of a partial Fourier acquisition along the row axis: rows
/// [first_acquired, H) are sampled; rows center +- half_band are sampled on
/// both sides of DC.
struct PfGeometry {
    std::size_t lines = 0;
    std::size_t center = 0;
    std::size_t first_acquired = 0;
    std::size_t half_band = 0;

    static PfGeometry of(std::size_t lines, PfFraction fraction)
    {
        fraction.validate();
        PfGeometry g;
        g.lines = lines;
        g.center = lines / 2;
        g.first_acquired = lines - fraction.kept_lines(lines);
        if (g.first_acquired > g.center)
            throw UnsupportedFraction("partial Fourier fraction " + fraction.str() +
                                      " leaves no symmetric band for " + std::to_string(lines) +
                                      " lines");
        g.half_band = std::min(g.center - g.first_acquired, lines - 1 - g.center);
        return g;
    }

    bool in_band(std::size_t row) const
    {
        const auto d = static_cast<std::ptrdiff_t>(row) - static_cast<std::ptrdiff_t>(center);
        return std::abs(d) <= static_cast<std::ptrdiff_t>(half_band);
    }
};

namespace detail {

inline double window_value(ApodizationWindow window, std::ptrdiff_t offset, std::size_t half)
{
    const double t = static_cast<double>(offset) / static_cast<double>(half + 1);
    switch (window) {
    case ApodizationWindow::Hamming:
        return 0.54 + 0.46 * std::cos(std::numbers::pi * t);
    case ApodizationWindow::Triangle:
    default:
        return 1.0 - std::abs(t);
    }
}

// Symmetric taper over offsets -half..half around `center`, zero elsewhere.
inline std::vector<double> centered_window(ApodizationWindow window, std::size_t n,
                                           std::size_t center, std::size_t half)
{
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(center);
        if (std::abs(d) <= static_cast<std::ptrdiff_t>(half))
            w[i] = window_value(window, d, half);
    }
    return w;
}

} // namespace detail

/// Per-row homodyne weights: 0 on missing rows, 2 on rows acquired without
/// their conjugate partner, 1 inside the symmetric band with a linear ramp of
/// `transition_width` lines toward each band edge. w(d) + w(-d) = 2 for every
/// acquired row pair, and w(0) = 1.
inline std::vector<double> homodyne_weights(std::size_t lines, const PfReconConfig& cfg)
{
    std::vector<double> w(lines, 1.0);
    if (cfg.fraction.full())
        return w;
    const auto g = PfGeometry::of(lines, cfg.fraction);
    const auto band = static_cast<std::ptrdiff_t>(g.half_band);
    const auto ramp = static_cast<std::ptrdiff_t>(std::min(cfg.transition_width, g.half_band));
    for (std::size_t r = 0; r < lines; ++r) {
        const auto d = static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(g.center);
        if (r < g.first_acquired) {
            w[r] = 0.0;
        } else if (std::abs(d) <= band) {
            const double s = static_cast<double>(std::max<std::ptrdiff_t>(0, std::abs(d) - band + ramp)) /
                             static_cast<double>(ramp + 1);
            w[r] = d < 0 ? 1.0 - s : 1.0 + s;
        } else {
            w[r] = 2.0;
        }
    }
    return w;
}

/// Low-resolution image from the symmetric band, apodized along both axes.
inline ComplexImage lowres_symmetric_image(const ComplexImage& ksp_masked, const PfReconConfig& cfg)
{
    const std::size_t h = ksp_masked.height(), w = ksp_masked.width();
    const auto g = PfGeometry::of(h, cfg.fraction);
    const std::size_t cw = w / 2;
    const auto row_w = detail::centered_window(cfg.phase_window, h, g.center, g.half_band);
    const auto col_w = detail::centered_window(cfg.phase_window, w, cw, std::min(cw, w - 1 - cw));
    ComplexImage band(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            band(r, c) = ksp_masked(r, c) * (row_w[r] * col_w[c]);
    return idft2_centered(band);
}

/// Smooth phase from the symmetrically sampled part of k-space.
inline PhaseField estimate_lowres_phase(const ComplexImage& ksp_masked, const PfReconConfig& cfg)
{
    ComplexImage low = lowres_symmetric_image(ksp_masked, cfg);
    PhaseField field{RealImage(low.height(), low.width())};
    std::transform(low.begin(), low.end(), field.angles.begin(),
                   [](const Complex& v) { return std::arg(v); });
    return field;
}

/// Homodyne (Margosian) partial Fourier reconstruction along the row axis.
inline RealImage margosian_recon(const ComplexImage& ksp_masked, const PfReconConfig& cfg)
{
    const std::size_t h = ksp_masked.height(), w = ksp_masked.width();
    const auto weights = homodyne_weights(h, cfg);
    ComplexImage weighted(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            weighted(r, c) = ksp_masked(r, c) * weights[r];
    const ComplexImage img = idft2_centered(weighted);
    const ComplexImage low = lowres_symmetric_image(ksp_masked, cfg);

    RealImage out(h, w);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Complex ref = low.storage()[i];
        const double mag = std::abs(ref);
        // exp(-i*phase); an exactly zero estimate carries no phase information.
        const Complex demod = mag > 0.0 ? std::conj(ref) / mag : Complex(1.0, 0.0);
        double v = (img.storage()[i] * demod).real();
        if (cfg.clamp_negative)
            v = std::max(v, 0.0);
        out.storage()[i] = v;
    }
    return out;
}

/// Magnitude of the zero-filled inverse transform; the baseline homodyne improves on.
inline RealImage zero_filled_recon(const ComplexImage& ksp_masked)
{
    return magnitude(idft2_centered(ksp_masked));
}

} // namespace gibbsim
