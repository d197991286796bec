#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <variant>

#include "gibbsim/core/fft.hpp"
#include "gibbsim/core/image.hpp"
#include "gibbsim/core/ops.hpp"
#include "gibbsim/pf_fraction.hpp"
#include "gibbsim/pf_recon.hpp"
#include "gibbsim/phase_field.hpp"
#include "gibbsim/random.hpp"

namespace gibbsim {

struct SimConfig {
    std::size_t hi_res = 256;
    std::size_t lo_res = 100;
    PfFraction pf_fraction = kFullySampled;
    /// k-space noise ratio r: complex noise std = r * mean|K|, log2(r) uniform.
    double noise_min = 1.0;
    double noise_max = 32.0;
    /// When set, replaces the ratio draw: complex noise std in the low
    /// resolution image domain, in pre-normalization intensity units.
    std::optional<double> image_noise_sigma;
    PhaseModelParams phase_params;
    double ellipsoid_skip_prob = 0.1;
    double flip_prob = 0.5;
    double transpose_prob = 0.5;
    bool magnitude_mode = false;
    bool concat_pf_recon = true;
    std::size_t pf_ramp = 4;

    void validate() const
    {
        if (hi_res < 4 || lo_res < 4)
            throw ArgumentError("SimConfig: resolutions must be at least 4");
        if (lo_res > hi_res)
            throw ArgumentError("SimConfig: lo_res exceeds hi_res");
        pf_fraction.validate();
        if (!(noise_min > 0.0) || !(noise_min <= noise_max))
            throw ArgumentError("SimConfig: noise range must satisfy 0 < low <= high");
        if (image_noise_sigma && !(*image_noise_sigma >= 0.0))
            throw ArgumentError("SimConfig: image noise sigma must be nonnegative");
        for (double p : {ellipsoid_skip_prob, flip_prob, transpose_prob})
            if (!(p >= 0.0 && p <= 1.0))
                throw ArgumentError("SimConfig: probability outside [0, 1]");
        phase_params.validate();
    }

    PfReconConfig pf_recon() const
    {
        PfReconConfig c;
        c.fraction = pf_fraction;
        c.transition_width = pf_ramp;
        return c;
    }
};

struct SampleMeta {
    Seed seed;
    PfFraction pf_fraction = kFullySampled;
    double noise_ratio = 0.0;
    /// The divisor applied by normalization (max of the raw input).
    double norm_scale = 1.0;
    bool flipped = false;
    bool transposed = false;
    bool no_phase = false;
    bool no_ellipsoid = false;
    bool magnitude = false;

    friend bool operator==(const SampleMeta&, const SampleMeta&) = default;
};

struct SamplePair {
    /// ComplexImage in complex mode, RealImage (magnitude) in magnitude mode.
    std::variant<ComplexImage, RealImage> input;
    /// Homodyne reconstruction of the normalized input (complex mode only).
    std::optional<RealImage> companion;
    RealImage target;
    SampleMeta meta;

    bool is_complex() const { return std::holds_alternative<ComplexImage>(input); }
    const ComplexImage& complex_input() const { return std::get<ComplexImage>(input); }
    const RealImage& magnitude_input() const { return std::get<RealImage>(input); }

    friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

// ---------------------------------------------------------------------------
// Individual pipeline stages

template <class T>
struct FlipTranspose {
    Image<T> image;
    bool flipped = false;
    bool transposed = false;
};

/// Horizontal flip then transpose, each an independent coin (flip drawn first).
template <class T>
FlipTranspose<T> random_flip_transpose(Image<T> img, Rng& rng, double flip_prob = 0.5,
                                       double transpose_prob = 0.5)
{
    FlipTranspose<T> out;
    out.flipped = rng.bernoulli(flip_prob);
    out.transposed = rng.bernoulli(transpose_prob);
    if (out.transposed && img.height() != img.width())
        throw DimensionError("random_flip_transpose: transpose of a non-square image");
    if (out.flipped)
        img = flip_horizontal(img);
    if (out.transposed)
        img = transpose(img);
    out.image = std::move(img);
    return out;
}

struct EllipseGeometry {
    double center_row = 0.0;
    double center_col = 0.0;
    double semi_axis_a = 1.0; ///< along the rotated row direction
    double semi_axis_b = 1.0;
    double angle = 0.0;       ///< radians
};

inline bool ellipse_contains(const EllipseGeometry& e, double row, double col)
{
    const double dr = row - e.center_row, dc = col - e.center_col;
    const double cs = std::cos(e.angle), sn = std::sin(e.angle);
    const double u = cs * dr + sn * dc;
    const double v = -sn * dr + cs * dc;
    return (u * u) / (e.semi_axis_a * e.semi_axis_a) + (v * v) / (e.semi_axis_b * e.semi_axis_b) <= 1.0;
}

/// Zeroes every pixel whose center lies outside the ellipse.
template <class T>
Image<T> apply_ellipse_mask(Image<T> img, const EllipseGeometry& e)
{
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c)
            if (!ellipse_contains(e, static_cast<double>(r), static_cast<double>(c)))
                img(r, c) = T{};
    return img;
}

/// Center uniform in the central half, semi-axes uniform in [N/4, N/2] of
/// their own dimension, orientation uniform in [0, pi). Draw order: coin,
/// center row, center col, axis a, axis b, angle.
inline EllipseGeometry draw_ellipse(std::size_t height, std::size_t width, Rng& rng)
{
    const double h = static_cast<double>(height), w = static_cast<double>(width);
    EllipseGeometry e;
    e.center_row = rng.uniform(0.25 * h, 0.75 * h);
    e.center_col = rng.uniform(0.25 * w, 0.75 * w);
    e.semi_axis_a = rng.uniform(0.25 * h, 0.5 * h);
    e.semi_axis_b = rng.uniform(0.25 * w, 0.5 * w);
    e.angle = rng.uniform(0.0, std::numbers::pi);
    return e;
}

template <class T>
struct EllipseCrop {
    Image<T> image;
    bool skipped = false;
    std::optional<EllipseGeometry> geometry;
};

template <class T>
EllipseCrop<T> random_ellipsoid_crop(Image<T> img, Rng& rng, double skip_prob = 0.1)
{
    EllipseCrop<T> out;
    out.skipped = rng.bernoulli(skip_prob);
    if (!out.skipped) {
        out.geometry = draw_ellipse(img.height(), img.width(), rng);
        img = apply_ellipse_mask(std::move(img), *out.geometry);
    }
    out.image = std::move(img);
    return out;
}

inline double mean_abs(const ComplexImage& img)
{
    double s = 0.0;
    for (const auto& v : img)
        s += std::abs(v);
    return img.empty() ? 0.0 : s / static_cast<double>(img.size());
}

/// Adds circular complex Gaussian noise, `sigma` per component, row-major.
inline ComplexImage add_complex_noise(ComplexImage img, double sigma, Rng& rng)
{
    for (auto& v : img) {
        const double re = rng.normal(0.0, sigma);
        const double im = rng.normal(0.0, sigma);
        v += Complex(re, im);
    }
    return img;
}

struct NoisyKspace {
    ComplexImage ksp;
    double ratio = 0.0;
};

/// Draws r = 2^u, u ~ U[log2 low, log2 high], then adds noise whose complex
/// magnitude std is r * mean|K| (sigma = r * mean|K| / sqrt 2 per component).
inline NoisyKspace add_kspace_noise(ComplexImage ksp, double low, double high, Rng& rng)
{
    if (!(low > 0.0) || !(low <= high))
        throw ArgumentError("add_kspace_noise: need 0 < low <= high");
    const double scale = mean_abs(ksp);
    if (!(scale > 0.0))
        throw DegenerateError("add_kspace_noise: k-space is all zero");
    const double u = rng.uniform(std::log2(low), std::log2(high));
    const double ratio = low == high ? low : std::exp2(u);
    const double sigma = ratio * scale / std::numbers::sqrt2;
    return {add_complex_noise(std::move(ksp), sigma, rng), ratio};
}

/// Keeps the last round(f*H) rows (which contain the DC row), zeroes the rest.
inline ComplexImage pf_mask(ComplexImage ksp, PfFraction fraction)
{
    fraction.validate();
    const std::size_t first = ksp.height() - fraction.kept_lines(ksp.height());
    for (std::size_t r = 0; r < first; ++r)
        for (auto& v : ksp.row(r))
            v = Complex{};
    return ksp;
}

/// Crops k-space to the low-resolution window and rescales so that image
/// intensities survive the change of transform length.
inline ComplexImage truncate_kspace(const ComplexImage& ksp, std::size_t out_h, std::size_t out_w)
{
    const double gain = static_cast<double>(out_h * out_w) / static_cast<double>(ksp.size());
    return scaled(center_crop_kspace(ksp, out_h, out_w), gain);
}

// ---------------------------------------------------------------------------
// Full pipeline

namespace detail {

inline RealImage nonnegative(RealImage img)
{
    for (auto& v : img)
        v = std::max(v, 0.0);
    return img;
}

} // namespace detail

/// Runs the simulation from a grayscale source. Random draws happen in a
/// fixed order from a single stream seeded by `seed`: flip, transpose,
/// no-phase coin, phase model, ellipsoid coin, ellipse geometry, noise
/// exponent, noise samples (row-major, real then imaginary).
inline SamplePair simulate_pair(const RealImage& gray, const SimConfig& cfg, Seed seed)
{
    cfg.validate();
    Rng rng(seed);
    SamplePair pair;
    pair.meta.seed = seed;
    pair.meta.pf_fraction = cfg.pf_fraction;
    pair.meta.magnitude = cfg.magnitude_mode;

    RealImage hi = bilinear_resize(gray, cfg.hi_res, cfg.hi_res);
    auto ft = random_flip_transpose(std::move(hi), rng, cfg.flip_prob, cfg.transpose_prob);
    pair.meta.flipped = ft.flipped;
    pair.meta.transposed = ft.transposed;

    const PhaseDraw phase_draw = draw_phase_model(cfg.phase_params, cfg.hi_res, cfg.hi_res, rng);
    pair.meta.no_phase = phase_draw.no_phase;
    ComplexImage object = apply_phase(ft.image, render_phase(phase_draw, cfg.hi_res, cfg.hi_res));

    auto crop = random_ellipsoid_crop(std::move(object), rng, cfg.ellipsoid_skip_prob);
    pair.meta.no_ellipsoid = crop.skipped;
    const ComplexImage& truth = crop.image;

    // Data branch: truncation, noise, partial Fourier.
    ComplexImage ksp = truncate_kspace(dft2_centered(truth), cfg.lo_res, cfg.lo_res);
    if (cfg.image_noise_sigma) {
        // Image-domain complex std s needs k-space complex std s * sqrt(H*W).
        const double sigma_k = *cfg.image_noise_sigma * std::sqrt(static_cast<double>(ksp.size()));
        const double scale = mean_abs(ksp);
        pair.meta.noise_ratio = scale > 0.0 ? sigma_k / scale : 0.0;
        if (sigma_k > 0.0)
            ksp = add_complex_noise(std::move(ksp), sigma_k / std::numbers::sqrt2, rng);
    } else {
        auto noisy = add_kspace_noise(std::move(ksp), cfg.noise_min, cfg.noise_max, rng);
        ksp = std::move(noisy.ksp);
        pair.meta.noise_ratio = noisy.ratio;
    }
    const ComplexImage masked = pf_mask(std::move(ksp), cfg.pf_fraction);
    ComplexImage x = idft2_centered(masked);

    if (cfg.magnitude_mode) {
        RealImage xm = magnitude(x);
        const double peak = max_abs(xm);
        if (!(peak > 0.0))
            throw DegenerateError("simulate_pair: simulated input is all zero");
        const double inv = 1.0 / peak;
        pair.meta.norm_scale = peak;
        pair.input = scaled(std::move(xm), inv);
        pair.target = detail::nonnegative(
            cubic_spline_resize(magnitude(scaled(truth, inv)), cfg.lo_res, cfg.lo_res));
        return pair;
    }

    auto norm = normalize_by_max_abs<Complex>(std::move(x), {truth, masked});
    pair.meta.norm_scale = norm.scale;
    if (cfg.concat_pf_recon)
        pair.companion = margosian_recon(norm.companions[1], cfg.pf_recon());
    pair.target = detail::nonnegative(
        cubic_spline_resize(magnitude(norm.companions[0]), cfg.lo_res, cfg.lo_res));
    pair.input = std::move(norm.x);
    return pair;
}

inline SamplePair simulate_pair(const RgbImage& photo, const SimConfig& cfg, Seed seed)
{
    return simulate_pair(grayscale_bt601(photo), cfg, seed);
}

} // namespace gibbsim
