#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gibbsim/acquisition.hpp"
#include "gibbsim/core/fft.hpp"
#include "gibbsim/core/image.hpp"
#include "gibbsim/core/ops.hpp"
#include "gibbsim/core/parallel.hpp"
#include "gibbsim/metrics/fwhm.hpp"
#include "gibbsim/metrics/logistic_fit.hpp"
#include "gibbsim/processor.hpp"
#include "gibbsim/random.hpp"

namespace gibbsim {

struct EdgePhantomSpec {
    std::size_t matrix = 1024;
    double angle = 0.0; ///< degrees from the vertical edge orientation
    double contrast = 1.0;
    double snr_or_cnr = std::numeric_limits<double>::infinity();

    void validate() const
    {
        if (matrix < 4)
            throw ArgumentError("EdgePhantomSpec: matrix must be at least 4");
        if (!(angle >= 0.0 && angle <= 45.0))
            throw ArgumentError("EdgePhantomSpec: angle must lie in [0, 45] degrees");
        if (!(contrast >= 0.0) || !std::isfinite(contrast))
            throw ArgumentError("EdgePhantomSpec: contrast must be finite and nonnegative");
        if (!(snr_or_cnr > 0.0))
            throw ArgumentError("EdgePhantomSpec: snr/cnr must be positive");
    }
};

/// Signed distance to a line through the image centre, in pixels of the grid
/// it was built for. Positive on the bright side.
struct EdgeLine {
    double center_row = 0.0;
    double center_col = 0.0;
    double angle = 0.0; ///< radians

    double distance(double row, double col) const
    {
        return (col - center_col) * std::cos(angle) - (row - center_row) * std::sin(angle);
    }
};

/// Bright where (j + 0.5 - M/2) cos a - (i + 0.5 - M/2) sin a > 0.
inline RealImage make_edge_phantom(const EdgePhantomSpec& spec)
{
    spec.validate();
    const double half = 0.5 * static_cast<double>(spec.matrix);
    const EdgeLine line{half - 0.5, half - 0.5, spec.angle * std::numbers::pi / 180.0};
    RealImage img(spec.matrix, spec.matrix, 0.0);
    for (std::size_t i = 0; i < spec.matrix; ++i)
        for (std::size_t j = 0; j < spec.matrix; ++j)
            if (line.distance(static_cast<double>(i), static_cast<double>(j)) > 0.0)
                img(i, j) = spec.contrast;
    return img;
}

/// The phantom edge expressed on the lo-res reconstruction grid: bilinear
/// resize maps index x to (x + 0.5) hi / M - 0.5, and the k-space crop keeps
/// the grid centre hi/2 on lo/2 with spacing hi/lo.
inline EdgeLine lowres_edge_line(std::size_t matrix, std::size_t hi_res, std::size_t lo_res, double angle_deg)
{
    auto to_lo = [&](double x_m) {
        const double x_hi = (x_m + 0.5) * static_cast<double>(hi_res) / static_cast<double>(matrix) - 0.5;
        return static_cast<double>(lo_res / 2) +
               (x_hi - static_cast<double>(hi_res / 2)) * static_cast<double>(lo_res) / static_cast<double>(hi_res);
    };
    const double c = to_lo(0.5 * static_cast<double>(matrix) - 0.5);
    return {c, c, angle_deg * std::numbers::pi / 180.0};
}

/// Pipeline settings for phantom experiments: no flip or transpose, no
/// phase, no ellipsoid crop, noise set directly in the image domain.
inline SimConfig phantom_config(SimConfig cfg, double image_noise_sigma)
{
    cfg.flip_prob = 0.0;
    cfg.transpose_prob = 0.0;
    cfg.phase_params.p_no_phase = 1.0;
    cfg.ellipsoid_skip_prob = 1.0;
    cfg.image_noise_sigma = image_noise_sigma;
    return cfg;
}

/// Largest |output - ideal step| over pixels with 1 <= |d| <= band from the
/// edge and at least `border` pixels from the image boundary, divided by the
/// step height. A zero step reports the absolute residual.
inline double ripple_metric(const RealImage& output, double step, const EdgeLine& line,
                            double band = 10.0, double core = 1.0, std::size_t border = 10)
{
    double worst = 0.0;
    for (std::size_t i = border; i + border < output.height(); ++i) {
        for (std::size_t j = border; j + border < output.width(); ++j) {
            const double d = line.distance(static_cast<double>(i), static_cast<double>(j));
            if (std::abs(d) < core || std::abs(d) > band)
                continue;
            const double ideal = d > 0.0 ? step : 0.0;
            worst = std::max(worst, std::abs(output(i, j) - ideal));
        }
    }
    return step > 0.0 ? worst / step : worst;
}

/// Peak of the band-limited (trigonometrically interpolated) row-averaged
/// profile on the bright side of a vertical edge, as a fraction of `step`
/// above it. Searches 0 < d <= width/4 past the edge column.
inline double edge_overshoot(const ComplexImage& lowres, double step, double edge_col, std::size_t oversample = 64)
{
    if (!(step > 0.0))
        throw ArgumentError("edge_overshoot: step must be positive");
    if (oversample < 1)
        throw ArgumentError("edge_overshoot: oversample must be at least 1");
    const std::size_t w = lowres.width();
    ComplexImage profile(1, w);
    for (std::size_t i = 0; i < lowres.height(); ++i)
        for (std::size_t j = 0; j < w; ++j)
            profile(0, j) += lowres(i, j);
    for (auto& v : profile)
        v /= static_cast<double>(lowres.height());
    const ComplexImage dense =
        idft2_centered(zero_pad_kspace(dft2_centered(profile), 1, w * oversample));
    // Dense sample k sits at lo-res position (k - c_dense) / os + c_lo.
    const double c_lo = static_cast<double>(w / 2);
    const double c_dense = static_cast<double>((w * oversample) / 2);
    const double os = static_cast<double>(oversample);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dense.width(); ++k) {
        const double x = (static_cast<double>(k) - c_dense) / os + c_lo;
        const double d = x - edge_col;
        if (d > 0.0 && d <= static_cast<double>(w) / 4.0)
            peak = std::max(peak, dense(0, k).real() * os);
    }
    return peak / step - 1.0;
}

/// FWHM of every row of `img` via the logistic-sum fit; rows without a
/// bounded half maximum are reported as NaN.
inline std::vector<double> row_fwhms(const RealImage& img, const LogisticFitOptions& opt = {})
{
    std::vector<double> out(img.height());
    const auto grid = sample_grid(0.0, static_cast<double>(img.width() - 1), 0.01);
    for (std::size_t r = 0; r < img.height(); ++r) {
        const auto row = img.row(r);
        const LogisticFit fit = fit_logistic_sum(std::span<const double>(row.data(), row.size()), opt);
        try {
            out[r] = fwhm(lsf_from_fit(fit.params, grid), 0.01);
        } catch (const UnboundedFwhm&) {
            out[r] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

struct SweepOptions {
    std::size_t matrix = 1024;
    double contrast = 1.0;
    std::size_t threads = default_thread_count();
};

struct CnrRow {
    double cnr = 0.0;
    double mean_fwhm = 0.0;
    double std_fwhm = 0.0;
    std::size_t rows_fitted = 0;
    std::size_t rows_unbounded = 0;
    std::vector<double> repeat_mean_fwhm; ///< per repeat, in repeat order
};

struct CnrSweep {
    std::vector<CnrRow> rows;
    RealImage composite; ///< first-repeat outputs side by side, one per CNR
};

namespace detail {

inline std::vector<RealImage> run_checked(const Processor& processor, std::span<const SamplePair> batch,
                                          const std::string& what)
{
    std::vector<RealImage> out;
    try {
        out = processor(batch);
    } catch (const std::exception& e) {
        throw ProcessorError(what + ": " + e.what());
    }
    if (out.size() != batch.size())
        throw ProcessorError(what + ": processor returned " + std::to_string(out.size()) + " outputs for " +
                             std::to_string(batch.size()) + " inputs");
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!out[i].same_shape(batch[i].target))
            throw ProcessorError(what + ": output " + std::to_string(i) + " has shape " +
                                 std::to_string(out[i].height()) + "x" + std::to_string(out[i].width()));
    return out;
}

} // namespace detail

/// Seeds: repeat k of CNR index c uses derive_seed(derive_seed(seed, c), k).
inline CnrSweep run_cnr_sweep(const Processor& processor, std::span<const double> cnr_values, std::size_t repeats,
                              const SimConfig& cfg, Seed seed, const SweepOptions& opt = {})
{
    if (repeats < 1)
        throw ArgumentError("run_cnr_sweep: repeats must be positive");
    for (double c : cnr_values)
        if (!(c > 0.0))
            throw ArgumentError("run_cnr_sweep: CNR values must be positive");
    if (!(opt.contrast > 0.0))
        throw ArgumentError("run_cnr_sweep: contrast must be positive");
    const RealImage phantom = make_edge_phantom({opt.matrix, 0.0, opt.contrast});
    CnrSweep sweep;
    sweep.composite = RealImage(cfg.lo_res, cfg.lo_res * cnr_values.size(), 0.0);

    for (std::size_t ci = 0; ci < cnr_values.size(); ++ci) {
        const double cnr = cnr_values[ci];
        const double sigma = std::isinf(cnr) ? 0.0 : opt.contrast / cnr;
        const SimConfig pc = phantom_config(cfg, sigma);
        const Seed level_seed = derive_seed(seed, ci);
        std::vector<SamplePair> batch(repeats);
        parallel_for(repeats, opt.threads,
                     [&](std::size_t k) { batch[k] = simulate_pair(phantom, pc, derive_seed(level_seed, k)); });
        const std::vector<RealImage> outputs = detail::run_checked(
            processor, batch,
            "cnr " + std::to_string(cnr) + " (index " + std::to_string(ci) + ", seed " +
                std::to_string(seed.value) + ")");

        std::vector<std::vector<double>> widths(repeats);
        parallel_for(repeats, opt.threads, [&](std::size_t k) { widths[k] = row_fwhms(outputs[k]); });

        CnrRow row;
        row.cnr = cnr;
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& rep : widths) {
            double rep_sum = 0.0;
            std::size_t rep_n = 0;
            for (double w : rep) {
                if (std::isnan(w)) {
                    ++row.rows_unbounded;
                    continue;
                }
                rep_sum += w;
                ++rep_n;
                sum += w;
                sum_sq += w * w;
            }
            row.rows_fitted += rep_n;
            row.repeat_mean_fwhm.push_back(rep_n ? rep_sum / static_cast<double>(rep_n)
                                                 : std::numeric_limits<double>::quiet_NaN());
        }
        const double n = static_cast<double>(row.rows_fitted);
        row.mean_fwhm = n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
        row.std_fwhm = n > 1 ? std::sqrt(std::max(sum_sq - n * row.mean_fwhm * row.mean_fwhm, 0.0) / (n - 1)) : 0.0;
        sweep.rows.push_back(std::move(row));

        for (std::size_t i = 0; i < cfg.lo_res; ++i)
            for (std::size_t j = 0; j < cfg.lo_res; ++j)
                sweep.composite(i, ci * cfg.lo_res + j) = outputs[0](i, j);
    }
    return sweep;
}

struct AngleResult {
    double angle = 0.0;
    RealImage output;
    double ripple = 0.0;
};

/// Noise per angle: complex std = mean|phantom| / snr. Angle k uses
/// derive_seed(seed, k).
inline std::vector<AngleResult> run_angle_sweep(const Processor& processor, std::span<const double> angles, double snr,
                                                const SimConfig& cfg, Seed seed, const SweepOptions& opt = {})
{
    if (!(snr > 0.0))
        throw ArgumentError("run_angle_sweep: snr must be positive");
    if (!(opt.contrast > 0.0))
        throw ArgumentError("run_angle_sweep: contrast must be positive");
    for (double a : angles)
        if (!(a >= 0.0 && a <= 45.0))
            throw ArgumentError("run_angle_sweep: angles must lie in [0, 45] degrees");
    std::vector<SamplePair> batch(angles.size());
    parallel_for(angles.size(), opt.threads, [&](std::size_t k) {
        const RealImage phantom = make_edge_phantom({opt.matrix, angles[k], opt.contrast});
        const double sigma = std::isinf(snr) ? 0.0 : mean(phantom) / snr;
        batch[k] = simulate_pair(phantom, phantom_config(cfg, sigma), derive_seed(seed, k));
    });
    std::vector<RealImage> outputs =
        detail::run_checked(processor, batch, "angle sweep (seed " + std::to_string(seed.value) + ")");
    std::vector<AngleResult> results;
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const EdgeLine line = lowres_edge_line(opt.matrix, cfg.hi_res, cfg.lo_res, angles[k]);
        const double step = opt.contrast / batch[k].meta.norm_scale;
        const double r = ripple_metric(outputs[k], step, line);
        results.push_back({angles[k], std::move(outputs[k]), r});
    }
    return results;
}

} // namespace gibbsim
