#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "gibbsim/core/image.hpp"
#include "gibbsim/random.hpp"

namespace gibbsim {

/// Distribution parameters of the random Gaussian-RBF phase model.
/// Widths are in pixels^2, amplitudes in degrees.
struct PhaseModelParams {
    double lambda_S = 12.0;
    double lambda_B = 15.0;
    double mu_z = 64.0;
    double sigma_z = 100.0;
    double mu_a = 0.0;
    double sigma_a = 5.0;
    double p_no_phase = 0.01;
    /// Per-dimension (row, col) bounds for basis centers; unset means the
    /// image support [0, N-1].
    std::optional<std::array<double, 2>> r_min;
    std::optional<std::array<double, 2>> r_max;
    /// Folded width draws below this are raised to it.
    double z_floor = 1.0;

    void validate() const
    {
        if (!(lambda_S > 0.0) || !(lambda_B > 0.0))
            throw ArgumentError("PhaseModelParams: Poisson means must be positive");
        if (sigma_z < 0.0 || sigma_a < 0.0)
            throw ArgumentError("PhaseModelParams: negative standard deviation");
        if (!(p_no_phase >= 0.0 && p_no_phase <= 1.0))
            throw ArgumentError("PhaseModelParams: p_no_phase outside [0, 1]");
        if (r_min && r_max && ((*r_min)[0] > (*r_max)[0] || (*r_min)[1] > (*r_max)[1]))
            throw ArgumentError("PhaseModelParams: r_min exceeds r_max");
        if (!(z_floor > 0.0))
            throw ArgumentError("PhaseModelParams: z_floor must be positive");
    }
};

struct PhaseBasis {
    double amplitude = 0.0; ///< radians
    double row = 0.0;
    double col = 0.0;
};

struct PhaseSubset {
    double width = 1.0; ///< z_s, pixels^2
    std::vector<PhaseBasis> bases;
};

/// One realization of the model's random variables, before rendering.
struct PhaseDraw {
    bool no_phase = false;
    std::vector<PhaseSubset> subsets;

    std::size_t basis_count() const
    {
        std::size_t n = 0;
        for (const auto& s : subsets)
            n += s.bases.size();
        return n;
    }
};

struct PhaseField {
    RealImage angles; ///< radians

    ComplexImage as_complex() const
    {
        ComplexImage out(angles.height(), angles.width());
        for (std::size_t i = 0; i < out.size(); ++i)
            out.storage()[i] = std::polar(1.0, angles.storage()[i]);
        return out;
    }

    bool is_zero() const
    {
        return std::all_of(angles.begin(), angles.end(), [](double v) { return v == 0.0; });
    }
};

/// Draw order: no-phase coin; S; then for each subset B_s, z_s, and for each
/// basis amplitude, center row, center column.
inline PhaseDraw draw_phase_model(const PhaseModelParams& params, std::size_t height,
                                  std::size_t width, Rng& rng)
{
    params.validate();
    if (height < 1 || width < 1)
        throw DimensionError("draw_phase_model: empty grid");
    PhaseDraw draw;
    draw.no_phase = rng.bernoulli(params.p_no_phase);
    if (draw.no_phase)
        return draw;

    const std::array<double, 2> lo = params.r_min.value_or(std::array<double, 2>{0.0, 0.0});
    const std::array<double, 2> hi = params.r_max.value_or(
        std::array<double, 2>{static_cast<double>(height - 1), static_cast<double>(width - 1)});
    constexpr double deg = std::numbers::pi / 180.0;

    const auto subsets = rng.poisson(params.lambda_S);
    draw.subsets.resize(subsets);
    for (auto& subset : draw.subsets) {
        const auto bases = rng.poisson(params.lambda_B);
        subset.width = std::max(std::abs(rng.normal(params.mu_z, params.sigma_z)), params.z_floor);
        subset.bases.resize(bases);
        for (auto& b : subset.bases) {
            b.amplitude = rng.normal(params.mu_a, params.sigma_a) * deg;
            b.row = rng.uniform(lo[0], hi[0]);
            b.col = rng.uniform(lo[1], hi[1]);
        }
    }
    return draw;
}

/// angles(r) = sum_s sum_b a_bs exp(-|r - r0_bs|^2 / z_s), evaluated separably.
inline PhaseField render_phase(const PhaseDraw& draw, std::size_t height, std::size_t width)
{
    PhaseField field{RealImage(height, width, 0.0)};
    if (draw.no_phase)
        return field;
    std::vector<double> gr(height), gc(width);
    for (const auto& subset : draw.subsets) {
        for (const auto& b : subset.bases) {
            for (std::size_t r = 0; r < height; ++r) {
                const double d = static_cast<double>(r) - b.row;
                gr[r] = b.amplitude * std::exp(-d * d / subset.width);
            }
            for (std::size_t c = 0; c < width; ++c) {
                const double d = static_cast<double>(c) - b.col;
                gc[c] = std::exp(-d * d / subset.width);
            }
            for (std::size_t r = 0; r < height; ++r) {
                auto row = field.angles.row(r);
                for (std::size_t c = 0; c < width; ++c)
                    row[c] += gr[r] * gc[c];
            }
        }
    }
    return field;
}

inline PhaseField sample_phase(const PhaseModelParams& params, std::size_t height,
                               std::size_t width, Rng& rng)
{
    return render_phase(draw_phase_model(params, height, width, rng), height, width);
}

inline PhaseField sample_phase(const PhaseModelParams& params, std::size_t height,
                               std::size_t width, Seed seed)
{
    Rng rng(seed);
    return sample_phase(params, height, width, rng);
}

/// img * exp(i * angles), pointwise.
inline ComplexImage apply_phase(const RealImage& img, const PhaseField& phase)
{
    require_same_shape(img, phase.angles, "apply_phase");
    ComplexImage out(img.height(), img.width());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = img.storage()[i], a = phase.angles.storage()[i];
        out.storage()[i] = Complex(v * std::cos(a), v * std::sin(a));
    }
    return out;
}

} // namespace gibbsim
