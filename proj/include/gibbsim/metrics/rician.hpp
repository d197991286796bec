#pragma once

#include <cmath>
#include <numbers>
#include <span>

#include "gibbsim/core/image.hpp"

namespace gibbsim {

/// Second-moment Rician bias correction: sqrt(max(m^2 - 2 sigma^2, 0)).
inline RealImage rician_correct(RealImage mag, double sigma)
{
    if (sigma < 0.0)
        throw ArgumentError("rician_correct: sigma must be nonnegative");
    const double two_var = 2.0 * sigma * sigma;
    for (auto& m : mag)
        m = std::sqrt(std::max(m * m - two_var, 0.0));
    return mag;
}

/// Per-component noise sigma from signal-free magnitude samples, which are
/// Rayleigh distributed with std sigma * sqrt((4 - pi) / 2).
inline double sigma_from_background(std::span<const double> background)
{
    if (background.size() < 2)
        throw ArgumentError("sigma_from_background: need at least 2 samples");
    double mean = 0.0;
    for (double v : background)
        mean += v;
    mean /= static_cast<double>(background.size());
    double var = 0.0;
    for (double v : background)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(background.size() - 1);
    return std::sqrt(var) * std::sqrt(2.0 / (4.0 - std::numbers::pi));
}

} // namespace gibbsim
