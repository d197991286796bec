#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "gibbsim/core/error.hpp"

namespace gibbsim {

/// Full width at half of the global extremum (by magnitude), in units of
/// `spacing`. Each half-level crossing is located by linear interpolation
/// between the bracketing samples nearest the peak.
inline double fwhm(std::span<const double> lsf, double spacing = 1.0)
{
    if (lsf.size() < 3)
        throw ArgumentError("fwhm: need at least 3 samples");
    std::size_t peak = 0;
    for (std::size_t i = 1; i < lsf.size(); ++i)
        if (std::abs(lsf[i]) > std::abs(lsf[peak]))
            peak = i;
    const double sign = lsf[peak] < 0.0 ? -1.0 : 1.0;
    const double top = sign * lsf[peak];
    if (!(top > 0.0))
        throw UnboundedFwhm("fwhm: signal is identically zero");
    const double half = 0.5 * top;
    auto v = [&](std::size_t i) { return sign * lsf[i]; };

    std::size_t l = peak;
    while (l > 0 && v(l - 1) >= half)
        --l;
    if (l == 0)
        throw UnboundedFwhm("fwhm: no half-maximum crossing left of the peak");
    std::size_t r = peak;
    while (r + 1 < lsf.size() && v(r + 1) >= half)
        ++r;
    if (r + 1 == lsf.size())
        throw UnboundedFwhm("fwhm: no half-maximum crossing right of the peak");

    // Crossings between (l-1, l) and (r, r+1).
    const double left = static_cast<double>(l - 1) + (half - v(l - 1)) / (v(l) - v(l - 1));
    const double right = static_cast<double>(r) + (v(r) - half) / (v(r) - v(r + 1));
    return (right - left) * spacing;
}

} // namespace gibbsim
