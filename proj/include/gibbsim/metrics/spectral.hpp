#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gibbsim/core/fft.hpp"
#include "gibbsim/core/image.hpp"

namespace gibbsim {

/// Squared magnitude of the centered DFT.
inline RealImage psd(const RealImage& img)
{
    const ComplexImage spec = dft2_centered(img);
    RealImage out(img.height(), img.width());
    std::transform(spec.begin(), spec.end(), out.begin(), [](const Complex& v) { return std::norm(v); });
    return out;
}

struct SpectralResponse {
    RealImage grid;                           ///< mean of sqrt(S(output) / S(target)) per frequency
    std::vector<double> pf_direction_profile; ///< grid averaged over columns, one value per row frequency
    std::size_t n_averaged = 0;
};

/// Per pair h = sqrt((S(out) + eps) / (S(target) + eps)) with
/// eps = relative_epsilon * max S(target); averaged over pairs in list order.
inline SpectralResponse spectral_response(std::span<const RealImage> outputs,
                                          std::span<const RealImage> targets,
                                          double relative_epsilon = 1e-12)
{
    if (outputs.empty() || outputs.size() != targets.size())
        throw ArgumentError("spectral_response: need equal, nonzero numbers of outputs and targets");
    const std::size_t h = targets.front().height(), w = targets.front().width();
    SpectralResponse resp;
    resp.grid = RealImage(h, w, 0.0);
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        require_same_shape(outputs[t], targets[t], "spectral_response");
        require_same_shape(targets[t], targets.front(), "spectral_response");
        const RealImage so = psd(outputs[t]);
        const RealImage st = psd(targets[t]);
        const double eps = relative_epsilon * max_abs(st);
        for (std::size_t i = 0; i < resp.grid.size(); ++i)
            resp.grid.storage()[i] += std::sqrt((so.storage()[i] + eps) / (st.storage()[i] + eps));
    }
    const double inv = 1.0 / static_cast<double>(outputs.size());
    for (auto& v : resp.grid)
        v *= inv;
    resp.pf_direction_profile.resize(h);
    for (std::size_t r = 0; r < h; ++r) {
        double s = 0.0;
        for (double v : resp.grid.row(r))
            s += v;
        resp.pf_direction_profile[r] = s / static_cast<double>(w);
    }
    resp.n_averaged = outputs.size();
    return resp;
}

} // namespace gibbsim
