#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "gibbsim/acquisition.hpp"
#include "gibbsim/core/image.hpp"
#include "gibbsim/core/ops.hpp"

namespace gibbsim {

/// Maps a batch of simulated inputs to one real lo-res image each.
using Processor = std::function<std::vector<RealImage>(std::span<const SamplePair>)>;

/// Modulus of the network input; the reference "no processing" baseline.
inline RealImage input_magnitude(const SamplePair& pair)
{
    if (const auto* c = std::get_if<ComplexImage>(&pair.input))
        return magnitude(*c);
    RealImage m = std::get<RealImage>(pair.input);
    for (auto& v : m)
        v = std::abs(v);
    return m;
}

inline Processor identity_processor()
{
    return [](std::span<const SamplePair> batch) {
        std::vector<RealImage> out;
        out.reserve(batch.size());
        for (const auto& p : batch)
            out.push_back(input_magnitude(p));
        return out;
    };
}

} // namespace gibbsim
