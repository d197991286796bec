#pragma once

#include <charconv>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>

#include "gibbsim/core/error.hpp"

namespace gibbsim {

/// Fraction of phase-encode lines acquired, kept as an exact rational so that
/// line counts are reproducible.
struct PfFraction {
    int num = 1;
    int den = 1;

    constexpr double value() const noexcept { return static_cast<double>(num) / den; }
    constexpr bool full() const noexcept { return num == den; }

    /// round(fraction * lines), halves rounded up.
    constexpr std::size_t kept_lines(std::size_t lines) const noexcept
    {
        const auto n = static_cast<std::size_t>(num), d = static_cast<std::size_t>(den);
        return (2 * n * lines + d) / (2 * d);
    }

    void validate() const
    {
        if (den <= 0 || num <= 0 || num > den)
            throw UnsupportedFraction("partial Fourier fraction must lie in (1/2, 1], got " + str());
        if (2 * num <= den)
            throw UnsupportedFraction("partial Fourier fraction " + str() +
                                      " does not cover the k-space center");
    }

    std::string str() const
    {
        if (num == den)
            return "1";
        const int g = std::gcd(num, den);
        return std::to_string(num / g) + "/" + std::to_string(den / g);
    }

    static PfFraction parse(std::string_view text)
    {
        auto to_int = [&](std::string_view part) {
            int v = 0;
            auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
            if (ec != std::errc() || ptr != part.data() + part.size())
                throw ArgumentError("cannot parse partial Fourier fraction '" + std::string(text) + "'");
            return v;
        };
        PfFraction f;
        if (auto slash = text.find('/'); slash == std::string_view::npos) {
            f.num = to_int(text);
            f.den = 1;
        } else {
            f.num = to_int(text.substr(0, slash));
            f.den = to_int(text.substr(slash + 1));
        }
        if (f.den > 0 && f.num > 0) {
            const int g = std::gcd(f.num, f.den);
            f.num /= g;
            f.den /= g;
        }
        f.validate();
        return f;
    }

    friend bool operator==(const PfFraction& a, const PfFraction& b)
    {
        return static_cast<long long>(a.num) * b.den == static_cast<long long>(b.num) * a.den;
    }
};

inline constexpr PfFraction kFullySampled{1, 1};

} // namespace gibbsim
