#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "gibbsim/core/error.hpp"
#include "gibbsim/core/image.hpp"

namespace gibbsim {

// Byte layout (all integers little-endian):
//   0  magic "GBS1"
//   4  ndim        u32
//   8  dtype       u8   (0 real float32, 1 interleaved complex float32)
//   9  reserved    7 zero bytes
//  16  dims        ndim x u32
//   .  payload_len u64  (bytes)
//   .  payload     float32 LE, row-major
// A stream is a u64 LE count followed by that many tensors.

enum class DType : std::uint8_t { Real32 = 0, Complex32 = 1 };

struct Tensor {
    DType dtype = DType::Real32;
    std::vector<std::uint32_t> dims;
    std::vector<float> data; ///< complex values interleaved (re, im)

    std::size_t element_count() const
    {
        std::size_t n = 1;
        for (auto d : dims)
            n *= d;
        return n;
    }
    std::size_t scalars_per_element() const { return dtype == DType::Complex32 ? 2 : 1; }
    std::size_t payload_bytes() const { return element_count() * scalars_per_element() * 4; }

    bool operator==(const Tensor& other) const
    {
        return dtype == other.dtype && dims == other.dims && data.size() == other.data.size() &&
               std::memcmp(data.data(), other.data.data(), data.size() * sizeof(float)) == 0;
    }
};

inline constexpr std::size_t kTensorHeaderBytes = 16;
inline constexpr char kTensorMagic[4] = {'G', 'B', 'S', '1'};

inline Tensor to_tensor(const RealImage& img)
{
    Tensor t;
    t.dtype = DType::Real32;
    t.dims = {static_cast<std::uint32_t>(img.height()), static_cast<std::uint32_t>(img.width())};
    t.data.reserve(img.size());
    for (double v : img)
        t.data.push_back(static_cast<float>(v));
    return t;
}

inline Tensor to_tensor(const ComplexImage& img)
{
    Tensor t;
    t.dtype = DType::Complex32;
    t.dims = {static_cast<std::uint32_t>(img.height()), static_cast<std::uint32_t>(img.width())};
    t.data.reserve(2 * img.size());
    for (const auto& v : img) {
        t.data.push_back(static_cast<float>(v.real()));
        t.data.push_back(static_cast<float>(v.imag()));
    }
    return t;
}

/// Complex [channels, H, W] from equally sized complex planes.
inline Tensor stack_channels(std::span<const ComplexImage> planes)
{
    if (planes.empty())
        throw ArgumentError("stack_channels: no planes");
    Tensor t;
    t.dtype = DType::Complex32;
    t.dims = {static_cast<std::uint32_t>(planes.size()), static_cast<std::uint32_t>(planes[0].height()),
              static_cast<std::uint32_t>(planes[0].width())};
    for (const auto& p : planes) {
        require_same_shape(p, planes[0], "stack_channels");
        for (const auto& v : p) {
            t.data.push_back(static_cast<float>(v.real()));
            t.data.push_back(static_cast<float>(v.imag()));
        }
    }
    return t;
}

namespace detail {

inline void require_plane(const Tensor& t, std::size_t channel, const char* what)
{
    if (t.dims.size() == 2 && channel == 0)
        return;
    if (t.dims.size() == 3 && channel < t.dims[0])
        return;
    throw FormatError(std::string(what) + ": dims do not hold channel " + std::to_string(channel));
}

inline std::size_t plane_height(const Tensor& t) { return t.dims[t.dims.size() - 2]; }
inline std::size_t plane_width(const Tensor& t) { return t.dims[t.dims.size() - 1]; }

} // namespace detail

/// Channel `channel` of a real [H,W] or [C,H,W] tensor.
inline RealImage to_real_image(const Tensor& t, std::size_t channel = 0)
{
    if (t.dtype != DType::Real32)
        throw FormatError("to_real_image: dtype is complex");
    detail::require_plane(t, channel, "to_real_image");
    const std::size_t h = detail::plane_height(t), w = detail::plane_width(t);
    RealImage img(h, w);
    const float* src = t.data.data() + channel * h * w;
    for (std::size_t i = 0; i < h * w; ++i)
        img.storage()[i] = src[i];
    return img;
}

/// Channel `channel` of a complex [H,W] or [C,H,W] tensor.
inline ComplexImage to_complex_image(const Tensor& t, std::size_t channel = 0)
{
    if (t.dtype != DType::Complex32)
        throw FormatError("to_complex_image: dtype is real");
    detail::require_plane(t, channel, "to_complex_image");
    const std::size_t h = detail::plane_height(t), w = detail::plane_width(t);
    ComplexImage img(h, w);
    const float* src = t.data.data() + 2 * channel * h * w;
    for (std::size_t i = 0; i < h * w; ++i)
        img.storage()[i] = Complex(src[2 * i], src[2 * i + 1]);
    return img;
}

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int b = 0; b < 4; ++b)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int b = 0; b < 8; ++b)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline std::uint32_t get_u32(const std::uint8_t* p)
{
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b)
        v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return v;
}

inline std::uint64_t get_u64(const std::uint8_t* p)
{
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b)
        v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return v;
}

} // namespace detail

inline void encode_tensor(const Tensor& t, std::vector<std::uint8_t>& out)
{
    if (t.data.size() != t.element_count() * t.scalars_per_element())
        throw FormatError("encode_tensor: payload size does not match dims");
    out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
    detail::put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    out.push_back(static_cast<std::uint8_t>(t.dtype));
    out.insert(out.end(), 7, 0);
    for (auto d : t.dims)
        detail::put_u32(out, d);
    detail::put_u64(out, t.payload_bytes());
    for (float f : t.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::put_u32(out, bits);
    }
}

inline std::vector<std::uint8_t> encode_tensor(const Tensor& t)
{
    std::vector<std::uint8_t> out;
    out.reserve(kTensorHeaderBytes + 4 * t.dims.size() + 8 + t.payload_bytes());
    encode_tensor(t, out);
    return out;
}

/// Decodes one tensor starting at `pos`, advancing it past the payload.
inline Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::size_t& pos)
{
    auto need = [&](std::size_t n, const char* field) {
        if (bytes.size() - pos < n)
            throw FormatError(std::string("tensor file truncated in field '") + field + "' at byte " +
                              std::to_string(pos));
    };
    need(4, "magic");
    if (std::memcmp(bytes.data() + pos, kTensorMagic, 4) != 0)
        throw FormatError("tensor file: bad field 'magic' at byte " + std::to_string(pos));
    pos += 4;
    need(4, "ndim");
    const std::uint32_t ndim = detail::get_u32(bytes.data() + pos);
    if (ndim < 1 || ndim > 8)
        throw FormatError("tensor file: bad field 'ndim' (" + std::to_string(ndim) + ")");
    pos += 4;
    need(1, "dtype");
    const std::uint8_t code = bytes[pos];
    if (code > 1)
        throw FormatError("tensor file: bad field 'dtype' (" + std::to_string(code) + ")");
    pos += 1;
    need(7, "reserved");
    for (std::size_t i = 0; i < 7; ++i)
        if (bytes[pos + i] != 0)
            throw FormatError("tensor file: bad field 'reserved' (nonzero byte)");
    pos += 7;
    Tensor t;
    t.dtype = static_cast<DType>(code);
    need(4 * static_cast<std::size_t>(ndim), "dims");
    for (std::uint32_t i = 0; i < ndim; ++i, pos += 4)
        t.dims.push_back(detail::get_u32(bytes.data() + pos));
    need(8, "payload_length");
    const std::uint64_t declared = detail::get_u64(bytes.data() + pos);
    pos += 8;
    if (declared != t.payload_bytes())
        throw FormatError("tensor file: field 'payload_length' is " + std::to_string(declared) +
                          ", dims require " + std::to_string(t.payload_bytes()));
    need(declared, "payload");
    t.data.resize(declared / 4);
    for (std::size_t i = 0; i < t.data.size(); ++i, pos += 4) {
        const std::uint32_t bits = detail::get_u32(bytes.data() + pos);
        std::memcpy(&t.data[i], &bits, 4);
    }
    return t;
}

/// Decodes exactly one tensor; trailing bytes are an error.
inline Tensor decode_tensor(std::span<const std::uint8_t> bytes)
{
    std::size_t pos = 0;
    Tensor t = decode_tensor(bytes, pos);
    if (pos != bytes.size())
        throw FormatError("tensor file: " + std::to_string(bytes.size() - pos) + " trailing bytes after 'payload'");
    return t;
}

inline std::vector<std::uint8_t> encode_tensor_stream(std::span<const Tensor> tensors)
{
    std::vector<std::uint8_t> out;
    detail::put_u64(out, tensors.size());
    for (const auto& t : tensors)
        encode_tensor(t, out);
    return out;
}

inline std::vector<Tensor> decode_tensor_stream(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 8)
        throw FormatError("tensor stream truncated in field 'count'");
    const std::uint64_t count = detail::get_u64(bytes.data());
    std::size_t pos = 8;
    std::vector<Tensor> out;
    for (std::uint64_t i = 0; i < count; ++i) {
        try {
            out.push_back(decode_tensor(bytes, pos));
        } catch (const FormatError& e) {
            throw FormatError("tensor stream item " + std::to_string(i) + ": " + e.what());
        }
    }
    if (pos != bytes.size())
        throw FormatError("tensor stream: " + std::to_string(bytes.size() - pos) + " trailing bytes");
    return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to `path` + ".tmp" and renames into place.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_tensor_file(const std::filesystem::path& path, const Tensor& t)
{
    write_file_atomic(path, encode_tensor(t));
}

inline Tensor read_tensor_file(const std::filesystem::path& path)
{
    const auto bytes = read_file_bytes(path);
    try {
        return decode_tensor(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace gibbsim
