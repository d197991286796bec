#include <gtest/gtest.h>

#include <filesystem>

#include "gibbsim/gibbsim.hpp"
#include "oracles.hpp"

using namespace gibbsim;
namespace fs = std::filesystem;

namespace {

const fs::path kData = GIBBSIM_TEST_DATA;

Tensor real_fixture()
{
    return {DType::Real32, {2, 3}, {0.0f, 1.0f, -2.5f, 0.125f, 3.0e-3f, 1.0e6f}};
}

Tensor complex_fixture()
{
    return {DType::Complex32, {2, 2}, {1.0f, 0.0f, 0.0f, 1.0f, -0.5f, 0.25f, 2.0f, -4.0f}};
}

Tensor channel_fixture()
{
    return {DType::Complex32, {2, 1, 2}, {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 0.0f, 6.0f, 0.0f}};
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("gibbsim_tensor_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string error_of(std::span<const std::uint8_t> bytes)
{
    try {
        decode_tensor(bytes);
    } catch (const FormatError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(TensorFile, GoldenFilesDecode)
{
    EXPECT_EQ(read_tensor_file(kData / "real_2x3.gbs"), real_fixture());
    EXPECT_EQ(read_tensor_file(kData / "complex_2x2.gbs"), complex_fixture());
    const auto stream = decode_tensor_stream(read_file_bytes(kData / "stream_3.gbs"));
    ASSERT_EQ(stream.size(), 3u);
    EXPECT_EQ(stream[0], real_fixture());
    EXPECT_EQ(stream[1], complex_fixture());
    EXPECT_EQ(stream[2], channel_fixture());
}

TEST(TensorFile, EncodingMatchesGoldenBytes)
{
    EXPECT_EQ(encode_tensor(real_fixture()), read_file_bytes(kData / "real_2x3.gbs"));
    EXPECT_EQ(encode_tensor(complex_fixture()), read_file_bytes(kData / "complex_2x2.gbs"));
    const std::vector<Tensor> all{real_fixture(), complex_fixture(), channel_fixture()};
    EXPECT_EQ(encode_tensor_stream(all), read_file_bytes(kData / "stream_3.gbs"));
}

TEST(TensorFile, ImageConversions)
{
    const Tensor c = complex_fixture();
    const ComplexImage img = to_complex_image(c);
    EXPECT_EQ(img(0, 1), Complex(0.0, 1.0));
    EXPECT_EQ(img(1, 1), Complex(2.0, -4.0));
    EXPECT_EQ(to_tensor(img), c);
    const Tensor ch = channel_fixture();
    EXPECT_EQ(to_complex_image(ch, 1)(0, 1), Complex(6.0, 0.0));
    const ComplexImage planes[2] = {to_complex_image(ch, 0), to_complex_image(ch, 1)};
    EXPECT_EQ(stack_channels(planes), ch);
    EXPECT_EQ(to_real_image(real_fixture())(1, 2), 1.0e6);
    EXPECT_THROW(to_complex_image(ch, 2), FormatError);
}

TEST(TensorFile, RoundTripThroughDisk)
{
    const fs::path dir = scratch_dir("roundtrip");
    const RealImage r = oracle::random_real(7, 5, 1);
    const Tensor t = to_tensor(oracle::random_complex(9, 4, 2));
    write_tensor_file(dir / "a.gbs", to_tensor(r));
    write_tensor_file(dir / "b.gbs", t);
    EXPECT_EQ(read_tensor_file(dir / "b.gbs"), t);
    const RealImage back = to_real_image(read_tensor_file(dir / "a.gbs"));
    for (std::size_t i = 0; i < r.size(); ++i)
        EXPECT_EQ(back.storage()[i], static_cast<double>(static_cast<float>(r.storage()[i])));
    EXPECT_FALSE(fs::exists(dir / "a.gbs.tmp"));
}

TEST(TensorFile, ComplexHundredSquaredSize)
{
    const fs::path dir = scratch_dir("size");
    write_tensor_file(dir / "x.gbs", to_tensor(ComplexImage(100, 100)));
    EXPECT_EQ(fs::file_size(dir / "x.gbs"), 16u + 8u + 8u + 100u * 100u * 8u);
    EXPECT_EQ(fs::file_size(dir / "x.gbs"), 80032u);
}

TEST(TensorFile, TruncationByOneByte)
{
    auto bytes = read_file_bytes(kData / "complex_2x2.gbs");
    bytes.pop_back();
    EXPECT_NE(error_of(bytes).find("'payload'"), std::string::npos);
    bytes = read_file_bytes(kData / "complex_2x2.gbs");
    bytes.resize(20);
    EXPECT_NE(error_of(bytes).find("'dims'"), std::string::npos);
}

TEST(TensorFile, CorruptFieldsNamed)
{
    const auto good = read_file_bytes(kData / "real_2x3.gbs");
    auto bytes = good;
    bytes[0] = 'X';
    EXPECT_NE(error_of(bytes).find("'magic'"), std::string::npos);
    bytes = good;
    bytes[4] = 0;
    EXPECT_NE(error_of(bytes).find("'ndim'"), std::string::npos);
    bytes = good;
    bytes[8] = 7;
    EXPECT_NE(error_of(bytes).find("'dtype'"), std::string::npos);
    bytes = good;
    bytes[11] = 1;
    EXPECT_NE(error_of(bytes).find("'reserved'"), std::string::npos);
    bytes = good;
    bytes[16] = 3;
    EXPECT_NE(error_of(bytes).find("'payload_length'"), std::string::npos);
    bytes = good;
    bytes.push_back(0);
    EXPECT_NE(error_of(bytes).find("trailing"), std::string::npos);
    EXPECT_NE(error_of({}).find("'magic'"), std::string::npos);
}

TEST(TensorFile, StreamErrors)
{
    auto bytes = read_file_bytes(kData / "stream_3.gbs");
    bytes.resize(bytes.size() - 4);
    EXPECT_THROW(decode_tensor_stream(bytes), FormatError);
    EXPECT_THROW(decode_tensor_stream(std::vector<std::uint8_t>(3)), FormatError);
    EXPECT_TRUE(decode_tensor_stream(std::vector<std::uint8_t>(8, 0)).empty());
    EXPECT_THROW(encode_tensor(Tensor{DType::Real32, {2, 2}, {1.0f}}), FormatError);
}
