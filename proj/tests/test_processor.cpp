#include <gtest/gtest.h>

#include <fstream>

#include "fs_util.hpp"
#include "gibbsim/gibbsim.hpp"
#include "oracles.hpp"

using namespace gibbsim;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GIBBSIM_CLI_PATH;

std::vector<Tensor> real_inputs(std::size_t n, std::size_t h, std::size_t w)
{
    std::vector<Tensor> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(to_tensor(oracle::random_real(h, w, static_cast<unsigned>(i + 1))));
    return out;
}

/// Shell snippet that bumps a counter file on every invocation.
std::string counting(const fs::path& counter)
{
    const std::string f = counter.string();
    return "c=$(cat '" + f + "' 2>/dev/null || echo 0); echo $((c+1)) > '" + f + "'; ";
}

int read_count(const fs::path& counter)
{
    std::ifstream in(counter);
    int c = 0;
    in >> c;
    return c;
}

std::string error_of(const std::string& cmd, std::span<const Tensor> in, const ProcessorOptions& opt = {})
{
    try {
        run_processor(cmd, in, opt);
    } catch (const ProcessorError& e) {
        return e.what();
    }
    return "";
}

SimConfig small_config(bool magnitude, bool companion)
{
    SimConfig cfg;
    cfg.hi_res = 64;
    cfg.lo_res = 32;
    cfg.pf_fraction = PfFraction{5, 8};
    cfg.magnitude_mode = magnitude;
    cfg.concat_pf_recon = companion;
    return cfg;
}

} // namespace

TEST(RunProcessor, CatIsBitwiseIdentity)
{
    const auto in = real_inputs(5, 7, 9);
    const auto out = run_processor("cat", in);
    ASSERT_EQ(out.size(), in.size());
    for (std::size_t i = 0; i < in.size(); ++i)
        EXPECT_TRUE(out[i] == in[i]);
}

TEST(RunProcessor, WrongDimsIsShapeErrorAtBatchZero)
{
    const fs::path dir = testfs::fresh_dir("proc_dims");
    const fs::path stream = dir / "wrong.gbs";
    const auto wrong = real_inputs(2, 3, 4);
    const auto bytes = encode_tensor_stream(wrong);
    write_file_atomic(stream, bytes);
    const auto in = real_inputs(2, 7, 9);
    const std::string msg = error_of("cat > /dev/null; cat '" + stream.string() + "'", in);
    EXPECT_NE(msg.find("processor batch index 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("shape error"), std::string::npos) << msg;
}

TEST(RunProcessor, ComplexOutputIsShapeError)
{
    const std::vector<Tensor> in = {to_tensor(oracle::random_complex(4, 4, 3))};
    const std::string msg = error_of("cat", in);
    EXPECT_NE(msg.find("processor batch index 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("shape error"), std::string::npos) << msg;
}

TEST(RunProcessor, NonzeroExitNamesStatus)
{
    const auto in = real_inputs(1, 4, 4);
    const std::string msg = error_of("cat > /dev/null; exit 3", in);
    EXPECT_NE(msg.find("processor batch index 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("exit status 3"), std::string::npos) << msg;
}

TEST(RunProcessor, TruncatedStreamIsError)
{
    const auto in = real_inputs(3, 8, 8);
    const std::string msg = error_of("head -c 100", in);
    EXPECT_NE(msg.find("processor batch index 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("malformed output stream"), std::string::npos) << msg;
}

TEST(RunProcessor, CountMismatchIsError)
{
    const fs::path dir = testfs::fresh_dir("proc_count");
    const fs::path stream = dir / "one.gbs";
    const auto one = real_inputs(1, 4, 4);
    write_file_atomic(stream, encode_tensor_stream(one));
    const auto in = real_inputs(2, 4, 4);
    const std::string msg = error_of("cat > /dev/null; cat '" + stream.string() + "'", in);
    EXPECT_NE(msg.find("expected 2 outputs, got 1"), std::string::npos) << msg;
}

TEST(RunProcessor, EmptyInputSpawnsNothing)
{
    const fs::path dir = testfs::fresh_dir("proc_empty");
    const fs::path counter = dir / "count";
    const auto out = run_processor(counting(counter) + "cat", std::span<const Tensor>{});
    EXPECT_TRUE(out.empty());
    EXPECT_FALSE(fs::exists(counter));
}

TEST(RunProcessor, BatchesOfSixtyFour)
{
    const fs::path dir = testfs::fresh_dir("proc_batches");
    const fs::path counter = dir / "count";
    const auto in = real_inputs(130, 3, 3);
    const auto out = run_processor(counting(counter) + "cat", in);
    ASSERT_EQ(out.size(), 130u);
    EXPECT_EQ(read_count(counter), 3);
    for (std::size_t i = 0; i < in.size(); ++i)
        EXPECT_TRUE(out[i] == in[i]);
}

TEST(RunProcessor, FailureNamesLaterBatch)
{
    const fs::path dir = testfs::fresh_dir("proc_later");
    const fs::path counter = dir / "count";
    const auto in = real_inputs(130, 3, 3);
    const std::string cmd = counting(counter) + "if [ \"$c\" -ge 2 ]; then cat > /dev/null; exit 1; fi; cat";
    const std::string msg = error_of(cmd, in);
    EXPECT_NE(msg.find("processor batch index 2"), std::string::npos) << msg;

    ProcessorOptions opt;
    for (const auto& t : in)
        opt.expected_dims.push_back(t.dims);
    opt.expected_dims[100] = {3, 4};
    const std::string dims_msg = error_of("cat", in, opt);
    EXPECT_NE(dims_msg.find("processor batch index 1"), std::string::npos) << dims_msg;
    EXPECT_NE(dims_msg.find("output 36"), std::string::npos) << dims_msg;
}

TEST(RunProcessor, CommandIgnoringInputIsReported)
{
    const auto in = real_inputs(64, 64, 64);
    const std::string msg = error_of("true", in);
    EXPECT_NE(msg.find("processor batch index 0"), std::string::npos) << msg;
}

TEST(RunProcessor, RejectsBadOptions)
{
    const auto in = real_inputs(2, 3, 3);
    ProcessorOptions opt;
    opt.batch_size = 0;
    EXPECT_THROW(run_processor("cat", in, opt), ArgumentError);
    opt.batch_size = 4;
    opt.expected_dims = {{3, 3}};
    EXPECT_THROW(run_processor("cat", in, opt), ArgumentError);
}

TEST(ProcessorInput, ComplexWithCompanionIsTwoChannels)
{
    const SamplePair pair = simulate_pair(oracle::random_real(90, 90, 4), small_config(false, true), Seed{3});
    const Tensor t = processor_input(pair);
    EXPECT_EQ(t.dtype, DType::Complex32);
    EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{2, 32, 32}));
    const ComplexImage ch0 = to_complex_image(t, 0);
    const ComplexImage ch1 = to_complex_image(t, 1);
    const auto f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };
    for (std::size_t i = 0; i < ch0.size(); ++i) {
        const Complex x = pair.complex_input().storage()[i];
        EXPECT_EQ(ch0.storage()[i].real(), f32(x.real()));
        EXPECT_EQ(ch0.storage()[i].imag(), f32(x.imag()));
        EXPECT_EQ(ch1.storage()[i].real(), f32(pair.companion->storage()[i]));
        EXPECT_EQ(ch1.storage()[i].imag(), 0.0);
    }
}

TEST(ProcessorInput, OtherLayouts)
{
    const SamplePair plain = simulate_pair(oracle::random_real(90, 90, 4), small_config(false, false), Seed{3});
    const Tensor t = processor_input(plain);
    EXPECT_EQ(t.dtype, DType::Complex32);
    EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{32, 32}));

    const SamplePair mag = simulate_pair(oracle::random_real(90, 90, 4), small_config(true, false), Seed{3});
    const Tensor m = processor_input(mag);
    EXPECT_EQ(m.dtype, DType::Real32);
    EXPECT_EQ(m.dims, (std::vector<std::uint32_t>{32, 32}));
}

TEST(Passthrough, ModulusOfChannelZero)
{
    const ComplexImage a = oracle::random_complex(3, 5, 8);
    const ComplexImage planes[2] = {a, oracle::random_complex(3, 5, 9)};
    const Tensor out = passthrough_tensor(stack_channels(planes));
    EXPECT_EQ(out.dtype, DType::Real32);
    EXPECT_EQ(out.dims, (std::vector<std::uint32_t>{3, 5}));
    const ComplexImage a32 = to_complex_image(to_tensor(a));
    const RealImage got = to_real_image(out);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(got.storage()[i], static_cast<double>(static_cast<float>(std::abs(a32.storage()[i]))));

    RealImage r(2, 2, -1.5);
    EXPECT_EQ(to_real_image(passthrough_tensor(to_tensor(r))), RealImage(2, 2, 1.5));

    Tensor bad = to_tensor(r);
    bad.dims = {4};
    EXPECT_THROW(passthrough_tensor(bad), FormatError);
}

TEST(Passthrough, CliMatchesInProcessIdentity)
{
    for (bool magnitude : {false, true}) {
        std::vector<SamplePair> pairs;
        for (std::uint64_t s = 0; s < 5; ++s)
            pairs.push_back(round_to_storage(
                simulate_pair(oracle::random_real(90, 90, static_cast<unsigned>(s)), small_config(magnitude, true), Seed{s})));
        const auto streamed = subprocess_processor(kCli + " passthrough", 2)(pairs);
        const auto direct = identity_processor()(pairs);
        ASSERT_EQ(streamed.size(), direct.size());
        for (std::size_t i = 0; i < direct.size(); ++i) {
            ASSERT_EQ(streamed[i].height(), direct[i].height());
            for (std::size_t k = 0; k < direct[i].size(); ++k)
                EXPECT_NEAR(streamed[i].storage()[k], direct[i].storage()[k],
                            1e-6 * std::max(1.0, std::abs(direct[i].storage()[k])));
        }
    }
}

TEST(Passthrough, MalformedStreamExitsNonzero)
{
    const fs::path dir = testfs::fresh_dir("proc_malformed");
    const fs::path junk = dir / "junk";
    std::ofstream(junk) << "not a tensor stream";
    const std::string cmd = kCli + " passthrough < '" + junk.string() + "' > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 1);
}

TEST(Passthrough, ShapeMismatchThroughSubprocessProcessor)
{
    std::vector<SamplePair> pairs = {simulate_pair(oracle::random_real(90, 90, 1), small_config(false, true), Seed{1})};
    const fs::path dir = testfs::fresh_dir("proc_sub_dims");
    const fs::path stream = dir / "wrong.gbs";
    write_file_atomic(stream, encode_tensor_stream(real_inputs(1, 31, 32)));
    try {
        subprocess_processor("cat > /dev/null; cat '" + stream.string() + "'")(pairs);
        FAIL() << "expected a processor error";
    } catch (const ProcessorError& e) {
        EXPECT_NE(std::string(e.what()).find("processor batch index 0"), std::string::npos);
    }
}
