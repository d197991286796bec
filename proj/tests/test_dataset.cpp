#include <gtest/gtest.h>

#include <fstream>

#include "fs_util.hpp"
#include "gibbsim/gibbsim.hpp"
#include "oracles.hpp"

using namespace gibbsim;
namespace fs = std::filesystem;

namespace {

const fs::path kSources = fs::path(GIBBSIM_TEST_DATA) / "sources";

GenerateOptions quiet(std::size_t threads, std::vector<std::string>* log = nullptr)
{
    GenerateOptions opt;
    opt.threads = threads;
    opt.log = [log](const std::string& m) {
        if (log)
            log->push_back(m);
    };
    return opt;
}

SimConfig small_config()
{
    SimConfig cfg;
    cfg.hi_res = 64;
    cfg.lo_res = 32;
    cfg.pf_fraction = PfFraction{6, 8};
    return cfg;
}

} // namespace

TEST(Sample, RoundTripIsBitIdenticalAfterStorageRounding)
{
    const fs::path dir = testfs::fresh_dir("sample_rt");
    SimConfig cfg;
    cfg.pf_fraction = PfFraction{5, 8};
    const SamplePair pair = simulate_pair(oracle::random_real(120, 90, 1), cfg, Seed{11});
    const ManifestRecord rec = write_sample(pair, dir, 3, "x.png");
    EXPECT_EQ(rec.input, "samples/000003.input.gbs");
    ASSERT_TRUE(rec.companion.has_value());
    const SamplePair back = read_sample(dir, rec);
    EXPECT_TRUE(back == round_to_storage(pair));
    EXPECT_TRUE(fs::exists(dir / "samples/000003.meta.json"));
    EXPECT_EQ(fs::file_size(dir / rec.input), 80032u);

    cfg.magnitude_mode = true;
    const SamplePair mag = simulate_pair(oracle::random_real(120, 90, 1), cfg, Seed{12});
    const ManifestRecord mrec = write_sample(mag, dir, 4);
    EXPECT_FALSE(mrec.companion.has_value());
    EXPECT_TRUE(read_sample(dir, mrec) == round_to_storage(mag));
}

TEST(Sample, CorruptFilesReportField)
{
    const fs::path dir = testfs::fresh_dir("sample_corrupt");
    const SamplePair pair = simulate_pair(oracle::random_real(64, 64, 2), small_config(), Seed{1});
    const ManifestRecord rec = write_sample(pair, dir, 0);
    fs::resize_file(dir / rec.target, fs::file_size(dir / rec.target) - 1);
    try {
        read_sample(dir, rec);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("'payload'"), std::string::npos);
    }
    write_sample(pair, dir, 0);
    write_tensor_file(dir / rec.target, to_tensor(RealImage(5, 5)));
    EXPECT_THROW(read_sample(dir, rec), FormatError);
}

TEST(Manifest, TextRoundTrip)
{
    DatasetManifest m;
    m.config = small_config();
    m.config.phase_params.r_min = {{1.0, 2.0}};
    m.config.phase_params.r_max = {{30.0, 31.0}};
    m.config.image_noise_sigma = 0.25;
    m.global_seed = 987654321987654321ULL;
    ManifestRecord r;
    r.id = 0;
    r.source = "dir/a b.png";
    r.meta.seed = Seed{0xFFFFFFFFFFFFFFFFULL};
    r.meta.pf_fraction = PfFraction{7, 8};
    r.meta.noise_ratio = 3.141592653589793;
    r.meta.norm_scale = 1.0 / 3.0;
    r.meta.flipped = true;
    r.input = "samples/000000.input.gbs";
    r.target = "samples/000000.target.gbs";
    m.records.push_back(r);
    r.id = 1;
    r.companion = "samples/000001.companion.gbs";
    m.records.push_back(r);
    const DatasetManifest back = parse_manifest(manifest_text(m));
    EXPECT_EQ(back.global_seed, m.global_seed);
    EXPECT_EQ(back.records, m.records);
    EXPECT_EQ(manifest_text(back), manifest_text(m));
    EXPECT_EQ(back.config.phase_params.r_max, m.config.phase_params.r_max);
    EXPECT_EQ(back.config.image_noise_sigma, m.config.image_noise_sigma);
    EXPECT_THROW(parse_manifest("{\"format\":\"other\"}\n"), FormatError);
}

TEST(Generate, TenSamplesFromThreeSources)
{
    const fs::path out = testfs::fresh_dir("gen10");
    std::vector<std::string> log;
    const DatasetManifest m = generate_dataset(kSources, small_config(), 10, Seed{5}, out, quiet(2, &log));
    ASSERT_EQ(m.records.size(), 10u);
    const char* names[] = {"a_gradient.ppm", "b_checker.pgm", "c_disk.png"};
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(m.records[i].id, i);
        EXPECT_EQ(m.records[i].source, names[i % 3]);
        EXPECT_EQ(m.records[i].meta.seed, derive_seed(Seed{5}, i));
    }
    ASSERT_EQ(log.size(), 1u);
    EXPECT_NE(log[0].find("d_broken.jpg"), std::string::npos);
    const DatasetReport report = validate_dataset(out);
    EXPECT_TRUE(report.ok());
    EXPECT_EQ(report.samples, 10u);
    EXPECT_EQ(read_manifest(out).records, m.records);
    const SamplePair s = read_sample(out, m.records[7]);
    EXPECT_TRUE(s == round_to_storage(simulate_pair(
                         grayscale_bt601(decode_image(kSources / "b_checker.pgm")), small_config(), derive_seed(Seed{5}, 7))));
}

TEST(Generate, ByteIdenticalAcrossRunsAndThreadCounts)
{
    const fs::path a = testfs::fresh_dir("gen_a"), b = testfs::fresh_dir("gen_b"), c = testfs::fresh_dir("gen_c");
    generate_dataset(kSources, small_config(), 12, Seed{9}, a, quiet(1));
    generate_dataset(kSources, small_config(), 12, Seed{9}, b, quiet(1));
    generate_dataset(kSources, small_config(), 12, Seed{9}, c, quiet(4));
    EXPECT_EQ(testfs::listing(a), testfs::listing(c));
    EXPECT_EQ(testfs::directory_digest(a), testfs::directory_digest(b));
    EXPECT_EQ(testfs::directory_digest(a), testfs::directory_digest(c));
    const fs::path d = testfs::fresh_dir("gen_d");
    generate_dataset(kSources, small_config(), 12, Seed{10}, d, quiet(1));
    EXPECT_NE(testfs::directory_digest(a), testfs::directory_digest(d));
}

TEST(Generate, ResumeSkipsCompleteSamplesAndRedoesBrokenOnes)
{
    const fs::path out = testfs::fresh_dir("gen_resume");
    generate_dataset(kSources, small_config(), 6, Seed{3}, out, quiet(1));
    const auto digest = testfs::directory_digest(out);
    const auto stamp = fs::last_write_time(out / "samples/000002.input.gbs");

    fs::remove(out / "samples/000004.meta.json");
    fs::resize_file(out / "samples/000005.target.gbs", 10);
    generate_dataset(kSources, small_config(), 6, Seed{3}, out, quiet(1));
    EXPECT_EQ(fs::last_write_time(out / "samples/000002.input.gbs"), stamp);
    EXPECT_EQ(testfs::directory_digest(out), digest);
    EXPECT_TRUE(validate_dataset(out).ok());

    SimConfig other = small_config();
    other.pf_fraction = PfFraction{7, 8};
    const DatasetManifest m = generate_dataset(kSources, other, 6, Seed{3}, out, quiet(1));
    EXPECT_EQ(m.records[0].meta.pf_fraction, (PfFraction{7, 8}));
    EXPECT_TRUE(validate_dataset(out).ok());
}

TEST(Generate, Errors)
{
    const fs::path empty = testfs::fresh_dir("gen_empty_src");
    EXPECT_THROW(generate_dataset(empty, small_config(), 1, Seed{1}, testfs::fresh_dir("gen_empty_out"), quiet(1)),
                 ArgumentError);
    EXPECT_THROW(generate_dataset(kSources, small_config(), 0, Seed{1}, testfs::fresh_dir("gen_zero"), quiet(1)),
                 ArgumentError);
    EXPECT_THROW(generate_dataset(empty / "missing", small_config(), 1, Seed{1}, testfs::fresh_dir("gen_m"), quiet(1)),
                 ArgumentError);
}

TEST(Validate, FindsProblems)
{
    const fs::path out = testfs::fresh_dir("validate");
    generate_dataset(kSources, small_config(), 3, Seed{4}, out, quiet(1));
    fs::remove(out / "samples/000001.companion.gbs");
    DatasetReport r = validate_dataset(out);
    ASSERT_EQ(r.problems.size(), 1u);
    EXPECT_NE(r.problems[0].find("record 1"), std::string::npos);
    fs::remove(out / "manifest.jsonl");
    r = validate_dataset(out);
    EXPECT_FALSE(r.ok());
}

TEST(ImageCodec, DecodesFixtures)
{
    const RgbImage a = decode_image(kSources / "a_gradient.ppm");
    EXPECT_EQ(a.height(), 48u);
    EXPECT_EQ(a.width(), 64u);
    EXPECT_DOUBLE_EQ(a.r(1, 2), 8.0 / 255.0);
    EXPECT_DOUBLE_EQ(a.g(1, 2), 5.0 / 255.0);
    const RgbImage b = decode_image(kSources / "b_checker.pgm");
    EXPECT_DOUBLE_EQ(b.r(0, 0), 30.0 / 255.0);
    EXPECT_DOUBLE_EQ(b.b(0, 8), 220.0 / 255.0);
    const RgbImage c = decode_image(kSources / "c_disk.png");
    EXPECT_EQ(c.width(), 70u);
    EXPECT_DOUBLE_EQ(c.r(25, 35), 200.0 / 255.0);
    EXPECT_DOUBLE_EQ(c.b(0, 0), 60.0 / 255.0);
    EXPECT_THROW(decode_image(kSources / "d_broken.jpg"), FormatError);
}

TEST(ImageCodec, PngAndJpegWriteRead)
{
    const fs::path dir = testfs::fresh_dir("codec");
    RealImage g(10, 12);
    for (std::size_t i = 0; i < g.size(); ++i)
        g.storage()[i] = static_cast<double>(i % 256) / 255.0;
    write_png_gray(dir / "g.png", g, 0.0, 1.0);
    const RgbImage back = decode_image(dir / "g.png");
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(back.r.storage()[i], g.storage()[i], 0.5 / 255.0);
}
