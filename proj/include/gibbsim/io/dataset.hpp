#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gibbsim/acquisition.hpp"
#include "gibbsim/core/parallel.hpp"
#include "gibbsim/io/image_codec.hpp"
#include "gibbsim/io/tensor_file.hpp"

namespace gibbsim {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.jsonl";

// ---------------------------------------------------------------------------
// JSON mapping

inline nlohmann::json to_json(const PhaseModelParams& p)
{
    nlohmann::json j{{"lambda_S", p.lambda_S}, {"lambda_B", p.lambda_B}, {"mu_z", p.mu_z},
                     {"sigma_z", p.sigma_z},   {"mu_a", p.mu_a},         {"sigma_a", p.sigma_a},
                     {"p_no_phase", p.p_no_phase}, {"z_floor", p.z_floor}};
    j["r_min"] = p.r_min ? nlohmann::json(*p.r_min) : nlohmann::json(nullptr);
    j["r_max"] = p.r_max ? nlohmann::json(*p.r_max) : nlohmann::json(nullptr);
    return j;
}

inline PhaseModelParams phase_params_from_json(const nlohmann::json& j)
{
    PhaseModelParams p;
    p.lambda_S = j.at("lambda_S").get<double>();
    p.lambda_B = j.at("lambda_B").get<double>();
    p.mu_z = j.at("mu_z").get<double>();
    p.sigma_z = j.at("sigma_z").get<double>();
    p.mu_a = j.at("mu_a").get<double>();
    p.sigma_a = j.at("sigma_a").get<double>();
    p.p_no_phase = j.at("p_no_phase").get<double>();
    p.z_floor = j.at("z_floor").get<double>();
    if (!j.at("r_min").is_null())
        p.r_min = j.at("r_min").get<std::array<double, 2>>();
    if (!j.at("r_max").is_null())
        p.r_max = j.at("r_max").get<std::array<double, 2>>();
    return p;
}

inline nlohmann::json to_json(const SimConfig& c)
{
    return {{"hi_res", c.hi_res},
            {"lo_res", c.lo_res},
            {"pf_fraction", c.pf_fraction.str()},
            {"noise_min", c.noise_min},
            {"noise_max", c.noise_max},
            {"image_noise_sigma", c.image_noise_sigma ? nlohmann::json(*c.image_noise_sigma) : nlohmann::json(nullptr)},
            {"phase", to_json(c.phase_params)},
            {"ellipsoid_skip_prob", c.ellipsoid_skip_prob},
            {"flip_prob", c.flip_prob},
            {"transpose_prob", c.transpose_prob},
            {"magnitude_mode", c.magnitude_mode},
            {"concat_pf_recon", c.concat_pf_recon},
            {"pf_ramp", c.pf_ramp}};
}

inline SimConfig sim_config_from_json(const nlohmann::json& j)
{
    SimConfig c;
    c.hi_res = j.at("hi_res").get<std::size_t>();
    c.lo_res = j.at("lo_res").get<std::size_t>();
    c.pf_fraction = PfFraction::parse(j.at("pf_fraction").get<std::string>());
    c.noise_min = j.at("noise_min").get<double>();
    c.noise_max = j.at("noise_max").get<double>();
    if (!j.at("image_noise_sigma").is_null())
        c.image_noise_sigma = j.at("image_noise_sigma").get<double>();
    c.phase_params = phase_params_from_json(j.at("phase"));
    c.ellipsoid_skip_prob = j.at("ellipsoid_skip_prob").get<double>();
    c.flip_prob = j.at("flip_prob").get<double>();
    c.transpose_prob = j.at("transpose_prob").get<double>();
    c.magnitude_mode = j.at("magnitude_mode").get<bool>();
    c.concat_pf_recon = j.at("concat_pf_recon").get<bool>();
    c.pf_ramp = j.at("pf_ramp").get<std::size_t>();
    return c;
}

inline nlohmann::json to_json(const SampleMeta& m)
{
    return {{"seed", m.seed.value},         {"pf_fraction", m.pf_fraction.str()},
            {"noise_ratio", m.noise_ratio}, {"norm_scale", m.norm_scale},
            {"flipped", m.flipped},         {"transposed", m.transposed},
            {"no_phase", m.no_phase},       {"no_ellipsoid", m.no_ellipsoid},
            {"magnitude", m.magnitude}};
}

inline SampleMeta sample_meta_from_json(const nlohmann::json& j)
{
    SampleMeta m;
    m.seed = Seed{j.at("seed").get<std::uint64_t>()};
    m.pf_fraction = PfFraction::parse(j.at("pf_fraction").get<std::string>());
    m.noise_ratio = j.at("noise_ratio").get<double>();
    m.norm_scale = j.at("norm_scale").get<double>();
    m.flipped = j.at("flipped").get<bool>();
    m.transposed = j.at("transposed").get<bool>();
    m.no_phase = j.at("no_phase").get<bool>();
    m.no_ellipsoid = j.at("no_ellipsoid").get<bool>();
    m.magnitude = j.at("magnitude").get<bool>();
    return m;
}

// ---------------------------------------------------------------------------
// Samples

/// Paths are relative to the dataset root.
struct ManifestRecord {
    std::size_t id = 0;
    std::string source;
    SampleMeta meta;
    std::string input;
    std::string target;
    std::optional<std::string> companion;

    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

inline nlohmann::json to_json(const ManifestRecord& r)
{
    nlohmann::json j{{"id", r.id}, {"source", r.source}, {"meta", to_json(r.meta)},
                     {"input", r.input}, {"target", r.target}};
    j["companion"] = r.companion ? nlohmann::json(*r.companion) : nlohmann::json(nullptr);
    return j;
}

inline ManifestRecord manifest_record_from_json(const nlohmann::json& j)
{
    ManifestRecord r;
    r.id = j.at("id").get<std::size_t>();
    r.source = j.at("source").get<std::string>();
    r.meta = sample_meta_from_json(j.at("meta"));
    r.input = j.at("input").get<std::string>();
    r.target = j.at("target").get<std::string>();
    if (!j.at("companion").is_null())
        r.companion = j.at("companion").get<std::string>();
    return r;
}

inline std::string sample_stem(std::size_t id)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "samples/%06zu", id);
    return buf;
}

namespace detail {

inline std::vector<std::uint8_t> json_bytes(const nlohmann::json& j)
{
    const std::string s = j.dump() + "\n";
    return {s.begin(), s.end()};
}

} // namespace detail

/// Writes the tensors, then the meta JSON (its presence marks a complete
/// sample). Every file goes through a temp file and a rename.
inline ManifestRecord write_sample(const SamplePair& pair, const std::filesystem::path& root, std::size_t id,
                                   const std::string& source = {})
{
    const std::string stem = sample_stem(id);
    std::filesystem::create_directories((root / stem).parent_path());
    ManifestRecord rec;
    rec.id = id;
    rec.source = source;
    rec.meta = pair.meta;
    rec.input = stem + ".input.gbs";
    rec.target = stem + ".target.gbs";
    const Tensor input = pair.is_complex() ? to_tensor(pair.complex_input()) : to_tensor(pair.magnitude_input());
    write_tensor_file(root / rec.input, input);
    write_tensor_file(root / rec.target, to_tensor(pair.target));
    if (pair.companion) {
        rec.companion = stem + ".companion.gbs";
        write_tensor_file(root / *rec.companion, to_tensor(*pair.companion));
    }
    write_file_atomic(root / (stem + ".meta.json"), detail::json_bytes(to_json(rec)));
    return rec;
}

inline SamplePair read_sample(const std::filesystem::path& root, const ManifestRecord& rec)
{
    SamplePair pair;
    const Tensor input = read_tensor_file(root / rec.input);
    if (input.dims.size() != 2)
        throw FormatError(rec.input + ": field 'ndim' must be 2");
    if (rec.meta.magnitude) {
        if (input.dtype != DType::Real32)
            throw FormatError(rec.input + ": field 'dtype' must be real for a magnitude sample");
        pair.input = to_real_image(input);
    } else {
        if (input.dtype != DType::Complex32)
            throw FormatError(rec.input + ": field 'dtype' must be complex");
        pair.input = to_complex_image(input);
    }
    const Tensor target = read_tensor_file(root / rec.target);
    if (target.dtype != DType::Real32 || target.dims != input.dims)
        throw FormatError(rec.target + ": field 'dims' or 'dtype' does not match the input");
    pair.target = to_real_image(target);
    if (rec.companion) {
        const Tensor comp = read_tensor_file(root / *rec.companion);
        if (comp.dtype != DType::Real32 || comp.dims != input.dims)
            throw FormatError(*rec.companion + ": field 'dims' or 'dtype' does not match the input");
        pair.companion = to_real_image(comp);
    }
    pair.meta = rec.meta;
    return pair;
}

/// The pair as it reads back from disk: every pixel rounded to float32.
inline SamplePair round_to_storage(SamplePair pair)
{
    auto rr = [](RealImage& img) {
        for (auto& v : img)
            v = static_cast<float>(v);
    };
    if (pair.is_complex()) {
        for (auto& v : std::get<ComplexImage>(pair.input))
            v = Complex(static_cast<float>(v.real()), static_cast<float>(v.imag()));
    } else {
        rr(std::get<RealImage>(pair.input));
    }
    rr(pair.target);
    if (pair.companion)
        rr(*pair.companion);
    return pair;
}

// ---------------------------------------------------------------------------
// Datasets

struct DatasetManifest {
    int version = kDatasetFormatVersion;
    SimConfig config;
    std::uint64_t global_seed = 0;
    std::vector<ManifestRecord> records;
};

inline std::string manifest_text(const DatasetManifest& m)
{
    std::string out = nlohmann::json{{"format", "gibbsim-dataset"},
                                     {"version", m.version},
                                     {"global_seed", m.global_seed},
                                     {"count", m.records.size()},
                                     {"config", to_json(m.config)}}
                          .dump() +
                      "\n";
    for (const auto& r : m.records)
        out += to_json(r).dump() + "\n";
    return out;
}

inline DatasetManifest parse_manifest(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    DatasetManifest m;
    if (!std::getline(in, line))
        throw FormatError("manifest: missing header line");
    std::size_t count = 0;
    try {
        const auto h = nlohmann::json::parse(line);
        if (h.at("format").get<std::string>() != "gibbsim-dataset")
            throw FormatError("manifest: field 'format' is not gibbsim-dataset");
        m.version = h.at("version").get<int>();
        if (m.version != kDatasetFormatVersion)
            throw FormatError("manifest: unsupported field 'version' " + std::to_string(m.version));
        m.global_seed = h.at("global_seed").get<std::uint64_t>();
        count = h.at("count").get<std::size_t>();
        m.config = sim_config_from_json(h.at("config"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest header: ") + e.what());
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        try {
            m.records.push_back(manifest_record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("manifest line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (m.records.size() != count)
        throw FormatError("manifest: field 'count' is " + std::to_string(count) + " but " +
                          std::to_string(m.records.size()) + " records follow");
    return m;
}

inline DatasetManifest read_manifest(const std::filesystem::path& root)
{
    const auto bytes = read_file_bytes(root / kManifestName);
    return parse_manifest(std::string(bytes.begin(), bytes.end()));
}

using LogFn = std::function<void(const std::string&)>;

inline LogFn stderr_log()
{
    return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

struct GenerateOptions {
    std::size_t threads = default_thread_count();
    bool resume = true;
    LogFn log = stderr_log();
};

struct SourceImage {
    std::string name; ///< path relative to the source directory
    RealImage gray;
};

/// Decodable images under `dir`, sorted by relative path. Undecodable files
/// are reported through `log` and skipped.
inline std::vector<SourceImage> load_sources(const std::filesystem::path& dir, const LogFn& log)
{
    if (!std::filesystem::is_directory(dir))
        throw ArgumentError("source directory " + dir.string() + " does not exist");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        if (e.is_regular_file() && is_supported_image(e.path()))
            files.push_back(e.path());
    std::sort(files.begin(), files.end(), [&](const auto& a, const auto& b) {
        return std::filesystem::relative(a, dir).generic_string() < std::filesystem::relative(b, dir).generic_string();
    });
    std::vector<SourceImage> out;
    for (const auto& f : files) {
        try {
            RealImage gray = grayscale_bt601(decode_image(f));
            if (gray.height() < 2 || gray.width() < 2)
                throw FormatError("image smaller than 2x2");
            out.push_back({std::filesystem::relative(f, dir).generic_string(), std::move(gray)});
        } catch (const std::exception& e) {
            if (log)
                log("warning: skipping " + f.string() + ": " + e.what());
        }
    }
    if (out.empty())
        throw ArgumentError("no decodable images in " + dir.string());
    return out;
}

namespace detail {

inline std::optional<ManifestRecord> existing_sample(const std::filesystem::path& root, std::size_t id,
                                                     const SimConfig& cfg, Seed seed, const std::string& source)
{
    const auto meta_path = root / (sample_stem(id) + ".meta.json");
    if (!std::filesystem::exists(meta_path))
        return std::nullopt;
    try {
        const auto bytes = read_file_bytes(meta_path);
        ManifestRecord rec = manifest_record_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
        if (rec.id != id || rec.meta.seed != seed || rec.source != source || rec.meta.pf_fraction != cfg.pf_fraction ||
            rec.meta.magnitude != cfg.magnitude_mode)
            return std::nullopt;
        const SamplePair p = read_sample(root, rec);
        if (p.target.height() != cfg.lo_res || p.target.width() != cfg.lo_res)
            return std::nullopt;
        if (p.companion.has_value() != (cfg.concat_pf_recon && !cfg.magnitude_mode))
            return std::nullopt;
        return rec;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace detail

/// Sample i uses source i mod (number of decodable sources) and seed
/// derive_seed(global_seed, i). Output bytes do not depend on `threads`.
inline DatasetManifest generate_dataset(const std::filesystem::path& source_dir, const SimConfig& cfg,
                                        std::size_t count, Seed global_seed, const std::filesystem::path& out_dir,
                                        const GenerateOptions& opt = {})
{
    cfg.validate();
    if (count < 1)
        throw ArgumentError("generate_dataset: count must be positive");
    const std::vector<SourceImage> sources = load_sources(source_dir, opt.log);
    std::filesystem::create_directories(out_dir / "samples");

    DatasetManifest manifest;
    manifest.config = cfg;
    manifest.global_seed = global_seed.value;
    manifest.records.resize(count);
    parallel_for(count, opt.threads, [&](std::size_t i) {
        const SourceImage& src = sources[i % sources.size()];
        const Seed seed = derive_seed(global_seed, i);
        if (opt.resume) {
            if (auto rec = detail::existing_sample(out_dir, i, cfg, seed, src.name)) {
                manifest.records[i] = std::move(*rec);
                return;
            }
        }
        try {
            manifest.records[i] = write_sample(simulate_pair(src.gray, cfg, seed), out_dir, i, src.name);
        } catch (const std::exception& e) {
            throw Error("sample " + std::to_string(i) + " (source " + src.name + ", seed " +
                        std::to_string(seed.value) + "): " + e.what());
        }
    });
    const std::string text = manifest_text(manifest);
    write_file_atomic(out_dir / kManifestName, std::vector<std::uint8_t>(text.begin(), text.end()));
    return manifest;
}

struct DatasetReport {
    std::size_t samples = 0;
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
};

inline DatasetReport validate_dataset(const std::filesystem::path& root)
{
    DatasetReport report;
    DatasetManifest m;
    try {
        m = read_manifest(root);
    } catch (const std::exception& e) {
        report.problems.push_back(e.what());
        return report;
    }
    report.samples = m.records.size();
    std::set<std::size_t> ids;
    for (std::size_t k = 0; k < m.records.size(); ++k) {
        const ManifestRecord& r = m.records[k];
        const std::string tag = "record " + std::to_string(k) + " (id " + std::to_string(r.id) + "): ";
        if (!ids.insert(r.id).second)
            report.problems.push_back(tag + "duplicate id");
        if (r.id != k)
            report.problems.push_back(tag + "id out of generation order");
        if (r.meta.magnitude != m.config.magnitude_mode)
            report.problems.push_back(tag + "magnitude flag differs from the config");
        if (r.companion.has_value() != (m.config.concat_pf_recon && !m.config.magnitude_mode))
            report.problems.push_back(tag + "companion presence differs from the config");
        try {
            const SamplePair p = read_sample(root, r);
            if (p.target.height() != m.config.lo_res || p.target.width() != m.config.lo_res)
                report.problems.push_back(tag + "tensor dims differ from lo_res");
        } catch (const std::exception& e) {
            report.problems.push_back(tag + e.what());
        }
    }
    return report;
}

} // namespace gibbsim
