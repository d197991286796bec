#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gibbsim/gibbsim.hpp"

namespace fs = std::filesystem;
using namespace gibbsim;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "Inf")
            out.push_back(std::numeric_limits<double>::infinity());
        else {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(item, &used);
            } catch (const std::logic_error&) {
                used = 0;
            }
            if (used != item.size() || item.empty())
                throw ArgumentError("cannot parse list item '" + item + "'");
            out.push_back(v);
        }
    }
    if (out.empty())
        throw ArgumentError("empty list");
    return out;
}

double parse_positive_or_inf(const std::string& text)
{
    const auto v = parse_list(text);
    if (v.size() != 1 || !(v[0] > 0.0))
        throw ArgumentError("expected one positive value or 'inf', got '" + text + "'");
    return v[0];
}

Processor make_processor(const std::string& cmd)
{
    return cmd.empty() ? identity_processor() : subprocess_processor(cmd);
}

/// Writes .png (scaled to [0, max]) or a tensor file otherwise.
void write_image(const fs::path& path, const RealImage& img)
{
    if (detail::lower_extension(path) == ".png") {
        const double hi = max_abs(img);
        write_png_gray(path, img, 0.0, hi > 0.0 ? hi : 1.0);
    } else {
        write_tensor_file(path, to_tensor(img));
    }
}

int cmd_simulate(const std::string& src, const std::string& out, std::size_t count, const std::string& pf,
                 std::size_t matrix, std::size_t hi_res, double noise_min, double noise_max, bool magnitude,
                 std::uint64_t seed, std::size_t threads, bool no_companion)
{
    SimConfig cfg;
    cfg.pf_fraction = PfFraction::parse(pf);
    cfg.lo_res = matrix;
    cfg.hi_res = hi_res;
    cfg.noise_min = noise_min;
    cfg.noise_max = noise_max;
    cfg.magnitude_mode = magnitude;
    cfg.concat_pf_recon = !no_companion;
    cfg.validate();
    GenerateOptions opt;
    opt.threads = threads;
    const auto m = generate_dataset(src, cfg, count, Seed{seed}, out, opt);
    std::cout << "wrote " << m.records.size() << " samples to " << out << '\n';
    return 0;
}

int cmd_recon_pf(const std::string& in, const std::string& out, const std::string& pf, std::size_t ramp,
                 const std::string& window)
{
    PfReconConfig cfg;
    cfg.fraction = PfFraction::parse(pf);
    cfg.fraction.validate();
    cfg.transition_width = ramp;
    if (window == "hamming")
        cfg.phase_window = ApodizationWindow::Hamming;
    else if (window != "triangle")
        throw ArgumentError("unknown window '" + window + "'");
    const Tensor t = read_tensor_file(in);
    if (t.dtype != DType::Complex32 || t.dims.size() != 2)
        throw FormatError(in + ": expected a complex [H,W] k-space tensor");
    write_image(out, margosian_recon(pf_mask(to_complex_image(t), cfg.fraction), cfg));
    return 0;
}

int cmd_phantom_edge(double angle, std::size_t matrix, const std::string& snr_text, const std::string& out,
                     bool simulate, std::size_t lo_res, std::size_t hi_res, std::uint64_t seed)
{
    EdgePhantomSpec spec;
    spec.angle = angle;
    spec.matrix = matrix;
    spec.snr_or_cnr = parse_positive_or_inf(snr_text);
    spec.validate();
    if (!simulate) {
        write_image(out, make_edge_phantom(spec));
        return 0;
    }
    SimConfig cfg;
    cfg.lo_res = lo_res;
    cfg.hi_res = hi_res;
    SweepOptions opt;
    opt.matrix = matrix;
    opt.contrast = spec.contrast;
    const double angles[1] = {angle};
    auto res = run_angle_sweep(identity_processor(), angles, spec.snr_or_cnr, cfg, Seed{seed}, opt);
    write_image(out, res[0].output);
    std::cout << "ripple " << res[0].ripple << '\n';
    return 0;
}

int cmd_eval_cnr(const std::string& processor, const std::string& cnr_text, std::size_t repeats, std::uint64_t seed,
                 const std::string& csv, const std::string& pf, const std::string& composite, std::size_t threads)
{
    SimConfig cfg;
    cfg.pf_fraction = PfFraction::parse(pf);
    cfg.validate();
    const auto cnrs = parse_list(cnr_text);
    SweepOptions opt;
    opt.threads = threads;
    const CnrSweep sweep = run_cnr_sweep(make_processor(processor), cnrs, repeats, cfg, Seed{seed}, opt);
    std::ofstream file;
    if (!csv.empty()) {
        file.open(csv);
        if (!file)
            throw Error("cannot write " + csv);
    }
    std::ostream& os = csv.empty() ? std::cout : file;
    os << "cnr,mean_fwhm,std_fwhm,rows_fitted,rows_unbounded\n";
    os.precision(10);
    for (const auto& r : sweep.rows)
        os << r.cnr << ',' << r.mean_fwhm << ',' << r.std_fwhm << ',' << r.rows_fitted << ',' << r.rows_unbounded
           << '\n';
    if (!composite.empty())
        write_image(composite, sweep.composite);
    return 0;
}

int cmd_eval_spectral(const std::string& dataset, const std::string& processor, const std::string& csv,
                      const std::string& plot)
{
    const DatasetManifest m = read_manifest(dataset);
    if (m.records.empty())
        throw ArgumentError("dataset " + dataset + " has no samples");
    std::vector<SamplePair> pairs;
    pairs.reserve(m.records.size());
    for (const auto& r : m.records)
        pairs.push_back(read_sample(dataset, r));
    const std::vector<RealImage> outputs = make_processor(processor)(pairs);
    if (outputs.size() != pairs.size())
        throw ProcessorError("processor returned the wrong number of outputs");
    std::vector<RealImage> targets;
    for (const auto& p : pairs)
        targets.push_back(p.target);
    const SpectralResponse resp = spectral_response(outputs, targets);
    std::ofstream file;
    if (!csv.empty()) {
        file.open(csv);
        if (!file)
            throw Error("cannot write " + csv);
    }
    std::ostream& os = csv.empty() ? std::cout : file;
    os << "frequency_index,profile\n";
    os.precision(10);
    const auto h = static_cast<long>(resp.pf_direction_profile.size());
    for (long r = 0; r < h; ++r)
        os << r - h / 2 << ',' << resp.pf_direction_profile[static_cast<std::size_t>(r)] << '\n';
    if (!plot.empty())
        write_png_gray(plot, resp.grid, 0.0, 2.0);
    return 0;
}

int cmd_validate(const std::string& dataset)
{
    const DatasetReport report = validate_dataset(dataset);
    for (const auto& p : report.problems)
        std::cerr << p << '\n';
    std::cout << report.samples << " samples, " << report.problems.size() << " problems\n";
    return report.ok() ? 0 : kExitRuntime;
}

int cmd_passthrough()
{
    std::ios::sync_with_stdio(false);
    const std::vector<std::uint8_t> in((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    const std::vector<Tensor> tensors = decode_tensor_stream(in);
    std::vector<Tensor> out;
    out.reserve(tensors.size());
    for (const auto& t : tensors)
        out.push_back(passthrough_tensor(t));
    const auto bytes = encode_tensor_stream(out);
    std::fwrite(bytes.data(), 1, bytes.size(), stdout);
    return std::fflush(stdout) == 0 ? 0 : kExitRuntime;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"k-space acquisition simulator and Gibbs/noise analysis toolkit"};
    app.require_subcommand(1);

    std::string src, out, pf = "1", window = "triangle";
    std::size_t count = 0, matrix = 100, hi_res = 256, threads = default_thread_count();
    double noise_min = 1.0, noise_max = 32.0;
    bool magnitude = false, no_companion = false;
    std::uint64_t seed = 0;
    auto* sim = app.add_subcommand("simulate", "generate a training dataset from photographs");
    sim->add_option("--src", src, "directory of source images")->required();
    sim->add_option("--out", out, "output dataset directory")->required();
    sim->add_option("--count", count, "number of samples")->required()->check(CLI::PositiveNumber);
    sim->add_option("--pf", pf, "partial Fourier fraction (1, 7/8, 6/8, 5/8)");
    sim->add_option("--matrix", matrix, "low-resolution matrix size");
    sim->add_option("--hi-res", hi_res, "high-resolution grid size");
    sim->add_option("--noise-min", noise_min, "lower k-space noise ratio");
    sim->add_option("--noise-max", noise_max, "upper k-space noise ratio");
    sim->add_flag("--magnitude", magnitude, "store magnitude inputs");
    sim->add_flag("--no-companion", no_companion, "omit the partial Fourier reconstruction channel");
    sim->add_option("--seed", seed, "global seed");
    sim->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    std::string in;
    std::size_t ramp = 4;
    auto* recon = app.add_subcommand("recon-pf", "homodyne partial Fourier reconstruction of a k-space tensor");
    recon->add_option("--in", in, "complex k-space tensor file")->required();
    recon->add_option("--out", out, "output tensor (.gbs) or image (.png)")->required();
    recon->add_option("--pf", pf, "partial Fourier fraction")->required();
    recon->add_option("--ramp", ramp, "transition width in lines");
    recon->add_option("--window", window, "phase apodization window (triangle, hamming)");

    double angle = 0.0;
    std::string snr = "inf";
    std::size_t phantom_matrix = 1024, lo_res = 100;
    bool simulate = false;
    auto* phantom = app.add_subcommand("phantom-edge", "edge phantom, raw or simulated");
    phantom->add_option("--angle", angle, "edge angle in degrees, 0 to 45");
    phantom->add_option("--matrix", phantom_matrix, "phantom matrix size");
    phantom->add_option("--snr", snr, "image-domain SNR or 'inf'");
    phantom->add_option("--out", out, "output tensor (.gbs) or image (.png)")->required();
    phantom->add_flag("--simulate", simulate, "write the simulated low-resolution magnitude instead");
    phantom->add_option("--lo-res", lo_res, "low-resolution matrix size");
    phantom->add_option("--hi-res", hi_res, "high-resolution grid size");
    phantom->add_option("--seed", seed, "seed");

    std::string processor, cnr = "0.25,0.5,1,2,4,10", csv, composite;
    std::size_t repeats = 50;
    auto* cnr_cmd = app.add_subcommand("eval-cnr", "edge-phantom FWHM across contrast-to-noise ratios");
    cnr_cmd->add_option("--processor", processor, "processor command (default: input magnitude)");
    cnr_cmd->add_option("--cnr", cnr, "comma-separated CNR values ('inf' allowed)");
    cnr_cmd->add_option("--repeats", repeats, "repeats per CNR")->check(CLI::PositiveNumber);
    cnr_cmd->add_option("--seed", seed, "seed");
    cnr_cmd->add_option("--csv", csv, "CSV output path (default stdout)");
    cnr_cmd->add_option("--pf", pf, "partial Fourier fraction");
    cnr_cmd->add_option("--composite", composite, "composite output image");
    cnr_cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    std::string dataset, plot;
    auto* spec_cmd = app.add_subcommand("eval-spectral", "mean spectral response over a dataset");
    spec_cmd->add_option("--dataset", dataset, "dataset directory")->required();
    spec_cmd->add_option("--processor", processor, "processor command (default: input magnitude)");
    spec_cmd->add_option("--csv", csv, "CSV output path (default stdout)");
    spec_cmd->add_option("--plot", plot, "PNG of the mean response grid, 0 to 2");

    auto* val = app.add_subcommand("validate", "check a dataset directory");
    val->add_option("--dataset", dataset, "dataset directory")->required();

    auto* pass = app.add_subcommand("passthrough", "processor that returns the modulus of channel 0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(src, out, count, pf, matrix, hi_res, noise_min, noise_max, magnitude, seed, threads,
                                no_companion);
        if (recon->parsed())
            return cmd_recon_pf(in, out, pf, ramp, window);
        if (phantom->parsed())
            return cmd_phantom_edge(angle, phantom_matrix, snr, out, simulate, lo_res, hi_res, seed);
        if (cnr_cmd->parsed())
            return cmd_eval_cnr(processor, cnr, repeats, seed, csv, pf, composite, threads);
        if (spec_cmd->parsed())
            return cmd_eval_spectral(dataset, processor, csv, plot);
        if (val->parsed())
            return cmd_validate(dataset);
        if (pass->parsed())
            return cmd_passthrough();
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UnsupportedFraction& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
