#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "biphoton/applications.hpp"
#include "biphoton/detector.hpp"
#include "biphoton/estimator.hpp"
#include "biphoton/experiments.hpp"
#include "biphoton/fields.hpp"
#include "biphoton/io.hpp"
#include "biphoton/propagation.hpp"
#include "biphoton/rng.hpp"
#include "biphoton/slm_calibration.hpp"
#include "biphoton/threading.hpp"

namespace {

using namespace biphoton;

struct GlobalOptions {
    int threads = 0;
    std::string out_dir;
};

std::string out_path(const GlobalOptions& g, const std::string& p) {
    namespace fs = std::filesystem;
    if (g.out_dir.empty() || fs::path(p).is_absolute()) return p;
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / p).string();
}

EnvelopeShape parse_shape(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) args.push_back(std::stod(item));
    }
    if (kind == "disk" && args.size() == 1) return Disk{args[0]};
    if (kind == "ring" && args.size() == 2) return Ring{args[0], args[1]};
    if (kind == "gaussian" && args.size() == 1) return Gaussian{args[0]};
    throw CLI::ValidationError("--envelope", "expected disk:R, ring:R,T or gaussian:W");
}

PixelResponse parse_hidden_response(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) args.push_back(std::stod(item));
    }
    if (kind == "linear" && args.size() == 1) return PixelResponse::linear(args[0]);
    if (kind == "quad" && args.size() >= 2)
        return PixelResponse::quadratic(args[0], args[1], args.size() > 2 ? args[2] : 0.0);
    throw CLI::ValidationError("--hidden", "expected linear:G2pi or quad:a1,a2[,a3]");
}

GridSpec desk_spec(int n) { return GridSpec(n, 8e-6, 810e-9, 0.1); }

G2Tensor truth_from_preset(const std::string& preset, const GridSpec& spec,
                           const EnvelopeShape& shape, int period, double alpha, int beta) {
    const ComplexGrid envelope = make_envelope(spec, shape);
    PairConfig config;
    bool grating;
    if (preset == "nf-flat") {
        config = PairConfig::NF;
        grating = false;
    } else if (preset == "ff-flat") {
        config = PairConfig::FF;
        grating = false;
    } else if (preset == "nf-grating") {
        config = PairConfig::NF;
        grating = true;
    } else if (preset == "ff-grating") {
        config = PairConfig::FF;
        grating = true;
    } else {
        throw CLI::ValidationError("--truth",
                                   "expected nf-flat, ff-flat, nf-grating or ff-grating");
    }
    const BiphotonState state = make_biphoton(spec, config, envelope);
    const PhaseMask mask =
        grating ? make_grating(spec, period, alpha, beta) : PhaseMask::flat(spec);
    return propagate_pairs_analytic(state, mask);
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    return values;
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "parameter,order,magnitude,fit_amplitude,fit_period,fit_phase,fit_offset,"
           "residual_rms\n";
    for (size_t p = 0; p < result.parameters.size(); ++p)
        for (size_t o = 0; o < result.orders.size(); ++o) {
            const auto& fit = result.fits[o];
            out << format_double(result.parameters[p]) << ',' << result.orders[o] << ','
                << format_double(result.magnitudes(static_cast<long>(p), static_cast<long>(o)))
                << ',' << format_double(fit.amplitude) << ',' << format_double(fit.period)
                << ',' << format_double(fit.phase) << ',' << format_double(fit.offset) << ','
                << format_double(fit.residual_rms) << '\n';
        }
}

int run_simulate(const GlobalOptions& g, const std::string& truth_preset,
                 const std::string& envelope, int n, int period, double alpha, int beta,
                 const DetectorModel& model, long frames, int block_size,
                 const std::string& out, const std::string& truth_out) {
    const GridSpec spec = desk_spec(n);
    const G2Tensor truth =
        truth_from_preset(truth_preset, spec, parse_shape(envelope), period, alpha, beta);
    if (!truth_out.empty()) save_g2(out_path(g, truth_out), truth);

    const std::string path = out_path(g, out);
    long written = 0;
    bool first = true;
    while (written < frames) {
        const int m = static_cast<int>(std::min<long>(block_size, frames - written));
        const FrameBlock block =
            synthesize_block(truth, model, std::max(m, 2), static_cast<std::uint64_t>(written));
        if (first) {
            save_frames(path, block);
            first = false;
        } else {
            append_frames(path, block);
        }
        written += block.m;
    }
    std::cout << "frames: " << written << "\n"
              << "file: " << path << "\n";
    return 0;
}

int run_process(const GlobalOptions& g, const std::string& input, int block_size,
                const std::string& fix, const std::string& rows, const std::string& out,
                const std::vector<std::string>& proj) {
    const FrameBlock stack = load_frames(input);
    G2Accumulator acc(stack.n);
    const int npix = stack.n * stack.n;
    long processed = 0;
    while (processed < stack.m) {
        const int m = static_cast<int>(std::min<long>(block_size, stack.m - processed));
        if (m < 2) break;  // a trailing single frame cannot form a block
        FrameBlock block(stack.n, m);
        std::copy_n(stack.data.begin() + processed * npix, static_cast<size_t>(m) * npix,
                    block.data.begin());
        accumulate_block(acc, block);
        processed += m;
    }
    G2Tensor g2 = finalize(acc);

    if (rows == "zero")
        g2 = fix_artifacts(g2, FixPolicy::Zero, true);
    else if (rows == "neighbor-mean")
        g2 = fix_artifacts(g2, FixPolicy::NeighborMean, true);
    if (fix == "zero")
        g2 = fix_artifacts(g2, FixPolicy::Zero, false);
    else if (fix == "neighbor-mean")
        g2 = fix_artifacts(g2, FixPolicy::NeighborMean, false);

    if (!out.empty()) save_g2(out_path(g, out), g2);

    std::cout << "frames: " << acc.frames_processed << "\n"
              << "blocks: " << acc.blocks_processed << "\n";
    if (!proj.empty()) {
        const Projection p = proj[0] == "minus" ? project_minus(g2) : project_plus(g2);
        save_projection_csv(out_path(g, proj[1]), p, /*clip_negative=*/true);
        const ProjectionStats stats = projection_stats(p);
        std::cout << "peak_value: " << format_double(stats.peak) << "\n"
                  << "peak_offset: " << stats.peak_di << "," << stats.peak_dj << "\n"
                  << "peak_snr: " << format_double(stats.snr) << "\n";
    }
    return 0;
}

int run_sweep(const GlobalOptions& g, const std::string& config, int n, int period,
              double alpha, const std::string& betas, const std::string& alphas, int steps,
              const std::string& mode, double waist, const std::string& out) {
    const GridSpec spec = desk_spec(n);
    SweepResult result;
    if (config == "ff") {
        std::vector<int> offsets;
        if (!betas.empty()) {
            for (double b : parse_double_list(betas)) offsets.push_back(static_cast<int>(b));
        } else {
            for (int b = 0; b <= period; ++b) offsets.push_back(b);
        }
        result = ff_translation_sweep(spec, period, offsets, alpha, waist);
    } else {
        std::vector<double> amps;
        if (!alphas.empty()) {
            amps = parse_double_list(alphas);
        } else {
            for (int k = 0; k < steps; ++k) amps.push_back(kTwoPi * k / (steps - 1));
        }
        result = nf_amplitude_sweep(
            spec, period, amps, mode == "classical" ? SweepMode::Classical : SweepMode::Pairs,
            waist);
    }
    write_sweep_csv(out_path(g, out), result);
    for (size_t o = 0; o < result.orders.size(); ++o)
        std::cout << "order " << result.orders[o] << ": fit_period "
                  << format_double(result.fits[o].period) << " residual_rms "
                  << format_double(result.fits[o].residual_rms) << "\n";
    return 0;
}

int run_ao(const GlobalOptions& g, int n, int k_modes, double rms, std::uint64_t seed,
           int steps, int passes, const std::vector<std::string>& out) {
    const GridSpec spec = desk_spec(n);
    const ComplexGrid envelope = make_envelope(spec, Gaussian{spec.n / 5.0});
    const BiphotonState state = make_biphoton(spec, PairConfig::NF, envelope);

    const AberrationModel basis = AberrationModel::low_order(spec, k_modes);
    Rng rng(derive_stream(seed, 0xa0ULL));
    std::vector<double> coeffs(static_cast<size_t>(k_modes));
    double norm = 0.0;
    for (auto& c : coeffs) {
        c = rng.gaussian();
        norm += c * c;
    }
    for (auto& c : coeffs) c *= rms / std::sqrt(norm);
    const PhaseMask aberration = basis.mask_from_coefficients(coeffs);

    CoordinateDescentModes optimizer;
    optimizer.k_modes = k_modes;
    optimizer.steps_per_mode = steps;
    optimizer.passes = passes;
    const AoResult result = ao_optimize(state, aberration, optimizer);

    std::ofstream trace(out_path(g, out[0]));
    trace << "step,guidestar\n";
    for (size_t k = 0; k < result.trace.size(); ++k)
        trace << k << ',' << format_double(result.trace[k]) << '\n';
    save_phase_mask(out_path(g, out[1]), result.mask);

    const double initial = result.trace.front();
    const double final_gs = result.trace.back();
    std::cout << "initial_guidestar: " << format_double(initial) << "\n"
              << "final_guidestar: " << format_double(final_gs) << "\n"
              << "accepted_steps: " << result.trace.size() - 1 << "\n";
    return 0;
}

int run_tm(const GlobalOptions& g, int modes, std::uint64_t seed, const std::string& measure,
           double noise, const std::string& out) {
    const TmExperimentReport report =
        run_tm_experiment(modes, seed, measure == "classical" ? noise : 0.0);
    const double corrected =
        measure == "classical" ? report.corrected_via_measured : report.corrected_central;

    std::ostringstream text;
    text << "modes: " << report.n_modes << "\n"
         << "target_mode: " << report.target_mode << "\n"
         << "uncorrected_central: " << format_double(report.uncorrected_central) << "\n"
         << "typical_uncorrected: " << format_double(report.typical_uncorrected) << "\n"
         << "background: " << format_double(report.background) << "\n"
         << "corrected_central: " << format_double(corrected) << "\n"
         << "enhancement: " << format_double(corrected / report.typical_uncorrected) << "\n";
    std::ofstream file(out_path(g, out));
    file << text.str();
    std::cout << text.str();
    return 0;
}

int run_calibrate_simulate(const GlobalOptions& g, const std::string& hidden,
                           std::uint64_t seed, int n, const std::string& out) {
    const PixelResponse response = parse_hidden_response(hidden);
    const SpeckleSet set = simulate_speckles(response, seed, n);
    const CalibrationCurve curve = correlation_curve(set.reference, set.images);
    std::ofstream file(out_path(g, out));
    file << "grayscale,m\n";
    for (size_t k = 0; k < curve.m.size(); ++k)
        file << k << ',' << format_double(curve.m[k]) << '\n';
    std::cout << "levels: " << curve.m.size() << "\n"
              << "g_pi: " << curve.landmarks.g_pi << "\n"
              << "g_two_pi: " << curve.landmarks.g_two_pi << "\n";
    return 0;
}

int run_calibrate_fit(const GlobalOptions& g, const std::string& in, const std::string& out) {
    std::ifstream file(in);
    if (!file) throw std::runtime_error(in + ": cannot open");
    std::string line;
    std::getline(file, line);  // header
    std::vector<double> m;
    while (std::getline(file, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        m.push_back(std::stod(line.substr(comma + 1)));
    }
    const CalibrationCurve curve = curve_from_values(std::move(m));
    const PixelResponse response = fit_response(curve);
    const InverseResponse lut = invert_response(response);

    std::ofstream lut_file(out_path(g, out));
    lut_file << "phase_rad,grayscale\n";
    const int steps = 256;
    for (int k = 0; k < steps; ++k) {
        const double y = kTwoPi * k / (steps - 1);
        lut_file << format_double(y) << ','
                 << format_double(std::round(lut.grayscale_at(y))) << '\n';
    }
    std::cout << "segments: " << response.segments.size() << "\n"
              << "phase_at_255: " << format_double(response.phase_at(255.0)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photon-pair correlation shaping simulator and estimator"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Configuration file (key = value lines)");

    GlobalOptions global;
    app.add_option("--threads", global.threads, "Worker thread cap (0 = auto)");
    if (const char* env = std::getenv("BIPHOTON_OUT_DIR")) global.out_dir = env;
    app.add_option("--out-dir", global.out_dir,
                   "Directory for output artifacts (env BIPHOTON_OUT_DIR)");

    // simulate frames
    auto* simulate = app.add_subcommand("simulate", "Synthesize camera data");
    auto* frames_cmd = simulate->add_subcommand("frames", "Synthesize an EMCCD frame stack");
    std::string truth_preset = "nf-flat", envelope = "gaussian:6.4";
    int sim_n = 32, sim_period = 8, sim_beta = 0;
    double sim_alpha = kPi / 2;
    DetectorModel model;
    long sim_frames = 1000;
    int sim_block = 1000;
    std::string sim_out = "stack.bpf1", truth_out;
    frames_cmd->add_option("--truth", truth_preset, "nf-flat|ff-flat|nf-grating|ff-grating");
    frames_cmd->add_option("--envelope", envelope, "disk:R | ring:R,T | gaussian:W (pixels)");
    frames_cmd->add_option("--n", sim_n, "Grid side (pixels)");
    frames_cmd->add_option("--period", sim_period, "Grating period (pixels)");
    frames_cmd->add_option("--alpha", sim_alpha, "Grating amplitude (radians)");
    frames_cmd->add_option("--beta", sim_beta, "Grating lateral offset (pixels)");
    frames_cmd->add_option("--mu", model.pairs_per_frame, "Mean pairs per frame");
    frames_cmd->add_option("--stray", model.stray_rate, "Mean stray photons per frame");
    frames_cmd->add_option("--noise", model.readout_noise, "Readout noise std dev (counts)");
    frames_cmd->add_option("--smear", model.smear_fraction, "Row smear fraction");
    frames_cmd->add_option("--eta", model.quantum_efficiency, "Quantum efficiency");
    frames_cmd->add_option("--seed", model.seed, "RNG seed");
    frames_cmd->add_option("--frames", sim_frames, "Total frame count");
    frames_cmd->add_option("--block-size", sim_block, "Frames synthesized per block");
    frames_cmd->add_option("--out", sim_out, "Output stack (BPF1)");
    frames_cmd->add_option("--save-truth", truth_out, "Also save the truth tensor (BPG2)");

    // process
    auto* process = app.add_subcommand("process", "Estimate G2 from a frame stack");
    std::string proc_input, proc_fix = "neighbor-mean", proc_rows = "none",
                proc_out = "g2.bpg2";
    int proc_block = 1000;
    std::vector<std::string> proc_proj;
    process->add_option("--input", proc_input, "Input stack (BPF1)")->required();
    process->add_option("--block-size", proc_block, "Frames per processing block");
    process->add_option("--fix", proc_fix, "Same-pixel policy: neighbor-mean|zero|none")
        ->check(CLI::IsMember({"neighbor-mean", "zero", "none"}));
    process->add_option("--rows", proc_rows, "Same-row policy: neighbor-mean|zero|none")
        ->check(CLI::IsMember({"neighbor-mean", "zero", "none"}));
    process->add_option("--out", proc_out, "Output tensor (BPG2)");
    process->add_option("--proj", proc_proj, "plus|minus followed by the CSV path")
        ->expected(2);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Grating shaping experiments");
    std::string sweep_config, sweep_betas, sweep_alphas, sweep_mode = "pairs",
                sweep_out = "sweep.csv";
    int sweep_n = 64, sweep_period = 8, sweep_steps = 25;
    double sweep_alpha = kPi / 2, sweep_waist = 0.0;
    sweep->add_option("config", sweep_config, "ff (translation) or nf (amplitude)")
        ->required()
        ->check(CLI::IsMember({"ff", "nf"}));
    sweep->add_option("--n", sweep_n, "Grid side");
    sweep->add_option("--period", sweep_period, "Grating period (pixels)");
    sweep->add_option("--alpha", sweep_alpha, "FF grating amplitude (radians)");
    sweep->add_option("--betas", sweep_betas, "FF offsets, comma separated (pixels)");
    sweep->add_option("--alphas", sweep_alphas, "NF amplitudes, comma separated (radians)");
    sweep->add_option("--steps", sweep_steps, "NF amplitude count over [0, 2*pi]");
    sweep->add_option("--mode", sweep_mode, "NF mode: pairs|classical")
        ->check(CLI::IsMember({"pairs", "classical"}));
    sweep->add_option("--waist", sweep_waist, "Envelope waist (pixels, 0 = n/5)");
    sweep->add_option("--out", sweep_out, "Output CSV");

    // ao
    auto* ao = app.add_subcommand("ao", "Adaptive-optics optimization demo");
    int ao_n = 32, ao_modes = 3, ao_steps = 11, ao_passes = 3;
    double ao_rms = 1.0;
    std::uint64_t ao_seed = 1;
    std::vector<std::string> ao_out = {"trace.csv", "mask.bpg1"};
    ao->add_option("--n", ao_n, "Grid side");
    ao->add_option("--modes", ao_modes, "Aberration mode count");
    ao->add_option("--rms", ao_rms, "Aberration RMS (radians)");
    ao->add_option("--seed", ao_seed, "Aberration seed");
    ao->add_option("--steps", ao_steps, "Sweep points per mode");
    ao->add_option("--passes", ao_passes, "Coordinate-descent passes");
    ao->add_option("--out", ao_out, "Trace CSV and correction mask paths")->expected(2);

    // tm
    auto* tm = app.add_subcommand("tm", "Transmission-matrix correction demo");
    int tm_modes = 64;
    std::uint64_t tm_seed = 1;
    std::string tm_measure = "oracle", tm_out = "report.txt";
    double tm_noise = 0.0;
    tm->add_option("--modes", tm_modes, "Mode count");
    tm->add_option("--seed", tm_seed, "Scatterer seed");
    tm->add_option("--measure", tm_measure, "classical|oracle")
        ->check(CLI::IsMember({"classical", "oracle"}));
    tm->add_option("--noise", tm_noise, "Relative intensity noise of the measurement");
    tm->add_option("--out", tm_out, "Report path");

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "SLM pixel-response calibration");
    auto* cal_sim = calibrate->add_subcommand("simulate", "Simulate a speckle correlation curve");
    std::string cal_hidden = "linear:230", cal_out = "curve.csv";
    std::uint64_t cal_seed = 1;
    int cal_n = 256;
    cal_sim->add_option("--hidden", cal_hidden, "linear:G2pi or quad:a1,a2[,a3]");
    cal_sim->add_option("--seed", cal_seed, "Speckle seed");
    cal_sim->add_option("--n", cal_n, "Speckle grid side");
    cal_sim->add_option("--out", cal_out, "Curve CSV");
    auto* cal_fit = calibrate->add_subcommand("fit", "Fit a curve and emit the phase LUT");
    std::string cal_in, cal_lut = "lut.csv";
    cal_fit->add_option("--in", cal_in, "Curve CSV")->required();
    cal_fit->add_option("--out", cal_lut, "LUT CSV (phase_rad, grayscale)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    set_max_threads(global.threads);

    try {
        if (frames_cmd->parsed())
            return run_simulate(global, truth_preset, envelope, sim_n, sim_period, sim_alpha,
                                sim_beta, model, sim_frames, sim_block, sim_out, truth_out);
        if (process->parsed())
            return run_process(global, proc_input, proc_block, proc_fix, proc_rows, proc_out,
                               proc_proj);
        if (sweep->parsed())
            return run_sweep(global, sweep_config, sweep_n, sweep_period, sweep_alpha,
                             sweep_betas, sweep_alphas, sweep_steps, sweep_mode, sweep_waist,
                             sweep_out);
        if (ao->parsed())
            return run_ao(global, ao_n, ao_modes, ao_rms, ao_seed, ao_steps, ao_passes, ao_out);
        if (tm->parsed()) return run_tm(global, tm_modes, tm_seed, tm_measure, tm_noise, tm_out);
        if (cal_sim->parsed())
            return run_calibrate_simulate(global, cal_hidden, cal_seed, cal_n, cal_out);
        if (cal_fit->parsed()) return run_calibrate_fit(global, cal_in, cal_lut);
        if (simulate->parsed() || calibrate->parsed()) {
            std::cerr << "missing subcommand, see --help\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
