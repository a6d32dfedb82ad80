// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Every tolerance is written out literally next to the check it gates.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "biphoton/applications.hpp"
#include "biphoton/detector.hpp"
#include "biphoton/estimator.hpp"
#include "biphoton/experiments.hpp"
#include "biphoton/fields.hpp"
#include "biphoton/propagation.hpp"
#include "biphoton/rng.hpp"
#include "biphoton/slm_calibration.hpp"
#include "biphoton/threading.hpp"

using namespace biphoton;

namespace {

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
};

GridSpec spec_of(int n) { return GridSpec(n, 8e-6, 810e-9, 0.1); }

PhaseMask random_binary_grating(const GridSpec& spec, Rng& rng) {
    const int periods[] = {4, 6, 8, 10, 16};
    const int period = periods[rng.next_u64() % 5];
    const double alpha = kTwoPi * rng.uniform();
    const int beta = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(period));
    const auto orientation =
        (rng.next_u64() & 1) ? Orientation::Horizontal : Orientation::Vertical;
    return make_grating(spec, period, alpha, beta, orientation);
}

double l1_distance_normalized(const Projection& a, const Projection& b) {
    const double sa = a.data.sum();
    const double sb = b.data.sum();
    return (a.data / sa - b.data / sb).cwiseAbs().sum();
}

// ---- criterion bodies -----------------------------------------------------

bool oracle_equivalence(std::string& detail) {
    Rng rng(2024);
    double worst = 0.0;
    for (int n : {8, 16}) {
        const auto spec = spec_of(n);
        const auto env = make_envelope(spec, Gaussian{n / 5.0});
        for (PairConfig config : {PairConfig::FF, PairConfig::NF}) {
            const auto state = make_biphoton(spec, config, env);
            for (int trial = 0; trial < 10; ++trial) {
                const auto mask = random_binary_grating(spec, rng);
                const auto fast = propagate_pairs_analytic(state, mask);
                const auto full = propagate_g2_full(state, mask);
                worst = std::max(worst, (fast.data - full.data).cwiseAbs().maxCoeff());
            }
        }
    }
    char buf[80];
    std::snprintf(buf, sizeof buf, "max |analytic - brute force| = %.3e (want <1e-10)", worst);
    detail = buf;
    return worst < 1e-10;
}

bool nf_frequency_doubling(std::string& detail) {
    const auto spec = spec_of(64);
    std::vector<double> alphas;
    for (int k = 0; k < 25; ++k) alphas.push_back(kTwoPi * k / 24);
    const double step = alphas[1] - alphas[0];

    const auto classical = nf_amplitude_sweep(spec, 8, alphas, SweepMode::Classical);
    const auto pairs = nf_amplitude_sweep(spec, 8, alphas, SweepMode::Pairs);

    const double classical_period = classical.fits[3].period;
    const double pairs_period = pairs.fits[3].period;
    size_t argmax = 0;
    for (size_t p = 1; p < alphas.size(); ++p)
        if (classical.magnitudes(p, 3) > classical.magnitudes(argmax, 3)) argmax = p;

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "classical period %.4f (want 2pi±5%%), max at %.4f (want pi±%.4f), pairs "
                  "period %.4f (want pi±5%%)",
                  classical_period, alphas[argmax], step, pairs_period);
    detail = buf;
    return std::abs(classical_period - kTwoPi) <= 0.05 * kTwoPi &&
           std::abs(alphas[argmax] - kPi) <= step + 1e-12 &&
           std::abs(pairs_period - kPi) <= 0.05 * kPi;
}

bool ff_symmetrization(std::string& detail) {
    const auto spec = spec_of(64);
    std::vector<int> offsets;
    for (int b = 0; b <= 8; ++b) offsets.push_back(b);
    const auto sweep = ff_translation_sweep(spec, 8, offsets);

    const double extinction = sweep.magnitudes(0, 3) / sweep.magnitudes(0, 2);
    size_t first_argmax = 0;
    for (size_t p = 1; p < offsets.size(); ++p)
        if (sweep.magnitudes(p, 3) > sweep.magnitudes(first_argmax, 3)) first_argmax = p;

    // centrosymmetry of the minus projection at every offset
    const auto env = make_envelope(spec, Gaussian{spec.n / 5.0});
    const auto state = make_biphoton(spec, PairConfig::FF, env);
    double worst_asym = 0.0;
    for (int beta : offsets) {
        const auto cm =
            project_minus(propagate_pairs_analytic(state, make_grating(spec, 8, kPi / 2, beta)));
        const int size = cm.size();
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                worst_asym = std::max(
                    worst_asym, std::abs(cm.data(i, j) - cm.data(size - 1 - i, size - 1 - j)));
    }

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "beta=0 first/zero = %.3e (want <1e-3), first-order max at beta=%d (want 2), "
                  "max asymmetry %.3e (want <1e-10)",
                  extinction, offsets[first_argmax], worst_asym);
    detail = buf;
    return extinction < 1e-3 && offsets[first_argmax] == 2 && worst_asym < 1e-10;
}

bool estimator_consistency(std::string& detail) {
    const int n = 32;
    const auto spec = spec_of(n);
    const auto env = make_envelope(spec, Gaussian{spec.n / 5.0});
    const auto state = make_biphoton(spec, PairConfig::NF, env);
    const auto truth = propagate_pairs_analytic(state, PhaseMask::flat(spec));
    const auto truth_proj = project_plus(truth);

    DetectorModel model;
    model.pairs_per_frame = 5.0;
    model.stray_rate = 2.0;
    model.seed = 20240601;

    const int block = 1000;
    auto reconstruct = [&](long frames, std::uint64_t stream_base) {
        G2Accumulator acc(n);
        for (long start = 0; start < frames; start += block)
            accumulate_block(acc, synthesize_block(truth, model, block, stream_base + start));
        return project_plus(fix_artifacts(finalize(acc), FixPolicy::NeighborMean));
    };

    const auto main_run = reconstruct(100000, 0);
    const auto stats = projection_stats(main_run);

    const double l1_small = l1_distance_normalized(reconstruct(10000, 1000000), truth_proj);
    const double l1_large = l1_distance_normalized(reconstruct(40000, 2000000), truth_proj);
    const double ratio = l1_small / l1_large;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "peak at (%d,%d) (want 0,0), SNR %.1f (want >10), L1 ratio 1e4/4e4 = %.2f "
                  "(want 1.7..2.3)",
                  stats.peak_di, stats.peak_dj, stats.snr, ratio);
    detail = buf;
    return stats.peak_di == 0 && stats.peak_dj == 0 && stats.snr > 10.0 && ratio >= 1.7 &&
           ratio <= 2.3;
}

bool intensity_invariance(std::string& detail) {
    const auto spec = spec_of(32);
    const auto env = make_envelope(spec, Gaussian{spec.n / 5.0});
    const auto state = make_biphoton(spec, PairConfig::NF, env);

    Rng rng(5150);
    double worst_uniformity = 0.0;
    double worst_pair_diff = 0.0;
    IntensityImage reference;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd theta(spec.n, spec.n);
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j) theta(i, j) = kTwoPi * rng.uniform();
        const auto image = propagate_pairs_intensity(state, PhaseMask(spec, theta));
        worst_uniformity =
            std::max(worst_uniformity, image.data.maxCoeff() / image.data.minCoeff() - 1.0);
        if (trial == 0)
            reference = image;
        else
            worst_pair_diff = std::max(
                worst_pair_diff, (image.data - reference.data).cwiseAbs().maxCoeff());
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "uniformity %.3e (want <1e-9), mask-to-mask %.3e (want <1e-10)",
                  worst_uniformity, worst_pair_diff);
    detail = buf;
    return worst_uniformity < 1e-9 && worst_pair_diff < 1e-10;
}

bool calibration_roundtrip(std::string& detail) {
    struct Hidden {
        const char* name;
        PixelResponse response;
    };
    const std::vector<Hidden> cases = {
        {"linear", PixelResponse::linear(230.0)},
        {"convex", PixelResponse::quadratic(kTwoPi / (230.0 * 230.0), 0.0)},
        {"concave", PixelResponse::quadratic(-7.383e-5, 0.0443)},
    };
    double worst_err = 0.0, worst_period_dev = 0.0;
    for (const auto& test : cases) {
        const auto set = simulate_speckles(test.response, 1, 256);
        const auto fitted = fit_response(correlation_curve(set.reference, set.images));
        for (int g = 0; g <= 255; ++g) {
            if (test.response.phase_at(g) > kTwoPi) break;
            worst_err = std::max(worst_err,
                                 std::abs(fitted.phase_at(g) - test.response.phase_at(g)));
        }
        const auto report = verify_lut(test.response, invert_response(fitted), 1, 256);
        worst_period_dev =
            std::max(worst_period_dev, std::abs(report.fitted_period - kTwoPi) / kTwoPi);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "max phase error %.4f rad (want <0.05), period deviation %.3f%% (want <2%%)",
                  worst_err, 100.0 * worst_period_dev);
    detail = buf;
    return worst_err < 0.05 && worst_period_dev < 0.02;
}

bool ao_endpoint(std::string& detail) {
    const auto spec = spec_of(32);
    const auto env = make_envelope(spec, Gaussian{spec.n / 5.0});
    const auto state = make_biphoton(spec, PairConfig::NF, env);
    const auto basis = AberrationModel::low_order(spec, 3);

    Rng rng(77);
    std::vector<double> coeffs(3);
    double norm = 0.0;
    for (auto& c : coeffs) {
        c = rng.gaussian();
        norm += c * c;
    }
    for (auto& c : coeffs) c /= std::sqrt(norm);  // 1 rad RMS total
    const auto aberration = basis.mask_from_coefficients(coeffs);

    CoordinateDescentModes optimizer;
    optimizer.passes = 3;
    const auto result = ao_optimize(state, aberration, optimizer);
    const double reference = guidestar_value(
        project_plus(propagate_pairs_analytic(state, PhaseMask::flat(spec))));

    bool monotone = true;
    for (size_t k = 0; k + 1 < result.trace.size(); ++k)
        monotone &= result.trace[k + 1] >= result.trace[k];

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "final/reference = %.3f (want >=0.9 in <=3 passes), trace monotone: %s",
                  result.trace.back() / reference, monotone ? "yes" : "no");
    detail = buf;
    return result.trace.back() >= 0.9 * reference && monotone;
}

bool tm_correction(std::string& detail) {
    const auto small = run_tm_experiment(64, 404);
    const auto large = run_tm_experiment(256, 404);
    const double measured_match =
        std::abs(small.corrected_via_measured - small.corrected_central) /
        small.corrected_central;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "corrected/uncorrected %.1f (want >=10), enhancement 64: %.1f < 256: %.1f, "
                  "measured-vs-oracle %.2e (want <0.05)",
                  small.corrected_central / small.uncorrected_central, small.enhancement,
                  large.enhancement, measured_match);
    detail = buf;
    return small.corrected_central >= 10.0 * small.uncorrected_central &&
           large.enhancement > small.enhancement && measured_match < 0.05;
}

bool streaming_determinism(std::string& detail) {
    const int n = 16;
    const auto spec = spec_of(n);
    const auto env = make_envelope(spec, Gaussian{3.0});
    const auto state = make_biphoton(spec, PairConfig::NF, env);
    const auto truth = propagate_pairs_analytic(state, PhaseMask::flat(spec));

    DetectorModel model;
    model.pairs_per_frame = 4.0;
    model.stray_rate = 2.0;
    model.seed = 999;

    const auto stack_a = synthesize_block(truth, model, 2000);
    const auto stack_b = synthesize_block(truth, model, 2000);
    const bool bit_identical = stack_a.data == stack_b.data;

    auto reconstruct = [&](int workers) {
        set_max_threads(workers);
        G2Accumulator acc(n);
        accumulate_block(acc, stack_a);
        set_max_threads(0);
        return project_plus(finalize(acc));
    };
    const auto p1 = reconstruct(1);
    const auto p4 = reconstruct(4);
    const auto p8 = reconstruct(8);
    const double spread = std::max((p1.data - p4.data).cwiseAbs().maxCoeff(),
                                   (p1.data - p8.data).cwiseAbs().maxCoeff());

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "synthesis bit-identical: %s, worker spread %.1e (want <1e-12)",
                  bit_identical ? "yes" : "no", spread);
    detail = buf;
    return bit_identical && spread < 1e-12;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"1 oracle equivalence (analytic vs brute force, n=8,16)", oracle_equivalence},
        {"2 NF frequency doubling (classical 2pi, pairs pi)", nf_frequency_doubling},
        {"3 FF symmetrization (extinction at beta=0, max at P/4)", ff_symmetrization},
        {"4 estimator consistency (peak, SNR, L1 halving)", estimator_consistency},
        {"5 intensity invariance (uniform, mask independent)", intensity_invariance},
        {"6 calibration round trip (three hidden responses)", calibration_roundtrip},
        {"7 AO endpoint (>=90% guidestar in <=3 passes)", ao_endpoint},
        {"8 TM correction (>=10x, scaling, classical measurement)", tm_correction},
        {"9 streaming determinism (workers and synthesis)", streaming_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %s [%.1fs] %s\n", ok ? "PASS" : "FAIL",
                    criterion.name.c_str(), seconds, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
