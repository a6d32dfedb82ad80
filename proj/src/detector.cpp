#include "biphoton/detector.hpp"

#include <cmath>

#include "biphoton/rng.hpp"

namespace biphoton {

FrameBlock synthesize_block(const G2Tensor& truth, const DetectorModel& model, int m,
                            std::uint64_t first_frame_index) {
    model.validate();
    if (m < 2) throw std::invalid_argument("synthesize_block: need at least 2 frames");
    const double total = truth.total();
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("synthesize_block: truth tensor must be normalized to 1");

    const int n = truth.spec.n;
    const int npix = n * n;

    // Joint and marginal sampling tables (negative statistical-noise entries
    // are floored to zero inside cumulative_from_weights).
    std::vector<double> joint_cdf;
    {
        std::vector<double> flat(static_cast<size_t>(npix) * npix);
        for (int a = 0; a < npix; ++a)
            for (int b = 0; b < npix; ++b)
                flat[static_cast<size_t>(a) * npix + b] = truth.data(a, b);
        joint_cdf = cumulative_from_weights(flat.data(), flat.size());
    }
    std::vector<double> marginal(npix, 0.0);
    for (int a = 0; a < npix; ++a) {
        double s = 0.0;
        for (int b = 0; b < npix; ++b) {
            double v = truth.data(a, b);
            s += v > 0.0 ? v : 0.0;
        }
        marginal[a] = s;
    }
    const std::vector<double> marginal_cdf = cumulative_from_weights(marginal.data(), marginal.size());

    FrameBlock block(n, m);
    const bool needs_real = model.readout_noise > 0.0 || model.smear_fraction > 0.0;
    std::vector<double> real_frame;
    std::vector<double> smeared;
    std::vector<int> counts(npix);

    for (int f = 0; f < m; ++f) {
        Rng rng(derive_stream(model.seed, first_frame_index + static_cast<std::uint64_t>(f)));
        std::fill(counts.begin(), counts.end(), 0);

        const long pairs = rng.poisson(model.pairs_per_frame);
        for (long p = 0; p < pairs; ++p) {
            const size_t idx = rng.sample_cdf(joint_cdf);
            const int a = static_cast<int>(idx / npix);
            const int b = static_cast<int>(idx % npix);
            if (rng.uniform() < model.quantum_efficiency) ++counts[a];
            if (rng.uniform() < model.quantum_efficiency) ++counts[b];
        }
        const long strays = rng.poisson(model.stray_rate);
        for (long s = 0; s < strays; ++s) {
            const size_t a = rng.sample_cdf(marginal_cdf);
            if (rng.uniform() < model.quantum_efficiency) ++counts[a];
        }

        if (!needs_real) {
            for (int k = 0; k < npix; ++k)
                block.data[static_cast<size_t>(f) * npix + k] =
                    static_cast<std::uint16_t>(counts[k]);
            continue;
        }

        real_frame.assign(counts.begin(), counts.end());
        if (model.readout_noise > 0.0) {
            for (int k = 0; k < npix; ++k) {
                double v = real_frame[k] + model.readout_noise * rng.gaussian();
                real_frame[k] = v < 0.0 ? 0.0 : std::round(v);
            }
        }
        if (model.smear_fraction > 0.0) {
            // Each pixel keeps (1 - phi) of its charge; the donated phi*x is
            // spread geometrically (ratio phi) over the downstream pixels of
            // the same row, residue past the row edge lost to readout.
            const double phi = model.smear_fraction;
            smeared.assign(real_frame.size(), 0.0);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double x = real_frame[static_cast<size_t>(i) * n + j];
                    if (x == 0.0) continue;
                    smeared[static_cast<size_t>(i) * n + j] += (1.0 - phi) * x;
                    double share = phi * x * (1.0 - phi);
                    for (int k = j + 1; k < n && share > 0.0; ++k) {
                        smeared[static_cast<size_t>(i) * n + k] += share;
                        share *= phi;
                    }
                }
            }
            real_frame = smeared;
        }
        for (int k = 0; k < npix; ++k) {
            double v = std::round(real_frame[k]);
            if (v < 0.0) v = 0.0;
            if (v > 65535.0) v = 65535.0;
            block.data[static_cast<size_t>(f) * npix + k] = static_cast<std::uint16_t>(v);
        }
    }
    return block;
}

}  // namespace biphoton
