#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "biphoton/propagation.hpp"

// Forward model of the camera: photon pairs drawn from a ground-truth G2,
// uncorrelated stray photons, Gaussian readout noise and the row charge-smear
// artifact of the readout register. Every frame owns an RNG stream derived
// from (seed, frame index), so synthesis is reproducible and order-free.

namespace biphoton {

struct DetectorModel {
    double pairs_per_frame = 5.0;    // mean real-pair count per frame
    double stray_rate = 0.0;         // mean uncorrelated photons per frame
    double readout_noise = 0.0;      // Gaussian std dev, counts
    double smear_fraction = 0.0;     // fraction leaked into same-row downstream pixels
    double quantum_efficiency = 1.0; // per-photon detection probability
    std::uint64_t seed = 1;

    void validate() const {
        if (pairs_per_frame < 0.0 || stray_rate < 0.0 || readout_noise < 0.0)
            throw std::invalid_argument("DetectorModel: rates and noise must be >= 0");
        if (quantum_efficiency <= 0.0 || quantum_efficiency > 1.0)
            throw std::invalid_argument("DetectorModel: quantum efficiency must be in (0, 1]");
        if (smear_fraction < 0.0 || smear_fraction >= 1.0)
            throw std::invalid_argument("DetectorModel: smear fraction must be in [0, 1)");
    }
};

struct FrameBlock {
    int n = 0;  // frame side
    int m = 0;  // frame count, >= 2
    std::vector<std::uint16_t> data;  // m frames, row-major

    FrameBlock() = default;
    FrameBlock(int n_, int m_) : n(n_), m(m_), data(static_cast<size_t>(n_) * n_ * m_, 0) {
        if (n < 1) throw std::invalid_argument("FrameBlock: side must be positive");
        if (m < 2) throw std::invalid_argument("FrameBlock: need at least 2 frames");
    }

    std::uint16_t& at(int frame, int i, int j) {
        return data[(static_cast<size_t>(frame) * n + i) * n + j];
    }
    std::uint16_t at(int frame, int i, int j) const {
        return data[(static_cast<size_t>(frame) * n + i) * n + j];
    }
    std::span<const std::uint16_t> frame(int f) const {
        return {data.data() + static_cast<size_t>(f) * n * n, static_cast<size_t>(n) * n};
    }
};

/// Synthesize m frames from a normalized truth tensor. first_frame_index
/// offsets the per-frame RNG streams so consecutive blocks of one acquisition
/// stay statistically independent yet reproducible.
FrameBlock synthesize_block(const G2Tensor& truth, const DetectorModel& model, int m,
                            std::uint64_t first_frame_index = 0);

}  // namespace biphoton
