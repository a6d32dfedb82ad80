#pragma once

#include <vector>

#include "biphoton/estimator.hpp"
#include "biphoton/fields.hpp"
#include "biphoton/fitting.hpp"
#include "biphoton/propagation.hpp"

// The two scripted shaping experiments: translating a grating in the FF
// configuration while reading the minus projection, and sweeping the grating
// amplitude in the NF configuration while reading the sum projection (with a
// coherent-light reference run). Diffraction orders of period-P gratings sit
// at multiples of n/P bins from the projection origin.

namespace biphoton {

struct SweepResult {
    std::vector<double> parameters;       // beta in pixels or alpha in radians
    std::vector<int> orders;              // -max_order .. +max_order
    Eigen::MatrixXd magnitudes;           // parameters x orders
    std::vector<SinusoidFit> fits;        // one per order
};

/// Windowed magnitude of diffraction orders -max_order..+max_order along the
/// grating axis. Throws if a predicted peak window leaves the projection.
std::vector<double> extract_orders(const Projection& proj, int period_px, int max_order,
                                   int window = 1,
                                   Orientation orientation = Orientation::Horizontal);

/// Same readout on a camera-plane intensity image (classical reference runs).
std::vector<double> extract_orders(const IntensityImage& image, int period_px, int max_order,
                                   int window = 1,
                                   Orientation orientation = Orientation::Horizontal);

/// Far-field grating translation: C- order magnitudes vs lateral offset beta,
/// with per-order sinusoid fits. Gaussian correlation envelope by default.
SweepResult ff_translation_sweep(const GridSpec& spec, int period_px,
                                 const std::vector<int>& offsets_px, double alpha = kPi / 2,
                                 double envelope_waist_px = 0.0 /* 0 = n/5 */);

enum class SweepMode { Pairs, Classical };

/// Near-field grating amplitude sweep: C+ (pairs) or camera intensity
/// (classical) order magnitudes vs alpha, with per-order sinusoid fits.
SweepResult nf_amplitude_sweep(const GridSpec& spec, int period_px,
                               const std::vector<double>& amplitudes,
                               SweepMode mode = SweepMode::Pairs,
                               double envelope_waist_px = 0.0 /* 0 = n/5 */);

}  // namespace biphoton
