#pragma once

#include <Eigen/Dense>
#include <variant>

#include "biphoton/grid.hpp"

// Input-state construction for the two shaping configurations. In the
// far-field configuration the pairs are anti-correlated at the shaping plane
// (partner pixel n-1-i); in the near-field configuration they are correlated
// (partner pixel i). Delta variants store the correlation envelope and expand
// on demand to the dense two-photon tensor.

namespace biphoton {

struct Disk {
    double radius_px;
};
struct Ring {
    double radius_px;
    double thickness_px;
};
struct Gaussian {
    double waist_px;
};
using EnvelopeShape = std::variant<Disk, Ring, Gaussian>;

/// Uniform-phase nonnegative envelope, normalized to unit power.
ComplexGrid make_envelope(const GridSpec& spec, const EnvelopeShape& shape);

enum class PairConfig { FF, NF };
enum class StateVariant { CorrelatedDelta, AntiCorrelatedDelta, Full4D };

struct BiphotonState {
    StateVariant variant = StateVariant::CorrelatedDelta;
    GridSpec spec;
    ComplexGrid envelope;      // delta variants only
    Eigen::MatrixXcd tensor;   // Full4D only, n^2 x n^2, unit norm
    double corr_width = 0.0;   // sigma in pixels; 0 = exact Kronecker delta

    bool is_delta() const { return variant != StateVariant::Full4D; }
};

/// Delta-form state for a shaping configuration; sigma > 0 smears the
/// correlation with a Gaussian of that width (in pixels).
BiphotonState make_biphoton(const GridSpec& spec, PairConfig config,
                            const ComplexGrid& envelope, double sigma = 0.0);

/// Dense n^2 x n^2 two-photon tensor for any state (identity on Full4D).
/// phi(r1, r2) is exchange symmetric and normalized to unit total weight.
BiphotonState to_full4d(const BiphotonState& state);

/// Flat index of pixel (i, j) in unwrapped n^2-vectors: i * n + j.
inline int pixel_index(int n, int i, int j) { return i * n + j; }

/// Envelope amplitude the pair correlation carries at shaping-plane pixel
/// (i, j): the envelope sampled at twice the pixel's centered offset. FF uses
/// half-pixel centers (anti-correlated pairing), NF integer centers.
std::complex<double> envelope_at_doubled(const ComplexGrid& envelope, PairConfig config,
                                         int i, int j);

enum class Orientation { Horizontal, Vertical };

/// Binary square-wave phase grating with values {0, alpha}, duty cycle 1/2,
/// period P pixels, shifted laterally by beta pixels. At beta = 0 a step sits
/// at the grid center.
PhaseMask make_grating(const GridSpec& spec, int period_px, double alpha,
                       int offset_px = 0, Orientation orientation = Orientation::Horizontal);

}  // namespace biphoton
