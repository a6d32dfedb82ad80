#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "biphoton/fitting.hpp"

// SLM pixel-response calibration from speckle decorrelation. A hidden
// grayscale-to-phase response theta = f(G) drives the interference of two
// fixed speckle fields; the Pearson correlation of each speckle image with
// the flat-mask reference traces out A + B*cos(f(G)). Rescale, split at the
// minimum, arccos both halves, fit quadratics, and invert to get the lookup
// table that linearizes the device.

namespace biphoton {

struct QuadSegment {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;  // phase = a1*G^2 + a2*G + a3
    double g_lo = 0.0, g_hi = 255.0;
};

struct PixelResponse {
    std::vector<QuadSegment> segments;  // ordered, contiguous grayscale ranges

    double phase_at(double g) const;
    /// f(0) ~ 0, monotone non-decreasing, f(255) within [0.9, 1.5] * 2*pi.
    void validate() const;

    /// Linear response reaching 2*pi at the given grayscale level.
    static PixelResponse linear(double g_two_pi);
    /// Single quadratic segment over the full grayscale range.
    static PixelResponse quadratic(double a1, double a2, double a3 = 0.0);
};

struct SpeckleSet {
    int n = 0;
    Eigen::MatrixXcd s_passive;  // fixed speckle of the untouched pixels
    Eigen::MatrixXcd s_active;   // fixed speckle of the modulated pixels
    Eigen::MatrixXd reference;   // image at G = 0
    std::vector<Eigen::MatrixXd> images;  // one per grayscale 0..255

    /// Interference image for an arbitrary modulation phase.
    Eigen::MatrixXd image_at_phase(double theta) const;
};

/// Reference plus the 256 grayscale speckle images under the hidden response.
SpeckleSet simulate_speckles(const PixelResponse& hidden, std::uint64_t seed, int n = 256);

struct CalibrationCurve {
    std::vector<double> m;  // Pearson correlation per grayscale level
    struct Landmarks {
        int g0 = -1, g_half_pi = -1, g_pi = -1, g_three_half_pi = -1, g_two_pi = -1;
    } landmarks;
};

/// Pearson correlation of each image against the reference, with landmark
/// detection on a 5-point moving average of the curve.
CalibrationCurve correlation_curve(const Eigen::MatrixXd& reference,
                                   const std::vector<Eigen::MatrixXd>& images);

/// Landmark detection on an already-measured correlation curve.
CalibrationCurve curve_from_values(std::vector<double> m);

/// Recover the pixel response: rescale to [-1, 1], split at the minimum,
/// arccos both halves, quadratic fits merged at G_pi.
PixelResponse fit_response(const CalibrationCurve& curve);

struct InverseResponse {
    std::vector<QuadSegment> segments;  // copied from the forward response
    double phase_max = 0.0;

    /// Grayscale level producing the requested phase (continuous).
    double grayscale_at(double phase) const;
};

InverseResponse invert_response(const PixelResponse& response);

struct LutReport {
    double fitted_period = 0.0;
    double fitted_amplitude = 0.0;
    double residual_rms = 0.0;
};

/// Closed-loop check: drive the hidden response through the lookup table over
/// linear phases [0, 2*pi] and fit the resulting correlation to a cosine.
LutReport verify_lut(const PixelResponse& hidden, const InverseResponse& lut,
                     std::uint64_t seed, int n = 256);

/// Pearson correlation coefficient of two equal-size images.
double pearson_correlation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace biphoton
