#include "biphoton/slm_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "biphoton/dft.hpp"
#include "biphoton/grid.hpp"
#include "biphoton/rng.hpp"

namespace biphoton {

namespace {

constexpr double kArccosClampTol = 0.01;

std::vector<double> moving_average5(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> out(v.size());
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        int count = 0;
        for (int k = -2; k <= 2; ++k) {
            const int j = i + k;
            if (j < 0 || j >= n) continue;
            sum += v[static_cast<size_t>(j)];
            ++count;
        }
        out[static_cast<size_t>(i)] = sum / count;
    }
    return out;
}

Eigen::MatrixXcd random_phase_speckle(int n, Rng& rng) {
    const int c = n / 2;
    const double radius = n / 4.0;
    Eigen::MatrixXcd pupil = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::hypot(i - c, j - c) <= radius) {
                const double phi = kTwoPi * rng.uniform();
                pupil(i, j) = std::complex<double>(std::cos(phi), std::sin(phi));
            }
    return centered_dft2(pupil);
}

double safe_arccos(double v) {
    if (v > 1.0) {
        if (v > 1.0 + kArccosClampTol)
            throw std::runtime_error("fit_response: rescaled correlation exceeds 1 beyond tolerance");
        v = 1.0;
    } else if (v < -1.0) {
        if (v < -1.0 - kArccosClampTol)
            throw std::runtime_error("fit_response: rescaled correlation below -1 beyond tolerance");
        v = -1.0;
    }
    return std::acos(v);
}

}  // namespace

double PixelResponse::phase_at(double g) const {
    if (segments.empty()) throw std::logic_error("PixelResponse: no segments");
    for (const auto& s : segments)
        if (g >= s.g_lo && g <= s.g_hi) return (s.a1 * g + s.a2) * g + s.a3;
    // clamp to the nearest segment end
    const auto& first = segments.front();
    if (g < first.g_lo) return (first.a1 * g + first.a2) * g + first.a3;
    const auto& last = segments.back();
    return (last.a1 * g + last.a2) * g + last.a3;
}

void PixelResponse::validate() const {
    if (std::abs(phase_at(0.0)) > 0.05)
        throw std::invalid_argument("PixelResponse: f(0) must be 0");
    double prev = phase_at(0.0);
    for (int g = 1; g <= 255; ++g) {
        const double cur = phase_at(g);
        if (cur < prev - 1e-9)
            throw std::invalid_argument("PixelResponse: response must be monotone non-decreasing");
        prev = cur;
    }
    const double top = phase_at(255.0);
    if (top < 0.9 * kTwoPi || top > 1.5 * kTwoPi)
        throw std::invalid_argument(
            "PixelResponse: f(255) must cover 0.9 to 1.5 full turns");
}

PixelResponse PixelResponse::linear(double g_two_pi) {
    PixelResponse r;
    r.segments.push_back({0.0, kTwoPi / g_two_pi, 0.0, 0.0, 255.0});
    r.validate();
    return r;
}

PixelResponse PixelResponse::quadratic(double a1, double a2, double a3) {
    PixelResponse r;
    r.segments.push_back({a1, a2, a3, 0.0, 255.0});
    r.validate();
    return r;
}

Eigen::MatrixXd SpeckleSet::image_at_phase(double theta) const {
    const std::complex<double> rot(std::cos(theta), std::sin(theta));
    return (s_passive + rot * s_active).cwiseAbs2();
}

SpeckleSet simulate_speckles(const PixelResponse& hidden, std::uint64_t seed, int n) {
    SpeckleSet set;
    set.n = n;
    Rng rng_p(derive_stream(seed, 0x5350ULL));
    Rng rng_a(derive_stream(seed, 0x5341ULL));
    set.s_passive = random_phase_speckle(n, rng_p);
    set.s_active = random_phase_speckle(n, rng_a);
    set.reference = set.image_at_phase(hidden.phase_at(0.0));
    set.images.reserve(256);
    for (int g = 0; g < 256; ++g)
        set.images.push_back(set.image_at_phase(hidden.phase_at(g)));
    return set;
}

double pearson_correlation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("pearson_correlation: size mismatch");
    const double mean_a = a.mean();
    const double mean_b = b.mean();
    const Eigen::ArrayXXd da = a.array() - mean_a;
    const Eigen::ArrayXXd db = b.array() - mean_b;
    const double var_a = (da * da).sum();
    const double var_b = (db * db).sum();
    if (!(var_a > 0.0) || !(var_b > 0.0))
        throw std::invalid_argument("pearson_correlation: flat image, correlation undefined");
    return (da * db).sum() / std::sqrt(var_a * var_b);
}

CalibrationCurve correlation_curve(const Eigen::MatrixXd& reference,
                                   const std::vector<Eigen::MatrixXd>& images) {
    std::vector<double> m;
    m.reserve(images.size());
    for (const auto& img : images) m.push_back(pearson_correlation(img, reference));
    return curve_from_values(std::move(m));
}

CalibrationCurve curve_from_values(std::vector<double> m) {
    if (m.size() < 16)
        throw std::invalid_argument("curve_from_values: too few grayscale levels");
    CalibrationCurve curve;
    curve.m = std::move(m);

    const std::vector<double> smooth = moving_average5(curve.m);
    const int count = static_cast<int>(smooth.size());

    // G_pi: global minimum of the smoothed curve.
    int g_pi = 0;
    for (int g = 1; g < count; ++g)
        if (smooth[static_cast<size_t>(g)] < smooth[static_cast<size_t>(g_pi)]) g_pi = g;

    // First and second maxima on either side of the minimum.
    int g0 = 0;
    for (int g = 1; g < g_pi; ++g)
        if (smooth[static_cast<size_t>(g)] > smooth[static_cast<size_t>(g0)]) g0 = g;
    int g_two_pi = -1;
    if (g_pi + 1 < count) {
        g_two_pi = g_pi + 1;
        for (int g = g_pi + 2; g < count; ++g)
            if (smooth[static_cast<size_t>(g)] > smooth[static_cast<size_t>(g_two_pi)])
                g_two_pi = g;
    }

    const double hi = smooth[static_cast<size_t>(g0)];
    const double lo = smooth[static_cast<size_t>(g_pi)];
    if (!(hi > lo))
        throw std::invalid_argument("correlation_curve: curve shows no modulation");
    auto rescaled = [&](int g) { return 2.0 * (smooth[static_cast<size_t>(g)] - lo) / (hi - lo) - 1.0; };

    // The curve must climb most of the way back up, otherwise the device never
    // reaches a full turn and the second maximum is not a real landmark.
    if (g_two_pi >= 0 && rescaled(g_two_pi) < 0.8) g_two_pi = -1;

    int g_half = g0;
    for (int g = g0; g <= g_pi; ++g)
        if (std::abs(rescaled(g)) < std::abs(rescaled(g_half))) g_half = g;
    int g_three_half = -1;
    if (g_two_pi > 0) {
        g_three_half = g_pi;
        for (int g = g_pi; g <= g_two_pi; ++g)
            if (std::abs(rescaled(g)) < std::abs(rescaled(g_three_half))) g_three_half = g;
    }

    curve.landmarks = {g0, g_half, g_pi, g_three_half, g_two_pi};
    return curve;
}

PixelResponse fit_response(const CalibrationCurve& curve) {
    const auto& lm = curve.landmarks;
    if (lm.g_two_pi < 0)
        throw std::invalid_argument(
            "fit_response: insufficient modulation, pixels are not reaching a full turn");
    if (!(lm.g0 < lm.g_pi && lm.g_pi < lm.g_two_pi))
        throw std::invalid_argument("fit_response: landmarks out of order");

    // Rescale the raw curve with the smoothed extremes (the raw values may
    // poke slightly past +-1; safe_arccos clamps within tolerance).
    const std::vector<double> smooth = moving_average5(curve.m);
    const double hi = smooth[static_cast<size_t>(lm.g0)];
    const double lo = smooth[static_cast<size_t>(lm.g_pi)];
    auto rescale = [&](double v) { return 2.0 * (v - lo) / (hi - lo) - 1.0; };

    std::vector<double> g_left, y_left;
    for (int g = lm.g0; g <= lm.g_pi; ++g) {
        g_left.push_back(static_cast<double>(g));
        y_left.push_back(safe_arccos(rescale(curve.m[static_cast<size_t>(g)])));
    }
    std::vector<double> g_right, y_right;
    for (int g = lm.g_pi + 1; g <= lm.g_two_pi; ++g) {
        g_right.push_back(static_cast<double>(g));
        y_right.push_back(kTwoPi - safe_arccos(rescale(curve.m[static_cast<size_t>(g)])));
    }
    if (g_left.size() < 3 || g_right.size() < 3)
        throw std::invalid_argument("fit_response: halves too short for quadratic fits");

    const Eigen::VectorXd left = polyfit(g_left, y_left, 2);

    // Right half fitted on data shifted to the origin, then re-shifted so the
    // two models meet at G_pi.
    const double g_pi = static_cast<double>(lm.g_pi);
    std::vector<double> g_right_shift(g_right.size()), y_right_shift(y_right.size());
    for (size_t k = 0; k < g_right.size(); ++k) {
        g_right_shift[k] = g_right[k] - g_pi;
        y_right_shift[k] = y_right[k] - kPi;
    }
    const Eigen::VectorXd rs = polyfit(g_right_shift, y_right_shift, 2);
    const double y0 = *std::max_element(y_left.begin(), y_left.end());
    const double b1 = rs(0), b2 = rs(1);
    QuadSegment right_seg;
    right_seg.a1 = b1;
    right_seg.a2 = b2 - 2.0 * g_pi * b1;
    right_seg.a3 = b1 * g_pi * g_pi - b2 * g_pi + y0;
    right_seg.g_lo = g_pi;
    right_seg.g_hi = 255.0;

    QuadSegment left_seg{left(0), left(1), left(2), 0.0, g_pi};

    const double left_at_pi = (left_seg.a1 * g_pi + left_seg.a2) * g_pi + left_seg.a3;
    if (std::abs(left_at_pi - y0) >= 0.02)
        throw std::runtime_error("fit_response: halves do not meet at G_pi within 0.02 rad");

    PixelResponse response;
    response.segments = {left_seg, right_seg};
    return response;
}

double InverseResponse::grayscale_at(double phase) const {
    if (segments.empty()) throw std::logic_error("InverseResponse: no segments");
    double y = std::clamp(phase, 0.0, phase_max);

    // Segment whose phase range contains y (segments are monotone), with y
    // clamped into the segment's reachable range.
    const QuadSegment* seg = &segments.back();
    for (const auto& s : segments) {
        const double y_hi = (s.a1 * s.g_hi + s.a2) * s.g_hi + s.a3;
        if (y <= y_hi + 1e-12) {
            seg = &s;
            break;
        }
    }
    const double y_lo = (seg->a1 * seg->g_lo + seg->a2) * seg->g_lo + seg->a3;
    const double y_hi = (seg->a1 * seg->g_hi + seg->a2) * seg->g_hi + seg->a3;
    y = std::clamp(y, std::min(y_lo, y_hi), std::max(y_lo, y_hi));

    double g;
    if (std::abs(seg->a1) < 1e-12) {
        if (std::abs(seg->a2) < 1e-300) return seg->g_lo;  // constant segment
        g = (y - seg->a3) / seg->a2;
    } else {
        double disc = seg->a2 * seg->a2 - 4.0 * seg->a1 * (seg->a3 - y);
        if (disc < 0.0 && disc > -1e-9) disc = 0.0;
        if (disc < 0.0)
            throw std::runtime_error("InverseResponse: negative discriminant in segment");
        g = (-seg->a2 + std::sqrt(disc)) / (2.0 * seg->a1);
    }
    return std::clamp(g, 0.0, 255.0);
}

InverseResponse invert_response(const PixelResponse& response) {
    // Monotonicity check per segment: strictly increasing grayscale -> phase.
    for (const auto& s : response.segments) {
        const double steps = 64.0;
        double prev = (s.a1 * s.g_lo + s.a2) * s.g_lo + s.a3;
        for (int k = 1; k <= 64; ++k) {
            const double g = s.g_lo + (s.g_hi - s.g_lo) * k / steps;
            const double cur = (s.a1 * g + s.a2) * g + s.a3;
            if (cur < prev - 1e-9)
                throw std::invalid_argument("invert_response: response not monotone");
            prev = cur;
        }
    }
    InverseResponse inv;
    inv.segments = response.segments;
    inv.phase_max = std::min(kTwoPi, response.phase_at(255.0));
    return inv;
}

LutReport verify_lut(const PixelResponse& hidden, const InverseResponse& lut,
                     std::uint64_t seed, int n) {
    const SpeckleSet set = simulate_speckles(hidden, seed, n);
    const int steps = 256;
    std::vector<double> ys(steps), ms(steps);
    for (int k = 0; k < steps; ++k) {
        const double y = kTwoPi * k / (steps - 1);
        const double g = std::round(lut.grayscale_at(y));  // physical integer levels
        ys[static_cast<size_t>(k)] = y;
        ms[static_cast<size_t>(k)] =
            pearson_correlation(set.image_at_phase(hidden.phase_at(g)), set.reference);
    }
    const SinusoidFit fit = fit_sinusoid(ys, ms);
    return {fit.period, fit.amplitude, fit.residual_rms};
}

}  // namespace biphoton
