#include "biphoton/experiments.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biphoton {

namespace {

std::vector<int> order_list(int max_order) {
    std::vector<int> orders;
    for (int k = -max_order; k <= max_order; ++k) orders.push_back(k);
    return orders;
}

double window_sum(const Projection& proj, int di, int dj, int w, int order) {
    double sum = 0.0;
    for (int a = -w; a <= w; ++a)
        for (int b = -w; b <= w; ++b) {
            if (!proj.offset_in_range(di + a, dj + b))
                throw std::out_of_range("extract_orders: order " + std::to_string(order) +
                                        " falls outside the projection");
            sum += proj.value_at(di + a, dj + b);
        }
    return sum < 0.0 ? 0.0 : sum;  // estimated projections can dip negative
}

SweepResult fit_orders(SweepResult result) {
    const auto params = result.parameters;
    const long n_orders = static_cast<long>(result.orders.size());
    for (long o = 0; o < n_orders; ++o) {
        std::vector<double> y(params.size());
        for (size_t p = 0; p < params.size(); ++p) y[p] = result.magnitudes(p, o);
        result.fits.push_back(fit_sinusoid(params, y));
    }
    return result;
}

ComplexGrid default_envelope(const GridSpec& spec, double waist_px) {
    if (waist_px <= 0.0) waist_px = spec.n / 5.0;
    return make_envelope(spec, Gaussian{waist_px});
}

}  // namespace

std::vector<double> extract_orders(const Projection& proj, int period_px, int max_order,
                                   int window, Orientation orientation) {
    if (period_px < 2) throw std::invalid_argument("extract_orders: period must be >= 2");
    if (max_order < 0) throw std::invalid_argument("extract_orders: max_order must be >= 0");
    const double spacing = static_cast<double>(proj.n) / period_px;
    std::vector<double> magnitudes;
    for (int k = -max_order; k <= max_order; ++k) {
        const int off = static_cast<int>(std::lround(k * spacing));
        const int di = orientation == Orientation::Horizontal ? 0 : off;
        const int dj = orientation == Orientation::Horizontal ? off : 0;
        magnitudes.push_back(window_sum(proj, di, dj, window, k));
    }
    return magnitudes;
}

std::vector<double> extract_orders(const IntensityImage& image, int period_px, int max_order,
                                   int window, Orientation orientation) {
    if (period_px < 2) throw std::invalid_argument("extract_orders: period must be >= 2");
    const int n = image.spec.n;
    const int c = n / 2;
    const double spacing = static_cast<double>(n) / period_px;
    std::vector<double> magnitudes;
    for (int k = -max_order; k <= max_order; ++k) {
        const int off = static_cast<int>(std::lround(k * spacing));
        const int pi = c + (orientation == Orientation::Vertical ? off : 0);
        const int pj = c + (orientation == Orientation::Horizontal ? off : 0);
        double sum = 0.0;
        for (int a = -window; a <= window; ++a)
            for (int b = -window; b <= window; ++b) {
                const int i = pi + a, j = pj + b;
                if (i < 0 || i >= n || j < 0 || j >= n)
                    throw std::out_of_range("extract_orders: order " + std::to_string(k) +
                                            " falls outside the image");
                sum += image.data(i, j);
            }
        magnitudes.push_back(sum < 0.0 ? 0.0 : sum);
    }
    return magnitudes;
}

SweepResult ff_translation_sweep(const GridSpec& spec, int period_px,
                                 const std::vector<int>& offsets_px, double alpha,
                                 double envelope_waist_px) {
    if (offsets_px.size() < 4)
        throw std::invalid_argument("ff_translation_sweep: need at least 4 offsets");
    const ComplexGrid envelope = default_envelope(spec, envelope_waist_px);
    const BiphotonState state = make_biphoton(spec, PairConfig::FF, envelope);

    const int max_order = 2;
    SweepResult result;
    result.orders = order_list(max_order);
    result.magnitudes.resize(static_cast<long>(offsets_px.size()), 2 * max_order + 1);
    for (size_t p = 0; p < offsets_px.size(); ++p) {
        result.parameters.push_back(static_cast<double>(offsets_px[p]));
        const PhaseMask grating = make_grating(spec, period_px, alpha, offsets_px[p]);
        const Projection cm = project_minus(propagate_pairs_analytic(state, grating));
        const auto mags = extract_orders(cm, period_px, max_order);
        for (int o = 0; o < 2 * max_order + 1; ++o)
            result.magnitudes(static_cast<long>(p), o) = mags[static_cast<size_t>(o)];
    }
    return fit_orders(std::move(result));
}

SweepResult nf_amplitude_sweep(const GridSpec& spec, int period_px,
                               const std::vector<double>& amplitudes, SweepMode mode,
                               double envelope_waist_px) {
    if (amplitudes.size() < 4)
        throw std::invalid_argument("nf_amplitude_sweep: need at least 4 amplitudes");
    for (double a : amplitudes)
        if (a < 0.0 || a > kTwoPi)
            throw std::invalid_argument("nf_amplitude_sweep: amplitudes must lie in [0, 2*pi]");

    const ComplexGrid envelope = default_envelope(spec, envelope_waist_px);
    const BiphotonState state = make_biphoton(spec, PairConfig::NF, envelope);

    // The classical reference illuminates the SLM with a beam matching the
    // pair-correlation envelope, so both runs probe the same grating region.
    ComplexGrid classical_field = ComplexGrid::zero(spec);
    if (mode == SweepMode::Classical) {
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j)
                classical_field.data(i, j) = envelope_at_doubled(envelope, PairConfig::NF, i, j);
        classical_field.normalize_power();
    }

    const int max_order = 2;
    SweepResult result;
    result.orders = order_list(max_order);
    result.magnitudes.resize(static_cast<long>(amplitudes.size()), 2 * max_order + 1);
    for (size_t p = 0; p < amplitudes.size(); ++p) {
        result.parameters.push_back(amplitudes[p]);
        const PhaseMask grating = make_grating(spec, period_px, amplitudes[p], 0);
        std::vector<double> mags;
        if (mode == SweepMode::Pairs) {
            const Projection cp = project_plus(propagate_pairs_analytic(state, grating));
            mags = extract_orders(cp, period_px, max_order);
        } else {
            const IntensityImage img = propagate_coherent(classical_field, grating);
            mags = extract_orders(img, period_px, max_order);
        }
        for (int o = 0; o < 2 * max_order + 1; ++o)
            result.magnitudes(static_cast<long>(p), o) = mags[static_cast<size_t>(o)];
    }
    return fit_orders(std::move(result));
}

}  // namespace biphoton
