#include "biphoton/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace biphoton {

namespace {

int positive_mod(int a, int m) {
    int r = a % m;
    return r < 0 ? r + m : r;
}

double shape_extent(const EnvelopeShape& shape) {
    if (const auto* d = std::get_if<Disk>(&shape)) return d->radius_px;
    if (const auto* r = std::get_if<Ring>(&shape)) return r->radius_px + r->thickness_px / 2.0;
    return std::get<Gaussian>(shape).waist_px;
}

}  // namespace

ComplexGrid make_envelope(const GridSpec& spec, const EnvelopeShape& shape) {
    const double extent = shape_extent(shape);
    if (!(extent > 0.0))
        throw std::invalid_argument("make_envelope: shape size must be positive");
    if (extent > spec.n / 2.0 - 1.0)
        throw std::invalid_argument("make_envelope: shape exceeds grid (needs <= n/2 - 1 px)");

    ComplexGrid grid = ComplexGrid::zero(spec);
    const int c = spec.center();
    for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < spec.n; ++j) {
            const double r = std::hypot(i - c, j - c);
            double amp = 0.0;
            if (const auto* d = std::get_if<Disk>(&shape)) {
                amp = r <= d->radius_px ? 1.0 : 0.0;
            } else if (const auto* ring = std::get_if<Ring>(&shape)) {
                amp = std::abs(r - ring->radius_px) <= ring->thickness_px / 2.0 ? 1.0 : 0.0;
            } else {
                const auto& g = std::get<Gaussian>(shape);
                amp = std::exp(-(r * r) / (g.waist_px * g.waist_px));
            }
            grid.data(i, j) = amp;
        }
    }
    grid.normalize_power();
    return grid;
}

BiphotonState make_biphoton(const GridSpec& spec, PairConfig config,
                            const ComplexGrid& envelope, double sigma) {
    if (!envelope.spec.same_geometry(spec))
        throw std::invalid_argument("make_biphoton: envelope spec does not match grid spec");
    if (sigma < 0.0)
        throw std::invalid_argument("make_biphoton: correlation width must be >= 0");

    BiphotonState state;
    state.variant = config == PairConfig::FF ? StateVariant::AntiCorrelatedDelta
                                             : StateVariant::CorrelatedDelta;
    state.spec = spec;
    state.envelope = envelope;
    state.envelope.normalize_power();
    state.corr_width = sigma;
    return state;
}

std::complex<double> envelope_at_doubled(const ComplexGrid& envelope, PairConfig config,
                                         int i, int j) {
    const int n = envelope.spec.n;
    const int c = envelope.spec.center();
    // FF pairs (i, n-1-i): separation 2*(i-c)+1, odd offsets about the
    // half-pixel inversion center. NF pairs (i, i): sum 2*(i-c) about the DC
    // pixel. Out-of-grid samples carry no weight.
    const int off = config == PairConfig::FF ? 1 : 0;
    const int ei = 2 * i - c + off;
    const int ej = 2 * j - c + off;
    if (ei < 0 || ei >= n || ej < 0 || ej >= n) return {0.0, 0.0};
    return envelope.data(ei, ej);
}

BiphotonState to_full4d(const BiphotonState& state) {
    if (state.variant == StateVariant::Full4D) return state;
    const int n = state.spec.n;
    if (n > 32)
        throw std::length_error("to_full4d: dense expansion limited to n <= 32");

    const int c = state.spec.center();
    const PairConfig config = state.variant == StateVariant::AntiCorrelatedDelta
                                  ? PairConfig::FF
                                  : PairConfig::NF;
    Eigen::MatrixXcd tensor = Eigen::MatrixXcd::Zero(n * n, n * n);

    if (state.corr_width == 0.0) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const auto w = envelope_at_doubled(state.envelope, config, i, j);
                if (w == std::complex<double>(0.0, 0.0)) continue;
                const int p1 = pixel_index(n, i, j);
                const int p2 = config == PairConfig::FF
                                   ? pixel_index(n, n - 1 - i, n - 1 - j)
                                   : p1;
                tensor(p1, p2) = w;
            }
        }
    } else {
        const double sig2 = 2.0 * state.corr_width * state.corr_width;
        const auto& env = state.envelope.data;
        for (int i1 = 0; i1 < n; ++i1)
            for (int j1 = 0; j1 < n; ++j1)
                for (int i2 = 0; i2 < n; ++i2)
                    for (int j2 = 0; j2 < n; ++j2) {
                        int ei, ej;
                        double su, sv;
                        if (config == PairConfig::FF) {
                            ei = c + (i1 - i2);
                            ej = c + (j1 - j2);
                            su = 0.5 * (i1 + i2 - (n - 1));
                            sv = 0.5 * (j1 + j2 - (n - 1));
                        } else {
                            ei = i1 + i2 - c;
                            ej = j1 + j2 - c;
                            su = 0.5 * (i1 - i2);
                            sv = 0.5 * (j1 - j2);
                        }
                        if (ei < 0 || ei >= n || ej < 0 || ej >= n) continue;
                        const auto wenv = env(ei, ej);
                        if (wenv == std::complex<double>(0.0, 0.0)) continue;
                        const double gs = std::exp(-(su * su + sv * sv) / sig2);
                        tensor(pixel_index(n, i1, j1), pixel_index(n, i2, j2)) = wenv * gs;
                    }
    }

    const double norm = tensor.norm();
    if (!(norm > 0.0))
        throw std::invalid_argument("to_full4d: state carries no weight on the grid");
    tensor /= norm;

    BiphotonState full;
    full.variant = StateVariant::Full4D;
    full.spec = state.spec;
    full.envelope = state.envelope;
    full.tensor = std::move(tensor);
    full.corr_width = state.corr_width;
    return full;
}

PhaseMask make_grating(const GridSpec& spec, int period_px, double alpha,
                       int offset_px, Orientation orientation) {
    if (period_px < 2 || period_px % 2 != 0)
        throw std::invalid_argument("make_grating: period must be even and >= 2");
    if (alpha < 0.0 || alpha > kTwoPi)
        throw std::invalid_argument("make_grating: amplitude must lie in [0, 2*pi]");

    const int c = spec.center();
    const int half = period_px / 2;
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(spec.n, spec.n);
    for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < spec.n; ++j) {
            const int axis = orientation == Orientation::Horizontal ? j : i;
            const int v = positive_mod(axis - c - offset_px, period_px);
            theta(i, j) = v < half ? alpha : 0.0;
        }
    }
    return PhaseMask(spec, std::move(theta));  // canonicalizes (alpha = 2*pi -> 0)
}

}  // namespace biphoton
