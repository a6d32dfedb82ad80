#include "biphoton/propagation.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "biphoton/dft.hpp"
#include "biphoton/threading.hpp"

namespace biphoton {

namespace {

using RowMajorXcd = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                  Eigen::RowMajor>;

GridSpec camera_spec(const GridSpec& s) {
    return GridSpec(s.n, s.camera_pitch(), s.wavelength, s.focal_eff);
}

int wrap_mod(int a, int n) {
    int r = a % n;
    return r < 0 ? r + n : r;
}

/// C = A * B with a fixed per-element reduction order (ascending k); rows of C
/// are partitioned across workers, so any thread count gives identical bits.
RowMajorXcd deterministic_product(const RowMajorXcd& a, const RowMajorXcd& b) {
    const int rows = static_cast<int>(a.rows());
    const int inner = static_cast<int>(a.cols());
    RowMajorXcd c = RowMajorXcd::Zero(rows, b.cols());
    parallel_for(0, rows, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            auto crow = c.row(i);
            for (int k = 0; k < inner; ++k) {
                const std::complex<double> coef = a(i, k);
                if (coef == std::complex<double>(0.0, 0.0)) continue;
                crow += coef * b.row(k);
            }
        }
    });
    return c;
}

/// Modulating field g = (doubled envelope) * e^{i * effective phase}.
Eigen::MatrixXcd modulating_field(const BiphotonState& state, const PhaseMask& mask) {
    const int n = state.spec.n;
    const PairConfig config = state.variant == StateVariant::AntiCorrelatedDelta
                                  ? PairConfig::FF
                                  : PairConfig::NF;
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto w = envelope_at_doubled(state.envelope, config, i, j);
            double phase;
            if (config == PairConfig::FF)
                phase = mask.theta(i, j) + mask.theta(n - 1 - i, n - 1 - j);
            else
                phase = 2.0 * mask.theta(i, j);
            g(i, j) = w * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return g;
}

void require_exact_delta(const BiphotonState& state, const char* op) {
    if (state.variant == StateVariant::Full4D)
        throw std::invalid_argument(std::string(op) +
                                    ": dense states are not supported, use propagate_g2_full");
    if (state.corr_width != 0.0)
        throw std::invalid_argument(std::string(op) +
                                    ": finite correlation width requires propagate_g2_full");
}

}  // namespace

Eigen::MatrixXcd psf_matrix(const PhaseMask& mask, PsfKind kind) {
    const int n = mask.spec.n;
    const int p = n * n;
    if (kind == PsfKind::Identity)
        return Eigen::MatrixXcd::Identity(p, p);
    const Eigen::MatrixXcd w = centered_dft_matrix(n);  // unitary per axis
    Eigen::MatrixXcd h(p, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double th = mask.theta(i, j);
            const std::complex<double> phase(std::cos(th), std::sin(th));
            const int col = pixel_index(n, i, j);
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    h(pixel_index(n, k, l), col) = w(k, i) * w(l, j) * phase;
        }
    }
    return h;
}

PhaseMask effective_mask_ff(const PhaseMask& mask) {
    const int n = mask.spec.n;
    Eigen::MatrixXd psi(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            psi(i, j) = mask.theta(i, j) + mask.theta(n - 1 - i, n - 1 - j);
    return PhaseMask(mask.spec, std::move(psi));
}

PhaseMask effective_mask_nf(const PhaseMask& mask) {
    return PhaseMask(mask.spec, 2.0 * mask.theta);
}

IntensityImage propagate_coherent(const ComplexGrid& field, const PhaseMask& mask) {
    if (!field.spec.same_geometry(mask.spec))
        throw std::invalid_argument("propagate_coherent: field and mask specs differ");
    const int n = field.spec.n;
    Eigen::MatrixXcd u(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double th = mask.theta(i, j);
            u(i, j) = field.data(i, j) * std::complex<double>(std::cos(th), std::sin(th));
        }
    const Eigen::MatrixXcd spectrum = centered_dft2(u);
    return IntensityImage(camera_spec(field.spec), spectrum.cwiseAbs2());
}

G2Tensor propagate_pairs_analytic(const BiphotonState& state, const PhaseMask& mask) {
    require_exact_delta(state, "propagate_pairs_analytic");
    if (!state.spec.same_geometry(mask.spec))
        throw std::invalid_argument("propagate_pairs_analytic: state and mask specs differ");

    const int n = state.spec.n;
    const int c = n / 2;
    const bool ff = state.variant == StateVariant::AntiCorrelatedDelta;
    const Eigen::MatrixXd power = centered_dft2(modulating_field(state, mask)).cwiseAbs2();

    Eigen::MatrixXd tensor(n * n, n * n);
    for (int i1 = 0; i1 < n; ++i1)
        for (int j1 = 0; j1 < n; ++j1) {
            const int p1 = pixel_index(n, i1, j1);
            for (int i2 = 0; i2 < n; ++i2) {
                const int qi = ff ? wrap_mod(i1 - i2 + c, n) : wrap_mod(i1 + i2 - c, n);
                for (int j2 = 0; j2 < n; ++j2) {
                    const int qj = ff ? wrap_mod(j1 - j2 + c, n) : wrap_mod(j1 + j2 - c, n);
                    tensor(p1, pixel_index(n, i2, j2)) = power(qi, qj);
                }
            }
        }
    const double total = tensor.sum();
    if (!(total > 0.0))
        throw std::invalid_argument("propagate_pairs_analytic: state carries no weight");
    tensor /= total;
    return G2Tensor(camera_spec(state.spec), std::move(tensor));
}

G2Tensor propagate_g2_full(const BiphotonState& state, const PhaseMask& mask, PsfKind kind) {
    if (!state.spec.same_geometry(mask.spec))
        throw std::invalid_argument("propagate_g2_full: state and mask specs differ");
    if (state.spec.n > 32)
        throw std::length_error("propagate_g2_full: n <= 32 (cost grows as n^6)");

    const BiphotonState full = to_full4d(state);
    Eigen::MatrixXd out_sq;
    if (kind == PsfKind::Identity) {
        out_sq = full.tensor.cwiseAbs2();
    } else {
        const Eigen::MatrixXcd h = psf_matrix(mask, kind);
        const RowMajorXcd hr = h;
        const RowMajorXcd phi = full.tensor;
        const RowMajorXcd ht = h.transpose();
        const RowMajorXcd left = deterministic_product(hr, phi);
        const RowMajorXcd psi_out = deterministic_product(left, ht);
        out_sq = psi_out.cwiseAbs2();
    }
    const double total = out_sq.sum();
    if (!(total > 0.0))
        throw std::invalid_argument("propagate_g2_full: state carries no weight");
    out_sq /= total;
    return G2Tensor(camera_spec(state.spec), std::move(out_sq));
}

IntensityImage propagate_pairs_intensity(const BiphotonState& state, const PhaseMask& mask) {
    if (state.is_delta() && state.corr_width == 0.0) {
        const G2Tensor g2 = propagate_pairs_analytic(state, mask);
        const int n = g2.spec.n;
        Eigen::MatrixXd image(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                image(i, j) = g2.data.row(pixel_index(n, i, j)).sum();
        return IntensityImage(g2.spec, std::move(image));
    }
    const G2Tensor g2 = propagate_g2_full(state, mask);
    const int n = g2.spec.n;
    Eigen::MatrixXd image(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            image(i, j) = g2.data.row(pixel_index(n, i, j)).sum();
    return IntensityImage(g2.spec, std::move(image));
}

}  // namespace biphoton
