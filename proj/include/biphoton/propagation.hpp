#pragma once

#include <Eigen/Dense>

#include "biphoton/fields.hpp"
#include "biphoton/grid.hpp"

// Propagation from the shaping plane to the camera plane. The camera sits in
// the Fourier plane of the SLM, so the coherent point-spread function is the
// centered DFT kernel times the mask phase. Delta-form pair states have fast
// analytic paths; propagate_g2_full is the brute-force four-index reference
// they are checked against.

namespace biphoton {

struct G2Tensor {
    GridSpec spec;
    Eigen::MatrixXd data;  // n^2 x n^2, entry (pixel_index(r1), pixel_index(r2))

    G2Tensor() = default;
    G2Tensor(const GridSpec& s, Eigen::MatrixXd d) : spec(s), data(std::move(d)) {
        const int p = spec.pixels();
        if (data.rows() != p || data.cols() != p)
            throw std::invalid_argument("G2Tensor: data must be n^2 x n^2");
    }

    double at(int i1, int j1, int i2, int j2) const {
        const int n = spec.n;
        return data(pixel_index(n, i1, j1), pixel_index(n, i2, j2));
    }
    double total() const { return data.sum(); }
};

enum class PsfKind { Fourier, Identity };

/// Coherent PSF as an n^2 x n^2 matrix, unitary for phase-only masks.
Eigen::MatrixXcd psf_matrix(const PhaseMask& mask, PsfKind kind = PsfKind::Fourier);

/// Far-field effective mask psi(r) = theta(r) + theta(-r), canonical mod 2*pi.
PhaseMask effective_mask_ff(const PhaseMask& mask);

/// Near-field effective mask 2*theta(r) mod 2*pi.
PhaseMask effective_mask_nf(const PhaseMask& mask);

/// |DFT(field * e^{i*theta})|^2 on the camera grid; total power conserved.
IntensityImage propagate_coherent(const ComplexGrid& field, const PhaseMask& mask);

/// Camera-plane G2 for an exact delta state (sigma must be 0), normalized to
/// unit total. FF output depends only on the camera pixel difference, NF only
/// on the pixel sum, both wrapped mod n.
G2Tensor propagate_pairs_analytic(const BiphotonState& state, const PhaseMask& mask);

/// Brute-force propagation psi_out = H phi H^T for any state (delta states are
/// expanded first; n <= 32). Deterministic for any thread count.
G2Tensor propagate_g2_full(const BiphotonState& state, const PhaseMask& mask,
                           PsfKind kind = PsfKind::Fourier);

/// Marginal camera intensity sum_{r2} G2(r1, r2); uniform for exact delta
/// states regardless of the mask.
IntensityImage propagate_pairs_intensity(const BiphotonState& state, const PhaseMask& mask);

}  // namespace biphoton
