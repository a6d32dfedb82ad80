#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

// Grid conventions used throughout:
//  - pixel (i, j) = (row, column); the DC pixel of the centered DFT sits at
//    (n/2, n/2), 0-based.
//  - spatial inversion r -> -r pairs pixel i with n-1-i, the reflection about
//    the half-pixel point between n/2-1 and n/2. No pixel is its own inverse,
//    which is what lets a binary grating symmetrize exactly on an even grid.
//  - phases are stored canonically in [0, 2*pi).

namespace biphoton {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kPi = std::numbers::pi;

/// Wrap a finite phase into [0, 2*pi).
inline double wrap_phase(double x) {
    double w = std::fmod(x, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;  // fmod can land exactly on 2*pi after the add
    return w;
}

struct GridSpec {
    int n = 0;                 // pixels per side, even, >= 4
    double pitch = 0.0;        // meters per pixel
    double wavelength = 0.0;   // meters
    double focal_eff = 0.0;    // effective Fourier-lens focal length, meters

    GridSpec() = default;
    GridSpec(int n_, double pitch_, double wavelength_, double focal_eff_)
        : n(n_), pitch(pitch_), wavelength(wavelength_), focal_eff(focal_eff_) {
        if (n < 4 || n % 2 != 0)
            throw std::invalid_argument("GridSpec: n must be even and >= 4");
        if (!(pitch > 0.0) || !(wavelength > 0.0) || !(focal_eff > 0.0))
            throw std::invalid_argument("GridSpec: pitch, wavelength and focal_eff must be positive");
    }

    int center() const { return n / 2; }
    int pixels() const { return n * n; }

    /// Sampling pitch in the camera (Fourier) plane implied by the DFT.
    double camera_pitch() const { return focal_eff * wavelength / (n * pitch); }

    bool same_geometry(const GridSpec& other) const {
        return n == other.n && pitch == other.pitch &&
               wavelength == other.wavelength && focal_eff == other.focal_eff;
    }
};

/// Index of the mirror pixel under r -> -r.
inline int mirror_index(int n, int i) { return n - 1 - i; }

struct ComplexGrid {
    GridSpec spec;
    Eigen::MatrixXcd data;  // n x n amplitudes

    ComplexGrid() = default;
    ComplexGrid(const GridSpec& s, Eigen::MatrixXcd d) : spec(s), data(std::move(d)) {
        if (data.rows() != spec.n || data.cols() != spec.n)
            throw std::invalid_argument("ComplexGrid: data dimensions do not match spec");
    }
    static ComplexGrid zero(const GridSpec& s) {
        return ComplexGrid(s, Eigen::MatrixXcd::Zero(s.n, s.n));
    }

    double power() const { return data.squaredNorm(); }
    void normalize_power() {
        double p = power();
        if (p <= 0.0) throw std::invalid_argument("ComplexGrid: cannot normalize zero field");
        data /= std::sqrt(p);
    }
};

struct PhaseMask {
    GridSpec spec;
    Eigen::MatrixXd theta;  // radians, canonical [0, 2*pi)

    PhaseMask() = default;
    PhaseMask(const GridSpec& s, Eigen::MatrixXd t) : spec(s), theta(std::move(t)) {
        if (theta.rows() != spec.n || theta.cols() != spec.n)
            throw std::invalid_argument("PhaseMask: dimensions do not match spec");
        if (!theta.allFinite())
            throw std::invalid_argument("PhaseMask: phases must be finite");
        canonicalize();
    }
    static PhaseMask flat(const GridSpec& s) {
        return PhaseMask(s, Eigen::MatrixXd::Zero(s.n, s.n));
    }

    void canonicalize() {
        for (int i = 0; i < theta.rows(); ++i)
            for (int j = 0; j < theta.cols(); ++j)
                theta(i, j) = wrap_phase(theta(i, j));
    }
};

struct IntensityImage {
    GridSpec spec;
    Eigen::MatrixXd data;  // n x n, nonnegative

    IntensityImage() = default;
    IntensityImage(const GridSpec& s, Eigen::MatrixXd d) : spec(s), data(std::move(d)) {
        if (data.rows() != spec.n || data.cols() != spec.n)
            throw std::invalid_argument("IntensityImage: dimensions do not match spec");
    }
};

}  // namespace biphoton
