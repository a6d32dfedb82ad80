#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "biphoton/estimator.hpp"
#include "biphoton/fields.hpp"
#include "biphoton/propagation.hpp"

// Application demonstrations: adaptive optics driven by the central value of
// the sum-coordinate projection, and transmission-matrix correction of a
// scattering layer via row phase conjugation.

namespace biphoton {

/// Low-order smooth polynomial modes on the disk inscribed in the grid,
/// Gram-Schmidt orthonormalized so a unit coefficient is 1 radian RMS over
/// the disk. Piston is excluded.
struct AberrationModel {
    GridSpec spec;
    double disk_radius_px = 0.0;
    std::vector<Eigen::MatrixXd> modes;

    static AberrationModel low_order(const GridSpec& spec, int k_modes);
    int size() const { return static_cast<int>(modes.size()); }
    PhaseMask mask_from_coefficients(std::span<const double> coeffs) const;
};

/// Central bin of a sum-coordinate projection (optionally the 3x3 mean).
double guidestar_value(const Projection& proj, bool mean_3x3 = false);

struct CoordinateDescentModes {
    int k_modes = 3;
    int steps_per_mode = 11;
    int passes = 3;
    double coeff_range = 2.0;  // radians swept around the current coefficient
};

struct AoResult {
    PhaseMask mask;                   // correction the optimizer settled on
    std::vector<double> trace;        // guidestar at start + each accepted step
    std::vector<double> coefficients; // correction mode coefficients
};

/// Sequential 1-D sweeps over mode coefficients; each sweep picks the peak of
/// a sinusoid fit (best grid point as fallback) and keeps it only if the
/// guidestar improves, so the trace never decreases.
AoResult ao_optimize(const BiphotonState& state, const PhaseMask& aberration,
                     const CoordinateDescentModes& optimizer);

/// Incoherent image of an amplitude object through the system with the given
/// pupil phase (circular convolution with the aberrated PSF).
Eigen::MatrixXd image_through_system(const Eigen::MatrixXd& object,
                                     const PhaseMask& pupil_phase);

/// Gradient energy sharpness metric.
double image_gradient_energy(const Eigen::MatrixXd& image);

struct TransmissionMatrix {
    int n_modes = 0;
    Eigen::MatrixXcd t;

    static TransmissionMatrix identity(int n_modes);
    static TransmissionMatrix random_unitary(int n_modes, std::uint64_t seed);
    static TransmissionMatrix permutation(const std::vector<int>& perm);
};

/// Two-photon mode-space propagation psi_out = T D psi_in D^t T^t; D is the
/// diagonal SLM phase vector (unit modulus entries required).
Eigen::MatrixXcd tm_propagate(const Eigen::MatrixXcd& psi_in, const TransmissionMatrix& t,
                              const Eigen::VectorXcd& d);

/// Phase conjugation of the target row: D_k = exp(-i arg T[target, k]).
Eigen::VectorXcd tm_correction_mask(const TransmissionMatrix& t, int target_mode);

enum class ProbeBasis { PhaseStepping };

/// Classical transmission-matrix measurement: a flat reference plus one probe
/// mode, four phase steps per mode, intensity-only detection. Rows come back
/// scaled by an unknown per-output-mode factor, which phase conjugation does
/// not care about. intensity_noise adds that fraction of the mean intensity
/// as Gaussian noise per detector reading.
TransmissionMatrix measure_tm_classical(const TransmissionMatrix& hidden,
                                        ProbeBasis basis = ProbeBasis::PhaseStepping,
                                        double intensity_noise = 0.0,
                                        std::uint64_t seed = 1);

/// Correlated input state in the mode basis (identity, unit Frobenius norm).
Eigen::MatrixXcd correlated_mode_state(int n_modes);

/// Correlation concentrated in the target mode, |psi[t, t]|^2: the restored
/// sum-coordinate peak of the mode-space experiment.
double tm_correlation_peak(const Eigen::MatrixXcd& psi_out, int target_mode);

/// Mean |psi|^2 over all other mode pairs.
double tm_background(const Eigen::MatrixXcd& psi_out, int target_mode);

struct TmExperimentReport {
    int n_modes = 0;
    int target_mode = 0;
    double uncorrected_central = 0.0;   // target-mode correlation, flat SLM
    double typical_uncorrected = 0.0;   // same quantity averaged over all modes
    double background = 0.0;            // mean uncorrected |psi|^2 per mode pair
    double corrected_central = 0.0;     // after phase conjugation of the true T
    double corrected_via_measured = 0.0;  // after conjugating the measured T
    double enhancement = 0.0;           // corrected / typical uncorrected
};

/// Full scattering-correction run: random unitary scatterer, flat-SLM
/// reference, phase-conjugation correction from the true and the classically
/// measured transmission matrix.
TmExperimentReport run_tm_experiment(int n_modes, std::uint64_t seed,
                                     double intensity_noise = 0.0);

}  // namespace biphoton
