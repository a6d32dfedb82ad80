#include "biphoton/applications.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "biphoton/dft.hpp"
#include "biphoton/fitting.hpp"
#include "biphoton/rng.hpp"

namespace biphoton {

namespace {

double disk_inner_product(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                          const Eigen::MatrixXd& disk, double npix) {
    return (u.array() * v.array() * disk.array()).sum() / npix;
}

double guidestar_for(const BiphotonState& state, const PhaseMask& total_mask) {
    const G2Tensor g2 = propagate_pairs_analytic(state, total_mask);
    return guidestar_value(project_plus(g2));
}

}  // namespace

AberrationModel AberrationModel::low_order(const GridSpec& spec, int k_modes) {
    constexpr int kAvailable = 10;
    if (k_modes < 1 || k_modes > kAvailable)
        throw std::invalid_argument("AberrationModel: between 1 and 10 modes available");

    AberrationModel model;
    model.spec = spec;
    model.disk_radius_px = spec.n / 2.0 - 1.0;
    const int n = spec.n;
    const int c = spec.center();

    Eigen::MatrixXd disk = Eigen::MatrixXd::Zero(n, n);
    double npix = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::hypot(i - c, j - c) <= model.disk_radius_px) {
                disk(i, j) = 1.0;
                npix += 1.0;
            }

    // Raw low-order polynomial surfaces (piston excluded), orthonormalized on
    // the sampled disk so coefficients read directly in radians RMS.
    std::vector<Eigen::MatrixXd> raw;
    for (int k = 0; k < k_modes; ++k) raw.emplace_back(Eigen::MatrixXd::Zero(n, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (disk(i, j) == 0.0) continue;
            const double x = (j - c) / model.disk_radius_px;
            const double y = (i - c) / model.disk_radius_px;
            const double r2 = x * x + y * y;
            const double surfaces[kAvailable] = {
                x,                          // tilt
                y,                          // tilt
                2.0 * r2 - 1.0,             // defocus
                x * x - y * y,              // astigmatism
                2.0 * x * y,                // oblique astigmatism
                (3.0 * r2 - 2.0) * x,       // coma
                (3.0 * r2 - 2.0) * y,       // coma
                x * (x * x - 3.0 * y * y),  // trefoil
                y * (3.0 * x * x - y * y),  // trefoil
                6.0 * r2 * r2 - 6.0 * r2 + 1.0,  // spherical
            };
            for (int k = 0; k < k_modes; ++k) raw[static_cast<size_t>(k)](i, j) = surfaces[k];
        }

    for (int k = 0; k < k_modes; ++k) {
        Eigen::MatrixXd mode = raw[static_cast<size_t>(k)];
        for (const auto& prev : model.modes)
            mode -= disk_inner_product(mode, prev, disk, npix) * prev;
        const double norm = std::sqrt(disk_inner_product(mode, mode, disk, npix));
        if (!(norm > 1e-12))
            throw std::runtime_error("AberrationModel: degenerate mode basis");
        model.modes.push_back((mode / norm).cwiseProduct(disk));
    }
    return model;
}

PhaseMask AberrationModel::mask_from_coefficients(std::span<const double> coeffs) const {
    if (static_cast<int>(coeffs.size()) > size())
        throw std::invalid_argument("AberrationModel: more coefficients than modes");
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(spec.n, spec.n);
    for (size_t k = 0; k < coeffs.size(); ++k) theta += coeffs[k] * modes[k];
    return PhaseMask(spec, std::move(theta));
}

double guidestar_value(const Projection& proj, bool mean_3x3) {
    if (proj.kind != Projection::Kind::SumCoordinate)
        throw std::invalid_argument("guidestar_value: needs a sum-coordinate projection");
    if (!mean_3x3) return proj.center();
    double sum = 0.0;
    int count = 0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            if (proj.offset_in_range(a, b)) {
                sum += proj.value_at(a, b);
                ++count;
            }
    return sum / count;
}

AoResult ao_optimize(const BiphotonState& state, const PhaseMask& aberration,
                     const CoordinateDescentModes& optimizer) {
    if (state.variant != StateVariant::CorrelatedDelta)
        throw std::invalid_argument("ao_optimize: expects a near-field (correlated) state");
    if (optimizer.steps_per_mode < 4)
        throw std::invalid_argument("ao_optimize: need at least 4 steps per mode");
    const AberrationModel basis = AberrationModel::low_order(state.spec, optimizer.k_modes);

    std::vector<double> coeffs(static_cast<size_t>(optimizer.k_modes), 0.0);
    auto evaluate = [&](const std::vector<double>& c) {
        const PhaseMask correction = basis.mask_from_coefficients(c);
        PhaseMask total(state.spec, aberration.theta + correction.theta);
        return guidestar_for(state, total);
    };

    AoResult result;
    double current = evaluate(coeffs);
    result.trace.push_back(current);

    for (int pass = 0; pass < optimizer.passes; ++pass) {
        for (int mode = 0; mode < optimizer.k_modes; ++mode) {
            const double center_val = coeffs[static_cast<size_t>(mode)];
            std::vector<double> xs, ys;
            double grid_best_x = center_val;
            double grid_best_y = current;
            for (int s = 0; s < optimizer.steps_per_mode; ++s) {
                const double x = center_val - optimizer.coeff_range +
                                 2.0 * optimizer.coeff_range * s / (optimizer.steps_per_mode - 1);
                std::vector<double> trial = coeffs;
                trial[static_cast<size_t>(mode)] = x;
                const double y = evaluate(trial);
                xs.push_back(x);
                ys.push_back(y);
                if (y > grid_best_y) {
                    grid_best_y = y;
                    grid_best_x = x;
                }
            }

            double candidate_x = grid_best_x;
            double candidate_y = grid_best_y;
            const SinusoidFit fit = fit_sinusoid(xs, ys);
            if (fit.converged) {
                // Peak of the fitted sinusoid nearest the best grid point.
                const double base =
                    (kPi / 2.0 - fit.phase) * fit.period / kTwoPi;
                const double k = std::round((grid_best_x - base) / fit.period);
                const double fitted_x = base + k * fit.period;
                if (fitted_x >= xs.front() && fitted_x <= xs.back()) {
                    std::vector<double> trial = coeffs;
                    trial[static_cast<size_t>(mode)] = fitted_x;
                    const double fitted_y = evaluate(trial);
                    if (fitted_y > candidate_y) {
                        candidate_y = fitted_y;
                        candidate_x = fitted_x;
                    }
                }
            }

            if (candidate_y > current) {
                coeffs[static_cast<size_t>(mode)] = candidate_x;
                current = candidate_y;
                result.trace.push_back(current);
            }
        }
    }

    result.mask = basis.mask_from_coefficients(coeffs);
    result.coefficients = std::move(coeffs);
    return result;
}

Eigen::MatrixXd image_through_system(const Eigen::MatrixXd& object,
                                     const PhaseMask& pupil_phase) {
    const int n = pupil_phase.spec.n;
    if (object.rows() != n || object.cols() != n)
        throw std::invalid_argument("image_through_system: object size mismatch");
    const int c = n / 2;

    // Aberrated incoherent PSF of a circular pupil.
    Eigen::MatrixXcd pupil = Eigen::MatrixXcd::Zero(n, n);
    const double radius = n / 2.0 - 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::hypot(i - c, j - c) <= radius) {
                const double th = pupil_phase.theta(i, j);
                pupil(i, j) = std::complex<double>(std::cos(th), std::sin(th));
            }
    Eigen::MatrixXd psf = centered_dft2(pupil).cwiseAbs2();
    psf /= psf.sum();

    Eigen::MatrixXd image = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double o = object(i, j);
            if (o == 0.0) continue;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    image((i + a - c + n) % n, (j + b - c + n) % n) += o * psf(a, b);
        }
    return image;
}

double image_gradient_energy(const Eigen::MatrixXd& image) {
    double energy = 0.0;
    for (int i = 0; i < image.rows(); ++i)
        for (int j = 0; j + 1 < image.cols(); ++j) {
            const double d = image(i, j + 1) - image(i, j);
            energy += d * d;
        }
    for (int i = 0; i + 1 < image.rows(); ++i)
        for (int j = 0; j < image.cols(); ++j) {
            const double d = image(i + 1, j) - image(i, j);
            energy += d * d;
        }
    return energy;
}

TransmissionMatrix TransmissionMatrix::identity(int n_modes) {
    return {n_modes, Eigen::MatrixXcd::Identity(n_modes, n_modes)};
}

TransmissionMatrix TransmissionMatrix::random_unitary(int n_modes, std::uint64_t seed) {
    Rng rng(derive_stream(seed, 0x746dULL));
    Eigen::MatrixXcd g(n_modes, n_modes);
    for (int i = 0; i < n_modes; ++i)
        for (int j = 0; j < n_modes; ++j)
            g(i, j) = std::complex<double>(rng.gaussian(), rng.gaussian());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < n_modes; ++k) {
        const std::complex<double> d = r(k, k);
        const double mag = std::abs(d);
        q.col(k) *= mag > 0.0 ? d / mag : std::complex<double>(1.0, 0.0);
    }
    return {n_modes, std::move(q)};
}

TransmissionMatrix TransmissionMatrix::permutation(const std::vector<int>& perm) {
    const int n = static_cast<int>(perm.size());
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (perm[static_cast<size_t>(i)] < 0 || perm[static_cast<size_t>(i)] >= n)
            throw std::invalid_argument("TransmissionMatrix: invalid permutation");
        t(i, perm[static_cast<size_t>(i)]) = 1.0;
    }
    return {n, std::move(t)};
}

Eigen::MatrixXcd tm_propagate(const Eigen::MatrixXcd& psi_in, const TransmissionMatrix& t,
                              const Eigen::VectorXcd& d) {
    const int n = t.n_modes;
    if (psi_in.rows() != n || psi_in.cols() != n || d.size() != n)
        throw std::invalid_argument("tm_propagate: dimension mismatch");
    for (int k = 0; k < n; ++k)
        if (std::abs(std::abs(d(k)) - 1.0) > 1e-9)
            throw std::invalid_argument("tm_propagate: SLM vector entries must be unit modulus");
    const Eigen::MatrixXcd m = t.t * d.asDiagonal();
    return m * psi_in * m.transpose();
}

Eigen::VectorXcd tm_correction_mask(const TransmissionMatrix& t, int target_mode) {
    if (target_mode < 0 || target_mode >= t.n_modes)
        throw std::out_of_range("tm_correction_mask: target mode out of range");
    Eigen::VectorXcd d(t.n_modes);
    for (int k = 0; k < t.n_modes; ++k) {
        const double phase = std::arg(t.t(target_mode, k));
        d(k) = std::complex<double>(std::cos(phase), -std::sin(phase));
    }
    return d;
}

TransmissionMatrix measure_tm_classical(const TransmissionMatrix& hidden, ProbeBasis,
                                        double intensity_noise, std::uint64_t seed) {
    const int n = hidden.n_modes;
    Rng rng(derive_stream(seed, 0x7367ULL));
    const Eigen::VectorXcd reference_in = Eigen::VectorXcd::Ones(n);
    const Eigen::VectorXcd reference_out = hidden.t * reference_in;

    const double phases[4] = {0.0, kPi / 2.0, kPi, 3.0 * kPi / 2.0};
    Eigen::MatrixXcd reconstructed(n, n);
    Eigen::MatrixXd intensities(n, 4);
    for (int k = 0; k < n; ++k) {
        for (int s = 0; s < 4; ++s) {
            const std::complex<double> step(std::cos(phases[s]), std::sin(phases[s]));
            for (int o = 0; o < n; ++o) {
                double inten = std::norm(reference_out(o) + step * hidden.t(o, k));
                intensities(o, s) = inten;
            }
        }
        if (intensity_noise > 0.0) {
            const double mean = intensities.mean();
            for (int o = 0; o < n; ++o)
                for (int s = 0; s < 4; ++s)
                    intensities(o, s) += intensity_noise * mean * rng.gaussian();
        }
        for (int o = 0; o < n; ++o) {
            const double re = (intensities(o, 0) - intensities(o, 2)) / 4.0;
            const double im = (intensities(o, 3) - intensities(o, 1)) / 4.0;
            reconstructed(o, k) = std::complex<double>(re, im);  // conj(A_o) * T(o, k)
        }
    }
    return {n, std::move(reconstructed)};
}

Eigen::MatrixXcd correlated_mode_state(int n_modes) {
    return Eigen::MatrixXcd::Identity(n_modes, n_modes) /
           std::sqrt(static_cast<double>(n_modes));
}

double tm_correlation_peak(const Eigen::MatrixXcd& psi_out, int target_mode) {
    if (target_mode < 0 || target_mode >= psi_out.rows())
        throw std::out_of_range("tm_correlation_peak: target mode out of range");
    return std::norm(psi_out(target_mode, target_mode));
}

double tm_background(const Eigen::MatrixXcd& psi_out, int target_mode) {
    const double total = psi_out.cwiseAbs2().sum();
    const double peak = tm_correlation_peak(psi_out, target_mode);
    const double cells = static_cast<double>(psi_out.rows()) * psi_out.cols() - 1.0;
    return (total - peak) / cells;
}

TmExperimentReport run_tm_experiment(int n_modes, std::uint64_t seed,
                                     double intensity_noise) {
    TmExperimentReport report;
    report.n_modes = n_modes;
    report.target_mode = n_modes / 2;

    const TransmissionMatrix t = TransmissionMatrix::random_unitary(n_modes, seed);
    const Eigen::MatrixXcd psi_in = correlated_mode_state(n_modes);
    const Eigen::VectorXcd flat = Eigen::VectorXcd::Ones(n_modes);

    const Eigen::MatrixXcd uncorrected = tm_propagate(psi_in, t, flat);
    report.uncorrected_central = tm_correlation_peak(uncorrected, report.target_mode);
    report.background = tm_background(uncorrected, report.target_mode);
    // A single mode's uncorrected correlation fluctuates wildly; the mean over
    // modes is the stable reference the enhancement is quoted against.
    double typical = 0.0;
    for (int k = 0; k < n_modes; ++k) typical += tm_correlation_peak(uncorrected, k);
    report.typical_uncorrected = typical / n_modes;

    const Eigen::VectorXcd d = tm_correction_mask(t, report.target_mode);
    report.corrected_central =
        tm_correlation_peak(tm_propagate(psi_in, t, d), report.target_mode);

    const TransmissionMatrix measured =
        measure_tm_classical(t, ProbeBasis::PhaseStepping, intensity_noise, seed);
    const Eigen::VectorXcd dm = tm_correction_mask(measured, report.target_mode);
    report.corrected_via_measured =
        tm_correlation_peak(tm_propagate(psi_in, t, dm), report.target_mode);

    report.enhancement = report.corrected_central / report.typical_uncorrected;
    return report;
}

}  // namespace biphoton
