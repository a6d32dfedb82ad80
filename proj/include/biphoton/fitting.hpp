#pragma once

#include <Eigen/Dense>
#include <span>

namespace biphoton {

// y ~ amplitude * sin(2*pi*x/period + phase) + offset. The period is found by
// a coarse grid search (linear least squares for the remaining parameters at
// each trial period) followed by a local refinement; deterministic throughout.
struct SinusoidFit {
    double amplitude = 0.0;
    double period = 0.0;
    double phase = 0.0;
    double offset = 0.0;
    double residual_rms = 0.0;
    bool converged = false;

    double eval(double x) const;
};

SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y);

/// Least-squares polynomial, coefficients from highest degree down to the
/// constant term (coeffs[0]*x^deg + ... + coeffs[deg]).
Eigen::VectorXd polyfit(std::span<const double> x, std::span<const double> y, int degree);

double polyval(const Eigen::VectorXd& coeffs, double x);

}  // namespace biphoton
