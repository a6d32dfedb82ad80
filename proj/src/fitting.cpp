#include "biphoton/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace biphoton {

namespace {

struct TrialFit {
    double a = 0.0, b = 0.0, c = 0.0;
    double rss = std::numeric_limits<double>::infinity();
};

// Linear LS of y on [sin(w x), cos(w x), 1] for fixed angular frequency w.
TrialFit solve_at_period(std::span<const double> x, std::span<const double> y, double period) {
    const size_t n = x.size();
    const double w = 2.0 * std::numbers::pi / period;
    Eigen::MatrixXd m(n, 3);
    Eigen::VectorXd rhs(n);
    for (size_t k = 0; k < n; ++k) {
        m(k, 0) = std::sin(w * x[k]);
        m(k, 1) = std::cos(w * x[k]);
        m(k, 2) = 1.0;
        rhs(k) = y[k];
    }
    TrialFit fit;
    Eigen::Vector3d sol = (m.transpose() * m).ldlt().solve(m.transpose() * rhs);
    fit.a = sol(0);
    fit.b = sol(1);
    fit.c = sol(2);
    fit.rss = (m * sol - rhs).squaredNorm();
    return fit;
}

}  // namespace

double SinusoidFit::eval(double x) const {
    return amplitude * std::sin(2.0 * std::numbers::pi * x / period + phase) + offset;
}

SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 4)
        throw std::invalid_argument("fit_sinusoid: need at least 4 matching samples");

    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const double span = *xmax_it - *xmin_it;
    if (!(span > 0.0)) throw std::invalid_argument("fit_sinusoid: degenerate x range");

    // Smallest resolvable period ~ 2 samples, largest ~ 4 spans.
    const double tmin = 2.0 * span / static_cast<double>(x.size() - 1);
    const double tmax = 4.0 * span;
    const int coarse = 400;

    SinusoidFit best;
    double best_rss = std::numeric_limits<double>::infinity();
    double best_period = tmax;
    for (int k = 0; k <= coarse; ++k) {
        const double t = tmin * std::pow(tmax / tmin, static_cast<double>(k) / coarse);
        const TrialFit fit = solve_at_period(x, y, t);
        if (fit.rss < best_rss) {
            best_rss = fit.rss;
            best_period = t;
        }
    }
    // Local parabolic-style refinement around the best coarse period.
    double lo = best_period / std::pow(tmax / tmin, 1.0 / coarse);
    double hi = best_period * std::pow(tmax / tmin, 1.0 / coarse);
    for (int iter = 0; iter < 60; ++iter) {
        const double t1 = lo + (hi - lo) / 3.0;
        const double t2 = hi - (hi - lo) / 3.0;
        if (solve_at_period(x, y, t1).rss < solve_at_period(x, y, t2).rss)
            hi = t2;
        else
            lo = t1;
    }
    best_period = 0.5 * (lo + hi);
    const TrialFit fit = solve_at_period(x, y, best_period);

    SinusoidFit out;
    out.period = best_period;
    out.amplitude = std::hypot(fit.a, fit.b);
    out.phase = std::atan2(fit.b, fit.a);
    out.offset = fit.c;
    out.residual_rms = std::sqrt(fit.rss / static_cast<double>(x.size()));
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    out.converged = out.amplitude > 1e-12 && out.amplitude > 1e-6 * scale &&
                    std::isfinite(out.residual_rms);
    return out;
}

Eigen::VectorXd polyfit(std::span<const double> x, std::span<const double> y, int degree) {
    if (x.size() != y.size() || static_cast<int>(x.size()) < degree + 1)
        throw std::invalid_argument("polyfit: not enough samples for requested degree");
    Eigen::MatrixXd m(x.size(), degree + 1);
    Eigen::VectorXd rhs(x.size());
    for (size_t k = 0; k < x.size(); ++k) {
        double p = 1.0;
        for (int d = degree; d >= 0; --d) {
            m(k, d) = p;
            p *= x[k];
        }
        rhs(k) = y[k];
    }
    return m.colPivHouseholderQr().solve(rhs);
}

double polyval(const Eigen::VectorXd& coeffs, double x) {
    double acc = 0.0;
    for (int k = 0; k < coeffs.size(); ++k) acc = acc * x + coeffs(k);
    return acc;
}

}  // namespace biphoton
