#include "biphoton/dft.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace biphoton {

Eigen::MatrixXcd centered_dft_matrix(int n) {
    if (n <= 0) throw std::invalid_argument("centered_dft_matrix: n must be positive");
    Eigen::MatrixXcd w(n, n);
    const int c = n / 2;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    // Tabulate the n distinct roots of unity once; the kernel argument is the
    // signed product (q-c)*(i-c) reduced mod n, so symmetries hold exactly.
    std::vector<std::complex<double>> roots(n);
    for (int r = 0; r < n; ++r) {
        double ang = -2.0 * std::numbers::pi * r / n;
        roots[r] = std::complex<double>(std::cos(ang), std::sin(ang)) * scale;
    }
    for (int q = 0; q < n; ++q) {
        for (int i = 0; i < n; ++i) {
            long long prod = static_cast<long long>(q - c) * (i - c);
            int r = static_cast<int>(((prod % n) + n) % n);
            w(q, i) = roots[r];
        }
    }
    return w;
}

Eigen::MatrixXcd centered_dft2(const Eigen::MatrixXcd& x) {
    if (x.rows() != x.cols())
        throw std::invalid_argument("centered_dft2: input must be square");
    Eigen::MatrixXcd w = centered_dft_matrix(static_cast<int>(x.rows()));
    return w * x * w.transpose();
}

}  // namespace biphoton
