#pragma once

#include <Eigen/Dense>

// Centered 2-D discrete Fourier transform. Forward kernel has a negative
// exponent and the DC bin sits at (n/2, n/2) on input and output:
//
//   out[q] = (1/n) * sum_i in[i] * exp(-2*pi*1i * (i - n/2).(q - n/2) / n)
//
// The 1/n scale makes the 2-D transform unitary (Parseval holds exactly up to
// rounding). Implemented as two matrix products with the per-axis kernel, with
// twiddle arguments reduced mod n so the kernel is exactly n-periodic.

namespace biphoton {

/// Per-axis centered kernel W[q, i] = exp(-2*pi*1i*(q - n/2)*(i - n/2)/n) / sqrt(n).
Eigen::MatrixXcd centered_dft_matrix(int n);

/// Unitary centered 2-D DFT: W * x * W^T.
Eigen::MatrixXcd centered_dft2(const Eigen::MatrixXcd& x);

}  // namespace biphoton
