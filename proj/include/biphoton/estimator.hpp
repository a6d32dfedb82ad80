#pragma once

#include <Eigen/Dense>

#include "biphoton/detector.hpp"
#include "biphoton/propagation.hpp"

// Streaming G2 reconstruction from frame blocks. Per block of M frames
// (columns of the unwrapped N^2 x M array I):
//
//   R += (1/M) * I I^T                      real + accidental coincidences
//   A += (1/(2(M-1))) * (I1 I2^T + I2 I1^T) accidentals, consecutive frames
//
// and G2 = (R - A) / blocks. Accumulation order per matrix element is fixed
// (frames in order, block after block), so worker count never changes bits.

namespace biphoton {

struct G2Accumulator {
    int n = 0;
    Eigen::MatrixXd r;  // n^2 x n^2
    Eigen::MatrixXd a;  // n^2 x n^2, symmetric by construction
    long frames_processed = 0;
    long blocks_processed = 0;

    explicit G2Accumulator(int side)
        : n(side),
          r(Eigen::MatrixXd::Zero(side * side, side * side)),
          a(Eigen::MatrixXd::Zero(side * side, side * side)) {
        if (side < 2) throw std::invalid_argument("G2Accumulator: side must be >= 2");
    }

    /// Fold another accumulator in (partials from parallel block workers).
    void merge(const G2Accumulator& other);
};

void accumulate_block(G2Accumulator& acc, const FrameBlock& block);

/// (R - A) / blocks. Negative entries are statistical noise and are kept.
G2Tensor finalize(const G2Accumulator& acc);

enum class FixPolicy { NeighborMean, Zero };

/// Replace same-pixel (and optionally all same-row pixel-pair) entries, which
/// the camera cannot measure, by the given policy. NeighborMean averages the
/// <= 8 axis-adjacent valid entries of the 4-D neighborhood.
G2Tensor fix_artifacts(const G2Tensor& g2, FixPolicy policy, bool same_row = false);

struct Projection {
    enum class Kind { SumCoordinate, MinusCoordinate };
    Kind kind = Kind::MinusCoordinate;
    int n = 0;
    int origin = 0;          // index of the zero-offset bin on each axis
    Eigen::MatrixXd data;    // (2n-1) x (2n-1)

    int size() const { return 2 * n - 1; }
    bool offset_in_range(int di, int dj) const {
        return origin + di >= 0 && origin + di < size() && origin + dj >= 0 &&
               origin + dj < size();
    }
    double value_at(int di, int dj) const { return data(origin + di, origin + dj); }
    /// The zero-offset bin: identical pixels (minus) / anti-symmetric pixel
    /// pairs (sum).
    double center() const { return value_at(0, 0); }
};

/// C-(d) = sum over pixel pairs separated by d = r2 - r1.
Projection project_minus(const G2Tensor& g2);

/// C+(s) indexed by the pixel-index sum; the origin bin collects pairs with
/// r2 = -r1.
Projection project_plus(const G2Tensor& g2);

struct ProjectionStats {
    int peak_di = 0, peak_dj = 0;   // offsets relative to the origin
    double peak = 0.0;
    double background_mean = 0.0;
    double background_std = 0.0;
    double snr = 0.0;               // (peak - mean) / std, 5x5 peak window excluded
};
ProjectionStats projection_stats(const Projection& proj);

}  // namespace biphoton
