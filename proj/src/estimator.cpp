#include "biphoton/estimator.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "biphoton/threading.hpp"

namespace biphoton {

namespace {

struct SparseFrame {
    std::vector<int> idx;
    std::vector<double> val;
};

std::vector<SparseFrame> sparsify(const FrameBlock& block) {
    const int npix = block.n * block.n;
    std::vector<SparseFrame> frames(static_cast<size_t>(block.m));
    for (int f = 0; f < block.m; ++f) {
        auto& sf = frames[static_cast<size_t>(f)];
        const std::uint16_t* base = block.data.data() + static_cast<size_t>(f) * npix;
        for (int k = 0; k < npix; ++k) {
            if (base[k] != 0) {
                sf.idx.push_back(k);
                sf.val.push_back(static_cast<double>(base[k]));
            }
        }
    }
    return frames;
}

}  // namespace

void G2Accumulator::merge(const G2Accumulator& other) {
    if (other.n != n) throw std::invalid_argument("G2Accumulator::merge: size mismatch");
    r += other.r;
    a += other.a;
    frames_processed += other.frames_processed;
    blocks_processed += other.blocks_processed;
}

void accumulate_block(G2Accumulator& acc, const FrameBlock& block) {
    if (block.n != acc.n)
        throw std::invalid_argument("accumulate_block: frame side does not match accumulator");
    if (block.m < 2)
        throw std::invalid_argument("accumulate_block: need at least 2 frames per block");

    const int npix = acc.n * acc.n;
    const auto frames = sparsify(block);

    using RowMajorXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajorXd rb = RowMajorXd::Zero(npix, npix);  // row major: inner loops stay contiguous
    RowMajorXd ab = RowMajorXd::Zero(npix, npix);

    // Each worker owns a contiguous row range; frames are walked in order, so
    // every matrix element accumulates its terms in the same order for any
    // worker count. Zero pixels contribute exact zeros and are skipped.
    parallel_for(0, npix, [&](int row_lo, int row_hi) {
        for (int f = 0; f < block.m; ++f) {
            const auto& sf = frames[static_cast<size_t>(f)];
            const size_t nnz = sf.idx.size();
            for (size_t p = 0; p < nnz; ++p) {
                const int a_idx = sf.idx[p];
                if (a_idx < row_lo || a_idx >= row_hi) continue;
                const double va = sf.val[p];
                for (size_t q = 0; q < nnz; ++q)
                    rb(a_idx, sf.idx[q]) += va * sf.val[q];
            }
        }
        for (int f = 0; f + 1 < block.m; ++f) {
            const auto& sf = frames[static_cast<size_t>(f)];
            const auto& sg = frames[static_cast<size_t>(f + 1)];
            for (size_t p = 0; p < sf.idx.size(); ++p) {
                const int a_idx = sf.idx[p];
                if (a_idx < row_lo || a_idx >= row_hi) continue;
                const double va = sf.val[p];
                for (size_t q = 0; q < sg.idx.size(); ++q)
                    ab(a_idx, sg.idx[q]) += va * sg.val[q];
            }
            for (size_t p = 0; p < sg.idx.size(); ++p) {
                const int a_idx = sg.idx[p];
                if (a_idx < row_lo || a_idx >= row_hi) continue;
                const double va = sg.val[p];
                for (size_t q = 0; q < sf.idx.size(); ++q)
                    ab(a_idx, sf.idx[q]) += va * sf.val[q];
            }
        }
    });

    acc.r += rb / static_cast<double>(block.m);
    acc.a += ab / (2.0 * (block.m - 1));
    acc.frames_processed += block.m;
    acc.blocks_processed += 1;
}

G2Tensor finalize(const G2Accumulator& acc) {
    if (acc.blocks_processed == 0 || acc.frames_processed < 2)
        throw std::invalid_argument("finalize: accumulator holds no processed frames");
    Eigen::MatrixXd g2 = (acc.r - acc.a) / static_cast<double>(acc.blocks_processed);
    const GridSpec spec(acc.n, 1.0, 1.0, 1.0);  // estimator knows pixels, not optics
    return G2Tensor(spec, std::move(g2));
}

G2Tensor fix_artifacts(const G2Tensor& g2, FixPolicy policy, bool same_row) {
    const int n = g2.spec.n;
    G2Tensor out = g2;

    auto targeted = [&](int i1, int j1, int i2, int j2) {
        if (i1 == i2 && j1 == j2) return true;
        return same_row && i1 == i2;
    };

    auto fix_entry = [&](int i1, int j1, int i2, int j2) {
        const int p1 = pixel_index(n, i1, j1);
        const int p2 = pixel_index(n, i2, j2);
        if (policy == FixPolicy::Zero) {
            out.data(p1, p2) = 0.0;
            return;
        }
        double sum = 0.0;
        int count = 0;
        const int deltas[8][4] = {{-1, 0, 0, 0}, {1, 0, 0, 0}, {0, -1, 0, 0}, {0, 1, 0, 0},
                                  {0, 0, -1, 0}, {0, 0, 1, 0}, {0, 0, 0, -1}, {0, 0, 0, 1}};
        for (const auto& d : deltas) {
            const int a = i1 + d[0], b = j1 + d[1], e = i2 + d[2], g = j2 + d[3];
            if (a < 0 || a >= n || b < 0 || b >= n || e < 0 || e >= n || g < 0 || g >= n)
                continue;
            if (targeted(a, b, e, g)) continue;
            sum += g2.data(pixel_index(n, a, b), pixel_index(n, e, g));
            ++count;
        }
        out.data(p1, p2) = count > 0 ? sum / count : 0.0;
    };

    if (same_row) {
        for (int i = 0; i < n; ++i)
            for (int j1 = 0; j1 < n; ++j1)
                for (int j2 = 0; j2 < n; ++j2)
                    fix_entry(i, j1, i, j2);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                fix_entry(i, j, i, j);
    }
    return out;
}

Projection project_minus(const G2Tensor& g2) {
    const int n = g2.spec.n;
    Projection proj;
    proj.kind = Projection::Kind::MinusCoordinate;
    proj.n = n;
    proj.origin = n - 1;
    proj.data = Eigen::MatrixXd::Zero(2 * n - 1, 2 * n - 1);
    for (int i1 = 0; i1 < n; ++i1)
        for (int j1 = 0; j1 < n; ++j1) {
            const int p1 = pixel_index(n, i1, j1);
            for (int i2 = 0; i2 < n; ++i2)
                for (int j2 = 0; j2 < n; ++j2)
                    proj.data(i2 - i1 + n - 1, j2 - j1 + n - 1) +=
                        g2.data(p1, pixel_index(n, i2, j2));
        }
    return proj;
}

Projection project_plus(const G2Tensor& g2) {
    const int n = g2.spec.n;
    Projection proj;
    proj.kind = Projection::Kind::SumCoordinate;
    proj.n = n;
    proj.origin = n;  // bin of pixel-index sum i1 + i2 == n, i.e. r2 = -r1
    proj.data = Eigen::MatrixXd::Zero(2 * n - 1, 2 * n - 1);
    for (int i1 = 0; i1 < n; ++i1)
        for (int j1 = 0; j1 < n; ++j1) {
            const int p1 = pixel_index(n, i1, j1);
            for (int i2 = 0; i2 < n; ++i2)
                for (int j2 = 0; j2 < n; ++j2)
                    proj.data(i1 + i2, j1 + j2) += g2.data(p1, pixel_index(n, i2, j2));
        }
    return proj;
}

ProjectionStats projection_stats(const Projection& proj) {
    ProjectionStats st;
    const int size = proj.size();
    int pi = 0, pj = 0;
    proj.data.maxCoeff(&pi, &pj);
    st.peak = proj.data(pi, pj);
    st.peak_di = pi - proj.origin;
    st.peak_dj = pj - proj.origin;

    double sum = 0.0, sum2 = 0.0;
    long count = 0;
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) {
            if (std::abs(i - pi) <= 2 && std::abs(j - pj) <= 2) continue;
            const double v = proj.data(i, j);
            sum += v;
            sum2 += v * v;
            ++count;
        }
    if (count > 1) {
        st.background_mean = sum / count;
        const double var = (sum2 - sum * sum / count) / (count - 1);
        st.background_std = var > 0.0 ? std::sqrt(var) : 0.0;
        st.snr = st.background_std > 0.0 ? (st.peak - st.background_mean) / st.background_std
                                         : std::numeric_limits<double>::infinity();
    }
    return st;
}

}  // namespace biphoton
