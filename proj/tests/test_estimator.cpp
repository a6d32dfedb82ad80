#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "biphoton/detector.hpp"
#include "biphoton/estimator.hpp"
#include "biphoton/fields.hpp"
#include "biphoton/propagation.hpp"
#include "biphoton/threading.hpp"

using namespace biphoton;

namespace {

GridSpec spec_of(int n) { return GridSpec(n, 8e-6, 810e-9, 0.1); }

G2Tensor nf_truth(int n, double waist) {
    const auto spec = spec_of(n);
    const auto env = make_envelope(spec, Gaussian{waist});
    return propagate_pairs_analytic(make_biphoton(spec, PairConfig::NF, env),
                                    PhaseMask::flat(spec));
}

FrameBlock constant_block(int n, int m, std::uint16_t value) {
    FrameBlock block(n, m);
    std::fill(block.data.begin(), block.data.end(), value);
    return block;
}

DetectorModel clean_model(double mu, double stray, std::uint64_t seed) {
    DetectorModel model;
    model.pairs_per_frame = mu;
    model.stray_rate = stray;
    model.seed = seed;
    return model;
}

}  // namespace

TEST_CASE("constant frames contribute equally to R and A") {
    const int n = 4;
    G2Accumulator acc(n);
    accumulate_block(acc, constant_block(n, 8, 3));
    CHECK(acc.r.minCoeff() == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(acc.r.maxCoeff() == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(acc.a.minCoeff() == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(acc.a.maxCoeff() == doctest::Approx(9.0).epsilon(1e-12));
    const auto g2 = finalize(acc);
    CHECK(g2.data.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two hot-pixel frames produce the textbook R and A") {
    const int n = 4;
    FrameBlock block(n, 2);
    block.at(0, 1, 1) = 2;  // frame 0: pixel p=5
    block.at(1, 2, 3) = 3;  // frame 1: pixel q=11
    const int p = pixel_index(n, 1, 1);
    const int q = pixel_index(n, 2, 3);

    G2Accumulator acc(n);
    accumulate_block(acc, block);
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) {
            double r_expected = 0.0;
            if (a == p && b == p) r_expected = 4.0 / 2.0;
            if (a == q && b == q) r_expected = 9.0 / 2.0;
            CHECK(acc.r(a, b) == doctest::Approx(r_expected).epsilon(1e-12));
            double a_expected = 0.0;
            if ((a == p && b == q) || (a == q && b == p)) a_expected = 6.0 / 2.0;
            CHECK(acc.a(a, b) == doctest::Approx(a_expected).epsilon(1e-12));
        }
}

TEST_CASE("R and A stay symmetric after every block") {
    const int n = 8;
    const auto truth = nf_truth(n, 1.5);
    G2Accumulator acc(n);
    for (int b = 0; b < 3; ++b) {
        accumulate_block(acc, synthesize_block(truth, clean_model(4.0, 2.0, 65), 200,
                                               static_cast<std::uint64_t>(b) * 200));
        CHECK((acc.r - acc.r.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((acc.a - acc.a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(acc.frames_processed == 600);
    CHECK(acc.blocks_processed == 3);
}

TEST_CASE("accumulator contract violations throw") {
    G2Accumulator acc(4);
    CHECK_THROWS_AS(finalize(acc), std::invalid_argument);
    CHECK_THROWS_AS(accumulate_block(acc, constant_block(8, 4, 1)), std::invalid_argument);
    CHECK_THROWS_AS(FrameBlock(4, 1), std::invalid_argument);
}

TEST_CASE("uncorrelated photons leave no significant off-diagonal signal") {
    const int n = 8;
    const auto truth = nf_truth(n, 1.5);
    const int blocks = 30, m = 200;

    // bootstrap: per-block estimates give the spread of the mean
    std::vector<Eigen::MatrixXd> samples;
    G2Accumulator total(n);
    for (int b = 0; b < blocks; ++b) {
        G2Accumulator one(n);
        const auto frames = synthesize_block(truth, clean_model(0.0, 6.0, 400), m,
                                             static_cast<std::uint64_t>(b) * m);
        accumulate_block(one, frames);
        samples.push_back(one.r - one.a);
        total.merge(one);
    }
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n * n, n * n);
    for (const auto& s : samples) mean += s;
    mean /= blocks;
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(n * n, n * n);
    for (const auto& s : samples) var += (s - mean).cwiseProduct(s - mean);
    var /= (blocks - 1);

    const auto g2 = finalize(total);
    int checked = 0;
    for (int a = 0; a < n * n; ++a)
        for (int b = 0; b < n * n; ++b) {
            if (a == b) continue;
            const double sigma_mean = std::sqrt(var(a, b) / blocks);
            if (sigma_mean == 0.0) continue;
            CHECK(std::abs(g2.data(a, b)) < 5.0 * sigma_mean + 1e-12);
            ++checked;
        }
    CHECK(checked > 1000);
}

TEST_CASE("a targeted synthetic pair dominates the estimate") {
    const int n = 8;
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(64, 64);
    data(10, 53) = 0.5;
    data(53, 10) = 0.5;
    const G2Tensor truth(spec_of(n), std::move(data));

    G2Accumulator acc(n);
    accumulate_block(acc, synthesize_block(truth, clean_model(2.0, 1.0, 8), 20000));
    auto g2 = finalize(acc);
    g2 = fix_artifacts(g2, FixPolicy::Zero);  // discard self-coincidence diagonal
    Eigen::Index ra, rb;
    g2.data.maxCoeff(&ra, &rb);
    const bool hit = (ra == 10 && rb == 53) || (ra == 53 && rb == 10);
    CHECK(hit);
}

TEST_CASE("estimator recovers the truth projection peak and scale") {
    const int n = 16;
    const auto truth = nf_truth(n, 3.0);
    const double mu = 5.0;
    G2Accumulator acc(n);
    const int blocks = 40, m = 500;
    for (int b = 0; b < blocks; ++b)
        accumulate_block(acc, synthesize_block(truth, clean_model(mu, 2.0, 1234), m,
                                               static_cast<std::uint64_t>(b) * m));
    const auto g2 = fix_artifacts(finalize(acc), FixPolicy::NeighborMean);
    const auto proj = project_plus(g2);
    const auto stats = projection_stats(proj);
    CHECK(stats.peak_di == 0);
    CHECK(stats.peak_dj == 0);
    const auto truth_proj = project_plus(truth);
    CHECK(proj.center() / (2.0 * mu) ==
          doctest::Approx(truth_proj.center()).epsilon(0.10));
}

TEST_CASE("diagonal artifacts are replaced by their neighborhood") {
    const int n = 4;
    Eigen::MatrixXd data = Eigen::MatrixXd::Constant(16, 16, 1.0);
    for (int p = 0; p < 16; ++p) data(p, p) = 100.0;
    const G2Tensor g2(spec_of(n), std::move(data));

    const auto mean_fixed = fix_artifacts(g2, FixPolicy::NeighborMean);
    for (int p = 0; p < 16; ++p) CHECK(mean_fixed.data(p, p) == doctest::Approx(1.0));
    CHECK(mean_fixed.data(1, 2) == 1.0);

    const auto zero_fixed = fix_artifacts(g2, FixPolicy::Zero);
    for (int p = 0; p < 16; ++p) CHECK(zero_fixed.data(p, p) == 0.0);
}

TEST_CASE("row smear artifact is removed by the same-row policy") {
    const int n = 16;
    const auto truth = nf_truth(n, 3.0);
    auto model = clean_model(5.0, 2.0, 55);
    model.smear_fraction = 0.2;
    G2Accumulator acc(n);
    const int blocks = 20, m = 500;
    for (int b = 0; b < blocks; ++b)
        accumulate_block(acc, synthesize_block(truth, model, m,
                                               static_cast<std::uint64_t>(b) * m));
    const auto raw = finalize(acc);
    const auto streaky = project_minus(fix_artifacts(raw, FixPolicy::NeighborMean));
    auto cleaned_tensor = fix_artifacts(raw, FixPolicy::Zero, /*same_row=*/true);
    cleaned_tensor = fix_artifacts(cleaned_tensor, FixPolicy::NeighborMean);
    const auto cleaned = project_minus(cleaned_tensor);

    // same-row smear shows up as the di = 0 stripe of the minus projection
    auto stripe_vs_background = [&](const Projection& proj) {
        double stripe = 0.0, background = 0.0;
        int sc = 0, bc = 0;
        for (int dj = 2; dj <= 6; ++dj) {
            stripe += proj.value_at(0, dj);
            ++sc;
            for (int di = 2; di <= 6; ++di) {
                background += proj.value_at(di, dj);
                ++bc;
            }
        }
        return (stripe / sc) / (background / bc);
    };
    CHECK(stripe_vs_background(streaky) > 2.0);
    CHECK(stripe_vs_background(cleaned) < 2.0);
}

TEST_CASE("minus projection of a diagonal tensor is a central peak") {
    const int n = 8;
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(64, 64);
    for (int p = 0; p < 64; ++p) data(p, p) = 1.0 / 64;
    const auto proj = project_minus(G2Tensor(spec_of(n), std::move(data)));
    CHECK(proj.center() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(proj.data.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(proj.value_at(1, 0) == 0.0);
}

TEST_CASE("plus projection of an anti-diagonal tensor is a central peak") {
    const int n = 8;
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(64, 64);
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j)
            data(pixel_index(n, i, j), pixel_index(n, n - i, n - j)) = 1.0;
    data /= data.sum();
    const auto proj = project_plus(G2Tensor(spec_of(n), std::move(data)));
    CHECK(proj.kind == Projection::Kind::SumCoordinate);
    CHECK(proj.center() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(proj.value_at(1, 1) == 0.0);
}

TEST_CASE("projections of a uniform tensor have triangular counts") {
    const int n = 6;
    Eigen::MatrixXd data = Eigen::MatrixXd::Constant(36, 36, 1.0);
    const G2Tensor g2(spec_of(n), std::move(data));

    const auto cm = project_minus(g2);
    for (int di = -(n - 1); di <= n - 1; ++di)
        for (int dj = -(n - 1); dj <= n - 1; ++dj)
            CHECK(cm.value_at(di, dj) ==
                  doctest::Approx((n - std::abs(di)) * (n - std::abs(dj))).epsilon(1e-12));

    const auto cp = project_plus(g2);
    auto count1d = [&](int m) { return m <= n - 1 ? m + 1 : 2 * n - 1 - m; };
    for (int a = 0; a < 2 * n - 1; ++a)
        for (int b = 0; b < 2 * n - 1; ++b)
            CHECK(cp.data(a, b) == doctest::Approx(count1d(a) * count1d(b)).epsilon(1e-12));
}

TEST_CASE("projection mass equals tensor mass") {
    const int n = 8;
    Eigen::MatrixXd data(64, 64);
    for (int a = 0; a < 64; ++a)
        for (int b = 0; b < 64; ++b) data(a, b) = std::sin(0.1 * a) + std::cos(0.2 * b) + 2.0;
    const G2Tensor g2(spec_of(n), std::move(data));
    const double mass = g2.total();
    CHECK(project_minus(g2).data.sum() == doctest::Approx(mass).epsilon(1e-9));
    CHECK(project_plus(g2).data.sum() == doctest::Approx(mass).epsilon(1e-9));
}

TEST_CASE("NF grating projection shows first orders at n/P") {
    const int n = 64;
    const auto spec = spec_of(n);
    const auto env = make_envelope(spec, Gaussian{12.8});
    const auto state = make_biphoton(spec, PairConfig::NF, env);
    const auto mask = make_grating(spec, 8, kPi / 2, 0);
    const auto proj = project_plus(propagate_pairs_analytic(state, mask));
    // e^{2i theta} is a 0/pi grating: zero order extinct, first orders lead
    CHECK(proj.value_at(0, 8) > 100.0 * proj.value_at(0, 0));
    CHECK(proj.value_at(0, -8) > 100.0 * proj.value_at(0, 0));
}

TEST_CASE("block size only changes accidental pairing, not R") {
    const int n = 8;
    const auto truth = nf_truth(n, 1.5);
    const auto stack = synthesize_block(truth, clean_model(3.0, 1.0, 321), 400);
    const int npix = n * n;

    auto run_in_blocks = [&](int m) {
        G2Accumulator acc(n);
        for (int start = 0; start < stack.m; start += m) {
            FrameBlock block(n, m);
            std::copy_n(stack.data.begin() + static_cast<size_t>(start) * npix,
                        static_cast<size_t>(m) * npix, block.data.begin());
            accumulate_block(acc, block);
        }
        return acc;
    };
    const auto a = run_in_blocks(10);
    const auto b = run_in_blocks(100);
    const Eigen::MatrixXd ra = a.r / a.blocks_processed;
    const Eigen::MatrixXd rb = b.r / b.blocks_processed;
    CHECK((ra - rb).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("estimates are linear over concatenated stacks") {
    const int n = 8;
    const auto truth = nf_truth(n, 1.5);
    const auto s1 = synthesize_block(truth, clean_model(3.0, 1.0, 77), 300);
    const auto s2 = synthesize_block(truth, clean_model(3.0, 1.0, 78), 300, 300);

    G2Accumulator acc1(n), acc2(n), both(n);
    accumulate_block(acc1, s1);
    accumulate_block(acc2, s2);
    accumulate_block(both, s1);
    accumulate_block(both, s2);

    const auto g_both = finalize(both);
    const Eigen::MatrixXd weighted =
        (finalize(acc1).data * acc1.blocks_processed + finalize(acc2).data * acc2.blocks_processed) /
        both.blocks_processed;
    CHECK((g_both.data - weighted).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("merge order changes nothing beyond rounding") {
    const int n = 8;
    const auto truth = nf_truth(n, 1.5);
    std::vector<FrameBlock> blocks;
    for (int b = 0; b < 4; ++b)
        blocks.push_back(synthesize_block(truth, clean_model(3.0, 1.0, 500), 100,
                                          static_cast<std::uint64_t>(b) * 100));

    G2Accumulator seq(n);
    for (const auto& b : blocks) accumulate_block(seq, b);

    G2Accumulator left(n), right(n);
    accumulate_block(left, blocks[0]);
    accumulate_block(left, blocks[1]);
    accumulate_block(right, blocks[2]);
    accumulate_block(right, blocks[3]);
    left.merge(right);

    CHECK((finalize(seq).data - finalize(left).data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("worker count does not change a block's accumulation bits") {
    const int n = 8;
    const auto truth = nf_truth(n, 1.5);
    const auto block = synthesize_block(truth, clean_model(4.0, 2.0, 91), 500);

    auto run_with = [&](int workers) {
        set_max_threads(workers);
        G2Accumulator acc(n);
        accumulate_block(acc, block);
        set_max_threads(0);
        return acc;
    };
    const auto r1 = run_with(1);
    const auto r4 = run_with(4);
    const auto r8 = run_with(8);
    CHECK((r1.r - r4.r).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r1.a - r4.a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r1.r - r8.r).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r1.a - r8.a).cwiseAbs().maxCoeff() == 0.0);
}
