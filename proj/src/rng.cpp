#include "biphoton/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace biphoton {

namespace {
inline std::uint64_t splitmix64_step(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + index * 0xbf58476d1ce4e5b9ULL);
    splitmix64_step(s);
    return splitmix64_step(s);
}

std::uint64_t Rng::next_u64() { return splitmix64_step(state_); }

double Rng::uniform() {
    // 53 high bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double mag = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
}

long Rng::poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean > 50.0) {
        // exp(-mean) underflows long before this; split the mean instead.
        double half = mean / 2.0;
        return poisson(half) + poisson(mean - half);
    }
    const double limit = std::exp(-mean);
    long k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform();
    } while (p > limit);
    return k - 1;
}

std::size_t Rng::sample_cdf(const std::vector<double>& cdf) {
    if (cdf.empty()) throw std::invalid_argument("sample_cdf: empty distribution");
    const double total = cdf.back();
    if (!(total > 0.0)) throw std::invalid_argument("sample_cdf: zero total mass");
    double u = uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
}

std::vector<double> cumulative_from_weights(const double* weights, std::size_t count) {
    std::vector<double> cdf(count);
    double acc = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        double w = weights[k];
        if (w < 0.0) w = 0.0;  // statistical noise floor
        acc += w;
        cdf[k] = acc;
    }
    return cdf;
}

}  // namespace biphoton
