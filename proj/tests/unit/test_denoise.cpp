#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "celltrace/denoise.hpp"

using namespace celltrace;

namespace {

RealVolume random_volume(std::mt19937_64& rng, Dims dims, VoxelSpacing s, int max) {
    RealVolume v(dims, s);
    for (auto& x : v.values()) x = static_cast<double>(rng() % static_cast<unsigned>(max + 1));
    return v;
}

// Direct 3-D convolution at one voxel with the product of three normalized, truncated
// 1-D kernels.
double direct_gaussian_at(const RealVolume& in, double sigma_um, Index3 p) {
    const auto& d = in.dims();
    std::vector<double> kernels[3];
    int radii[3];
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 1) {
            kernels[a] = {1.0};
            radii[a] = 0;
            continue;
        }
        const double s = sigma_um / in.spacing()[a];
        radii[a] = std::max(1, static_cast<int>(std::ceil(3.0 * s)));
        double sum = 0.0;
        for (int n = -radii[a]; n <= radii[a]; ++n) {
            kernels[a].push_back(std::exp(-0.5 * n * n / (s * s)));
            sum += kernels[a].back();
        }
        for (auto& w : kernels[a]) w /= sum;
    }
    double acc = 0.0;
    for (int c = -radii[2]; c <= radii[2]; ++c) {
        for (int b = -radii[1]; b <= radii[1]; ++b) {
            for (int a = -radii[0]; a <= radii[0]; ++a) {
                acc += kernels[0][a + radii[0]] * kernels[1][b + radii[1]] * kernels[2][c + radii[2]] *
                       in.clamped(p.i + a, p.j + b, p.k + c);
            }
        }
    }
    return acc;
}

RealVolume direct_gaussian(const RealVolume& in, double sigma_um) {
    RealVolume out(in.dims(), in.spacing());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = direct_gaussian_at(in, sigma_um, in.index_of(n));
    return out;
}

double direct_median(const RealVolume& in, Index3 p, int r) {
    std::vector<double> w;
    for (int c = -r; c <= r; ++c) {
        for (int b = -r; b <= r; ++b) {
            for (int a = -r; a <= r; ++a) w.push_back(in.clamped(p.i + a, p.j + b, p.k + c));
        }
    }
    std::sort(w.begin(), w.end());
    return w[w.size() / 2];
}

double l2(const RealVolume& a, const RealVolume& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += (a[n] - b[n]) * (a[n] - b[n]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("gaussian low-pass matches direct convolution") {
    std::mt19937_64 rng(5);
    const VoxelSpacing s{0.8, 0.8, 1.0};
    for (double sigma : {0.5, 1.3, 2.0}) {
        const auto v = random_volume(rng, {9, 7, 5}, s, 1000);
        const auto fast = gaussian_lowpass(v, sigma);
        const auto slow = direct_gaussian(v, sigma);
        for (std::size_t n = 0; n < v.size(); ++n) CHECK(fast[n] == doctest::Approx(slow[n]).epsilon(1e-12));
    }
    // Singleton axes are skipped rather than rejected.
    const auto flat = random_volume(rng, {12, 12, 1}, s, 50);
    const auto out = gaussian_lowpass(flat, 2.0);
    const auto ref = direct_gaussian(flat, 2.0);
    for (std::size_t n = 0; n < flat.size(); ++n) CHECK(out[n] == doctest::Approx(ref[n]).epsilon(1e-12));
}

TEST_CASE("gaussian sigma larger than the grid is rejected") {
    RealVolume v({8, 8, 8}, {1, 1, 1}, 1.0);
    CHECK_THROWS_AS(gaussian_lowpass(v, 9.0), ParameterError);
    CHECK_THROWS_AS(gaussian_lowpass(v, 0.0), ParameterError);
    CHECK_THROWS_AS(denoise_cell_channel(VoxelGrid({8, 8, 8}, {}, 1), {20.0, 1}), ParameterError);
}

TEST_CASE("median filter matches direct window evaluation") {
    std::mt19937_64 rng(9);
    for (int r : {1, 2}) {
        const auto v = random_volume(rng, {7, 6, 5}, {}, 30);
        const auto m = median_filter(v, r);
        for (std::size_t n = 0; n < v.size(); ++n) CHECK(m[n] == direct_median(v, v.index_of(n), r));
    }
}

TEST_CASE("cell channel denoise") {
    SUBCASE("constant grid becomes zero") {
        const auto out = denoise_cell_channel(VoxelGrid({12, 12, 12}, {}, 500), {});
        for (auto v : out.values()) CHECK(v == 0);
    }
    SUBCASE("isolated impulse is removed") {
        VoxelGrid g({12, 12, 12}, {}, 0);
        g(6, 6, 6) = 4000;
        const auto out = denoise_cell_channel(g, {10.0, 1});
        CHECK(out(6, 6, 6) == 0);
    }
    SUBCASE("compact blob survives background removal") {
        VoxelGrid g({32, 32, 32}, {}, 100);
        for (std::size_t k = 12; k < 19; ++k) {
            for (std::size_t j = 12; j < 19; ++j) {
                for (std::size_t i = 12; i < 19; ++i) g(i, j, k) = 1100;
            }
        }
        const auto out = denoise_cell_channel(g, {10.0, 1});
        const auto residual_peak = 1100.0 - direct_gaussian_at(to_real(g), 10.0, {15, 15, 15});
        CHECK(out(15, 15, 15) >= 0.5 * residual_peak);
        CHECK(out.dims() == g.dims());
        CHECK(out.spacing() == g.spacing());
    }
    SUBCASE("output lies between zero and the input maximum") {
        std::mt19937_64 rng(2);
        VoxelGrid g({16, 16, 16}, {0.8, 0.8, 1.0});
        for (auto& v : g.values()) v = static_cast<std::uint16_t>(rng() % 3000);
        const auto out = denoise_cell_channel(g, {5.0, 1});
        CHECK(max_value(out) <= max_value(g));
    }
}

TEST_CASE("noise estimate") {
    CHECK(estimate_noise_variance(RealVolume({8, 8, 8}, {}, 3.0)) == 0.0);
    RealVolume ramp({10, 10, 10}, {});
    for (std::size_t n = 0; n < ramp.size(); ++n) {
        const Index3 p = ramp.index_of(n);
        ramp[n] = 2.0 * p.i - 3.0 * p.j + 0.5 * p.k + 7.0;
    }
    CHECK(estimate_noise_variance(ramp) == doctest::Approx(0.0).epsilon(1e-12));

    std::mt19937_64 rng(21);
    std::normal_distribution<double> normal(0.0, 5.0);
    RealVolume noisy({64, 64, 64}, {});
    std::vector<double> injected;
    for (auto& v : noisy.values()) {
        const double e = normal(rng);
        injected.push_back(e);
        v = 100.0 + e;
    }
    double mean = 0.0;
    for (double e : injected) mean += e;
    mean /= static_cast<double>(injected.size());
    double var = 0.0;
    for (double e : injected) var += (e - mean) * (e - mean);
    const double s = std::sqrt(var / static_cast<double>(injected.size() - 1));
    CHECK(std::abs(estimate_noise_variance(noisy) - s) <= 0.15 * s);

    CHECK_THROWS_AS(estimate_noise_variance(RealVolume({2, 5, 5}, {}, 1.0)), ParameterError);
}

TEST_CASE("mrf step size and update rule") {
    RealVolume v({3, 1, 1}, {}, std::vector<double>{3, 7, 12});
    CHECK(minimum_value_step(v) == 4.0);
    CHECK(minimum_value_step(RealVolume({2, 2, 2}, {}, 5.0)) == 0.0);

    RealVolume inc({3, 3, 3}, {});
    for (std::size_t n = 0; n < inc.size(); ++n) {
        const Index3 p = inc.index_of(n);
        inc[n] = static_cast<double>(p.i + 3 * p.j + 9 * p.k);
    }
    CHECK(mrf_step(inc, 1.0)(1, 1, 1) == inc(1, 1, 1) - 1.0);

    RealVolume valley({3, 3, 3}, {}, 10.0);
    valley(1, 1, 1) = 2.0;
    CHECK(mrf_step(valley, 1.0)(1, 1, 1) == 2.0);
}

TEST_CASE("mrf iteration contract") {
    SUBCASE("constant input is returned after zero iterations") {
        const RealVolume c({6, 6, 6}, {}, 42.0);
        const auto r = mrf_iterate(c);
        CHECK(r.iterations == 0);
        CHECK(r.image == c);
        CHECK(r.converged);
    }
    SUBCASE("bound, step and shift invariance on random grids") {
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 5; ++trial) {
            RealVolume v({10, 10, 10}, {}, 50.0);
            for (auto& x : v.values()) {
                if (rng() % 20 == 0) x = 50.0 + static_cast<double>(rng() % 40);
            }
            bool steps_ok = true;
            std::vector<double> distances;
            MrfOptions opts;
            opts.observer = [&](const RealVolume& prev, const RealVolume& next) {
                const double delta = minimum_value_step(v);
                for (std::size_t n = 0; n < prev.size(); ++n) {
                    const double diff = next[n] - prev[n];
                    steps_ok &= diff == 0.0 || diff == delta || diff == -delta;
                }
                distances.push_back(l2(next, v));
            };
            const auto r = mrf_iterate(v, opts);
            CHECK(steps_ok);
            CHECK(r.converged);
            CHECK(l2(r.image, v) <= r.sigma_hat);
            CHECK(r.distance_to_original == doctest::Approx(l2(r.image, v)));
            // Every accepted iterate met the bound; the rejected candidate did not.
            for (int n = 0; n < r.iterations; ++n) CHECK(distances[static_cast<std::size_t>(n)] <= r.sigma_hat);
            REQUIRE(static_cast<int>(distances.size()) == r.iterations + 1);
            const double rejected = distances.back();
            const double kept = r.iterations > 0 ? distances[distances.size() - 2] : 0.0;
            CHECK((rejected > r.sigma_hat || rejected == kept));

            auto shifted = v;
            for (auto& x : shifted.values()) x += 17.0;
            const auto rs = mrf_iterate(shifted);
            CHECK(rs.iterations == r.iterations);
            for (std::size_t n = 0; n < v.size(); ++n) CHECK(rs.image[n] == r.image[n] + 17.0);
        }
    }
    SUBCASE("iteration cap reports non-convergence") {
        RealVolume v({8, 8, 8}, {}, 0.0);
        std::mt19937_64 rng(4);
        for (auto& x : v.values()) x = static_cast<double>(rng() % 500);
        MrfOptions opts;
        opts.max_iterations = 0;
        const auto r = mrf_iterate(v, opts);
        CHECK_FALSE(r.converged);
        CHECK(r.image == v);
    }
    SUBCASE("grid output stays in range") {
        VoxelGrid g({6, 6, 6}, {}, 0);
        g(3, 3, 3) = 65535;
        const auto out = mrf_denoise(g);
        CHECK(out.dims() == g.dims());
    }
}
