// Times the serial reference kernels against the OpenMP versions on
// training-shaped workloads and checks they agree bit for bit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <omp.h>

#include "xt/kernels.hpp"
#include "xt/rng.hpp"

using xt::kernels::Conv2dDims;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<double> random_vec(size_t n, uint64_t seed) {
    xt::Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

template <typename Fn>
double time_ms(Fn&& fn, int iters) {
    fn();  // warm up
    const auto t0 = Clock::now();
    for (int i = 0; i < iters; ++i) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void row(const char* name, double serial_ms, double omp_ms, bool match) {
    std::printf("%-24s %10.3f ms %10.3f ms %7.2fx   %s\n", name, serial_ms, omp_ms,
                serial_ms / omp_ms, match ? "bit-equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    int iters = 20;
    if (argc > 1) iters = std::max(1, std::atoi(argv[1]));

    std::printf("threads: %d, iters: %d\n", omp_get_max_threads(), iters);
    std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    {
        Conv2dDims d;
        d.n = 32; d.c = 8; d.h = 32; d.w = 32;
        d.f = 16; d.kh = 3; d.kw = 3; d.stride = 1; d.pad = 1;
        d.oh = 32; d.ow = 32;
        const auto x = random_vec(static_cast<size_t>(d.n) * d.c * d.h * d.w, 1);
        const auto w = random_vec(static_cast<size_t>(d.f) * d.c * d.kh * d.kw, 2);
        const auto b = random_vec(static_cast<size_t>(d.f), 3);
        std::vector<double> ys(static_cast<size_t>(d.n) * d.f * d.oh * d.ow);
        std::vector<double> yo(ys.size());

        const double ts = time_ms([&] {
            xt::kernels::serial::conv2d_forward(x.data(), w.data(), b.data(), ys.data(), d);
        }, iters);
        const double to = time_ms([&] {
            xt::kernels::omp::conv2d_forward(x.data(), w.data(), b.data(), yo.data(), d);
        }, iters);
        row("conv2d_forward", ts, to, bit_equal(ys, yo));

        const auto gy = random_vec(ys.size(), 4);
        std::vector<double> gxs(x.size()), gxo(x.size());
        const double tbs = time_ms([&] {
            std::fill(gxs.begin(), gxs.end(), 0.0);
            xt::kernels::serial::conv2d_backward_input(gy.data(), w.data(), gxs.data(), d);
        }, iters);
        const double tbo = time_ms([&] {
            std::fill(gxo.begin(), gxo.end(), 0.0);
            xt::kernels::omp::conv2d_backward_input(gy.data(), w.data(), gxo.data(), d);
        }, iters);
        row("conv2d_backward_input", tbs, tbo, bit_equal(gxs, gxo));

        std::vector<double> gws(w.size()), gwo(w.size());
        const double tws = time_ms([&] {
            std::fill(gws.begin(), gws.end(), 0.0);
            xt::kernels::serial::conv2d_backward_weight(gy.data(), x.data(), gws.data(), d);
        }, iters);
        const double two = time_ms([&] {
            std::fill(gwo.begin(), gwo.end(), 0.0);
            xt::kernels::omp::conv2d_backward_weight(gy.data(), x.data(), gwo.data(), d);
        }, iters);
        row("conv2d_backward_weight", tws, two, bit_equal(gws, gwo));
    }

    {
        const int n = 256, dsize = 512, e = 128;
        const auto x = random_vec(static_cast<size_t>(n) * dsize, 5);
        const auto w = random_vec(static_cast<size_t>(dsize) * e, 6);
        const auto b = random_vec(static_cast<size_t>(e), 7);
        std::vector<double> ys(static_cast<size_t>(n) * e), yo(ys.size());
        const double ts = time_ms([&] {
            xt::kernels::serial::affine_forward(x.data(), w.data(), b.data(), ys.data(), n, dsize, e);
        }, iters);
        const double to = time_ms([&] {
            xt::kernels::omp::affine_forward(x.data(), w.data(), b.data(), yo.data(), n, dsize, e);
        }, iters);
        row("affine_forward", ts, to, bit_equal(ys, yo));
    }

    {
        const int n = 64, c = 16, h = 64, w = 64;
        const auto x = random_vec(static_cast<size_t>(n) * c * h * w, 8);
        std::vector<double> ys(static_cast<size_t>(n) * c * (h / 2) * (w / 2)), yo(ys.size());
        const double ts = time_ms([&] {
            xt::kernels::serial::avgpool2_forward(x.data(), ys.data(), n, c, h, w);
        }, iters);
        const double to = time_ms([&] {
            xt::kernels::omp::avgpool2_forward(x.data(), yo.data(), n, c, h, w);
        }, iters);
        row("avgpool2_forward", ts, to, bit_equal(ys, yo));
    }

    {
        const int h = 512, w = 512, radius = 6;
        const auto x = random_vec(static_cast<size_t>(h) * w, 9);
        std::vector<double> taps(static_cast<size_t>(2 * radius + 1));
        double sum = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            taps[static_cast<size_t>(k + radius)] = std::exp(-0.5 * k * k / 4.0);
            sum += taps[static_cast<size_t>(k + radius)];
        }
        for (auto& t : taps) t /= sum;
        std::vector<double> ys(x.size()), yo(x.size());
        const double ts = time_ms([&] {
            xt::kernels::serial::sep_filter(x.data(), ys.data(), h, w, taps.data(), radius, true);
        }, iters);
        const double to = time_ms([&] {
            xt::kernels::omp::sep_filter(x.data(), yo.data(), h, w, taps.data(), radius, true);
        }, iters);
        row("sep_filter", ts, to, bit_equal(ys, yo));
    }

    return 0;
}
