// Compares the serial reference kernels against their OpenMP twins on
// training-sized workloads and checks that the outputs agree bit for bit.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "uwiq/kernels.hpp"
#include "uwiq/parallel.hpp"
#include "uwiq/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void row(const std::string& name, double serial_ms, double omp_ms, double diff) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx   max|diff| %.1e\n", name.c_str(),
                serial_ms, omp_ms, serial_ms / omp_ms, diff);
}

}  // namespace

int main() {
    using namespace uwiq;

    std::printf("threads available: %d (openmp %s)\n\n", par::threads(),
                par::openmp_available() ? "on" : "off");
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    Rng rng(7);
    const int h = 512, w = 512;
    const std::size_t npx = static_cast<std::size_t>(h) * w;

    std::vector<double> rgb(npx * 3), rgb2(npx * 3);
    for (double& v : rgb) v = rng.uniform();
    for (double& v : rgb2) v = rng.uniform();

    {
        std::vector<double> a(npx * 3), b(npx * 3);
        const double s = time_ms([&] { kern::serial::lerp_clamped(rgb.data(), rgb2.data(), 0.3, a.data(), a.size()); }, 20);
        const double p = time_ms([&] { kern::omp::lerp_clamped(rgb.data(), rgb2.data(), 0.3, b.data(), b.size()); }, 20);
        row("lerp_clamped 512^2", s, p, max_abs_diff(a, b));
    }
    {
        std::vector<double> a(npx * 3), b(npx * 3);
        const double s = time_ms([&] { kern::serial::srgb_to_lab(rgb.data(), a.data(), npx); }, 10);
        const double p = time_ms([&] { kern::omp::srgb_to_lab(rgb.data(), b.data(), npx); }, 10);
        row("srgb_to_lab 512^2", s, p, max_abs_diff(a, b));
    }
    {
        std::vector<double> plane(npx);
        for (std::size_t i = 0; i < npx; ++i) plane[i] = rgb[3 * i];
        std::vector<double> a(npx), b(npx);
        const double s = time_ms([&] { kern::serial::sobel_magnitude(plane.data(), h, w, a.data()); }, 10);
        const double p = time_ms([&] { kern::omp::sobel_magnitude(plane.data(), h, w, b.data()); }, 10);
        row("sobel_magnitude 512^2", s, p, max_abs_diff(a, b));

        double va = 0, vb = 0;
        const double s2 = time_ms([&] { va = kern::serial::block_log_contrast(plane.data(), h, w, 8); }, 20);
        const double p2 = time_ms([&] { vb = kern::omp::block_log_contrast(plane.data(), h, w, 8); }, 20);
        row("block_log_contrast 512^2", s2, p2, std::abs(va - vb));
    }

    // conv stack at training scale: 16 -> 32 channels on a 32x32 map
    {
        const int ci = 16, co = 32, ch = 32, cw = 32, k = 3;
        std::vector<double> in(static_cast<std::size_t>(ci) * ch * cw);
        std::vector<double> wgt(static_cast<std::size_t>(co) * ci * k * k);
        std::vector<double> bias(co);
        std::vector<double> gout(static_cast<std::size_t>(co) * ch * cw);
        for (double& v : in) v = rng.uniform(-1, 1);
        for (double& v : wgt) v = rng.uniform(-1, 1);
        for (double& v : gout) v = rng.uniform(-1, 1);

        std::vector<double> a(gout.size()), b(gout.size());
        const double s = time_ms([&] { kern::serial::conv2d_same(in.data(), ci, ch, cw, wgt.data(), bias.data(), co, k, a.data()); }, 10);
        const double p = time_ms([&] { kern::omp::conv2d_same(in.data(), ci, ch, cw, wgt.data(), bias.data(), co, k, b.data()); }, 10);
        row("conv2d 16->32 @32^2", s, p, max_abs_diff(a, b));

        std::vector<double> ga(in.size()), gb(in.size());
        const double s2 = time_ms([&] { kern::serial::conv2d_same_grad_input(gout.data(), co, ch, cw, wgt.data(), ci, k, ga.data()); }, 10);
        const double p2 = time_ms([&] { kern::omp::conv2d_same_grad_input(gout.data(), co, ch, cw, wgt.data(), ci, k, gb.data()); }, 10);
        row("conv2d grad_input", s2, p2, max_abs_diff(ga, gb));

        std::vector<double> gwa(wgt.size()), gwb(wgt.size()), gba(co), gbb(co);
        const double s3 = time_ms([&] { kern::serial::conv2d_same_grad_params(gout.data(), co, ch, cw, in.data(), ci, k, gwa.data(), gba.data()); }, 10);
        const double p3 = time_ms([&] { kern::omp::conv2d_same_grad_params(gout.data(), co, ch, cw, in.data(), ci, k, gwb.data(), gbb.data()); }, 10);
        row("conv2d grad_params", s3, p3,
            std::max(max_abs_diff(gwa, gwb), max_abs_diff(gba, gbb)));
    }

    std::printf("\nall max|diff| values must be exactly 0.\n");
    return 0;
}
