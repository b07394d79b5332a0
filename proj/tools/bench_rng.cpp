// Microbenchmark for the random stream: ns per normal draw and per path step.
// The acceptance runtime budgets assume a few ns per normal on one core.

#include "parisian/rng.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>

using namespace parisian;

int main() {
    const std::int64_t n = 200000000;
    double sink = 0.0;

    auto t0 = std::chrono::steady_clock::now();
    {
        RngStream rng(42, 7);
        for (std::int64_t i = 0; i < n; ++i) {
            sink += rng.normal();
        }
    }
    auto t1 = std::chrono::steady_clock::now();
    const double ns_normal =
        std::chrono::duration<double, std::nano>(t1 - t0).count() / static_cast<double>(n);

    // simulated ruin-check inner loop: one normal, one fused update, one compare
    t0 = std::chrono::steady_clock::now();
    {
        RngStream rng(42, 8);
        const double sdt = 0.0078125;
        const double drift = 1.5e-4;
        double b = 0.0;
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            b += rng.normal() * sdt + drift;
            hits += b > 4.0;
        }
        sink += static_cast<double>(hits) + b;
    }
    t1 = std::chrono::steady_clock::now();
    const double ns_step =
        std::chrono::duration<double, std::nano>(t1 - t0).count() / static_cast<double>(n);

    std::printf("normals: %.2f ns/draw\n", ns_normal);
    std::printf("path step: %.2f ns/step\n", ns_step);
    std::printf("(checksum %.6f)\n", sink);
    return 0;
}
