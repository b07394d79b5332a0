#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace parisian {

// Counter-based Philox-4x32-10 block function. Used as a keyed pseudo-random
// function: (seed, stream_index) -> 256 bits of per-stream state, so any path's
// stream can be regenerated in isolation and results never depend on which
// worker ran it.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static inline std::array<std::uint32_t, 4> block(std::uint32_t k0, std::uint32_t k1,
                                                     std::array<std::uint32_t, 4> c) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k0 += kWeyl0;
                k1 += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
                 static_cast<std::uint32_t>(p0)};
        }
        return c;
    }
};

namespace detail {

// Ziggurat tables for the standard normal (128 layers, Marsaglia-Tsang layout).
struct ZigguratTables {
    std::uint32_t kn[128];
    double wn[128];
    double fn[128];

    ZigguratTables() {
        const double m1 = 2147483648.0;
        const double vn = 9.91256303526217e-3;
        double dn = 3.442619855899;
        double tn = dn;
        const double q = vn / std::exp(-0.5 * dn * dn);
        kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
    }
};

inline const ZigguratTables& ziggurat() {
    static const ZigguratTables tables;
    return tables;
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

// One deterministic stream addressed by (seed, stream_index). The 256-bit
// internal state comes from two Philox blocks keyed by the seed with the
// stream index in the counter; draws then advance a xoshiro256++ core, which
// keeps the per-draw cost low enough for the path-simulation budgets.
// Consumption order is fixed, so any worker layout reproduces identical values.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_index) {
        const std::uint32_t k0 = static_cast<std::uint32_t>(seed);
        const std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
        const std::uint32_t i0 = static_cast<std::uint32_t>(stream_index);
        const std::uint32_t i1 = static_cast<std::uint32_t>(stream_index >> 32);
        const auto a = Philox4x32::block(k0, k1, {0u, i0, i1, 0u});
        const auto b = Philox4x32::block(k0, k1, {1u, i0, i1, 0u});
        s_[0] = (static_cast<std::uint64_t>(a[1]) << 32) | a[0];
        s_[1] = (static_cast<std::uint64_t>(a[3]) << 32) | a[2];
        s_[2] = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
        s_[3] = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) {
            s_[0] = 0x9E3779B97F4A7C15ull;
        }
    }

    inline std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl64(s_[3], 45);
        return result;
    }

    inline std::uint32_t next_u32() {
        if (have_half_) {
            have_half_ = false;
            return static_cast<std::uint32_t>(pending_ >> 32);
        }
        pending_ = next_u64();
        have_half_ = true;
        return static_cast<std::uint32_t>(pending_);
    }

    // Uniform on (0,1), 53-bit resolution.
    inline double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Standard normal via ziggurat; consumes one 64-bit word per draw. The
    // magnitude and the layer index come from disjoint bit fields so no bits
    // are reused, and the layer never touches the word's low bits.
    inline double normal() {
        const auto& z = detail::ziggurat();
        const std::uint64_t v = next_u64();
        const std::int32_t hz =
            static_cast<std::int32_t>(static_cast<std::uint32_t>(v >> 32));
        const std::uint32_t iz = static_cast<std::uint32_t>(v >> 25) & 127u;
        const std::uint32_t ax =
            hz >= 0 ? static_cast<std::uint32_t>(hz)
                    : static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz));
        if (ax < z.kn[iz]) {
            return hz * z.wn[iz];
        }
        return normal_fix(hz, iz);
    }

private:
    double normal_fix(std::int32_t hz, std::uint32_t iz) {
        const auto& z = detail::ziggurat();
        const double r = 3.442619855899;
        for (;;) {
            const double x = hz * z.wn[iz];
            if (iz == 0) {
                // tail sampling, Marsaglia's exponential wedge
                double xx;
                double yy;
                do {
                    xx = -std::log(uniform01()) / r;
                    yy = -std::log(uniform01());
                } while (yy + yy < xx * xx);
                return hz > 0 ? r + xx : -(r + xx);
            }
            if (z.fn[iz] + uniform01() * (z.fn[iz - 1] - z.fn[iz]) <
                std::exp(-0.5 * x * x)) {
                return x;
            }
            const std::uint64_t v = next_u64();
            hz = static_cast<std::int32_t>(static_cast<std::uint32_t>(v >> 32));
            iz = static_cast<std::uint32_t>(v >> 25) & 127u;
            const std::uint32_t ax =
                hz >= 0 ? static_cast<std::uint32_t>(hz)
                        : static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz));
            if (ax < z.kn[iz]) {
                return hz * z.wn[iz];
            }
        }
    }

    std::uint64_t s_[4];
    std::uint64_t pending_ = 0;
    bool have_half_ = false;
};

} // namespace parisian
