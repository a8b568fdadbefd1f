#pragma once

// Counter-based normal variates. Every draw is a pure function of
// (seed, path, stream, step), so simulations are reproducible no matter
// how paths are scheduled across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace clmm::random {

// Philox4x32-10 (Salmon et al., Random123).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static constexpr Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

// 53-bit uniform on the open interval (0, 1).
constexpr double to_open_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Standard normal stream for one (seed, path, stream) triple, addressable by step.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t path, std::uint32_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_(path),
          stream_(stream) {}

    double at(std::uint64_t step) const {
        const auto pair = block(step >> 1);
        return (step & 1u) ? pair[1] : pair[0];
    }

    // Fills out[i] = at(first + i).
    void fill(std::span<double> out, std::uint64_t first = 0) const {
        std::size_t i = 0;
        std::uint64_t step = first;
        if ((step & 1u) && i < out.size()) {
            out[i++] = at(step++);
        }
        for (; i + 1 < out.size(); i += 2, step += 2) {
            const auto pair = block(step >> 1);
            out[i] = pair[0];
            out[i + 1] = pair[1];
        }
        if (i < out.size()) out[i] = at(step);
    }

private:
    std::array<double, 2> block(std::uint64_t index) const {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index),
                                      static_cast<std::uint32_t>(index >> 32),
                                      path_,
                                      stream_};
        const auto r = Philox4x32::generate(ctr, key_);
        // Box-Muller
        const double u1 = to_open_unit(r[0], r[1]);
        const double u2 = to_open_unit(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    Philox4x32::Key key_;
    std::uint32_t path_;
    std::uint32_t stream_;
};

// Uniform (0, 1) stream on the same counter layout; unlike std
// distributions its output does not depend on the standard library.
class UniformStream {
public:
    UniformStream(std::uint64_t seed, std::uint32_t path, std::uint32_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_(path),
          stream_(stream) {}

    double at(std::uint64_t step) const {
        const std::uint64_t index = step >> 1;
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                      path_, stream_};
        const auto r = Philox4x32::generate(ctr, key_);
        return (step & 1u) ? to_open_unit(r[2], r[3]) : to_open_unit(r[0], r[1]);
    }

    // Sequential draws for convenience.
    double next() { return at(cursor_++); }
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    Philox4x32::Key key_;
    std::uint32_t path_;
    std::uint32_t stream_;
    std::uint64_t cursor_ = 0;
};

}  // namespace clmm::random
