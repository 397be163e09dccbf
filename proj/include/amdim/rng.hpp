#pragma once

// Counter-based Philox4x32-10 stream. A (seed, stream_id) pair fully
// determines the output sequence, on every platform, and any stream can be
// constructed in O(1) without touching the others.

#include "amdim/am_core.hpp"

#include <array>
#include <cstdint>

namespace amdim {

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_id_(stream_id) {}

    std::uint64_t seed() const noexcept {
        return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
    }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t position() const noexcept { return position_; }

    std::uint64_t next_u64() noexcept {
        if (buffered_ == 0) refill();
        --buffered_;
        const std::size_t i = 2 * static_cast<std::size_t>(buffered_);
        return static_cast<std::uint64_t>(block_[i]) | (static_cast<std::uint64_t>(block_[i + 1]) << 32);
    }

    /// Uniform on [0,1) with 53 random bits.
    double next_uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Philox4x32-10 applied to one counter block; exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) noexcept;

private:
    void refill() noexcept {
        const std::array<std::uint32_t, 4> counter{
            static_cast<std::uint32_t>(position_), static_cast<std::uint32_t>(position_ >> 32),
            static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
        block_ = philox(counter, key_);
        ++position_;
        buffered_ = 2;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_id_;
    std::uint64_t position_ = 0;  // blocks consumed
    std::array<std::uint32_t, 4> block_{};
    unsigned buffered_ = 0;
};

inline std::array<std::uint32_t, 4> RngStream::philox(std::array<std::uint32_t, 4> ctr,
                                                      std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t prod0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t prod1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(prod0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(prod0);
        const auto hi1 = static_cast<std::uint32_t>(prod1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(prod1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// Stream id of trial batch `batch` within task `stream_id`.
constexpr std::uint64_t substream_id(std::uint64_t stream_id, std::uint64_t batch) noexcept {
    return stream_id * 256u + batch;
}

/// I.i.d. symbols: Minus with probability p_minus. p_minus may be 0 or 1.
class SymbolStream {
public:
    SymbolStream(RngStream source, double p_minus);

    Symbol next() noexcept { return source_.next_uniform() < p_minus_ ? Symbol::Minus : Symbol::Plus; }
    double p_minus() const noexcept { return p_minus_; }
    const RngStream& source() const noexcept { return source_; }

private:
    RngStream source_;
    double p_minus_;
};

inline SymbolStream::SymbolStream(RngStream source, double p_minus)
    : source_(source), p_minus_(p_minus) {
    if (!(p_minus >= 0.0 && p_minus <= 1.0)) {
        throw DomainError("symbol probability must lie in [0,1]");
    }
}

}  // namespace amdim
