#pragma once

#include <array>
#include <cstdint>

namespace pvlab {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Identifies one independent random stream: the master seed keys the
/// cipher, the stream id fills the upper half of the counter.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Stream roles within one replication.
enum class StreamRole : unsigned {
    Process = 0,
    Query = 1,
    Chaos = 2,
};

inline constexpr std::uint64_t kRolesPerReplication = 16;

/// stream = replication * 16 + role. Throws std::invalid_argument for role >= 16.
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t replication, unsigned role);

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t replication, StreamRole role)
{
    return derive_stream(master_seed, replication, static_cast<unsigned>(role));
}

/// Counter-mode generator over one RngStream. Satisfies
/// UniformRandomBitGenerator; position is seekable by block.
class Generator {
public:
    using result_type = std::uint64_t;

    explicit Generator(RngStream stream, std::uint64_t block = 0) : stream_(stream), block_(block) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()()
    {
        if (lane_ == 2)
            refill();
        const result_type out = (result_type{buffer_[2 * lane_]} << 32) | buffer_[2 * lane_ + 1];
        ++lane_;
        return out;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call, second discarded).
    double normal();

    /// Poisson count: inversion for mean < 30, PTRS transformed rejection above.
    std::uint64_t poisson(double mean);

    void seek(std::uint64_t block)
    {
        block_ = block;
        lane_ = 2;
    }

    const RngStream& stream() const { return stream_; }

private:
    void refill();

    RngStream stream_;
    std::uint64_t block_;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned lane_ = 2;
};

}  // namespace pvlab
