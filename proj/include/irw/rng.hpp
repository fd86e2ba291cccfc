#pragma once

#include <cstdint>
#include <random>

namespace irw {

// 64-bit mix used to derive independent stream seeds from (master, stream).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Reproducibility contract: identical (seed, stream) give identical draws,
// distinct streams come from well-separated seed material.
struct RngContract {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    std::mt19937_64 make() const {
        std::uint64_t s = splitmix64(master_seed ^ splitmix64(stream_id + 0x51ed2701));
        return std::mt19937_64(s);
    }
};

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return RngContract{seed, stream}.make();
}

// Uniform on the open interval (0,1); never returns an exact 0 or 1.
template <class Rng>
inline double canonical_open(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Batches one 64-bit draw into 64 fair coin flips.
template <class Rng>
class BitCoin {
public:
    explicit BitCoin(Rng& rng) : rng_(&rng) {}

    bool flip() {
        if (left_ == 0) {
            buf_ = (*rng_)();
            left_ = 64;
        }
        bool b = buf_ & 1u;
        buf_ >>= 1;
        --left_;
        return b;
    }

    // Two fresh bits, for uniform choice among four directions.
    unsigned pair() {
        if (left_ < 2) {
            buf_ = (*rng_)();
            left_ = 64;
        }
        unsigned v = static_cast<unsigned>(buf_ & 3u);
        buf_ >>= 2;
        left_ -= 2;
        return v;
    }

private:
    Rng* rng_;
    std::uint64_t buf_ = 0;
    int left_ = 0;
};

}  // namespace irw
