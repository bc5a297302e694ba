#pragma once

#include <cstdint>
#include <random>

namespace usbsim {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream ids used by the runner, kept in one place so seeds stay stable.
namespace stream_id {
inline constexpr std::uint64_t carrier = 1;
inline constexpr std::uint64_t chip_noise = 100;  // + mote index
inline constexpr std::uint64_t autozero = 200;    // + mote index
} // namespace stream_id

// One independent substream per (seed, stream). mt19937_64 underneath;
// the seed is scrambled twice so adjacent ids land far apart.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : eng_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed27f3ULL)))
    {
    }

    double gaussian() { return normal_(eng_); }
    double uniform() { return uniform_(eng_); }
    double uniform(double a, double b) { return a + (b - a) * uniform_(eng_); }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace usbsim
