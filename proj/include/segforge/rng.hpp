#ifndef SEGFORGE_RNG_HPP
#define SEGFORGE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace segforge {

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(a) ^ (0x9e3779b97f4a7c15ull + b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b) ^ mix_seed(c));
}

// Deterministic RNG. mt19937_64 output is pinned by the standard and the
// distributions below are hand-rolled, so streams are identical across
// platforms and compilers (std::uniform_*_distribution would not be).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(mix_seed(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) { return n ? next_u64() % n : 0; }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, no cached spare (keeps the stream layout obvious).
    double normal(double mu = 0.0, double sigma = 1.0) {
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * r * std::cos(2.0 * M_PI * u2);
    }

    Rng child(std::uint64_t stream_id) { return Rng(mix_seed(next_u64(), stream_id)); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace segforge

#endif
