#ifndef LIVERPANEL_RNG_HPP
#define LIVERPANEL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

// Deterministic sampling helpers. mt19937_64 output is fixed by the standard;
// the distributions here are hand-rolled because the std:: ones are
// implementation-defined and would break byte-identical reproducibility.
namespace liverpanel::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Combines a base seed with stream indices (learner, fold, bag, ...).
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ (a * 0x9e3779b97f4a7c15ULL)) ^
                      (b * 0xc2b2ae3d27d4eb4fULL));
}

// Uniform double in [0, 1).
inline double uniform01(Engine& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1]; safe as a log() argument.
inline double uniform01_open(Engine& gen) {
    return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

inline double uniform(Engine& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

// Unbiased integer in [0, n) via rejection.
inline std::uint64_t bounded(Engine& gen, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / n * n;
    std::uint64_t r;
    do {
        r = gen();
    } while (r >= limit);
    return r % n;
}

// Standard normal via Box-Muller; caches the spare deviate.
class NormalStream {
public:
    explicit NormalStream(Engine& gen) : gen_(gen) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01_open(gen_);
        const double u2 = uniform01(gen_);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    Engine& gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

template <typename T>
void shuffle(std::vector<T>& v, Engine& gen) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded(gen, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace liverpanel::rng

#endif
