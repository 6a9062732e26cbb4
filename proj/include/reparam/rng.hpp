#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "reparam/vec3.hpp"

namespace reparam {

// Derives independent stream seeds from a base seed (splitmix64 step).
// Used so that per-sample work can run in parallel while staying
// reproducible: sample i always sees mix_seed(seed, i).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled value mappings. The engine itself is fully
// specified by the standard; std::uniform_real_distribution and friends are
// not, and reports must be byte-identical for a given seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Box-Muller, one fresh pair per two calls
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    Vec3 unit_vector() {
        while (true) {
            Vec3 v{normal(), normal(), normal()};
            const double n = norm(v);
            if (n > 1e-12) return v / n;
        }
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace reparam
