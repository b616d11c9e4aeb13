#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sleephrv {

// Deterministic random helpers on top of std::mt19937. mt19937 is fully
// specified by the standard (published test vectors), and the draws below
// avoid std distributions, which are implementation-defined -- identical
// seeds give identical streams on every platform.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint32_t seed) : gen_(seed) {}

    std::uint32_t next_u32() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_()) * (1.0 / 4294967296.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; draws two uniforms per pair of normals.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.141592653589793 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Fisher-Yates with modulo draw; bias is irrelevant here, portability is.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(gen_() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sleephrv
