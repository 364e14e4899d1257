#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace opelab {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * SplitMix64 stream keyed by (root seed, stream index).
 *
 * Every stream is a pure function of its key, so trajectories or fixtures
 * drawn from separate streams do not depend on the order they are produced in.
 * Sampling is done by hand (no <random> distributions) so draws are identical
 * across standard libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL)) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform on (0, 1].
    double uniform_open() { return 1.0 - uniform(); }
    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(uniform() * n); }
    double exponential() { return -std::log(uniform_open()); }

    /// Flat Dirichlet draw of length k.
    std::vector<double> dirichlet(int k) {
        std::vector<double> v(k);
        double total = 0.0;
        for (double& x : v) total += (x = exponential());
        for (double& x : v) x /= total;
        return v;
    }

    /// Inverse-CDF draw from a probability vector; zero-mass entries are never returned.
    template <class Probs>
    int categorical(const Probs& p, int n) {
        const double u = uniform();
        double acc = 0.0;
        int last = -1;
        for (int i = 0; i < n; ++i) {
            if (p(i) <= 0.0) continue;
            last = i;
            acc += p(i);
            if (u < acc) return i;
        }
        return last;
    }

private:
    std::uint64_t state_;
};

}  // namespace opelab
