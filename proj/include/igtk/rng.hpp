#pragma once

#include <cstdint>

namespace igtk {

// Counter-based random stream: the state is (key, counter), every output is a
// pure hash of both, so substreams keyed by (master seed, major, minor) are
// disjoint and reproducible regardless of threading or evaluation order.
class RngStream {
public:
    RngStream() : RngStream(0, 0, 0) {}
    RngStream(std::uint64_t master, std::uint64_t major, std::uint64_t minor);

    std::uint64_t next_u64();
    // Uniform in [0,1) with 53 random bits.
    double next_double();
    // Uniform in (0,1) (never exactly 0, safe for logs).
    double next_open();
    // Standard normal via Box-Muller; generates in pairs, caches the second.
    double next_gauss();
    // Cauchy(location, scale 1).
    double next_cauchy(double location);
    // Poisson(rate) via Knuth's product-of-uniforms method.
    long next_poisson(double rate);
    // Bernoulli(p) as 0/1.
    int next_bernoulli(double p);

private:
    std::uint64_t key_ = 0;
    std::uint64_t ctr_ = 0;
    bool has_cached_gauss_ = false;
    double cached_gauss_ = 0.0;
};

// SplitMix64 finalizer; the core mixing primitive for keys and counters.
std::uint64_t mix64(std::uint64_t z);

}  // namespace igtk
