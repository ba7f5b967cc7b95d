#include "igtk/rng.hpp"

#include <cmath>
#include <numbers>

#include "igtk/common.hpp"

namespace igtk {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t master, std::uint64_t major, std::uint64_t minor) {
    std::uint64_t k = mix64(master);
    k = mix64(k ^ (0xd1342543de82ef95ULL * (major + 1)));
    k = mix64(k ^ (0xaf251af3b0f025b5ULL * (minor + 1)));
    key_ = k;
}

std::uint64_t RngStream::next_u64() { return mix64(key_ ^ (0x9e3779b97f4a7c15ULL * ++ctr_)); }

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_gauss() {
    if (has_cached_gauss_) {
        has_cached_gauss_ = false;
        return cached_gauss_;
    }
    const double u1 = next_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_gauss_ = r * std::sin(a);
    has_cached_gauss_ = true;
    return r * std::cos(a);
}

double RngStream::next_cauchy(double location) {
    return location + std::tan(std::numbers::pi * (next_open() - 0.5));
}

long RngStream::next_poisson(double rate) {
    if (rate < 0.0 || !std::isfinite(rate)) throw SamplingError("poisson rate must be finite and nonnegative");
    const double L = std::exp(-rate);
    const long cap = 1000 + static_cast<long>(100.0 * rate);
    long k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= next_open();
        if (k > cap) throw SamplingError("poisson sampler exceeded iteration cap");
    } while (p > L);
    return k - 1;
}

int RngStream::next_bernoulli(double p) { return next_double() < p ? 1 : 0; }

}  // namespace igtk
