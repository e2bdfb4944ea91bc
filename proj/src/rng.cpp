#include "began/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace began {

namespace {

// splitmix64 finalizer; good avalanche for seed mixing.
uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

uint64_t derive_seed(uint64_t master, std::string_view stream) {
    return mix64(master ^ mix64(fnv1a(stream)));
}

uint64_t derive_seed(uint64_t master, std::string_view stream, uint64_t index) {
    return mix64(derive_seed(master, stream) ^ mix64(index + 0x51ed270b0f3572ddULL));
}

RngEngine make_stream(uint64_t master, std::string_view stream) {
    return RngEngine(derive_seed(master, stream));
}

RngEngine make_stream(uint64_t master, std::string_view stream, uint64_t index) {
    return RngEngine(derive_seed(master, stream, index));
}

double uniform(RngEngine& rng, double lo, double hi) {
    // 53 high bits -> double in [0, 1)
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

double normal(RngEngine& rng) {
    // u1 in (0, 1] keeps the log finite
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string save_engine(const RngEngine& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

void load_engine(RngEngine& rng, const std::string& text) {
    std::istringstream is(text);
    is >> rng;
}

}  // namespace began
