#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace began {

// All randomness flows through named streams derived from one master seed.
// Streams are independent mt19937_64 engines, so toggling what one consumer
// draws never shifts another consumer's sequence.
using RngEngine = std::mt19937_64;

uint64_t derive_seed(uint64_t master, std::string_view stream);
uint64_t derive_seed(uint64_t master, std::string_view stream, uint64_t index);

RngEngine make_stream(uint64_t master, std::string_view stream);
RngEngine make_stream(uint64_t master, std::string_view stream, uint64_t index);

// Draws are implemented directly on the engine (not via std::uniform_real_-
// distribution and friends) so that the engine state is the entire RNG state:
// serializing the engine text is enough for bit-exact checkpoint round-trips.
double uniform(RngEngine& rng, double lo, double hi);

// Standard normal via Box-Muller; consumes exactly two engine draws per call.
double normal(RngEngine& rng);

std::string save_engine(const RngEngine& rng);
void load_engine(RngEngine& rng, const std::string& text);

}  // namespace began
