#pragma once

#include <string>
#include <vector>

#include "began/began.hpp"
#include "began/config.hpp"
#include "began/report.hpp"

namespace began {

/// Full training state: resolved config, step counter, equilibrium, both
/// networks, both Adam states, the live RNG streams, and the last emitted
/// metrics row. The binary round-trip is bit-exact.
struct Checkpoint {
    ExperimentSpec spec;
    int64_t step = 0;
    EquilibriumState eq;
    Generator gen;
    AutoencoderDiscriminator disc;
    int64_t adam_g_steps = 0;
    int64_t adam_d_steps = 0;
    std::vector<std::vector<double>> adam_g_m, adam_g_v;
    std::vector<std::vector<double>> adam_d_m, adam_d_v;
    std::string rng_real;
    std::string rng_latent;
    MetricsRecord last_record;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace began
