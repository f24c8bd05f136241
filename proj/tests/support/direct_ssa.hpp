#pragma once

// Plain Gillespie direct method on a single well-mixed voxel, written
// independently of the engine under test.  Returns the time of the first
// firing of `target_channel`.

#include <cstdint>
#include <limits>
#include <vector>

#include "rdkmc/model.hpp"
#include "rdkmc/rng.hpp"

namespace oracle {

inline double direct_ssa_first_firing(const rdkmc::CompiledModel& model,
                                      std::vector<std::int64_t> counts, int target_channel,
                                      rdkmc::RngStream& rng, std::uint64_t max_events = 100000000) {
    double t = 0.0;
    for (std::uint64_t n = 0; n < max_events; ++n) {
        double a0 = 0.0;
        std::vector<double> a(model.channels.size());
        for (std::size_t c = 0; c < model.channels.size(); ++c) {
            a[c] = rdkmc::reaction_propensity(model.channels[c], counts);
            a0 += a[c];
        }
        if (a0 <= 0.0) return std::numeric_limits<double>::infinity();
        t += rng.exponential(a0);
        const double pick = rng.u01() * a0;
        double acc = 0.0;
        std::size_t chosen = model.channels.size() - 1;
        for (std::size_t c = 0; c < model.channels.size(); ++c) {
            acc += a[c];
            if (pick < acc) {
                chosen = c;
                break;
            }
        }
        for (const auto& [s, d] : model.channels[chosen].delta) counts[static_cast<std::size_t>(s)] += d;
        if (static_cast<int>(chosen) == target_channel) return t;
    }
    return std::numeric_limits<double>::infinity();
}

} // namespace oracle
