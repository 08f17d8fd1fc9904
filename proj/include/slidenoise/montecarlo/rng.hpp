#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace slidenoise::montecarlo {

using Engine = std::mt19937_64;

/// Independent engine for one path, keyed by (master seed, path index, stream).
/// The stream tag separates experiments that share a seed.
inline Engine make_path_engine(std::uint64_t master_seed, std::uint64_t path_index, std::uint32_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32), stream};
    return Engine(seq);
}

/// Standard normal draws (Boost's ziggurat sampler).
class NormalSource {
public:
    explicit NormalSource(Engine engine) : engine_(std::move(engine)) {}
    double operator()() { return dist_(engine_); }
    Engine& engine() { return engine_; }
    /// Uniform on (0, 1).
    double uniform() {
        double u;
        do {
            u = std::generate_canonical<double, 53>(engine_);
        } while (u <= 0.0);
        return u;
    }

private:
    Engine engine_;
    boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace slidenoise::montecarlo
