#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace sttt {

// Error hierarchy. The CLI maps these onto exit codes:
// ConfigError -> 2, NumericError -> 3, IoError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

// Seeded RNG wrapper. mt19937_64 is fully specified by the standard, so
// identical seeds reproduce identical streams on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    double normal(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> d(mean, stddev);
        return d(engine_);
    }
    double uniform(double lo = 0.0, double hi = 1.0) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(engine_);
    }
    // Uniform integer in [lo, hi] inclusive.
    int64_t integer(int64_t lo, int64_t hi) {
        std::uniform_int_distribution<int64_t> d(lo, hi);
        return d(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// STTT_LOG=0 silent (default), 1 progress, 2 chatty.
int log_level();
void log_line(int level, const std::string& msg);

}  // namespace sttt
