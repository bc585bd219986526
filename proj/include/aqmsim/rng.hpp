#pragma once

#include <cstdint>
#include <string_view>

namespace aqmsim {

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Counter-based random stream. The value at draw index i is a pure function of
// (seed, label, i), so distinct streams never perturb each other and fleet
// devices produce identical draws no matter which thread or order runs them.
class RngStream {
  public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::string_view label);

    std::uint64_t next_u64();

    // [0, 1), 53-bit resolution.
    double next_unit();

    // [lo, hi); lo == hi is allowed and returns lo. lo > hi is an argument error.
    double uniform(double lo, double hi);

    // [0, n), n >= 1.
    std::uint64_t uniform_u64(std::uint64_t n);

    std::uint64_t key() const { return key_; }
    std::uint64_t draws() const { return counter_; }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace aqmsim
