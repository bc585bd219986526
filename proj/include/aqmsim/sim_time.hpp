#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace aqmsim {

// Integer-nanosecond simulation clock. Every timestamp and duration in the
// simulator is one of these; there is no wall clock anywhere.
struct SimTime {
    std::uint64_t nanos = 0;

    static constexpr SimTime from_ns(std::uint64_t v) { return {v}; }
    static constexpr SimTime from_us(std::uint64_t v) { return {v * 1'000ull}; }
    static constexpr SimTime from_ms(std::uint64_t v) { return {v * 1'000'000ull}; }
    static constexpr SimTime from_s(std::uint64_t v) { return {v * 1'000'000'000ull}; }

    // Fractional constructors round to whole nanoseconds.
    static SimTime from_ms_f(double ms) {
        return {static_cast<std::uint64_t>(std::llround(ms * 1e6))};
    }
    static SimTime from_s_f(double s) {
        return {static_cast<std::uint64_t>(std::llround(s * 1e9))};
    }

    constexpr double to_s() const { return static_cast<double>(nanos) / 1e9; }
    constexpr double to_ms() const { return static_cast<double>(nanos) / 1e6; }

    constexpr bool is_zero() const { return nanos == 0; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime o) const { return {nanos + o.nanos}; }
    // NOTE: unsigned; callers only subtract earlier from later.
    constexpr SimTime operator-(SimTime o) const { return {nanos - o.nanos}; }
    constexpr SimTime operator*(std::uint64_t k) const { return {nanos * k}; }
    constexpr SimTime operator/(std::uint64_t k) const { return {nanos / k}; }
    SimTime& operator+=(SimTime o) {
        nanos += o.nanos;
        return *this;
    }
};

}  // namespace aqmsim
