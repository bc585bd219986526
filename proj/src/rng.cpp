#include "aqmsim/rng.hpp"

#include <stdexcept>

namespace aqmsim {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : key_(mix64(mix64(seed + kGolden) ^ fnv1a(label))) {}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    if (lo > hi) {
        throw std::invalid_argument("uniform: lo > hi");
    }
    return lo + (hi - lo) * next_unit();
}

std::uint64_t RngStream::uniform_u64(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_u64: n must be >= 1");
    }
    // Multiply-shift: maps a 64-bit draw onto [0, n) without modulo bias worth
    // caring about at simulation scale.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

}  // namespace aqmsim
