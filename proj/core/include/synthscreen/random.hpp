#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace synthscreen {

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a; stable across platforms, used to fold names into seeds.
std::uint64_t hash_string(std::string_view s);

/// Folds a list of words into one seed. Order-sensitive.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words);

/// Deterministic generator. The distributions are implemented here rather than
/// through <random>'s distribution classes, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n);
    /// Standard normal via Box-Muller.
    double normal();

    /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
    /// k indices from [0, n), duplicates allowed.
    std::vector<std::size_t> sample_with_replacement(std::size_t n, std::size_t k);
    /// Random permutation of [0, n).
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace synthscreen
