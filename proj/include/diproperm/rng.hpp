#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace diproperm {

using Engine = std::mt19937_64;

/// Seed policy for reproducible parallel work. A task's stream depends only on
/// (master_seed, task_index), never on which worker runs it or in what order.
class RngPolicy {
public:
    RngPolicy() = default;
    explicit RngPolicy(std::uint64_t master_seed) : master_seed_(master_seed) {}

    std::uint64_t master_seed() const noexcept { return master_seed_; }

    /// Independent engine for one task.
    Engine stream(std::uint64_t task_index) const;

    /// Child policy for a nested family of tasks (e.g. one Monte Carlo
    /// replicate that itself runs many permutations).
    RngPolicy derive(std::uint64_t tag) const;

private:
    std::uint64_t master_seed_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Unbiased integer in [0, bound) (bound > 0).
std::uint64_t uniform_index(Engine& engine, std::uint64_t bound);

/// Uniformly random permutation of 0..n-1 by Fisher-Yates.
std::vector<std::size_t> draw_permutation(std::size_t n, Engine& engine);

}  // namespace diproperm
