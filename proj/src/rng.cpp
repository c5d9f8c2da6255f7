#include "diproperm/rng.hpp"

#include <numeric>

namespace diproperm {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Engine RngPolicy::stream(std::uint64_t task_index) const {
    return Engine(mix64(mix64(master_seed_) ^ mix64(task_index + 0x632be59bd9b4e019ULL)));
}

RngPolicy RngPolicy::derive(std::uint64_t tag) const {
    return RngPolicy(mix64(master_seed_ ^ mix64(~tag)));
}

std::uint64_t uniform_index(Engine& engine, std::uint64_t bound) {
    // Lemire's multiply-and-reject.
    using u128 = unsigned __int128;
    std::uint64_t x = engine();
    u128 product = static_cast<u128>(x) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = engine();
            product = static_cast<u128>(x) * bound;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

std::vector<std::size_t> draw_permutation(std::size_t n, Engine& engine) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(engine, i));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

}  // namespace diproperm
