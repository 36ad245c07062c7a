#include <random>

#include "poet/synth.hpp"

namespace poet {

std::vector<std::vector<std::uint8_t>> fuzz_corpus(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::uint8_t>> seeds;
    for (const auto& f : synthesize(builtin_scenario("malformed-mix")).frames) seeds.push_back(f.raw.bytes);
    for (const auto& f : synthesize(builtin_scenario("rogue-connect")).frames) seeds.push_back(f.raw.bytes);

    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(count);
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::uint8_t> b;
        switch (i % 4) {
            case 0: {
                b.resize(pick(200));
                for (auto& x : b) x = static_cast<std::uint8_t>(rng());
                break;
            }
            case 1: {
                b = seeds[pick(seeds.size())];
                b.resize(pick(b.size() + 1));
                break;
            }
            case 2: {
                b = seeds[pick(seeds.size())];
                std::size_t flips = 1 + pick(8);
                for (std::size_t k = 0; k < flips && !b.empty(); ++k) b[pick(b.size())] ^= static_cast<std::uint8_t>(1u << pick(8));
                break;
            }
            default: {
                // Valid headers followed by random tails.
                b = seeds[pick(seeds.size())];
                std::size_t keep = std::min<std::size_t>(b.size(), 14 + pick(40));
                b.resize(keep);
                std::size_t tail = pick(64);
                for (std::size_t k = 0; k < tail; ++k) b.push_back(static_cast<std::uint8_t>(rng()));
                break;
            }
        }
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace poet
