#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "xq/position.hpp"

namespace testing_support {

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

// Plays up to `plies` uniformly random legal moves from `start`; stops early at mate.
inline xq::Position random_playout(std::uint64_t seed, int plies, xq::Position start = xq::Position::startpos()) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < plies; ++i) {
        const auto moves = xq::generate_moves(start);
        if (moves.empty()) break;
        start.do_move(moves[pick(rng, moves.size())]);
    }
    return start;
}

// Seeded corpus of positions reached by random playouts of varying length.
inline std::vector<xq::Position> random_corpus(std::uint64_t seed, int count, int min_plies, int max_plies) {
    std::mt19937_64 rng(seed);
    std::vector<xq::Position> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const int plies = min_plies + static_cast<int>(pick(rng, max_plies - min_plies + 1));
        out.push_back(random_playout(rng(), plies));
    }
    return out;
}

}  // namespace testing_support
