#pragma once

#include <array>
#include <filesystem>

#include "xq/position.hpp"

namespace xq {

// Piece base values plus per-square offsets for each (color, piece type).
// Black's tables are the rank-flipped copies of Red's.
struct PstTables {
    std::array<Score, 8> base{};
    std::array<std::array<std::array<Score, kSquares>, 8>, 2> offset{};

    Score value(Piece p, Square s) const {
        return base[static_cast<int>(type_of(p))] + offset[index_of(color_of(p))][static_cast<int>(type_of(p))][s];
    }
};

// Stand-in tables with conventional base values
// (pawn 100 / ~200 across the river, advisor and elephant 200, horse and cannon 450, rook 1000).
const PstTables& default_pst();

// Plain-text format: "base <letter> <value>" lines and "table <red|black> <letter>"
// headers each followed by 90 integers, row-major from Black's back rank.
PstTables load_pst(const std::filesystem::path& path);
void save_pst(const PstTables& tables, const std::filesystem::path& path);

// Static evaluation relative to the side to move.
Score evaluate(const Position& p, const PstTables& tables = default_pst());

// Red-minus-Black material and placement sum.
Score evaluate_red(const Position& p, const PstTables& tables = default_pst());

}  // namespace xq
