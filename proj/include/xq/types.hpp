#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xq {

enum class Color : std::uint8_t { Red = 0, Black = 1 };

constexpr Color operator~(Color c) { return c == Color::Red ? Color::Black : Color::Red; }
constexpr int index_of(Color c) { return static_cast<int>(c); }

enum class PieceType : std::uint8_t {
    None = 0,
    King = 1,
    Advisor = 2,
    Elephant = 3,
    Horse = 4,
    Rook = 5,
    Cannon = 6,
    Pawn = 7,
};

// Piece codes match the on-disk dataset encoding: 0 empty, 1..7 Red, 9..15 Black.
enum class Piece : std::uint8_t { Empty = 0 };

constexpr Piece make_piece(Color c, PieceType t) {
    return static_cast<Piece>((index_of(c) << 3) | static_cast<int>(t));
}
constexpr PieceType type_of(Piece p) { return static_cast<PieceType>(static_cast<int>(p) & 7); }
constexpr Color color_of(Piece p) { return static_cast<Color>(static_cast<int>(p) >> 3); }
constexpr bool is_empty(Piece p) { return p == Piece::Empty; }
constexpr int code_of(Piece p) { return static_cast<int>(p); }

constexpr bool valid_piece_code(int code) {
    return code == 0 || (code >= 1 && code <= 7) || (code >= 9 && code <= 15);
}

// 90 cells, rank-major from Red's back rank: a0 = 0, i0 = 8, a9 = 81, i9 = 89.
using Square = int;

inline constexpr int kFiles = 9;
inline constexpr int kRanks = 10;
inline constexpr int kSquares = kFiles * kRanks;

constexpr int file_of(Square s) { return s % kFiles; }
constexpr int rank_of(Square s) { return s / kFiles; }
constexpr Square make_square(int file, int rank) { return rank * kFiles + file; }
constexpr bool on_board(int file, int rank) {
    return file >= 0 && file < kFiles && rank >= 0 && rank < kRanks;
}
constexpr unsigned __int128 square_bit(Square s) { return static_cast<unsigned __int128>(1) << s; }
constexpr Square flip_rank(Square s) { return make_square(file_of(s), kRanks - 1 - rank_of(s)); }

constexpr bool in_palace(Color c, Square s) {
    const int f = file_of(s);
    const int r = rank_of(s);
    if (f < 3 || f > 5) return false;
    return c == Color::Red ? r <= 2 : r >= 7;
}

constexpr bool own_half(Color c, Square s) {
    return c == Color::Red ? rank_of(s) <= 4 : rank_of(s) >= 5;
}

// Centipawns, relative to the side to move unless noted.
using Score = int;

inline constexpr Score kMateScore = 30000;
inline constexpr Score kInfinity = kMateScore + 1;
inline constexpr Score kDrawScore = 0;

constexpr bool is_mate_score(Score s) { return s >= kMateScore - 1000 || s <= -kMateScore + 1000; }

// Error categories; the CLI maps each to a distinct exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace xq
