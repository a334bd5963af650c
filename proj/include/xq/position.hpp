#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xq/types.hpp"

namespace xq {

struct Move {
    std::uint8_t from = 0;
    std::uint8_t to = 0;
    Piece captured = Piece::Empty;  // filled in by the generator

    constexpr Move() = default;
    constexpr Move(Square f, Square t, Piece cap = Piece::Empty)
        : from(static_cast<std::uint8_t>(f)), to(static_cast<std::uint8_t>(t)), captured(cap) {}

    constexpr bool is_capture() const { return captured != Piece::Empty; }

    // Identity is the (from, to) pair; `captured` is derived bookkeeping.
    friend constexpr bool operator==(Move a, Move b) { return a.from == b.from && a.to == b.to; }
};

// Coordinate notation, e.g. "h2e2".
std::string to_string(Move m);
std::optional<Move> parse_move_text(std::string_view text);

struct UndoToken {
    Move move;
    Piece moved = Piece::Empty;
    std::uint64_t prev_hash = 0;
};

class Position {
public:
    Position();

    static Position startpos();

    Piece at(Square s) const { return board_[s]; }
    Color side_to_move() const { return side_; }
    int ply() const { return ply_; }
    std::uint64_t hash() const { return hash_; }
    Square king_square(Color c) const { return kings_[index_of(c)]; }
    std::span<const std::uint64_t> history() const { return history_; }
    const std::array<Piece, kSquares>& board() const { return board_; }
    // Bit s set when square s holds a piece of color c.
    unsigned __int128 occupancy(Color c) const { return occupancy_[index_of(c)]; }

    UndoToken do_move(Move m);
    void undo_move(const UndoToken& token);

    // Occurrences of the current hash in history plus the current position.
    int repetition_count() const;

    // Raw editing for builders and decoders; call refresh() afterwards.
    void set_piece(Square s, Piece p) { board_[s] = p; }
    void set_side_to_move(Color c) { side_ = c; }
    void set_ply(int ply) { ply_ = ply; }
    void clear_history() { history_.clear(); }
    void refresh();

    friend bool operator==(const Position&, const Position&) = default;

private:
    std::array<Piece, kSquares> board_{};
    Color side_ = Color::Red;
    int ply_ = 0;
    std::uint64_t hash_ = 0;
    std::array<Square, 2> kings_{-1, -1};
    std::array<unsigned __int128, 2> occupancy_{};
    std::vector<std::uint64_t> history_;
};

std::uint64_t zobrist_piece(Piece p, Square s);
std::uint64_t zobrist_side();

inline constexpr std::string_view kStartFen =
    "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBAKABNR w - - 0 1";

// Throws InputError with a description on malformed or illegal placements.
Position parse_fen(std::string_view text);
std::string to_fen(const Position& p);

// Returns a description of the first violated invariant, if any.
std::optional<std::string> validate(const Position& p);

// Rank-flipped board with colors and side to move swapped; history dropped.
Position color_flipped(const Position& p);

bool in_check(const Position& p, Color c);

// Fixed-capacity move buffer; no Xiangqi position has more than ~120 moves.
class MoveList {
public:
    static constexpr int kCapacity = 192;

    void push(Move m) { moves_[size_++] = m; }
    int size() const { return size_; }
    bool empty() const { return size_ == 0; }
    void clear() { size_ = 0; }
    Move& operator[](int i) { return moves_[i]; }
    Move operator[](int i) const { return moves_[i]; }
    Move* begin() { return moves_.data(); }
    Move* end() { return moves_.data() + size_; }
    const Move* begin() const { return moves_.data(); }
    const Move* end() const { return moves_.data() + size_; }

private:
    std::array<Move, kCapacity> moves_;
    int size_ = 0;
};

// Pseudo-legal moves for the side to move (own-king safety not checked).
void generate_pseudo(const Position& p, MoveList& out, bool captures_only = false);

// True if making `m` does not leave the mover in check. `m` must be pseudo-legal.
bool is_legal(Position& p, Move m);

void generate_legal(const Position& p, MoveList& out, bool captures_only = false);
std::vector<Move> generate_moves(const Position& p);

// Locate a legal move by coordinates; empty if not legal here.
std::optional<Move> find_legal(const Position& p, Move coords);

std::uint64_t perft(Position& p, int depth);

}  // namespace xq
