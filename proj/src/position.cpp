#include "xq/position.hpp"

#include <algorithm>
#include <cassert>

#include "geometry.hpp"

namespace xq {

namespace detail {

namespace {

Geometry build_geometry() {
    Geometry g{};
    constexpr int kDirFile[4] = {0, 0, 1, -1};
    constexpr int kDirRank[4] = {1, -1, 0, 0};

    for (Square s = 0; s < kSquares; ++s) {
        const int f = file_of(s);
        const int r = rank_of(s);

        for (int d = 0; d < 4; ++d) {
            Ray& ray = g.rays[s][d];
            for (int nf = f + kDirFile[d], nr = r + kDirRank[d]; on_board(nf, nr);
                 nf += kDirFile[d], nr += kDirRank[d])
                ray.squares[ray.size++] = static_cast<std::int8_t>(make_square(nf, nr));
        }

        // Horse: one orthogonal step (the leg), then one diagonal step outward.
        constexpr int kHorse[8][4] = {{1, 2, 0, 1},   {-1, 2, 0, 1},  {1, -2, 0, -1}, {-1, -2, 0, -1},
                                      {2, 1, 1, 0},   {2, -1, 1, 0},  {-2, 1, -1, 0}, {-2, -1, -1, 0}};
        for (const auto& h : kHorse) {
            if (on_board(f + h[0], r + h[1]))
                g.horse[s].push(make_square(f + h[0], r + h[1]), make_square(f + h[2], r + h[3]));
        }

        for (int ci = 0; ci < 2; ++ci) {
            const Color c = static_cast<Color>(ci);

            constexpr int kDiag[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
            for (const auto& d : kDiag) {
                const int ef = f + 2 * d[0];
                const int er = r + 2 * d[1];
                if (on_board(ef, er) && own_half(c, s) && own_half(c, make_square(ef, er)))
                    g.elephant[ci][s].push(make_square(ef, er), make_square(f + d[0], r + d[1]));

                const int af = f + d[0];
                const int ar = r + d[1];
                if (on_board(af, ar) && in_palace(c, s) && in_palace(c, make_square(af, ar)))
                    g.advisor[ci][s].push(make_square(af, ar), -1);
            }

            for (int d = 0; d < 4; ++d) {
                const int kf = f + kDirFile[d];
                const int kr = r + kDirRank[d];
                if (on_board(kf, kr) && in_palace(c, s) && in_palace(c, make_square(kf, kr)))
                    g.king[ci][s].push(make_square(kf, kr), -1);
            }

            const int forward = c == Color::Red ? 1 : -1;
            if (on_board(f, r + forward)) g.pawn[ci][s].push(make_square(f, r + forward), -1);
            if (!own_half(c, s)) {
                if (on_board(f - 1, r)) g.pawn[ci][s].push(make_square(f - 1, r), -1);
                if (on_board(f + 1, r)) g.pawn[ci][s].push(make_square(f + 1, r), -1);
            }
        }
    }

    for (Square s = 0; s < kSquares; ++s) {
        for (const Step& st : g.horse[s]) g.horse_attackers[st.to].push(s, st.via);
        for (int ci = 0; ci < 2; ++ci)
            for (const Step& st : g.pawn[ci][s]) g.pawn_attackers[ci][st.to].push(s, -1);
    }
    return g;
}

}  // namespace

const Geometry& geometry() {
    static const Geometry g = build_geometry();
    return g;
}

}  // namespace detail

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct ZobristKeys {
    std::array<std::array<std::uint64_t, kSquares>, 16> piece{};
    std::uint64_t side = 0;
};

constexpr ZobristKeys make_keys() {
    ZobristKeys keys{};
    std::uint64_t state = 0x58514E4E55450001ULL;
    for (auto& row : keys.piece)
        for (auto& k : row) k = splitmix64(state);
    keys.side = splitmix64(state);
    return keys;
}

constexpr ZobristKeys kKeys = make_keys();

}  // namespace

std::uint64_t zobrist_piece(Piece p, Square s) { return kKeys.piece[code_of(p)][s]; }
std::uint64_t zobrist_side() { return kKeys.side; }

std::string to_string(Move m) {
    std::string out(4, ' ');
    out[0] = static_cast<char>('a' + file_of(m.from));
    out[1] = static_cast<char>('0' + rank_of(m.from));
    out[2] = static_cast<char>('a' + file_of(m.to));
    out[3] = static_cast<char>('0' + rank_of(m.to));
    return out;
}

std::optional<Move> parse_move_text(std::string_view text) {
    if (text.size() != 4) return std::nullopt;
    auto square = [](char f, char r) -> int {
        if (f < 'a' || f > 'i' || r < '0' || r > '9') return -1;
        return make_square(f - 'a', r - '0');
    };
    const int from = square(text[0], text[1]);
    const int to = square(text[2], text[3]);
    if (from < 0 || to < 0 || from == to) return std::nullopt;
    return Move(from, to);
}

Position::Position() { board_.fill(Piece::Empty); }

Position Position::startpos() { return parse_fen(kStartFen); }

void Position::refresh() {
    hash_ = 0;
    kings_ = {-1, -1};
    occupancy_ = {};
    for (Square s = 0; s < kSquares; ++s) {
        const Piece p = board_[s];
        if (is_empty(p)) continue;
        hash_ ^= zobrist_piece(p, s);
        occupancy_[index_of(color_of(p))] |= square_bit(s);
        if (type_of(p) == PieceType::King) kings_[index_of(color_of(p))] = s;
    }
    if (side_ == Color::Black) hash_ ^= zobrist_side();
}

UndoToken Position::do_move(Move m) {
    const Piece moved = board_[m.from];
    assert(!is_empty(moved) && color_of(moved) == side_);
    assert(m.from != m.to);
    m.captured = board_[m.to];
    assert(is_empty(m.captured) || color_of(m.captured) != side_);

    UndoToken token{m, moved, hash_};
    history_.push_back(hash_);

    hash_ ^= zobrist_piece(moved, m.from) ^ zobrist_piece(moved, m.to) ^ zobrist_side();
    if (!is_empty(m.captured)) hash_ ^= zobrist_piece(m.captured, m.to);

    board_[m.to] = moved;
    board_[m.from] = Piece::Empty;
    occupancy_[index_of(side_)] ^= square_bit(m.from) | square_bit(m.to);
    if (!is_empty(m.captured)) occupancy_[index_of(~side_)] ^= square_bit(m.to);
    if (type_of(moved) == PieceType::King) kings_[index_of(side_)] = m.to;

    side_ = ~side_;
    ++ply_;
    return token;
}

void Position::undo_move(const UndoToken& token) {
    const Move m = token.move;
    side_ = ~side_;
    --ply_;
    board_[m.from] = token.moved;
    board_[m.to] = m.captured;
    occupancy_[index_of(side_)] ^= square_bit(m.from) | square_bit(m.to);
    if (!is_empty(m.captured)) occupancy_[index_of(~side_)] ^= square_bit(m.to);
    if (type_of(token.moved) == PieceType::King) kings_[index_of(side_)] = m.from;
    hash_ = token.prev_hash;
    history_.pop_back();
}

int Position::repetition_count() const {
    return 1 + static_cast<int>(std::count(history_.begin(), history_.end(), hash_));
}

Position color_flipped(const Position& p) {
    Position out;
    for (Square s = 0; s < kSquares; ++s) {
        const Piece pc = p.at(s);
        if (!is_empty(pc)) out.set_piece(flip_rank(s), make_piece(~color_of(pc), type_of(pc)));
    }
    out.set_side_to_move(~p.side_to_move());
    out.set_ply(p.ply());
    out.refresh();
    return out;
}

}  // namespace xq
