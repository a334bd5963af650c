#include <bit>
#include <vector>

#include "geometry.hpp"
#include "xq/position.hpp"

namespace xq {

using detail::geometry;
using detail::Step;

namespace {

void add_steps(const Position& p, Color us, Square from, const auto& steps, MoveList& out, bool captures_only) {
    for (const Step& st : steps) {
        if (st.via >= 0 && !is_empty(p.at(st.via))) continue;
        const Piece target = p.at(st.to);
        if (is_empty(target)) {
            if (!captures_only) out.push(Move(from, st.to));
        } else if (color_of(target) != us) {
            out.push(Move(from, st.to, target));
        }
    }
}

void add_slides(const Position& p, Color us, Square from, bool cannon, MoveList& out, bool captures_only) {
    const auto& g = geometry();
    for (const auto& ray : g.rays[from]) {
        bool screened = false;
        for (const Square to : ray) {
            const Piece target = p.at(to);
            if (!screened) {
                if (is_empty(target)) {
                    if (!captures_only) out.push(Move(from, to));
                    continue;
                }
                if (!cannon) {
                    if (color_of(target) != us) out.push(Move(from, to, target));
                    break;
                }
                screened = true;
            } else if (!is_empty(target)) {
                if (color_of(target) != us) out.push(Move(from, to, target));
                break;
            }
        }
    }
}

}  // namespace

bool in_check(const Position& p, Color c) {
    const auto& g = geometry();
    const Square k = p.king_square(c);
    const Color them = ~c;

    for (int d = 0; d < 4; ++d) {
        int seen = 0;
        for (const Square s : g.rays[k][d]) {
            const Piece pc = p.at(s);
            if (is_empty(pc)) continue;
            if (seen == 0) {
                if (color_of(pc) == them) {
                    const PieceType t = type_of(pc);
                    // A king on the open file attacks like a rook (flying general).
                    if (t == PieceType::Rook || t == PieceType::King) return true;
                }
                seen = 1;
            } else {
                if (color_of(pc) == them && type_of(pc) == PieceType::Cannon) return true;
                break;
            }
        }
    }

    const Piece horse = make_piece(them, PieceType::Horse);
    for (const Step& st : g.horse_attackers[k])
        if (p.at(st.to) == horse && is_empty(p.at(st.via))) return true;

    const Piece pawn = make_piece(them, PieceType::Pawn);
    for (const Step& st : g.pawn_attackers[index_of(them)][k])
        if (p.at(st.to) == pawn) return true;

    return false;
}

void generate_pseudo(const Position& p, MoveList& out, bool captures_only) {
    const auto& g = geometry();
    const Color us = p.side_to_move();
    const int ci = index_of(us);

    for (unsigned __int128 own = p.occupancy(us); own; own &= own - 1) {
        const auto low = static_cast<std::uint64_t>(own);
        const Square from = low ? std::countr_zero(low) : 64 + std::countr_zero(static_cast<std::uint64_t>(own >> 64));
        const Piece pc = p.at(from);
        switch (type_of(pc)) {
            case PieceType::King: add_steps(p, us, from, g.king[ci][from], out, captures_only); break;
            case PieceType::Advisor: add_steps(p, us, from, g.advisor[ci][from], out, captures_only); break;
            case PieceType::Elephant: add_steps(p, us, from, g.elephant[ci][from], out, captures_only); break;
            case PieceType::Horse: add_steps(p, us, from, g.horse[from], out, captures_only); break;
            case PieceType::Rook: add_slides(p, us, from, false, out, captures_only); break;
            case PieceType::Cannon: add_slides(p, us, from, true, out, captures_only); break;
            case PieceType::Pawn: add_steps(p, us, from, g.pawn[ci][from], out, captures_only); break;
            case PieceType::None: break;
        }
    }
}

bool is_legal(Position& p, Move m) {
    const Color us = p.side_to_move();
    const UndoToken token = p.do_move(m);
    const bool ok = !in_check(p, us);
    p.undo_move(token);
    return ok;
}

void generate_legal(const Position& p, MoveList& out, bool captures_only) {
    MoveList pseudo;
    generate_pseudo(p, pseudo, captures_only);
    Position scratch = p;
    out.clear();
    for (const Move m : pseudo)
        if (is_legal(scratch, m)) out.push(m);
}

std::vector<Move> generate_moves(const Position& p) {
    MoveList list;
    generate_legal(p, list);
    return {list.begin(), list.end()};
}

std::optional<Move> find_legal(const Position& p, Move coords) {
    MoveList list;
    generate_legal(p, list);
    for (const Move m : list)
        if (m == coords) return m;
    return std::nullopt;
}

std::uint64_t perft(Position& p, int depth) {
    if (depth == 0) return 1;
    MoveList pseudo;
    generate_pseudo(p, pseudo);
    std::uint64_t nodes = 0;
    const Color us = p.side_to_move();
    for (const Move m : pseudo) {
        const UndoToken token = p.do_move(m);
        if (!in_check(p, us)) nodes += depth == 1 ? 1 : perft(p, depth - 1);
        p.undo_move(token);
    }
    return nodes;
}

}  // namespace xq
