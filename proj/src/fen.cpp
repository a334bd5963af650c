#include <array>
#include <charconv>
#include <sstream>
#include <string>
#include <vector>

#include "xq/position.hpp"

namespace xq {

namespace {

std::optional<Piece> piece_from_char(char ch) {
    const Color c = (ch >= 'A' && ch <= 'Z') ? Color::Red : Color::Black;
    switch (ch | 0x20) {
        case 'k': return make_piece(c, PieceType::King);
        case 'a': return make_piece(c, PieceType::Advisor);
        case 'b':
        case 'e': return make_piece(c, PieceType::Elephant);
        case 'n':
        case 'h': return make_piece(c, PieceType::Horse);
        case 'r': return make_piece(c, PieceType::Rook);
        case 'c': return make_piece(c, PieceType::Cannon);
        case 'p': return make_piece(c, PieceType::Pawn);
        default: return std::nullopt;
    }
}

char char_from_piece(Piece p) {
    constexpr std::string_view kLetters = " kabnrcp";
    const char ch = kLetters[static_cast<int>(type_of(p))];
    return color_of(p) == Color::Red ? static_cast<char>(ch - 0x20) : ch;
}

std::string square_name(Square s) {
    return {static_cast<char>('a' + file_of(s)), static_cast<char>('0' + rank_of(s))};
}

const char* type_name(PieceType t) {
    constexpr const char* kNames[] = {"none", "king", "advisor", "elephant", "horse", "rook", "cannon", "pawn"};
    return kNames[static_cast<int>(t)];
}

bool legal_square(Piece p, Square s) {
    const Color c = color_of(p);
    switch (type_of(p)) {
        case PieceType::King: return in_palace(c, s);
        case PieceType::Advisor:
            return in_palace(c, s) && (file_of(s) + rank_of(s)) % 2 == (c == Color::Red ? 1 : 0);
        case PieceType::Elephant: {
            if (!own_half(c, s)) return false;
            const int f = file_of(s);
            const int r = c == Color::Red ? rank_of(s) : 9 - rank_of(s);
            return (r == 0 || r == 4) ? (f == 2 || f == 6) : (r == 2 && f % 4 == 0);
        }
        case PieceType::Pawn: {
            const int r = c == Color::Red ? rank_of(s) : 9 - rank_of(s);
            if (r < 3) return false;
            return r >= 5 || file_of(s) % 2 == 0;
        }
        default: return true;
    }
}

}  // namespace

std::optional<std::string> validate(const Position& p) {
    std::array<std::array<int, 8>, 2> counts{};
    constexpr std::array<int, 8> kMaxCount = {0, 1, 2, 2, 2, 2, 2, 5};

    for (Square s = 0; s < kSquares; ++s) {
        const Piece pc = p.at(s);
        if (is_empty(pc)) continue;
        if (!valid_piece_code(code_of(pc))) return "invalid piece code at " + square_name(s);
        const int t = static_cast<int>(type_of(pc));
        if (!legal_square(pc, s))
            return std::string(color_of(pc) == Color::Red ? "red " : "black ") + type_name(type_of(pc)) +
                   " on illegal square " + square_name(s);
        if (++counts[index_of(color_of(pc))][t] > kMaxCount[t])
            return std::string("too many ") + (color_of(pc) == Color::Red ? "red " : "black ") +
                   type_name(type_of(pc)) + "s";
    }
    if (counts[0][1] != 1) return "red king missing";
    if (counts[1][1] != 1) return "black king missing";
    if (in_check(p, ~p.side_to_move())) return "side not to move is in check";
    return std::nullopt;
}

Position parse_fen(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string placement, side;
    in >> placement >> side;
    if (placement.empty()) throw InputError("FEN: empty input");
    if (side.empty()) throw InputError("FEN: missing side-to-move field");

    std::vector<std::string> ranks;
    std::string current;
    for (char ch : placement) {
        if (ch == '/') {
            ranks.push_back(current);
            current.clear();
        } else {
            current += ch;
        }
    }
    ranks.push_back(current);
    if (ranks.size() != kRanks)
        throw InputError("FEN: expected 10 ranks, found " + std::to_string(ranks.size()));

    Position p;
    for (int i = 0; i < kRanks; ++i) {
        const int rank = kRanks - 1 - i;
        int file = 0;
        for (char ch : ranks[i]) {
            if (ch >= '1' && ch <= '9') {
                file += ch - '0';
            } else {
                const auto pc = piece_from_char(ch);
                if (!pc) throw InputError(std::string("FEN: unknown piece letter '") + ch + "'");
                if (file >= kFiles) throw InputError("FEN: rank " + std::to_string(rank) + " overflows");
                p.set_piece(make_square(file, rank), *pc);
                ++file;
            }
            if (file > kFiles) throw InputError("FEN: rank " + std::to_string(rank) + " overflows");
        }
        if (file != kFiles)
            throw InputError("FEN: rank " + std::to_string(rank) + " has " + std::to_string(file) + " files");
    }

    if (side == "w" || side == "r")
        p.set_side_to_move(Color::Red);
    else if (side == "b")
        p.set_side_to_move(Color::Black);
    else
        throw InputError("FEN: bad side-to-move field '" + side + "'");

    // Optional trailing fields: "- - <halfmove> <fullmove>".
    std::string castling, ep, halfmove, fullmove;
    in >> castling >> ep >> halfmove >> fullmove;
    int full = 1;
    if (!fullmove.empty()) {
        auto [ptr, ec] = std::from_chars(fullmove.data(), fullmove.data() + fullmove.size(), full);
        if (ec != std::errc() || ptr != fullmove.data() + fullmove.size() || full < 1)
            throw InputError("FEN: bad fullmove number '" + fullmove + "'");
    }
    p.set_ply(2 * (full - 1) + (p.side_to_move() == Color::Black ? 1 : 0));
    p.refresh();

    if (auto err = validate(p)) throw InputError("FEN: " + *err);
    return p;
}

std::string to_fen(const Position& p) {
    std::string out;
    for (int rank = kRanks - 1; rank >= 0; --rank) {
        int empty = 0;
        for (int file = 0; file < kFiles; ++file) {
            const Piece pc = p.at(make_square(file, rank));
            if (is_empty(pc)) {
                ++empty;
                continue;
            }
            if (empty) out += static_cast<char>('0' + empty);
            empty = 0;
            out += char_from_piece(pc);
        }
        if (empty) out += static_cast<char>('0' + empty);
        if (rank) out += '/';
    }
    out += p.side_to_move() == Color::Red ? " w - - 0 " : " b - - 0 ";
    out += std::to_string(p.ply() / 2 + 1);
    return out;
}

}  // namespace xq
