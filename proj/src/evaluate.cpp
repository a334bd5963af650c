#include "xq/evaluate.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace xq {

namespace {

using Grid = std::array<Score, kSquares>;

// Red offsets, laid out row-major from Black's back rank (rank 9) down to rank 0.
// clang-format off
constexpr Grid kKing = {
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0, -15, -20, -15,   0,   0,   0,
      0,   0,   0,  -8,  -8,  -8,   0,   0,   0,
      0,   0,   0,  -2,   5,  -2,   0,   0,   0,
};

constexpr Grid kAdvisor = {
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,  -2,   0,  -2,   0,   0,   0,
      0,   0,   0,   0,   5,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
};

constexpr Grid kElephant = {
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,  -3,   0,   0,   0,  -3,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
     -5,   0,   0,   0,   5,   0,   0,   0,  -5,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
};

constexpr Grid kHorse = {
      0,  -5,   5,   5,   0,   5,   5,  -5,   0,
      0,  10,  20,  15,   5,  15,  20,  10,   0,
      5,  15,  20,  25,  20,  25,  20,  15,   5,
      5,  20,  15,  25,  20,  25,  15,  20,   5,
      0,  10,  15,  20,  20,  20,  15,  10,   0,
      0,   5,  10,  15,  15,  15,  10,   5,   0,
      0,   5,  10,  10,  10,  10,  10,   5,   0,
      0,   0,   5,   5,   5,   5,   5,   0,   0,
    -10,   0,   0,   0, -10,   0,   0,   0, -10,
    -10, -10,   0,  -5, -10,  -5,   0, -10, -10,
};

constexpr Grid kRook = {
     10,  15,  10,  20,  20,  20,  10,  15,  10,
     10,  20,  15,  25,  30,  25,  15,  20,  10,
     10,  15,  10,  20,  20,  20,  10,  15,  10,
     10,  20,  15,  20,  20,  20,  15,  20,  10,
     10,  15,  15,  20,  20,  20,  15,  15,  10,
      5,  10,  10,  15,  15,  15,  10,  10,   5,
      0,  10,   5,  10,  10,  10,   5,  10,   0,
     -5,   5,   0,   5,   5,   5,   0,   5,  -5,
      0,   5,   0,   5,   0,   5,   0,   5,   0,
    -10,   5,   0,   5,   0,   5,   0,   5, -10,
};

constexpr Grid kCannon = {
     10,  10,   0,  -5, -10,  -5,   0,  10,  10,
      5,   5,   0,  -5,  -5,  -5,   0,   5,   5,
      5,   5,   0,  -5,  -5,  -5,   0,   5,   5,
      0,   5,   0,   0,   5,   0,   0,   5,   0,
      0,   0,   0,   0,   5,   0,   0,   0,   0,
      0,   0,   0,   0,   5,   0,   0,   0,   0,
      0,   0,   0,   0,   5,   0,   0,   0,   0,
      0,   5,   5,   5,  15,   5,   5,   5,   0,
      0,   0,   0,   5,   5,   5,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
};

// Across the river the offsets carry the extra ~100 a crossed pawn is worth.
constexpr Grid kPawn = {
     80,  90,  95, 100, 100, 100,  95,  90,  80,
    100, 110, 120, 140, 150, 140, 120, 110, 100,
    100, 110, 120, 130, 140, 130, 120, 110, 100,
     95, 105, 110, 120, 125, 120, 110, 105,  95,
     90,  95, 100, 105, 110, 105, 100,  95,  90,
      0,   0,  -5,   0,  10,   0,  -5,   0,   0,
      0,   0,   0,   0,   5,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,
};
// clang-format on

// Index into a file-layout grid (rank 9 first) for a board square.
constexpr int layout_index(Square s) { return (kRanks - 1 - rank_of(s)) * kFiles + file_of(s); }

void set_red_table(PstTables& t, PieceType type, const Grid& layout) {
    for (Square s = 0; s < kSquares; ++s) {
        t.offset[0][static_cast<int>(type)][s] = layout[layout_index(s)];
        t.offset[1][static_cast<int>(type)][flip_rank(s)] = layout[layout_index(s)];
    }
}

PstTables build_default() {
    PstTables t{};
    t.base = {0, 0, 200, 200, 450, 1000, 450, 100};
    set_red_table(t, PieceType::King, kKing);
    set_red_table(t, PieceType::Advisor, kAdvisor);
    set_red_table(t, PieceType::Elephant, kElephant);
    set_red_table(t, PieceType::Horse, kHorse);
    set_red_table(t, PieceType::Rook, kRook);
    set_red_table(t, PieceType::Cannon, kCannon);
    set_red_table(t, PieceType::Pawn, kPawn);
    return t;
}

constexpr std::string_view kTypeLetters = " KABNRCP";

int type_from_letter(const std::string& tok) {
    if (tok.size() != 1) return -1;
    const auto pos = kTypeLetters.find(static_cast<char>(tok[0] & ~0x20));
    return pos == std::string_view::npos || pos == 0 ? -1 : static_cast<int>(pos);
}

bool parse_int(const std::string& tok, Score& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

const PstTables& default_pst() {
    static const PstTables tables = build_default();
    return tables;
}

Score evaluate_red(const Position& p, const PstTables& tables) {
    Score sum = 0;
    for (Square s = 0; s < kSquares; ++s) {
        const Piece pc = p.at(s);
        if (is_empty(pc)) continue;
        const Score v = tables.value(pc, s);
        sum += color_of(pc) == Color::Red ? v : -v;
    }
    return sum;
}

Score evaluate(const Position& p, const PstTables& tables) {
    const Score red = evaluate_red(p, tables);
    return p.side_to_move() == Color::Red ? red : -red;
}

PstTables load_pst(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open PST file " + path.string());

    std::vector<std::string> tokens;
    for (std::string line; std::getline(in, line);) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        for (std::string tok; ls >> tok;) tokens.push_back(tok);
    }

    PstTables t{};
    std::array<bool, 8> have_base{};
    std::array<std::array<bool, 8>, 2> have_table{};

    for (std::size_t i = 0; i < tokens.size();) {
        const std::string& kw = tokens[i];
        if (kw == "base") {
            if (i + 2 >= tokens.size()) throw InputError("PST: truncated base entry");
            const int type = type_from_letter(tokens[i + 1]);
            Score v = 0;
            if (type < 0 || !parse_int(tokens[i + 2], v)) throw InputError("PST: bad base entry near token " + std::to_string(i));
            t.base[type] = v;
            have_base[type] = true;
            i += 3;
        } else if (kw == "table") {
            if (i + 2 >= tokens.size()) throw InputError("PST: truncated table header");
            const std::string& color = tokens[i + 1];
            const int type = type_from_letter(tokens[i + 2]);
            if ((color != "red" && color != "black") || type < 0)
                throw InputError("PST: bad table header '" + color + " " + tokens[i + 2] + "'");
            const int ci = color == "red" ? 0 : 1;
            i += 3;
            Grid layout{};
            int count = 0;
            Score v = 0;
            while (i < tokens.size() && parse_int(tokens[i], v)) {
                if (count < kSquares) layout[count] = v;
                ++count;
                ++i;
            }
            if (count != kSquares)
                throw InputError("PST: table " + color + " " + std::string(1, kTypeLetters[type]) + " has " +
                                 std::to_string(count) + " values, expected 90");
            for (Square s = 0; s < kSquares; ++s) t.offset[ci][type][s] = layout[layout_index(s)];
            have_table[ci][type] = true;
        } else {
            throw InputError("PST: unexpected token '" + kw + "'");
        }
    }

    for (int type = 1; type <= 7; ++type) {
        const std::string name(1, kTypeLetters[type]);
        if (!have_base[type]) throw InputError("PST: missing base value for " + name);
        if (!have_table[0][type] || !have_table[1][type]) throw InputError("PST: missing table for " + name);
        for (Square s = 0; s < kSquares; ++s)
            if (t.offset[1][type][s] != t.offset[0][type][flip_rank(s)])
                throw InputError("PST: black table " + name + " is not the rank-mirror of red's");
    }
    return t;
}

void save_pst(const PstTables& tables, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write PST file " + path.string());
    for (int type = 1; type <= 7; ++type) out << "base " << kTypeLetters[type] << ' ' << tables.base[type] << '\n';
    for (int ci = 0; ci < 2; ++ci) {
        for (int type = 1; type <= 7; ++type) {
            out << "table " << (ci == 0 ? "red" : "black") << ' ' << kTypeLetters[type] << '\n';
            for (int rank = kRanks - 1; rank >= 0; --rank) {
                for (int file = 0; file < kFiles; ++file)
                    out << (file ? " " : "") << tables.offset[ci][type][make_square(file, rank)];
                out << '\n';
            }
        }
    }
}

}  // namespace xq
