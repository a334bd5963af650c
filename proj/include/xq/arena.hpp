#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xq/datagen.hpp"
#include "xq/search.hpp"

namespace xq::arena {

struct EngineSpec {
    std::string name;
    EvalFactory eval;
    SearchLimits limits;
    // Rating credited to this engine when it is the opponent.
    int rating = 0;
};

// "pst" or "nnue:<model path>". The model is loaded once and shared by all games.
EngineSpec make_engine(std::string_view source, const SearchLimits& limits, int rating = 0);

enum class Outcome { RedWin, BlackWin, Draw };

enum class Termination { Mate, Stalemate, MoveCap, Repetition, PerpetualCheck, Forfeit };

std::string_view to_string(Outcome o);
std::string_view to_string(Termination t);

struct GameEnd {
    Outcome outcome = Outcome::Draw;
    Termination termination = Termination::MoveCap;
};

// Follows a game from its start and applies the end-of-game rules. Having no
// legal move loses; threefold repetition is a draw unless exactly one side gave
// check with each of its moves in the repeated cycle, which then loses.
class Adjudicator {
public:
    explicit Adjudicator(const Position& start);

    // `m` must be legal in the current position.
    void push(Move m);
    const Position& position() const { return position_; }
    int plies() const { return static_cast<int>(movers_.size()); }
    std::optional<GameEnd> verdict(int max_plies) const;

private:
    Position position_;
    std::vector<std::uint64_t> hashes_;
    std::vector<Color> movers_;
    std::vector<char> gave_check_;
};

struct MatchGame {
    std::size_t opening = 0;
    Position start;
    bool a_is_red = true;
    std::vector<Move> moves;
    Outcome outcome = Outcome::Draw;
    Termination termination = Termination::MoveCap;
    std::string note;  // forfeit reason

    // 1, 0.5 or 0 from engine A's view.
    double a_score() const;
};

struct MatchResult {
    int wins = 0;
    int draws = 0;
    int losses = 0;
    std::vector<MatchGame> games;
    std::vector<int> opponent_ratings;  // one per game

    int game_count() const { return static_cast<int>(games.size()); }
    double score() const;
};

struct MatchOptions {
    int max_plies = 300;
    int threads = 1;
};

// Plays one game from `start` with `red` on the Red pieces.
MatchGame play_game(const EngineSpec& red, const EngineSpec& black, const Position& start, int max_plies = 300);

// Game 2i has A as Red and game 2i + 1 has A as Black, both from the same opening.
// With more openings than pairs a seeded sample is used, otherwise they cycle in order.
MatchResult run_match(const EngineSpec& a, const EngineSpec& b, std::span<const Position> openings, int n_games,
                      std::uint64_t rng_seed, const MatchOptions& options = {});

// (total opponent rating + 400 (wins - losses)) / games.
double performance_rating(std::int64_t opponents_total, std::int64_t wins, std::int64_t losses, std::int64_t games);
double performance_rating(const MatchResult& result);

double elo_diff_from_score(double score);

struct ScoreInterval {
    double score = 0;
    double low = 0;
    double high = 0;
};

// Normal approximation over per-game scores, clipped to [0, 1].
ScoreInterval score_interval(const MatchResult& result, double z = 1.959963984540054);

// Quiet positions from plies [min_ply, max_ply] of the games, deduplicated, in seeded order.
std::vector<Position> select_openings(std::span<const data::GameRecord> games, int count, std::uint64_t seed,
                                      const data::FilterMargins& margins, const EvalFactory& eval, int min_ply = 8,
                                      int max_ply = 24);

void write_report(std::ostream& out, const EngineSpec& a, const EngineSpec& b, const MatchResult& result);
// One line per game: index, colors, result, termination, opening FEN and moves.
void write_log(std::ostream& out, const EngineSpec& a, const EngineSpec& b, const MatchResult& result);

}  // namespace xq::arena
