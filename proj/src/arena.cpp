#include "xq/arena.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "parallel.hpp"
#include "xq/nnue.hpp"
#include "xq/random.hpp"

namespace xq::arena {

EngineSpec make_engine(std::string_view source, const SearchLimits& limits, int rating) {
    limits.validate();
    EngineSpec spec;
    spec.limits = limits;
    spec.rating = rating;
    if (source == "pst") {
        spec.name = "pst";
        spec.eval = pst_factory();
        return spec;
    }
    if (source.starts_with("nnue:")) {
        const std::filesystem::path path(source.substr(5));
        auto model = std::make_shared<const nnue::NnueModel>(nnue::load_model(path));
        spec.name = "nnue:" + path.filename().string();
        spec.eval = [model] { return std::make_unique<nnue::NnueEval>(*model); };
        return spec;
    }
    throw ConfigError("unknown engine '" + std::string(source) + "' (expected pst or nnue:<path>)");
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::RedWin: return "1-0";
        case Outcome::BlackWin: return "0-1";
        case Outcome::Draw: return "1/2-1/2";
    }
    return "?";
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::Mate: return "mate";
        case Termination::Stalemate: return "stalemate";
        case Termination::MoveCap: return "move-cap";
        case Termination::Repetition: return "repetition";
        case Termination::PerpetualCheck: return "perpetual-check";
        case Termination::Forfeit: return "forfeit";
    }
    return "?";
}

double MatchGame::a_score() const {
    if (outcome == Outcome::Draw) return 0.5;
    return (outcome == Outcome::RedWin) == a_is_red ? 1.0 : 0.0;
}

double MatchResult::score() const {
    if (games.empty()) return 0;
    return (wins + 0.5 * draws) / game_count();
}

namespace {

Outcome loss_for(Color c) { return c == Color::Red ? Outcome::BlackWin : Outcome::RedWin; }

}  // namespace

Adjudicator::Adjudicator(const Position& start) : position_(start), hashes_{start.hash()} {
    position_.clear_history();
}

void Adjudicator::push(Move m) {
    const Color us = position_.side_to_move();
    position_.do_move(m);
    movers_.push_back(us);
    gave_check_.push_back(in_check(position_, ~us));
    hashes_.push_back(position_.hash());
}

std::optional<GameEnd> Adjudicator::verdict(int max_plies) const {
    const Color us = position_.side_to_move();
    MoveList legal;
    generate_legal(position_, legal);
    if (legal.empty()) return GameEnd{loss_for(us), in_check(position_, us) ? Termination::Mate : Termination::Stalemate};

    if (position_.repetition_count() >= 3) {
        // The cycle runs between the last two occurrences of the current position.
        const std::size_t n = hashes_.size() - 1;
        std::size_t j = n;
        while (j-- > 0)
            if (hashes_[j] == hashes_[n]) break;
        bool perpetual[2] = {true, true};
        bool moved[2] = {false, false};
        for (std::size_t k = j; k < n; ++k) {
            const int c = index_of(movers_[k]);
            moved[c] = true;
            perpetual[c] = perpetual[c] && gave_check_[k];
        }
        const bool red = moved[0] && perpetual[0];
        const bool black = moved[1] && perpetual[1];
        if (red != black) return GameEnd{loss_for(red ? Color::Red : Color::Black), Termination::PerpetualCheck};
        return GameEnd{Outcome::Draw, Termination::Repetition};
    }
    if (plies() >= max_plies) return GameEnd{Outcome::Draw, Termination::MoveCap};
    return std::nullopt;
}

MatchGame play_game(const EngineSpec& red, const EngineSpec& black, const Position& start, int max_plies) {
    MatchGame game;
    Adjudicator judge(start);
    game.start = judge.position();

    std::unique_ptr<EvalSource> evals[2] = {red.eval(), black.eval()};
    Searcher searchers[2] = {Searcher(*evals[0], red.limits), Searcher(*evals[1], black.limits)};

    for (;;) {
        if (const auto end = judge.verdict(max_plies)) {
            game.outcome = end->outcome;
            game.termination = end->termination;
            return game;
        }
        const Color us = judge.position().side_to_move();
        Position p = judge.position();
        std::optional<Move> choice;
        try {
            choice = searchers[index_of(us)].best_move(p).best_move;
            if (!choice) game.note = "no move returned";
            else if (!(choice = find_legal(judge.position(), *choice))) game.note = "illegal move returned";
        } catch (const std::exception& e) {
            choice.reset();
            game.note = std::string("engine error: ") + e.what();
        }
        if (!choice) {
            game.outcome = loss_for(us);
            game.termination = Termination::Forfeit;
            return game;
        }
        judge.push(*choice);
        game.moves.push_back(*choice);
    }
}

MatchResult run_match(const EngineSpec& a, const EngineSpec& b, std::span<const Position> openings, int n_games,
                      std::uint64_t rng_seed, const MatchOptions& options) {
    if (n_games < 2 || n_games % 2 != 0)
        throw ConfigError("n_games must be a positive even number, got " + std::to_string(n_games));
    if (openings.empty()) throw InputError("match needs at least one opening");
    if (options.max_plies < 1 || options.threads < 1) throw ConfigError("invalid match options");
    if (!a.eval || !b.eval) throw ConfigError("engine without an evaluator");
    a.limits.validate();
    b.limits.validate();
    for (std::size_t i = 0; i < openings.size(); ++i)
        if (auto why = validate(openings[i])) throw InputError("opening " + std::to_string(i) + " is illegal: " + *why);

    const std::size_t pairs = static_cast<std::size_t>(n_games / 2);
    std::vector<std::size_t> order(openings.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (openings.size() > pairs) {
        Rng rng(derive_seed(rng_seed, Stage::Match));
        rng.shuffle(std::span<std::size_t>(order));
        order.resize(pairs);
        std::sort(order.begin(), order.end());
    }

    MatchResult result;
    result.games.resize(2 * pairs);
    detail::parallel_for(pairs, options.threads, [&](std::size_t i, int) {
        const std::size_t opening = order[i % order.size()];
        const Position& start = openings[opening];
        MatchGame first = play_game(a, b, start, options.max_plies);
        first.a_is_red = true;
        MatchGame second = play_game(b, a, start, options.max_plies);
        second.a_is_red = false;
        first.opening = second.opening = opening;
        result.games[2 * i] = std::move(first);
        result.games[2 * i + 1] = std::move(second);
    });

    for (const MatchGame& g : result.games) {
        const double s = g.a_score();
        if (s == 1.0) ++result.wins;
        else if (s == 0.0) ++result.losses;
        else ++result.draws;
        result.opponent_ratings.push_back(b.rating);
    }
    return result;
}

double performance_rating(std::int64_t opponents_total, std::int64_t wins, std::int64_t losses, std::int64_t games) {
    if (games <= 0) throw std::invalid_argument("performance rating needs at least one game");
    if (wins < 0 || losses < 0 || wins + losses > games) throw std::invalid_argument("inconsistent win/loss counts");
    return static_cast<double>(opponents_total + 400 * (wins - losses)) / static_cast<double>(games);
}

double performance_rating(const MatchResult& result) {
    if (static_cast<int>(result.opponent_ratings.size()) != result.game_count())
        throw std::invalid_argument("opponent ratings must list one rating per game");
    const std::int64_t total = std::accumulate(result.opponent_ratings.begin(), result.opponent_ratings.end(), std::int64_t{0});
    return performance_rating(total, result.wins, result.losses, result.game_count());
}

double elo_diff_from_score(double score) {
    if (!(score > 0.0 && score < 1.0)) throw std::invalid_argument("score must lie strictly between 0 and 1");
    return -400.0 * std::log10(1.0 / score - 1.0);
}

ScoreInterval score_interval(const MatchResult& result, double z) {
    const int n = result.game_count();
    if (n == 0) throw std::invalid_argument("score interval needs at least one game");
    double sum = 0, sq = 0;
    for (const MatchGame& g : result.games) {
        const double s = g.a_score();
        sum += s;
        sq += s * s;
    }
    const double mean = sum / n;
    const double variance = std::max(0.0, sq / n - mean * mean);
    const double half = z * std::sqrt(variance / n);
    return {mean, std::max(0.0, mean - half), std::min(1.0, mean + half)};
}

std::vector<Position> select_openings(std::span<const data::GameRecord> games, int count, std::uint64_t seed,
                                      const data::FilterMargins& margins, const EvalFactory& eval, int min_ply,
                                      int max_ply) {
    if (count < 1) throw ConfigError("opening count must be positive");
    if (min_ply < 0 || max_ply < min_ply) throw ConfigError("invalid opening ply range");
    margins.validate();

    std::vector<Position> candidates;
    std::unordered_set<std::uint64_t> seen;
    for (const data::GameRecord& game : games) {
        const std::vector<Position> line = data::replay(game);
        for (int ply = min_ply; ply <= max_ply && ply < static_cast<int>(line.size()); ++ply) {
            Position p = line[ply];
            p.clear_history();
            if (seen.insert(p.hash()).second) candidates.push_back(std::move(p));
        }
    }
    Rng rng(derive_seed(seed, Stage::Match, 1));
    rng.shuffle(std::span<Position>(candidates));

    const auto evaluator = eval();
    std::vector<Position> out;
    for (const Position& p : candidates) {
        if (static_cast<int>(out.size()) == count) break;
        if (generate_moves(p).empty()) continue;
        if (data::is_quiet_position(p, margins, *evaluator)) out.push_back(p);
    }
    if (out.empty()) throw InputError("no quiet opening positions found in the games");
    return out;
}

void write_report(std::ostream& out, const EngineSpec& a, const EngineSpec& b, const MatchResult& result) {
    const int n = result.game_count();
    fmt::print(out, "{:<24} {:<24} {:>6} {:>5} {:>5} {:>5} {:>8}\n", "engine A", "engine B", "games", "W", "D", "L",
               "score%");
    fmt::print(out, "{:<24} {:<24} {:>6} {:>5} {:>5} {:>5} {:>8.2f}\n", a.name, b.name, n, result.wins, result.draws,
               result.losses, 100.0 * result.score());
    if (n == 0) return;
    fmt::print(out, "performance rating (baseline {}): {:.1f}\n", b.rating, performance_rating(result));
    const ScoreInterval ci = score_interval(result);
    auto elo = [](double s) -> std::string {
        if (s <= 0.0) return "-inf";
        if (s >= 1.0) return "+inf";
        return fmt::format("{:+.1f}", elo_diff_from_score(s));
    };
    fmt::print(out, "score 95% CI: [{:.2f}%, {:.2f}%]\n", 100.0 * ci.low, 100.0 * ci.high);
    fmt::print(out, "elo difference: {} (95% CI {} .. {})\n", elo(ci.score), elo(ci.low), elo(ci.high));
}

void write_log(std::ostream& out, const EngineSpec& a, const EngineSpec& b, const MatchResult& result) {
    for (std::size_t i = 0; i < result.games.size(); ++i) {
        const MatchGame& g = result.games[i];
        std::string moves;
        for (const Move m : g.moves) {
            if (!moves.empty()) moves += ' ';
            moves += to_string(m);
        }
        fmt::print(out, "game={} opening={} red={} black={} result={} termination={} a_score={}{}|{}|{}\n", i, g.opening,
                   g.a_is_red ? a.name : b.name, g.a_is_red ? b.name : a.name, to_string(g.outcome),
                   to_string(g.termination), g.a_score(), g.note.empty() ? "" : " note=" + g.note, to_fen(g.start),
                   moves);
    }
}

}  // namespace xq::arena
