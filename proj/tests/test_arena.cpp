#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "support.hpp"
#include "xq/arena.hpp"
#include "xq/nnue.hpp"

using namespace xq;
using namespace xq::arena;

namespace {

EngineSpec pst_engine(int depth, int rating = 0) {
    SearchLimits limits;
    limits.depth = depth;
    return make_engine("pst", limits, rating);
}

std::vector<Position> corpus_openings(std::uint64_t seed, int count) {
    std::vector<Position> out = testing_support::random_corpus(seed, count, 6, 14);
    for (Position& p : out) p.clear_history();
    return out;
}

std::string log_text(const EngineSpec& a, const EngineSpec& b, const MatchResult& r) {
    std::ostringstream out;
    write_log(out, a, b, r);
    return out.str();
}

class ThrowingEval final : public EvalSource {
public:
    Score evaluate(const Position&) override { throw std::runtime_error("boom"); }
};

MatchResult with_counts(int wins, int draws, int losses, int rating) {
    MatchResult r;
    r.wins = wins;
    r.draws = draws;
    r.losses = losses;
    r.games.resize(static_cast<std::size_t>(wins + draws + losses));
    r.opponent_ratings.assign(r.games.size(), rating);
    return r;
}

}  // namespace

TEST_SUITE("performance rating") {
    TEST_CASE("sixty-five wins of a hundred against 2400") {
        CHECK(performance_rating(with_counts(65, 0, 35, 2400)) == 2520.0);
        CHECK(performance_rating(240000, 65, 35, 100) == 2520.0);
    }

    TEST_CASE("draws contribute the opponent rating only") {
        CHECK(performance_rating(with_counts(0, 10, 0, 2400)) == 2400.0);
        CHECK(performance_rating(with_counts(3, 4, 3, 2400)) == 2400.0);
    }

    TEST_CASE("single win") { CHECK(performance_rating(with_counts(1, 0, 0, 2400)) == 2800.0); }

    TEST_CASE("mixed opponent ratings are summed") {
        MatchResult r = with_counts(1, 1, 0, 0);
        r.opponent_ratings = {2000, 2201};
        CHECK(performance_rating(r) == (2000.0 + 2201.0 + 400.0) / 2.0);
    }

    TEST_CASE("errors") {
        CHECK_THROWS_AS(performance_rating(MatchResult{}), std::invalid_argument);
        CHECK_THROWS_AS(performance_rating(0, 0, 0, 0), std::invalid_argument);
        CHECK_THROWS_AS(performance_rating(2400, 1, 1, 1), std::invalid_argument);
    }
}

TEST_SUITE("elo") {
    TEST_CASE("even score") { CHECK(elo_diff_from_score(0.5) == doctest::Approx(0.0)); }

    TEST_CASE("sixty-five percent") {
        const double expected = 400.0 * std::log10(0.65 / 0.35);
        CHECK(elo_diff_from_score(0.65) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(elo_diff_from_score(0.65) == doctest::Approx(107.5).epsilon(0.001));
    }

    TEST_CASE("antisymmetric") {
        for (double s = 0.01; s < 1.0; s += 0.0737)
            CHECK(elo_diff_from_score(1.0 - s) == doctest::Approx(-elo_diff_from_score(s)).epsilon(1e-9));
    }

    TEST_CASE("inverts the logistic expectation") {
        for (double d = -600; d <= 600; d += 75) {
            const double s = 1.0 / (1.0 + std::pow(10.0, -d / 400.0));
            CHECK(elo_diff_from_score(s) == doctest::Approx(d).epsilon(1e-9));
        }
    }

    TEST_CASE("bounds") {
        CHECK_THROWS_AS(elo_diff_from_score(0.0), std::invalid_argument);
        CHECK_THROWS_AS(elo_diff_from_score(1.0), std::invalid_argument);
        CHECK_THROWS_AS(elo_diff_from_score(std::nan("")), std::invalid_argument);
    }

    TEST_CASE("score interval") {
        MatchResult r = with_counts(0, 0, 0, 0);
        for (int i = 0; i < 4; ++i) {
            MatchGame g;
            g.a_is_red = true;
            g.outcome = i < 3 ? Outcome::RedWin : Outcome::BlackWin;
            r.games.push_back(g);
        }
        const ScoreInterval ci = score_interval(r);
        const double half = 1.959963984540054 * std::sqrt((0.75 - 0.75 * 0.75) / 4.0);
        CHECK(ci.score == doctest::Approx(0.75));
        CHECK(ci.low == doctest::Approx(0.75 - half));
        CHECK(ci.high == doctest::Approx(std::min(1.0, 0.75 + half)));
    }
}

TEST_SUITE("adjudication") {
    TEST_CASE("checkmate and stalemate lose") {
        Adjudicator mate(parse_fen("R2k5/R8/9/9/9/9/9/9/9/4K4 b"));
        REQUIRE(mate.verdict(300).has_value());
        CHECK(mate.verdict(300)->outcome == Outcome::RedWin);
        CHECK(mate.verdict(300)->termination == Termination::Mate);

        // Black king boxed in by the rook on rank 8 and the facing red king.
        const Position stale = parse_fen("3k5/R8/9/9/9/9/9/9/9/4K4 b");
        REQUIRE(generate_moves(stale).empty());
        REQUIRE_FALSE(in_check(stale, Color::Black));
        Adjudicator s(stale);
        CHECK(s.verdict(300)->outcome == Outcome::RedWin);
        CHECK(s.verdict(300)->termination == Termination::Stalemate);
    }

    TEST_CASE("perpetual check loses for the checking side") {
        Adjudicator judge(parse_fen("4k4/R8/9/9/9/9/9/9/9/3K5 w"));
        const char* cycle[] = {"a8a9", "e9e8", "a9a8", "e8e9"};
        for (int lap = 0; lap < 2; ++lap) {
            for (const char* text : cycle) {
                CHECK_FALSE(judge.verdict(300).has_value());
                const auto m = find_legal(judge.position(), *parse_move_text(text));
                REQUIRE(m.has_value());
                judge.push(*m);
            }
        }
        const auto end = judge.verdict(300);
        REQUIRE(end.has_value());
        CHECK(end->termination == Termination::PerpetualCheck);
        CHECK(end->outcome == Outcome::BlackWin);
    }

    TEST_CASE("quiet repetition is a draw") {
        Adjudicator judge(parse_fen("4k4/R8/9/9/9/9/9/9/9/3K5 w"));
        const char* cycle[] = {"a8a7", "e9d9", "a7a8", "d9e9"};
        for (int lap = 0; lap < 2; ++lap) {
            for (const char* text : cycle) {
                CHECK_FALSE(judge.verdict(300).has_value());
                judge.push(*find_legal(judge.position(), *parse_move_text(text)));
            }
        }
        const auto end = judge.verdict(300);
        REQUIRE(end.has_value());
        CHECK(end->termination == Termination::Repetition);
        CHECK(end->outcome == Outcome::Draw);
    }

    TEST_CASE("move cap") {
        Adjudicator judge(Position::startpos());
        judge.push(*find_legal(judge.position(), *parse_move_text("h2e2")));
        CHECK_FALSE(judge.verdict(2).has_value());
        judge.push(*find_legal(judge.position(), *parse_move_text("h9g7")));
        CHECK(judge.verdict(2)->termination == Termination::MoveCap);
        CHECK(judge.verdict(2)->outcome == Outcome::Draw);
    }
}

TEST_SUITE("match") {
    TEST_CASE("argument errors") {
        const EngineSpec e = pst_engine(1);
        const std::vector<Position> openings{Position::startpos()};
        CHECK_THROWS_AS(run_match(e, e, openings, 3, 1), ConfigError);
        CHECK_THROWS_AS(run_match(e, e, openings, 0, 1), ConfigError);
        CHECK_THROWS_AS(run_match(e, e, {}, 2, 1), InputError);
        CHECK_THROWS_AS(make_engine("stockfish", SearchLimits{}), ConfigError);
        CHECK_THROWS_AS(make_engine("nnue:/nonexistent/model.nnm", SearchLimits{}), InputError);
    }

    TEST_CASE("opening already mated") {
        const EngineSpec e = pst_engine(3);
        const std::vector<Position> openings{parse_fen("R2k5/R8/9/9/9/9/9/9/9/4K4 b")};
        const MatchResult r = run_match(e, e, openings, 2, 7);
        REQUIRE(r.game_count() == 2);
        for (const MatchGame& g : r.games) {
            CHECK(g.moves.empty());
            CHECK(g.termination == Termination::Mate);
            CHECK(g.outcome == Outcome::RedWin);
        }
        CHECK(r.wins == 1);
        CHECK(r.losses == 1);
        CHECK(r.score() == 0.5);
    }

    TEST_CASE("self-match scores exactly half with mirrored pairs") {
        const EngineSpec e = pst_engine(2, 2400);
        const std::vector<Position> openings = corpus_openings(11, 6);
        const MatchResult r = run_match(e, e, openings, 12, 3);
        CHECK(r.score() == 0.5);
        CHECK(performance_rating(r) == 2400.0);
        for (std::size_t i = 0; i < r.games.size(); i += 2) {
            CHECK(r.games[i].moves == r.games[i + 1].moves);
            CHECK(r.games[i].outcome == r.games[i + 1].outcome);
            CHECK(r.games[i].a_score() + r.games[i + 1].a_score() == 1.0);
        }
    }

    TEST_CASE("bookkeeping and color fairness") {
        const EngineSpec a = pst_engine(2);
        const EngineSpec b = pst_engine(1, 1800);
        const std::vector<Position> openings = corpus_openings(5, 5);
        const MatchResult r = run_match(a, b, openings, 10, 9, {.max_plies = 120, .threads = 2});
        CHECK(r.wins + r.draws + r.losses == r.game_count());
        CHECK(r.opponent_ratings == std::vector<int>(10, 1800));
        std::vector<int> seen(openings.size(), 0);
        for (std::size_t i = 0; i < r.games.size(); ++i) {
            const MatchGame& g = r.games[i];
            CHECK(g.a_is_red == (i % 2 == 0));
            ++seen[g.opening];
            CHECK(to_fen(g.start) == to_fen(openings[g.opening]));
            Adjudicator judge(g.start);
            for (const Move m : g.moves) {
                CHECK_FALSE(judge.verdict(120).has_value());
                const auto legal = find_legal(judge.position(), m);
                REQUIRE(legal.has_value());
                judge.push(*legal);
            }
            const auto end = judge.verdict(120);
            REQUIRE(end.has_value());
            CHECK(end->outcome == g.outcome);
            CHECK(end->termination == g.termination);
        }
        CHECK(seen == std::vector<int>(openings.size(), 2));
    }

    TEST_CASE("deterministic and independent of thread count") {
        const EngineSpec a = pst_engine(2);
        const EngineSpec b = pst_engine(1);
        const std::vector<Position> openings = corpus_openings(21, 9);
        const MatchResult one = run_match(a, b, openings, 8, 4, {.max_plies = 80, .threads = 1});
        const MatchResult again = run_match(a, b, openings, 8, 4, {.max_plies = 80, .threads = 1});
        const MatchResult many = run_match(a, b, openings, 8, 4, {.max_plies = 80, .threads = 3});
        CHECK(log_text(a, b, one) == log_text(a, b, again));
        CHECK(log_text(a, b, one) == log_text(a, b, many));
        // More openings than pairs: a sample of distinct openings.
        std::set<std::size_t> used;
        for (const MatchGame& g : one.games) used.insert(g.opening);
        CHECK(used.size() == 4);
    }

    TEST_CASE("engine failure forfeits and is logged") {
        EngineSpec broken = pst_engine(1);
        broken.name = "broken";
        broken.eval = [] { return std::make_unique<ThrowingEval>(); };
        const EngineSpec good = pst_engine(1);
        const std::vector<Position> openings{Position::startpos()};
        const MatchResult r = run_match(good, broken, openings, 2, 1);
        CHECK(r.wins == 2);
        for (const MatchGame& g : r.games) {
            CHECK(g.termination == Termination::Forfeit);
            CHECK(g.note.find("boom") != std::string::npos);
        }
        CHECK(log_text(good, broken, r).find("note=engine error: boom") != std::string::npos);
    }

    TEST_CASE("nnue engine loads a model file") {
        const auto path = std::filesystem::temp_directory_path() / "xq_arena_model.nnm";
        nnue::save_model(nnue::glorot_init<float>(3), path);
        SearchLimits limits;
        limits.depth = 1;
        const EngineSpec n = make_engine("nnue:" + path.string(), limits);
        const MatchResult r = run_match(n, pst_engine(1), corpus_openings(2, 1), 2, 1, {.max_plies = 20});
        CHECK(r.game_count() == 2);
        std::filesystem::remove(path);
    }
}

TEST_SUITE("openings and reports") {
    TEST_CASE("openings are quiet positions from the ply window") {
        std::vector<data::GameRecord> games;
        for (std::uint64_t s = 0; s < 4; ++s) {
            data::GameRecord g;
            g.start = Position::startpos();
            Position p = g.start;
            std::mt19937_64 rng(s);
            for (int i = 0; i < 30; ++i) {
                const auto moves = generate_moves(p);
                if (moves.empty()) break;
                g.moves.push_back(moves[rng() % moves.size()]);
                p.do_move(g.moves.back());
            }
            games.push_back(g);
        }
        std::set<std::uint64_t> window;
        for (const auto& g : games) {
            const auto line = data::replay(g);
            for (std::size_t i = 8; i <= 24 && i < line.size(); ++i) window.insert(line[i].hash());
        }
        data::FilterMargins margins;
        margins.negamax_depth = 2;
        const auto openings = select_openings(games, 10, 5, margins, pst_factory());
        CHECK_FALSE(openings.empty());
        CHECK(openings.size() <= 10);
        std::set<std::uint64_t> distinct;
        PstEval eval;
        for (const Position& p : openings) {
            CHECK(window.count(p.hash()) == 1);
            CHECK(distinct.insert(p.hash()).second);
            CHECK(data::is_quiet_position(p, margins, eval));
            CHECK(p.history().empty());
        }
        const auto again = select_openings(games, 10, 5, margins, pst_factory());
        REQUIRE(again.size() == openings.size());
        for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i] == openings[i]);
        CHECK_THROWS_AS(select_openings({}, 10, 5, margins, pst_factory()), InputError);
    }

    TEST_CASE("report and log") {
        const EngineSpec a = pst_engine(2);
        const EngineSpec b = pst_engine(1, 2400);
        const MatchResult r = run_match(a, b, corpus_openings(8, 2), 4, 1, {.max_plies = 60});
        std::ostringstream report;
        write_report(report, a, b, r);
        CHECK(report.str().find("performance rating (baseline 2400)") != std::string::npos);
        CHECK(report.str().find("95% CI") != std::string::npos);

        std::istringstream log(log_text(a, b, r));
        std::string line;
        int n = 0;
        while (std::getline(log, line)) {
            CHECK(line.starts_with("game=" + std::to_string(n) + " "));
            const auto bar = line.find('|');
            const auto bar2 = line.find('|', bar + 1);
            REQUIRE(bar2 != std::string::npos);
            const data::GameRecord g = data::parse_game_line(line.substr(bar + 1));
            CHECK(g.moves == r.games[n].moves);
            ++n;
        }
        CHECK(n == r.game_count());
    }
}
