#include "xq/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "parallel.hpp"
#include "xq/random.hpp"

namespace xq::data {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

GameRecord parse_game_line(std::string_view line) {
    const auto bar = line.find('|');
    if (bar == std::string_view::npos) throw InputError("missing '|' between position and moves");
    const std::string_view fen = trim(line.substr(0, bar));
    GameRecord game;
    game.start = fen == "startpos" ? Position::startpos() : parse_fen(fen);
    game.start.clear_history();

    Position p = game.start;
    std::istringstream moves{std::string(line.substr(bar + 1))};
    std::string token;
    while (moves >> token) {
        const std::string at = "move " + std::to_string(game.moves.size() + 1) + " '" + token + "'";
        const auto coords = parse_move_text(token);
        if (!coords) throw InputError(at + " is not coordinate notation");
        const auto legal = find_legal(p, *coords);
        if (!legal) throw InputError(at + " is illegal in " + to_fen(p));
        p.do_move(*legal);
        game.moves.push_back(*legal);
    }
    return game;
}

std::string format_game_line(const GameRecord& game) {
    std::string out = to_fen(game.start) + "|";
    for (std::size_t i = 0; i < game.moves.size(); ++i) {
        if (i) out += ' ';
        out += to_string(game.moves[i]);
    }
    return out;
}

IngestResult ingest_games(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read game list " + path.string());
    IngestResult result;
    std::string line;
    for (int number = 1; std::getline(in, line); ++number) {
        const std::string_view text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        try {
            result.games.push_back(parse_game_line(text));
        } catch (const InputError& e) {
            ++result.rejected;
            result.diagnostics.push_back(path.filename().string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    if (result.games.empty())
        throw InputError("zero parseable games in " + path.string() + " (" + std::to_string(result.rejected) + " rejected" +
                         (result.diagnostics.empty() ? "" : ", first: " + result.diagnostics.front()) + ")");
    return result;
}

void write_games(std::span<const GameRecord> games, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    for (const GameRecord& g : games) out << format_game_line(g) << '\n';
    if (!out) throw InputError("write failed: " + path.string());
}

std::vector<Position> replay(const GameRecord& game) {
    std::vector<Position> out;
    out.reserve(game.moves.size() + 1);
    Position p = game.start;
    out.push_back(p);
    for (const Move m : game.moves) {
        p.do_move(m);
        out.push_back(p);
    }
    return out;
}

void FilterMargins::validate() const {
    if (m1 < 0 || m2 < 0) throw ConfigError("quiet-filter margins must be non-negative");
    if (negamax_depth < 1 || negamax_depth > SearchLimits::kMaxDepth)
        throw ConfigError("negamax depth must be in [1, 64], got " + std::to_string(negamax_depth));
    SearchLimits limits;
    limits.qsearch_ply_cap = qsearch_ply_cap;
    limits.validate();
}

QuietCheck classify_position(const Position& p, const FilterMargins& margins, EvalSource& eval) {
    QuietCheck out;
    if (in_check(p, p.side_to_move())) {
        out.verdict = Verdict::InCheck;
        return out;
    }
    Position work = p;
    eval.reset(work);
    const Score e = eval.evaluate(work);
    out.static_eval = e;

    SearchLimits limits;
    limits.depth = margins.negamax_depth;
    limits.qsearch_ply_cap = margins.qsearch_ply_cap;
    Searcher searcher(eval, limits);

    // A window one wider than the margin on each side: inside it the fail-soft
    // value is exact, outside it the bound alone decides the rejection.
    out.quiescence = searcher.quiescence(work, e - margins.m1 - 1, e + margins.m1 + 1);
    if (std::abs(e - out.quiescence) > margins.m1) {
        out.verdict = Verdict::QuiescenceGap;
        return out;
    }
    out.negamax = searcher.negamax(work, margins.negamax_depth, e - margins.m2 - 1, e + margins.m2 + 1);
    if (std::abs(e - out.negamax) > margins.m2) out.verdict = Verdict::NegamaxGap;
    return out;
}

bool is_quiet_position(const Position& p, const FilterMargins& margins, EvalSource& eval) {
    return classify_position(p, margins, eval).verdict == Verdict::Quiet;
}

namespace {

struct Outcome {
    enum Kind { Emit, InCheck, QuiescenceGap, NegamaxGap, MateAdjacent } kind = Emit;
    Score label = 0;
};

Score full_label(const Position& p, LabelSource source, const FilterMargins& margins, EvalSource& eval) {
    Position work = p;
    SearchLimits limits;
    limits.depth = margins.negamax_depth;
    limits.qsearch_ply_cap = margins.qsearch_ply_cap;
    Searcher searcher(eval, limits);
    switch (source) {
        case LabelSource::Static:
            eval.reset(work);
            return eval.evaluate(work);
        case LabelSource::Quiescence:
            return searcher.quiescence(work, -kInfinity, kInfinity);
        case LabelSource::Negamax:
            break;
    }
    return searcher.negamax(work, margins.negamax_depth, -kInfinity, kInfinity);
}

Outcome examine(const Position& child, const FilterMargins& margins, const GenerateOptions& options, EvalSource& eval) {
    Outcome out;
    if (options.filter) {
        const QuietCheck q = classify_position(child, margins, eval);
        switch (q.verdict) {
            case Verdict::InCheck: return {Outcome::InCheck, 0};
            case Verdict::QuiescenceGap: return {Outcome::QuiescenceGap, 0};
            case Verdict::NegamaxGap: return {Outcome::NegamaxGap, 0};
            case Verdict::Quiet: break;
        }
        out.label = options.label == LabelSource::Negamax      ? q.negamax
                    : options.label == LabelSource::Quiescence ? q.quiescence
                                                               : q.static_eval;
    } else {
        out.label = full_label(child, options.label, margins, eval);
    }
    if (std::abs(out.label) >= kMateScore / 2) out.kind = Outcome::MateAdjacent;
    out.label = std::clamp(out.label, -kLabelClamp, kLabelClamp);
    return out;
}

bool sampled(const PositionKey& key, double rate) {
    if (rate >= 1.0) return true;
    return static_cast<double>(key.lo >> 11) * 0x1.0p-53 < rate;
}

}  // namespace

DatasetBuild compute_dataset(std::span<const GameRecord> games, const FilterMargins& margins, const EvalFactory& eval,
                             const GenerateOptions& options) {
    margins.validate();
    if (options.threads < 1) throw ConfigError("thread count must be positive");
    if (!(options.sample_rate > 0.0 && options.sample_rate <= 1.0)) throw ConfigError("sample rate must be in (0, 1]");

    std::vector<std::unique_ptr<EvalSource>> evals;
    for (int w = 0; w < options.threads; ++w) evals.push_back(eval());

    DatasetBuild build;
    std::unordered_set<PositionKey, PositionKeyHash> seen;

    // Children are enumerated and deduplicated in input order, so only the
    // first occurrence of a position is searched. Classification runs in
    // parallel per chunk and results are appended in candidate order.
    constexpr std::size_t kChunkGames = 64;
    for (std::size_t first = 0; first < games.size(); first += kChunkGames) {
        const std::size_t last = std::min(games.size(), first + kChunkGames);
        std::vector<DatasetRecord> candidates;
        std::vector<Position> positions;
        for (std::size_t g = first; g < last; ++g) {
            for (const Position& parent : replay(games[g])) {
                for (const Move m : generate_moves(parent)) {
                    Position child = parent;
                    child.do_move(m);
                    child.clear_history();
                    DatasetRecord r = pack(child);
                    ++build.tally.candidates;
                    const PositionKey key = position_key(r);
                    if (!seen.insert(key).second) {
                        ++build.tally.duplicate;
                        continue;
                    }
                    if (!sampled(key, options.sample_rate)) {
                        ++build.tally.sampled_out;
                        continue;
                    }
                    candidates.push_back(r);
                    positions.push_back(std::move(child));
                }
            }
        }

        std::vector<Outcome> outcomes(candidates.size());
        detail::parallel_for(candidates.size(), options.threads, [&](std::size_t i, int worker) {
            outcomes[i] = examine(positions[i], margins, options, *evals[worker]);
        });

        for (std::size_t i = 0; i < candidates.size(); ++i) {
            switch (outcomes[i].kind) {
                case Outcome::InCheck: ++build.tally.in_check; break;
                case Outcome::QuiescenceGap: ++build.tally.quiescence_gap; break;
                case Outcome::NegamaxGap: ++build.tally.negamax_gap; break;
                case Outcome::MateAdjacent: ++build.tally.mate_adjacent; break;
                case Outcome::Emit:
                    candidates[i].label = static_cast<std::int16_t>(outcomes[i].label);
                    build.records.push_back(candidates[i]);
                    ++build.tally.emitted;
                    break;
            }
        }
    }
    return build;
}

void BalanceQuotas::validate() const {
    auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!fraction(sign_split) || !fraction(quiet_band_min) || !fraction(imbalanced_min) || !fraction(tolerance))
        throw ConfigError("quota fractions must lie in [0, 1]");
    if (quiet_band_min + imbalanced_min > 1.0 + 1e-12) throw ConfigError("band and imbalanced minimums sum above 1");
    if (band < 0) throw ConfigError("band half-width must be non-negative");
}

BalanceQuotas parse_quotas(std::string_view text) {
    std::vector<double> values;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        double v = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty())
            throw ConfigError("bad quota value '" + std::string(item) + "' in '" + std::string(text) + "'");
        values.push_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    if (values.size() != 3 && values.size() != 4)
        throw ConfigError("quotas take sign,band,imbalanced[,tolerance], got '" + std::string(text) + "'");
    BalanceQuotas q;
    q.sign_split = values[0];
    q.quiet_band_min = values[1];
    q.imbalanced_min = values[2];
    if (values.size() == 4) q.tolerance = values[3];
    q.validate();
    return q;
}

std::string StratumCounts::describe() const {
    return "positive-band=" + std::to_string(pos_band) + " positive-imbalanced=" + std::to_string(pos_imbalanced) +
           " negative-band=" + std::to_string(neg_band) + " negative-imbalanced=" + std::to_string(neg_imbalanced) +
           " zero=" + std::to_string(zero);
}

namespace {

enum Stratum { PosBand, PosImbalanced, NegBand, NegImbalanced, Zero, kStrata };

Stratum stratum_of(int label, Score band) {
    if (label == 0) return Zero;
    const bool inside = std::abs(label) <= band;
    if (label > 0) return inside ? PosBand : PosImbalanced;
    return inside ? NegBand : NegImbalanced;
}

using Plan = std::array<std::uint64_t, kStrata>;

StratumCounts to_counts(const Plan& p) { return {p[PosBand], p[PosImbalanced], p[NegBand], p[NegImbalanced], p[Zero]}; }

std::uint64_t ceil_fraction(double f, std::uint64_t n) {
    return static_cast<std::uint64_t>(std::ceil(f * static_cast<double>(n) - 1e-9));
}

// Stratum sizes for an output of exactly n records, if any exist.
std::optional<Plan> plan_for(std::uint64_t n, std::uint64_t zeros, const Plan& avail, const BalanceQuotas& q) {
    const std::uint64_t nonzero = n - zeros;
    const auto pos = static_cast<std::uint64_t>(std::llround(q.sign_split * static_cast<double>(nonzero)));
    const std::uint64_t neg = nonzero - pos;
    if (pos > avail[PosBand] + avail[PosImbalanced] || neg > avail[NegBand] + avail[NegImbalanced]) return std::nullopt;

    const std::uint64_t need_imb = ceil_fraction(q.imbalanced_min, n);
    const std::uint64_t need_band = ceil_fraction(q.quiet_band_min, n);
    const std::uint64_t need_band_nonzero = need_band > zeros ? need_band - zeros : 0;

    const std::uint64_t pi_lo = pos > avail[PosBand] ? pos - avail[PosBand] : 0;
    const std::uint64_t pi_hi = std::min(avail[PosImbalanced], pos);
    const std::uint64_t ni_lo = neg > avail[NegBand] ? neg - avail[NegBand] : 0;
    const std::uint64_t ni_hi = std::min(avail[NegImbalanced], neg);
    if (nonzero < need_band_nonzero) return std::nullopt;
    const std::uint64_t imb_lo = std::max(pi_lo + ni_lo, need_imb);
    const std::uint64_t imb_hi = std::min(pi_hi + ni_hi, nonzero - need_band_nonzero);
    if (imb_lo > imb_hi) return std::nullopt;

    // Smallest admissible imbalanced share, split in proportion to the signs.
    const std::uint64_t imb = imb_lo;
    const std::uint64_t share = nonzero ? static_cast<std::uint64_t>(std::llround(static_cast<double>(imb) * static_cast<double>(pos) / static_cast<double>(nonzero))) : 0;
    const std::uint64_t pi_min = std::max(pi_lo, imb > ni_hi ? imb - ni_hi : 0);
    const std::uint64_t pi_max = std::min(pi_hi, imb - std::min(imb, ni_lo));
    if (pi_min > pi_max) return std::nullopt;
    const std::uint64_t pi = std::clamp(share, pi_min, pi_max);
    const std::uint64_t ni = imb - pi;

    Plan plan{};
    plan[PosImbalanced] = pi;
    plan[NegImbalanced] = ni;
    plan[PosBand] = pos - pi;
    plan[NegBand] = neg - ni;
    plan[Zero] = zeros;
    for (int s = 0; s < kStrata; ++s)
        if (plan[s] > avail[s]) return std::nullopt;
    if (!check_quotas(to_counts(plan), q).ok) return std::nullopt;
    return plan;
}

}  // namespace

StratumCounts count_strata(std::span<const DatasetRecord> records, Score band) {
    Plan c{};
    for (const DatasetRecord& r : records) ++c[stratum_of(r.label, band)];
    return to_counts(c);
}

QuotaCheck check_quotas(const StratumCounts& c, const BalanceQuotas& q) {
    QuotaCheck out;
    const double n = static_cast<double>(c.total());
    if (n == 0) return out;
    out.positive = static_cast<double>(c.pos_band + c.pos_imbalanced) / n;
    out.negative = static_cast<double>(c.neg_band + c.neg_imbalanced) / n;
    out.band = static_cast<double>(c.pos_band + c.neg_band + c.zero) / n;
    out.imbalanced = static_cast<double>(c.pos_imbalanced + c.neg_imbalanced) / n;
    constexpr double kSlack = 1e-12;
    out.ok = std::abs(out.positive - q.sign_split) <= q.tolerance + kSlack &&
             std::abs(out.negative - (1.0 - q.sign_split)) <= q.tolerance + kSlack &&
             out.band >= q.quiet_band_min - q.tolerance - kSlack && out.imbalanced >= q.imbalanced_min - q.tolerance - kSlack;
    return out;
}

std::vector<DatasetRecord> balance_dataset(std::span<const DatasetRecord> records, const BalanceQuotas& quotas,
                                           std::uint64_t seed) {
    quotas.validate();
    std::array<std::vector<std::size_t>, kStrata> members;
    for (std::size_t i = 0; i < records.size(); ++i) members[stratum_of(records[i].label, quotas.band)].push_back(i);
    Plan avail{};
    for (int s = 0; s < kStrata; ++s) avail[s] = members[s].size();
    const std::string counts = to_counts(avail).describe();

    if (records.empty()) throw InfeasibleError("no records to balance");
    if (quotas.sign_split > 0 && avail[PosBand] + avail[PosImbalanced] == 0)
        throw InfeasibleError("positive-label stratum is empty (" + counts + ")");
    if (quotas.sign_split < 1 && avail[NegBand] + avail[NegImbalanced] == 0)
        throw InfeasibleError("negative-label stratum is empty (" + counts + ")");
    if (quotas.imbalanced_min > quotas.tolerance && avail[PosImbalanced] + avail[NegImbalanced] == 0)
        throw InfeasibleError("imbalanced stratum (|label| > " + std::to_string(quotas.band) + ") is empty (" + counts + ")");
    if (quotas.quiet_band_min > quotas.tolerance && avail[PosBand] + avail[NegBand] + avail[Zero] == 0)
        throw InfeasibleError("band stratum (|label| <= " + std::to_string(quotas.band) + ") is empty (" + counts + ")");

    std::optional<Plan> plan;
    for (std::uint64_t n = records.size(); n > 0 && !plan; --n) {
        const auto max_zeros = std::min<std::uint64_t>(avail[Zero], static_cast<std::uint64_t>(quotas.tolerance * static_cast<double>(n)));
        plan = plan_for(n, max_zeros, avail, quotas);
        if (!plan && max_zeros) plan = plan_for(n, 0, avail, quotas);
    }
    if (!plan) throw InfeasibleError("no subsample satisfies the quotas (" + counts + ")");

    Rng rng(derive_seed(seed, Stage::Balance));
    std::vector<DatasetRecord> out;
    out.reserve(records.size());
    for (int s = 0; s < kStrata; ++s) {
        // Partial Fisher-Yates: a uniform subset of the requested size.
        auto& idx = members[s];
        for (std::uint64_t k = 0; k < (*plan)[s]; ++k) {
            std::swap(idx[k], idx[k + rng.below(idx.size() - k)]);
            out.push_back(records[idx[k]]);
        }
    }
    rng.shuffle(std::span(out));
    return out;
}

std::vector<GameRecord> generate_selfplay(std::span<const Position> seeds, int n_games, const SearchLimits& limits,
                                          std::span<const EvalFactory> engines, std::uint64_t rng_seed,
                                          const SelfplayOptions& options) {
    if (seeds.empty()) throw InputError("self-play needs at least one seed position");
    if (n_games < 1) throw ConfigError("self-play needs n_games >= 1, got " + std::to_string(n_games));
    if (engines.empty()) throw ConfigError("self-play needs at least one engine");
    if (options.top_k < 1 || options.diversity_plies < 0 || options.max_plies < 1 || options.threads < 1)
        throw ConfigError("invalid self-play options");
    limits.validate();
    for (std::size_t i = 0; i < seeds.size(); ++i)
        if (auto why = validate(seeds[i])) throw InputError("seed position " + std::to_string(i) + " is illegal: " + *why);

    std::vector<GameRecord> games(static_cast<std::size_t>(n_games));
    detail::parallel_for(games.size(), options.threads, [&](std::size_t g, int) {
        Rng rng(derive_seed(rng_seed, Stage::Selfplay, g));
        GameRecord& game = games[g];
        game.start = seeds[rng.below(seeds.size())];
        game.start.clear_history();

        const auto red_eval = engines[g % engines.size()]();
        const auto black_eval = engines[(g + 1) % engines.size()]();
        Searcher red(*red_eval, limits);
        Searcher black(*black_eval, limits);

        Position p = game.start;
        for (int ply = 0; ply < options.max_plies; ++ply) {
            if (p.repetition_count() >= 3) break;
            Searcher& mover = p.side_to_move() == Color::Red ? red : black;
            std::optional<Move> choice;
            if (ply < options.diversity_plies) {
                const auto top = mover.top_moves(p, options.top_k);
                if (!top.empty()) choice = top[rng.below(top.size())].move;
            } else {
                choice = mover.best_move(p).best_move;
            }
            if (!choice) break;
            p.do_move(*choice);
            game.moves.push_back(*choice);
        }
    });
    return games;
}

}  // namespace xq::data
