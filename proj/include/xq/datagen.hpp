#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xq/dataset.hpp"
#include "xq/search.hpp"

namespace xq::data {

struct GameRecord {
    Position start;
    std::vector<Move> moves;

    friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

// One game per line: `<FEN or startpos>|<move> <move> ...`.
GameRecord parse_game_line(std::string_view line);
std::string format_game_line(const GameRecord& game);

struct IngestResult {
    std::vector<GameRecord> games;
    std::size_t rejected = 0;
    std::vector<std::string> diagnostics;  // one per rejected line
};

// Illegal or malformed lines are skipped and reported; throws InputError if
// the file is unreadable or yields no games.
IngestResult ingest_games(const std::filesystem::path& path);
void write_games(std::span<const GameRecord> games, const std::filesystem::path& path);

// Every position of the game, start included.
std::vector<Position> replay(const GameRecord& game);

struct FilterMargins {
    Score m1 = 60;
    Score m2 = 70;
    int negamax_depth = 4;
    int qsearch_ply_cap = 16;

    void validate() const;
};

enum class Verdict { Quiet, InCheck, QuiescenceGap, NegamaxGap };

struct QuietCheck {
    Verdict verdict = Verdict::Quiet;
    Score static_eval = 0;
    // Exact when the corresponding gap test was reached and passed.
    Score quiescence = 0;
    Score negamax = 0;
};

QuietCheck classify_position(const Position& p, const FilterMargins& margins, EvalSource& eval);
bool is_quiet_position(const Position& p, const FilterMargins& margins, EvalSource& eval);

enum class LabelSource { Negamax, Quiescence, Static };

inline constexpr Score kLabelClamp = 2000;

struct GenerateOptions {
    bool filter = true;
    LabelSource label = LabelSource::Negamax;
    int threads = 1;
    // Keeps a deterministic pseudo-random fraction of the candidate children.
    double sample_rate = 1.0;
};

struct RejectTally {
    std::uint64_t candidates = 0;
    std::uint64_t in_check = 0;
    std::uint64_t quiescence_gap = 0;
    std::uint64_t negamax_gap = 0;
    std::uint64_t mate_adjacent = 0;
    std::uint64_t duplicate = 0;
    std::uint64_t sampled_out = 0;
    std::uint64_t emitted = 0;
};

struct DatasetBuild {
    std::vector<DatasetRecord> records;
    RejectTally tally;
};

// Expands every position of every game by all legal moves and keeps the quiet
// children. Output order follows the input and is independent of `threads`.
DatasetBuild compute_dataset(std::span<const GameRecord> games, const FilterMargins& margins, const EvalFactory& eval,
                             const GenerateOptions& options = {});

struct BalanceQuotas {
    double sign_split = 0.50;
    double quiet_band_min = 0.50;
    double imbalanced_min = 0.40;
    double tolerance = 0.02;
    Score band = 100;

    void validate() const;
};

// Parses "sign,band,imbalanced[,tolerance]".
BalanceQuotas parse_quotas(std::string_view text);

struct StratumCounts {
    std::uint64_t pos_band = 0;
    std::uint64_t pos_imbalanced = 0;
    std::uint64_t neg_band = 0;
    std::uint64_t neg_imbalanced = 0;
    std::uint64_t zero = 0;

    std::uint64_t total() const { return pos_band + pos_imbalanced + neg_band + neg_imbalanced + zero; }
    std::string describe() const;
};

StratumCounts count_strata(std::span<const DatasetRecord> records, Score band = 100);

struct QuotaCheck {
    double positive = 0;
    double negative = 0;
    double band = 0;
    double imbalanced = 0;
    bool ok = false;
};

QuotaCheck check_quotas(const StratumCounts& counts, const BalanceQuotas& quotas);

// Largest stratified subsample meeting the quotas, shuffled by `seed`.
// Throws InfeasibleError naming the deficient stratum.
std::vector<DatasetRecord> balance_dataset(std::span<const DatasetRecord> records, const BalanceQuotas& quotas,
                                           std::uint64_t seed);

struct SelfplayOptions {
    int diversity_plies = 8;
    int top_k = 3;
    int max_plies = 200;
    int threads = 1;
};

// Engines alternate: game g has engines[g % n] as Red and engines[(g + 1) % n] as Black.
std::vector<GameRecord> generate_selfplay(std::span<const Position> seeds, int n_games, const SearchLimits& limits,
                                          std::span<const EvalFactory> engines, std::uint64_t rng_seed,
                                          const SelfplayOptions& options = {});

}  // namespace xq::data
