// Pipeline driver: ingest -> generate -> train -> match, plus perft and inspect.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <openssl/evp.h>

#include "xq/arena.hpp"
#include "xq/datagen.hpp"
#include "xq/nnue.hpp"

namespace fs = std::filesystem;
using namespace xq;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kInput = 3, kInfeasible = 4, kDivergence = 5 };

struct Options {
    // paths
    std::string games;
    std::string games_out;
    std::string dataset;
    std::string model;
    std::string train_log;
    std::string report;
    std::string match_log;
    std::string seeds;

    data::FilterMargins margins;
    std::string quotas = "0.5,0.5,0.4,0.02";
    int band = 100;
    bool no_filter = false;
    bool no_balance = false;
    std::string label = "negamax";
    double sample_rate = 1.0;

    nnue::TrainConfig train;

    int depth = 4;
    std::uint64_t node_cap = 0;

    int n_games = 100;
    int diversity_plies = 8;
    int top_k = 3;
    int max_plies = 200;
    std::vector<std::string> engines{"pst"};

    std::string engine_a = "pst";
    std::string engine_b = "pst";
    int baseline_rating = 0;
    int match_plies = 300;

    int threads = 1;
    std::uint64_t seed = 1;

    // perft
    std::string fen = "startpos";
    int perft_depth = 1;
};

// Git blob object id: SHA-1 over "blob <size>\0" followed by the content.
std::string git_blob_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, digest, &length);
    EVP_MD_CTX_free(ctx);

    std::string hex;
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

// Writes `<artifact>.meta` with the resolved configuration and input hashes.
void write_meta(const CLI::App& app, const std::string& command, const fs::path& artifact,
                const std::vector<std::string>& inputs) {
    std::ofstream out(artifact.string() + ".meta", std::ios::binary);
    if (!out) throw InputError("cannot write " + artifact.string() + ".meta");
    fmt::print(out, "command={}\n", command);
    fmt::print(out, "artifact={} {}\n", artifact.filename().string(), git_blob_hash(artifact));
    for (const std::string& input : inputs)
        fmt::print(out, "input={} {}\n", fs::path(input).filename().string(), git_blob_hash(input));
    out << "[config]\n" << app.config_to_str(true, false);
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw ConfigError(std::string("missing required option --") + flag);
}

void check_distinct_paths(const Options& o) {
    std::map<fs::path, std::string> seen;
    const std::pair<const std::string*, const char*> paths[] = {
        {&o.games, "games"},   {&o.games_out, "games-out"}, {&o.dataset, "dataset"},     {&o.model, "model"},
        {&o.train_log, "train-log"}, {&o.report, "report"}, {&o.match_log, "match-log"}, {&o.seeds, "seeds"}};
    for (const auto& [value, name] : paths) {
        if (value->empty()) continue;
        const fs::path key = fs::absolute(*value).lexically_normal();
        if (auto [it, fresh] = seen.emplace(key, name); !fresh)
            throw ConfigError(fmt::format("--{} and --{} refer to the same path {}", it->second, name, *value));
    }
}

SearchLimits search_limits(const Options& o) {
    SearchLimits limits;
    limits.depth = o.depth;
    limits.qsearch_ply_cap = o.margins.qsearch_ply_cap;
    if (o.node_cap > 0) limits.node_cap = o.node_cap;
    limits.validate();
    return limits;
}

std::vector<Position> read_seed_positions(const std::string& path) {
    if (path.empty()) return {Position::startpos()};
    std::ifstream in(path);
    if (!in) throw InputError("cannot read seed positions " + path);
    std::vector<Position> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty() || line[0] == '#') continue;
        try {
            out.push_back(line == "startpos" ? Position::startpos() : parse_fen(line));
        } catch (const InputError& e) {
            throw InputError(fmt::format("{}:{}: {}", path, number, e.what()));
        }
    }
    if (out.empty()) throw InputError("no seed positions in " + path);
    return out;
}

void print_tally(const data::RejectTally& t) {
    fmt::print("candidates      {}\n", t.candidates);
    fmt::print("  in check      {}\n", t.in_check);
    fmt::print("  M1 gap        {}\n", t.quiescence_gap);
    fmt::print("  M2 gap        {}\n", t.negamax_gap);
    fmt::print("  mate-adjacent {}\n", t.mate_adjacent);
    fmt::print("  duplicate     {}\n", t.duplicate);
    fmt::print("  sampled out   {}\n", t.sampled_out);
    fmt::print("  emitted       {}\n", t.emitted);
}

void print_strata(std::span<const data::DatasetRecord> records, const data::BalanceQuotas& quotas) {
    const data::StratumCounts counts = data::count_strata(records, quotas.band);
    const data::QuotaCheck check = data::check_quotas(counts, quotas);
    fmt::print("records         {}\n", counts.total());
    fmt::print("strata          {}\n", counts.describe());
    fmt::print("positive {:.4f}  negative {:.4f}  band {:.4f}  imbalanced {:.4f}  quotas {}\n", check.positive,
               check.negative, check.band, check.imbalanced, check.ok ? "met" : "NOT met");
}

data::BalanceQuotas quotas_of(const Options& o) {
    data::BalanceQuotas q = data::parse_quotas(o.quotas);
    q.band = o.band;
    q.validate();
    return q;
}

int cmd_perft(const Options& o) {
    Position p = o.fen == "startpos" ? Position::startpos() : parse_fen(o.fen);
    if (o.perft_depth < 0) throw ConfigError("perft depth must be >= 0");
    if (o.perft_depth == 0) {
        fmt::print("nodes 1\n");
        return kOk;
    }
    std::uint64_t total = 0;
    for (const Move m : generate_moves(p)) {
        const UndoToken t = p.do_move(m);
        const std::uint64_t n = perft(p, o.perft_depth - 1);
        p.undo_move(t);
        fmt::print("{} {}\n", to_string(m), n);
        total += n;
    }
    fmt::print("nodes {}\n", total);
    return kOk;
}

int cmd_ingest(const CLI::App& app, const Options& o) {
    require(o.games, "games");
    require(o.games_out, "games-out");
    const data::IngestResult r = data::ingest_games(o.games);
    for (const std::string& d : r.diagnostics) fmt::print(stderr, "rejected: {}\n", d);
    data::write_games(r.games, o.games_out);
    write_meta(app, "ingest", o.games_out, {o.games});
    fmt::print("games {}  rejected {}\n", r.games.size(), r.rejected);
    return kOk;
}

int cmd_selfplay(const CLI::App& app, const Options& o) {
    require(o.games_out, "games-out");
    const SearchLimits limits = search_limits(o);
    const std::vector<Position> seeds = read_seed_positions(o.seeds);
    std::vector<EvalFactory> engines;
    for (const std::string& e : o.engines) engines.push_back(arena::make_engine(e, limits).eval);
    data::SelfplayOptions options;
    options.diversity_plies = o.diversity_plies;
    options.top_k = o.top_k;
    options.max_plies = o.max_plies;
    options.threads = o.threads;
    const auto games = data::generate_selfplay(seeds, o.n_games, limits, engines, o.seed, options);
    data::write_games(games, o.games_out);
    std::vector<std::string> inputs;
    if (!o.seeds.empty()) inputs.push_back(o.seeds);
    for (const std::string& e : o.engines)
        if (e.starts_with("nnue:")) inputs.push_back(e.substr(5));
    write_meta(app, "selfplay", o.games_out, inputs);
    std::size_t plies = 0;
    for (const auto& g : games) plies += g.moves.size();
    fmt::print("games {}  plies {}\n", games.size(), plies);
    return kOk;
}

int cmd_generate(const CLI::App& app, const Options& o) {
    require(o.games, "games");
    require(o.dataset, "dataset");
    o.margins.validate();
    const data::BalanceQuotas quotas = quotas_of(o);

    const data::IngestResult in = data::ingest_games(o.games);
    for (const std::string& d : in.diagnostics) fmt::print(stderr, "rejected: {}\n", d);

    data::GenerateOptions options;
    options.filter = !o.no_filter;
    options.threads = o.threads;
    options.sample_rate = o.sample_rate;
    if (o.label == "negamax") options.label = data::LabelSource::Negamax;
    else if (o.label == "quiescence") options.label = data::LabelSource::Quiescence;
    else if (o.label == "static") options.label = data::LabelSource::Static;
    else throw ConfigError("--label must be negamax, quiescence or static");

    const data::DatasetBuild build = data::compute_dataset(in.games, o.margins, pst_factory(), options);
    fmt::print("games           {}\n", in.games.size());
    print_tally(build.tally);

    std::vector<data::DatasetRecord> records;
    if (o.no_balance) {
        records = build.records;
    } else {
        try {
            records = data::balance_dataset(build.records, quotas, o.seed);
        } catch (const InfeasibleError& e) {
            throw InfeasibleError(fmt::format("balancing {} records from {}: {}", build.records.size(), o.games, e.what()));
        }
    }
    data::write_dataset(records, o.dataset);
    write_meta(app, "generate", o.dataset, {o.games});
    print_strata(records, quotas);
    return kOk;
}

int cmd_train(const CLI::App& app, const Options& o) {
    require(o.dataset, "dataset");
    require(o.model, "model");
    o.train.validate();
    const auto records = data::read_dataset(o.dataset);
    if (records.empty()) throw InputError("dataset " + o.dataset + " is empty");
    const nnue::TrainResult r = nnue::train(records, o.train);
    for (const nnue::EpochLog& e : r.log)
        fmt::print("epoch {:3d}  train {:.6f}  val {:.6f}  lr {:.5g}\n", e.epoch, e.train_mse, e.val_mse, e.learning_rate);
    fmt::print("best epoch {}  val mse {:.6f}\n", r.best_epoch, r.best_val_mse);
    nnue::save_model(r.model, o.model);
    write_meta(app, "train", o.model, {o.dataset});
    if (!o.train_log.empty()) nnue::write_train_log(r.log, o.train_log);
    return kOk;
}

int cmd_match(const CLI::App& app, const Options& o) {
    require(o.games, "games");
    const SearchLimits limits = search_limits(o);
    if (o.n_games < 2 || o.n_games % 2 != 0)
        throw ConfigError(fmt::format("--n-games must be a positive even number for paired colors, got {}", o.n_games));
    const arena::EngineSpec a = arena::make_engine(o.engine_a, limits);
    const arena::EngineSpec b = arena::make_engine(o.engine_b, limits, o.baseline_rating);

    const data::IngestResult in = data::ingest_games(o.games);
    o.margins.validate();
    const auto openings = arena::select_openings(in.games, o.n_games / 2, o.seed,
                                                 o.margins, pst_factory());
    fmt::print("openings {}\n", openings.size());
    arena::MatchOptions options;
    options.max_plies = o.match_plies;
    options.threads = o.threads;
    const arena::MatchResult r = arena::run_match(a, b, openings, o.n_games, o.seed, options);

    arena::write_report(std::cout, a, b, r);
    std::vector<std::string> inputs{o.games};
    for (const std::string* e : {&o.engine_a, &o.engine_b})
        if (e->starts_with("nnue:")) inputs.push_back(e->substr(5));
    if (!o.report.empty()) {
        std::ofstream out(o.report);
        arena::write_report(out, a, b, r);
        out.close();
        write_meta(app, "match", o.report, inputs);
    }
    if (!o.match_log.empty()) {
        std::ofstream out(o.match_log);
        arena::write_log(out, a, b, r);
        out.close();
        write_meta(app, "match", o.match_log, inputs);
    }
    for (const arena::MatchGame& g : r.games)
        if (g.termination == arena::Termination::Forfeit) fmt::print(stderr, "forfeit: {}\n", g.note);
    return kOk;
}

int cmd_inspect(const Options& o) {
    require(o.dataset, "dataset");
    const auto records = data::read_dataset(o.dataset);
    print_strata(records, quotas_of(o));
    if (records.empty()) return kOk;
    Score lo = records[0].label, hi = records[0].label;
    double sum = 0;
    std::size_t red = 0;
    for (const auto& r : records) {
        lo = std::min<Score>(lo, r.label);
        hi = std::max<Score>(hi, r.label);
        sum += r.label;
        red += r.side == 0;
    }
    fmt::print("label min {}  max {}  mean {:.2f}\n", lo, hi, sum / static_cast<double>(records.size()));
    fmt::print("red to move {}  black to move {}\n", red, records.size() - red);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Xiangqi NNUE pipeline"};
    app.set_config("--config", "", "key=value configuration file; command-line flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("--games", o.games, "input game file");
    app.add_option("--games-out", o.games_out, "output game file (ingest, selfplay)");
    app.add_option("--dataset", o.dataset, "dataset file");
    app.add_option("--model", o.model, "model file");
    app.add_option("--train-log", o.train_log, "CSV loss log");
    app.add_option("--report", o.report, "match report file");
    app.add_option("--match-log", o.match_log, "per-game match log");
    app.add_option("--seeds", o.seeds, "self-play start positions, one FEN per line");

    app.add_option("--m1", o.margins.m1, "quiescence margin (centipawns)")->capture_default_str();
    app.add_option("--m2", o.margins.m2, "negamax margin (centipawns)")->capture_default_str();
    app.add_option("--negamax-depth", o.margins.negamax_depth, "filter search depth")->capture_default_str();
    app.add_option("--qsearch-cap", o.margins.qsearch_ply_cap, "quiescence ply cap")->capture_default_str();
    app.add_option("--quotas", o.quotas, "sign,band,imbalanced[,tolerance]")->capture_default_str();
    app.add_option("--band", o.band, "quiet band half-width (centipawns)")->capture_default_str();
    app.add_flag("--no-filter", o.no_filter, "keep every child position");
    app.add_flag("--no-balance", o.no_balance, "skip quota balancing");
    app.add_option("--label", o.label, "negamax, quiescence or static")->capture_default_str();
    app.add_option("--sample-rate", o.sample_rate, "fraction of candidates kept")->capture_default_str();

    app.add_option("--lr", o.train.learning_rate)->capture_default_str();
    app.add_option("--momentum", o.train.momentum)->capture_default_str();
    app.add_option("--batch", o.train.batch_size)->capture_default_str();
    app.add_option("--epochs", o.train.epochs)->capture_default_str();
    app.add_option("--wdl-scale", o.train.wdl_scale)->capture_default_str();
    app.add_option("--val-fraction", o.train.validation_fraction)->capture_default_str();
    app.add_option("--patience", o.train.plateau_patience)->capture_default_str();

    app.add_option("--depth", o.depth, "search depth")->capture_default_str();
    app.add_option("--node-cap", o.node_cap, "node limit per search, 0 for none")->capture_default_str();
    app.add_option("--n-games", o.n_games)->capture_default_str();
    app.add_option("--diversity-plies", o.diversity_plies)->capture_default_str();
    app.add_option("--top-k", o.top_k)->capture_default_str();
    app.add_option("--max-plies", o.max_plies, "self-play game length cap")->capture_default_str();
    app.add_option("--engine", o.engines, "self-play engines: pst or nnue:<path>")->capture_default_str();
    app.add_option("--engine-a", o.engine_a)->capture_default_str();
    app.add_option("--engine-b", o.engine_b)->capture_default_str();
    app.add_option("--baseline-rating", o.baseline_rating, "rating of engine B")->capture_default_str();
    app.add_option("--match-plies", o.match_plies, "match game length cap")->capture_default_str();

    app.add_option("--threads", o.threads)->capture_default_str();
    app.add_option("--seed", o.seed)->capture_default_str();

    CLI::App* perft_cmd = app.add_subcommand("perft", "count leaf nodes, split by root move");
    perft_cmd->add_option("depth", o.perft_depth)->required();
    perft_cmd->add_option("--fen", o.fen)->capture_default_str();
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "validate and normalize a game file");
    CLI::App* selfplay_cmd = app.add_subcommand("selfplay", "play seeded engine games");
    CLI::App* generate_cmd = app.add_subcommand("generate", "build a balanced quiet-position dataset");
    CLI::App* train_cmd = app.add_subcommand("train", "train a network on a dataset");
    CLI::App* match_cmd = app.add_subcommand("match", "play a paired-opening match");
    CLI::App* inspect_cmd = app.add_subcommand("inspect", "dataset statistics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (o.threads < 1) throw ConfigError("--threads must be >= 1");
        check_distinct_paths(o);
        o.train.seed = o.seed;
        if (*perft_cmd) return cmd_perft(o);
        if (*ingest_cmd) return cmd_ingest(app, o);
        if (*selfplay_cmd) return cmd_selfplay(app, o);
        if (*generate_cmd) return cmd_generate(app, o);
        if (*train_cmd) return cmd_train(app, o);
        if (*match_cmd) return cmd_match(app, o);
        if (*inspect_cmd) return cmd_inspect(o);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfig;
    } catch (const InputError& e) {
        fmt::print(stderr, "input error: {}\n", e.what());
        return kInput;
    } catch (const InfeasibleError& e) {
        fmt::print(stderr, "infeasible: {}\n", e.what());
        return kInfeasible;
    } catch (const DivergenceError& e) {
        fmt::print(stderr, "diverged: {}\n", e.what());
        return kDivergence;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kFailure;
    }
    return kFailure;
}
