#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "xq/evaluate.hpp"
#include "xq/position.hpp"

namespace xq {

struct SearchLimits {
    int depth = 4;
    std::optional<std::uint64_t> node_cap;
    int qsearch_ply_cap = 16;

    static constexpr int kMaxDepth = 64;
    static constexpr int kMaxQsearchPlies = 32;

    // Throws ConfigError when out of range.
    void validate() const;
};

struct SearchResult {
    Score score = 0;
    std::optional<Move> best_move;
    std::uint64_t nodes = 0;
};

// Static evaluation used at search leaves. Sources that keep incremental
// state (accumulators) follow the search through push/pop.
class EvalSource {
public:
    virtual ~EvalSource() = default;

    virtual void reset(const Position& root) { (void)root; }
    // Called after `after` was reached by the move recorded in `token`.
    virtual void push(const Position& after, const UndoToken& token) {
        (void)after;
        (void)token;
    }
    virtual void pop() {}
    virtual Score evaluate(const Position& p) = 0;
};

// Keeps the Red-relative score incrementally along the search path. A
// position that does not match the top of the stack is scored from scratch.
class PstEval final : public EvalSource {
public:
    explicit PstEval(const PstTables& tables = default_pst()) : tables_(&tables) {}

    void reset(const Position& root) override;
    void push(const Position& after, const UndoToken& token) override;
    void pop() override;
    Score evaluate(const Position& p) override;

private:
    struct Frame {
        std::uint64_t hash;
        Score red;
    };
    const PstTables* tables_;
    std::vector<Frame> stack_;
};

// Creates an independent evaluator per worker thread or game.
using EvalFactory = std::function<std::unique_ptr<EvalSource>()>;

EvalFactory pst_factory(const PstTables& tables = default_pst());

struct ScoredMove {
    Move move;
    Score score = 0;
};

// Fail-soft alpha-beta negamax with capture quiescence. No transposition
// table; captures are tried first in MVV-LVA order, quiet moves in generation order.
class Searcher {
public:
    explicit Searcher(EvalSource& eval, SearchLimits limits = {});

    // `ply` is the distance from the game-tree root, used for mate distances.
    Score quiescence(Position& p, Score alpha, Score beta, int ply = 0);
    Score negamax(Position& p, int depth, Score alpha, Score beta, int ply = 0);
    SearchResult best_move(Position& p);

    // Exact scores of the k best root moves at the configured depth, best first;
    // ties resolved toward the lower generation index.
    std::vector<ScoredMove> top_moves(Position& p, int k);

    std::uint64_t nodes() const { return nodes_; }
    bool stopped() const { return stopped_; }

private:
    Score search(Position& p, int depth, Score alpha, Score beta, int ply);
    Score qsearch(Position& p, Score alpha, Score beta, int ply, int qply);
    bool make(Position& p, Move m, UndoToken& token);
    void unmake(Position& p, const UndoToken& token);
    bool count_node();
    void start(const Position& root);

    EvalSource* eval_;
    SearchLimits limits_;
    std::uint64_t nodes_ = 0;
    bool stopped_ = false;
    // Two quiet moves per ply that last caused a beta cutoff.
    std::vector<std::array<Move, 2>> killers_;
};

// Value-semantics wrappers; the input position is not modified.
Score quiescence(const Position& p, Score alpha, Score beta, EvalSource& eval, int qsearch_ply_cap = 16);
Score negamax(const Position& p, int depth, Score alpha, Score beta, EvalSource& eval, int qsearch_ply_cap = 16);
SearchResult best_move(const Position& p, const SearchLimits& limits, EvalSource& eval);

// Move-ordering weight of a capture (most valuable victim, least valuable attacker).
int mvv_lva(Piece attacker, Piece victim);

// Captures first by MVV-LVA (stable), then the killers if given, then the
// remaining quiet moves in generation order.
void order_moves(const Position& p, MoveList& moves, const std::array<Move, 2>* killers = nullptr);

}  // namespace xq
