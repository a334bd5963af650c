#include "xq/search.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace xq {

void SearchLimits::validate() const {
    if (depth < 0 || depth > kMaxDepth) throw ConfigError("search depth must be in [0, 64], got " + std::to_string(depth));
    if (qsearch_ply_cap < 0 || qsearch_ply_cap > kMaxQsearchPlies)
        throw ConfigError("quiescence ply cap must be in [0, 32], got " + std::to_string(qsearch_ply_cap));
    if (node_cap && *node_cap == 0) throw ConfigError("node cap must be positive");
}

void PstEval::reset(const Position& root) {
    stack_.clear();
    stack_.push_back({root.hash(), evaluate_red(root, *tables_)});
}

void PstEval::push(const Position& after, const UndoToken& token) {
    if (stack_.empty()) {
        stack_.push_back({after.hash(), evaluate_red(after, *tables_)});
        return;
    }
    const Move m = token.move;
    const Piece moved = token.moved;
    const int sign = color_of(moved) == Color::Red ? 1 : -1;
    Score red = stack_.back().red + sign * (tables_->value(moved, m.to) - tables_->value(moved, m.from));
    if (m.is_capture()) red += sign * tables_->value(m.captured, m.to);
    stack_.push_back({after.hash(), red});
}

void PstEval::pop() {
    if (!stack_.empty()) stack_.pop_back();
}

Score PstEval::evaluate(const Position& p) {
    const Score red = !stack_.empty() && stack_.back().hash == p.hash() ? stack_.back().red : evaluate_red(p, *tables_);
    return p.side_to_move() == Color::Red ? red : -red;
}

EvalFactory pst_factory(const PstTables& tables) {
    return [&tables] { return std::make_unique<PstEval>(tables); };
}

int mvv_lva(Piece attacker, Piece victim) {
    // King never appears as a victim of a legal move.
    constexpr std::array<int, 8> kWeight = {0, 7, 2, 2, 4, 6, 4, 1};
    return kWeight[static_cast<int>(type_of(victim))] * 8 - kWeight[static_cast<int>(type_of(attacker))];
}

void order_moves(const Position& p, MoveList& moves, const std::array<Move, 2>* killers) {
    // Captures first by MVV-LVA (stable insertion sort), then killers, then
    // the remaining quiet moves in generation order.
    Move* first = moves.begin();
    Move* const end = moves.end();
    int keys[MoveList::kCapacity];
    int n = 0;
    for (Move* it = moves.begin(); it != end; ++it) {
        if (!it->is_capture()) continue;
        const Move m = *it;
        const int key = mvv_lva(p.at(m.from), m.captured);
        std::move_backward(first + n, it, it + 1);
        int j = n;
        while (j > 0 && keys[j - 1] < key) {
            first[j] = first[j - 1];
            keys[j] = keys[j - 1];
            --j;
        }
        first[j] = m;
        keys[j] = key;
        ++n;
    }
    if (!killers) return;
    Move* quiet = first + n;
    for (const Move k : *killers) {
        for (Move* it = quiet; it != end; ++it) {
            if (*it == k && !it->is_capture()) {
                const Move m = *it;
                std::move_backward(quiet, it, it + 1);
                *quiet++ = m;
                break;
            }
        }
    }
}

Searcher::Searcher(EvalSource& eval, SearchLimits limits) : eval_(&eval), limits_(limits) { limits_.validate(); }

void Searcher::start(const Position& root) {
    nodes_ = 0;
    stopped_ = false;
    killers_.assign(SearchLimits::kMaxDepth + 1, {});
    eval_->reset(root);
}

bool Searcher::count_node() {
    ++nodes_;
    if (limits_.node_cap && nodes_ > *limits_.node_cap) stopped_ = true;
    return !stopped_;
}

bool Searcher::make(Position& p, Move m, UndoToken& token) {
    const Color us = p.side_to_move();
    token = p.do_move(m);
    if (in_check(p, us)) {
        p.undo_move(token);
        return false;
    }
    eval_->push(p, token);
    return true;
}

void Searcher::unmake(Position& p, const UndoToken& token) {
    eval_->pop();
    p.undo_move(token);
}

Score Searcher::qsearch(Position& p, Score alpha, Score beta, int ply, int qply) {
    if (!count_node()) return 0;
    if (qply >= limits_.qsearch_ply_cap) return eval_->evaluate(p);

    const bool check = in_check(p, p.side_to_move());
    Score best = -kMateScore + ply;
    if (!check) {
        best = eval_->evaluate(p);
        if (best >= beta) return best;
        alpha = std::max(alpha, best);
    }

    MoveList moves;
    generate_pseudo(p, moves, !check);
    order_moves(p, moves);

    UndoToken token;
    for (const Move m : moves) {
        if (!make(p, m, token)) continue;
        const Score score = -qsearch(p, -beta, -alpha, ply + 1, qply + 1);
        unmake(p, token);
        if (stopped_) return 0;
        if (score > best) {
            best = score;
            if (score > alpha) {
                alpha = score;
                if (alpha >= beta) break;
            }
        }
    }
    return best;
}

Score Searcher::search(Position& p, int depth, Score alpha, Score beta, int ply) {
    if (depth <= 0) return qsearch(p, alpha, beta, ply, 0);
    if (!count_node()) return 0;

    MoveList moves;
    generate_pseudo(p, moves);
    auto& killers = killers_[std::min(ply, SearchLimits::kMaxDepth)];
    order_moves(p, moves, &killers);

    // No legal move is a loss in Xiangqi, stalemate included.
    Score best = -kMateScore + ply;
    UndoToken token;
    for (const Move m : moves) {
        if (!make(p, m, token)) continue;
        const Score score = -search(p, depth - 1, -beta, -alpha, ply + 1);
        unmake(p, token);
        if (stopped_) return 0;
        if (score > best) {
            best = score;
            if (score > alpha) {
                alpha = score;
                if (alpha >= beta) {
                    if (!m.is_capture() && !(killers[0] == m)) killers = {m, killers[0]};
                    break;
                }
            }
        }
    }
    return best;
}

Score Searcher::quiescence(Position& p, Score alpha, Score beta, int ply) {
    start(p);
    return qsearch(p, alpha, beta, ply, 0);
}

Score Searcher::negamax(Position& p, int depth, Score alpha, Score beta, int ply) {
    start(p);
    return search(p, depth, alpha, beta, ply);
}

SearchResult Searcher::best_move(Position& p) {
    start(p);
    MoveList moves;
    generate_legal(p, moves);

    SearchResult result;
    result.score = -kMateScore;
    if (moves.empty()) return result;

    // Root moves are searched in generation order so equal scores keep the earliest move.
    const int child_depth = std::max(limits_.depth, 1) - 1;
    Score alpha = -kInfinity;
    UndoToken token;
    for (const Move m : moves) {
        make(p, m, token);
        const Score score = -search(p, child_depth, -kInfinity, -alpha, 1);
        unmake(p, token);
        if (stopped_) break;
        if (!result.best_move || score > alpha) {
            alpha = score;
            result.score = score;
            result.best_move = m;
        }
    }
    if (!result.best_move) {
        result.best_move = moves[0];
        result.score = 0;
    }
    result.nodes = nodes_;
    return result;
}

std::vector<ScoredMove> Searcher::top_moves(Position& p, int k) {
    start(p);
    MoveList moves;
    generate_legal(p, moves);

    std::vector<ScoredMove> top;
    const int child_depth = std::max(limits_.depth, 1) - 1;
    UndoToken token;
    for (const Move m : moves) {
        // Until k moves are known every score must be exact; afterwards only
        // scores beating the current k-th best matter.
        const Score floor = static_cast<int>(top.size()) < k ? -kInfinity : top.back().score;
        make(p, m, token);
        const Score score = -search(p, child_depth, -kInfinity, -floor, 1);
        unmake(p, token);
        if (stopped_) break;
        if (static_cast<int>(top.size()) == k && score <= floor) continue;
        const auto at = std::find_if(top.begin(), top.end(), [score](const ScoredMove& s) { return score > s.score; });
        top.insert(at, {m, score});
        if (static_cast<int>(top.size()) > k) top.pop_back();
    }
    return top;
}

Score quiescence(const Position& p, Score alpha, Score beta, EvalSource& eval, int qsearch_ply_cap) {
    Position copy = p;
    SearchLimits limits;
    limits.qsearch_ply_cap = qsearch_ply_cap;
    return Searcher(eval, limits).quiescence(copy, alpha, beta);
}

Score negamax(const Position& p, int depth, Score alpha, Score beta, EvalSource& eval, int qsearch_ply_cap) {
    Position copy = p;
    SearchLimits limits;
    limits.depth = depth;
    limits.qsearch_ply_cap = qsearch_ply_cap;
    return Searcher(eval, limits).negamax(copy, depth, alpha, beta);
}

SearchResult best_move(const Position& p, const SearchLimits& limits, EvalSource& eval) {
    Position copy = p;
    return Searcher(eval, limits).best_move(copy);
}

}  // namespace xq
