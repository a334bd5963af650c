#include "xq/nnue.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "xq/random.hpp"

namespace xq::nnue {

int feature_index(Color perspective, Piece piece, Square s) {
    const int plane = (color_of(piece) == perspective ? 0 : 7) + static_cast<int>(type_of(piece)) - 1;
    const Square view = perspective == Color::Red ? s : flip_rank(s);
    return plane * kSquares + view;
}

Features encode_features(const Position& p) {
    Features f;
    f.red.reserve(32);
    f.black.reserve(32);
    for (Square s = 0; s < kSquares; ++s) {
        const Piece pc = p.at(s);
        if (is_empty(pc)) continue;
        f.red.push_back(feature_index(Color::Red, pc, s));
        f.black.push_back(feature_index(Color::Black, pc, s));
    }
    std::sort(f.red.begin(), f.red.end());
    std::sort(f.black.begin(), f.black.end());
    return f;
}

template <typename Real>
void refresh_accumulator(const BasicModel<Real>& model, std::span<const int> features, std::array<Real, kHidden>& out) {
    std::copy(model.feature_bias.begin(), model.feature_bias.end(), out.begin());
    for (const int f : features) {
        const Real* row = model.feature_weights.data() + static_cast<std::size_t>(f) * kHidden;
        for (int h = 0; h < kHidden; ++h) out[h] += row[h];
    }
}

template void refresh_accumulator<float>(const BasicModel<float>&, std::span<const int>, std::array<float, kHidden>&);
template void refresh_accumulator<double>(const BasicModel<double>&, std::span<const int>, std::array<double, kHidden>&);

Accumulator refresh(const NnueModel& model, const Position& p) {
    const Features f = encode_features(p);
    Accumulator acc;
    refresh_accumulator(model, f.red, acc[index_of(Color::Red)]);
    refresh_accumulator(model, f.black, acc[index_of(Color::Black)]);
    return acc;
}

void accumulator_apply(const NnueModel& model, std::array<float, kHidden>& acc, std::span<const int> removed,
                       std::span<const int> added) {
    for (const int f : removed) {
        const float* row = model.feature_weights.data() + static_cast<std::size_t>(f) * kHidden;
        for (int h = 0; h < kHidden; ++h) acc[h] -= row[h];
    }
    for (const int f : added) {
        const float* row = model.feature_weights.data() + static_cast<std::size_t>(f) * kHidden;
        for (int h = 0; h < kHidden; ++h) acc[h] += row[h];
    }
}

FeatureDelta move_delta(Color perspective, const UndoToken& token) {
    FeatureDelta d;
    d.removed[d.removed_count++] = feature_index(perspective, token.moved, token.move.from);
    if (token.move.is_capture()) d.removed[d.removed_count++] = feature_index(perspective, token.move.captured, token.move.to);
    d.added[0] = feature_index(perspective, token.moved, token.move.to);
    return d;
}

template <typename Real>
Real output_logit(const BasicModel<Real>& model, const BasicAccumulator<Real>& acc, Color side_to_move) {
    const auto& own = acc[index_of(side_to_move)];
    const auto& other = acc[index_of(~side_to_move)];
    Real z = model.output_bias;
    for (int h = 0; h < kHidden; ++h) {
        z += model.output_weights[h] * std::clamp(own[h], Real(0), Real(1));
        z += model.output_weights[kHidden + h] * std::clamp(other[h], Real(0), Real(1));
    }
    return z;
}

template float output_logit<float>(const BasicModel<float>&, const BasicAccumulator<float>&, Color);
template double output_logit<double>(const BasicModel<double>&, const BasicAccumulator<double>&, Color);

template <typename Real>
Real forward(const BasicModel<Real>& model, std::span<const int> red_features, std::span<const int> black_features,
             Color side_to_move) {
    BasicAccumulator<Real> acc;
    refresh_accumulator(model, red_features, acc[index_of(Color::Red)]);
    refresh_accumulator(model, black_features, acc[index_of(Color::Black)]);
    const Real z = output_logit(model, acc, side_to_move);
    return Real(1) / (Real(1) + std::exp(-z));
}

template float forward<float>(const BasicModel<float>&, std::span<const int>, std::span<const int>, Color);
template double forward<double>(const BasicModel<double>&, std::span<const int>, std::span<const int>, Color);

Score nnue_evaluate(const NnueModel& model, const Accumulator& acc, Color side_to_move, double wdl_scale) {
    // K * logit(sigmoid(z)) is K * z; computing it directly avoids the
    // saturation of the probability near 0 and 1.
    const double cp = wdl_scale * static_cast<double>(output_logit(model, acc, side_to_move));
    return static_cast<Score>(std::lround(std::clamp(cp, -double(kEvalClamp), double(kEvalClamp))));
}

double cp_to_wdl(double cp, double wdl_scale) { return 1.0 / (1.0 + std::exp(-cp / wdl_scale)); }

NnueEval::NnueEval(const NnueModel& model, double wdl_scale) : model_(&model), wdl_scale_(wdl_scale) {
    stack_.reserve(SearchLimits::kMaxDepth + SearchLimits::kMaxQsearchPlies + 2);
}

void NnueEval::reset(const Position& root) {
    stack_.clear();
    stack_.push_back({root.hash(), refresh(*model_, root)});
}

void NnueEval::push(const Position& after, const UndoToken& token) {
    if (stack_.empty()) {
        stack_.push_back({after.hash(), refresh(*model_, after)});
        return;
    }
    stack_.push_back(stack_.back());
    Frame& f = stack_.back();
    f.hash = after.hash();
    for (const Color c : {Color::Red, Color::Black}) {
        const FeatureDelta d = move_delta(c, token);
        accumulator_apply(*model_, f.acc[index_of(c)], std::span(d.removed.data(), d.removed_count), d.added);
    }
}

void NnueEval::pop() {
    if (!stack_.empty()) stack_.pop_back();
}

Score NnueEval::evaluate(const Position& p) {
    if (!stack_.empty() && stack_.back().hash == p.hash()) return nnue_evaluate(*model_, stack_.back().acc, p.side_to_move(), wdl_scale_);
    return nnue_evaluate(*model_, refresh(*model_, p), p.side_to_move(), wdl_scale_);
}

EvalFactory nnue_factory(const NnueModel& model, double wdl_scale) {
    return [&model, wdl_scale] { return std::make_unique<NnueEval>(model, wdl_scale); };
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

void put_floats(std::string& out, std::span<const float> values) {
    for (const float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

}  // namespace

void save_model(const NnueModel& model, const std::filesystem::path& path) {
    std::string out(kModelMagic.data(), kModelMagic.size());
    put_u32(out, kModelVersion);
    put_u32(out, static_cast<std::uint32_t>(model.input_dim));
    put_u32(out, kHidden);
    put_floats(out, model.feature_weights);
    put_floats(out, model.feature_bias);
    put_floats(out, model.output_weights);
    put_floats(out, std::span(&model.output_bias, 1));
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw InputError("write failed: " + path.string());
}

NnueModel load_model(const std::filesystem::path& path, int expected_input_dim) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open model " + path.string());
    const std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::string where = path.string() + ": ";
    if (bytes.size() < 16) throw InputError(where + "truncated header");
    if (std::memcmp(raw, kModelMagic.data(), 4) != 0) throw InputError(where + "bad magic, not an NNM1 model");
    if (const auto v = get_u32(raw + 4); v != kModelVersion) throw InputError(where + "unsupported model version " + std::to_string(v));
    const auto dim = get_u32(raw + 8);
    const auto hidden = get_u32(raw + 12);
    if (dim != static_cast<std::uint32_t>(expected_input_dim))
        throw InputError(where + "input dimension " + std::to_string(dim) + " does not match the feature set (" +
                         std::to_string(expected_input_dim) + ")");
    if (hidden != kHidden) throw InputError(where + "hidden width " + std::to_string(hidden) + ", expected 128");

    NnueModel model(static_cast<int>(dim));
    const std::size_t floats = model.feature_weights.size() + model.feature_bias.size() + model.output_weights.size() + 1;
    const std::size_t expected = 16 + 4 * floats;
    if (bytes.size() < expected)
        throw InputError(where + "truncated at byte " + std::to_string(bytes.size()) + " of " + std::to_string(expected));
    if (bytes.size() > expected) throw InputError(where + "trailing bytes after offset " + std::to_string(expected));

    const unsigned char* p = raw + 16;
    auto read = [&](std::span<float> dst) {
        for (float& v : dst) {
            v = std::bit_cast<float>(get_u32(p));
            if (!std::isfinite(v)) throw InputError(where + "non-finite weight at byte " + std::to_string(p - raw));
            p += 4;
        }
    };
    read(model.feature_weights);
    read(model.feature_bias);
    read(model.output_weights);
    read(std::span(&model.output_bias, 1));
    return model;
}

// ---- training ----

void TrainConfig::validate() const {
    if (!(learning_rate > 0) || !std::isfinite(learning_rate) || !(momentum >= 0 && momentum < 1)) throw ConfigError("learning rate must be positive and momentum in [0, 1)");
    if (batch_size < 1 || epochs < 1) throw ConfigError("batch size and epochs must be positive");
    if (!(wdl_scale > 0)) throw ConfigError("WDL scale must be positive");
    if (!(validation_fraction > 0 && validation_fraction <= 0.5)) throw ConfigError("validation fraction must be in (0, 0.5]");
    if (plateau_patience < 1) throw ConfigError("plateau patience must be positive");
}

Example make_example(const data::DatasetRecord& r, double wdl_scale) {
    Example e;
    const Color stm = r.side == 0 ? Color::Red : Color::Black;
    for (Square s = 0; s < kSquares; ++s) {
        if (r.board[s] == 0) continue;
        const Piece pc{r.board[s]};
        e.own.push_back(static_cast<std::uint16_t>(feature_index(stm, pc, s)));
        e.other.push_back(static_cast<std::uint16_t>(feature_index(~stm, pc, s)));
    }
    e.target = cp_to_wdl(r.label, wdl_scale);
    return e;
}

template <typename Real>
BasicModel<Real> glorot_init(std::uint64_t seed, int input_dim) {
    BasicModel<Real> m(input_dim);
    Rng rng(derive_seed(seed, Stage::TrainInit));
    const double l1 = std::sqrt(6.0 / (input_dim + kHidden));
    const double l2 = std::sqrt(6.0 / (2 * kHidden + 1));
    for (Real& w : m.feature_weights) w = static_cast<Real>((2 * rng.unit() - 1) * l1);
    for (Real& w : m.output_weights) w = static_cast<Real>((2 * rng.unit() - 1) * l2);
    return m;
}

template BasicModel<float> glorot_init<float>(std::uint64_t, int);
template BasicModel<double> glorot_init<double>(std::uint64_t, int);

template <typename Real>
double batch_loss(const BasicModel<Real>& model, std::span<const Example> batch, BasicModel<Real>* grad) {
    if (batch.empty()) return 0;
    const Real scale = Real(1) / static_cast<Real>(batch.size());
    double total = 0;
    std::array<Real, kHidden> own{};
    std::array<Real, kHidden> other{};
    for (const Example& e : batch) {
        std::copy(model.feature_bias.begin(), model.feature_bias.end(), own.begin());
        std::copy(model.feature_bias.begin(), model.feature_bias.end(), other.begin());
        for (const auto f : e.own) {
            const Real* row = model.feature_weights.data() + std::size_t{f} * kHidden;
            for (int h = 0; h < kHidden; ++h) own[h] += row[h];
        }
        for (const auto f : e.other) {
            const Real* row = model.feature_weights.data() + std::size_t{f} * kHidden;
            for (int h = 0; h < kHidden; ++h) other[h] += row[h];
        }
        Real z = model.output_bias;
        for (int h = 0; h < kHidden; ++h) {
            z += model.output_weights[h] * std::clamp(own[h], Real(0), Real(1));
            z += model.output_weights[kHidden + h] * std::clamp(other[h], Real(0), Real(1));
        }
        const Real y = Real(1) / (Real(1) + std::exp(-z));
        const Real diff = y - static_cast<Real>(e.target);
        total += static_cast<double>(diff) * static_cast<double>(diff);
        if (!grad) continue;

        const Real dz = Real(2) * diff * y * (Real(1) - y) * scale;
        grad->output_bias += dz;
        std::array<Real, kHidden> d_own{};
        std::array<Real, kHidden> d_other{};
        for (int h = 0; h < kHidden; ++h) {
            // Clipped linear: slope 1 on the closed interval [0, 1], 0 outside.
            const bool own_on = own[h] >= Real(0) && own[h] <= Real(1);
            const bool other_on = other[h] >= Real(0) && other[h] <= Real(1);
            grad->output_weights[h] += dz * std::clamp(own[h], Real(0), Real(1));
            grad->output_weights[kHidden + h] += dz * std::clamp(other[h], Real(0), Real(1));
            d_own[h] = own_on ? dz * model.output_weights[h] : Real(0);
            d_other[h] = other_on ? dz * model.output_weights[kHidden + h] : Real(0);
            grad->feature_bias[h] += d_own[h] + d_other[h];
        }
        for (const auto f : e.own) {
            Real* row = grad->feature_weights.data() + std::size_t{f} * kHidden;
            for (int h = 0; h < kHidden; ++h) row[h] += d_own[h];
        }
        for (const auto f : e.other) {
            Real* row = grad->feature_weights.data() + std::size_t{f} * kHidden;
            for (int h = 0; h < kHidden; ++h) row[h] += d_other[h];
        }
    }
    return total / static_cast<double>(batch.size());
}

template double batch_loss<float>(const BasicModel<float>&, std::span<const Example>, BasicModel<float>*);
template double batch_loss<double>(const BasicModel<double>&, std::span<const Example>, BasicModel<double>*);

namespace {

double dataset_loss(const NnueModel& model, std::span<const Example> examples) {
    double sum = 0;
    constexpr std::size_t kChunk = 4096;
    for (std::size_t i = 0; i < examples.size(); i += kChunk) {
        const auto part = examples.subspan(i, std::min(kChunk, examples.size() - i));
        sum += batch_loss<float>(model, part, nullptr) * static_cast<double>(part.size());
    }
    return examples.empty() ? 0.0 : sum / static_cast<double>(examples.size());
}

template <typename F>
void for_each_param(NnueModel& a, NnueModel& b, NnueModel& c, F&& f) {
    for (std::size_t i = 0; i < a.feature_weights.size(); ++i) f(a.feature_weights[i], b.feature_weights[i], c.feature_weights[i]);
    for (std::size_t i = 0; i < a.feature_bias.size(); ++i) f(a.feature_bias[i], b.feature_bias[i], c.feature_bias[i]);
    for (std::size_t i = 0; i < a.output_weights.size(); ++i) f(a.output_weights[i], b.output_weights[i], c.output_weights[i]);
    f(a.output_bias, b.output_bias, c.output_bias);
}

void zero(NnueModel& m) {
    std::fill(m.feature_weights.begin(), m.feature_weights.end(), 0.0f);
    std::fill(m.feature_bias.begin(), m.feature_bias.end(), 0.0f);
    std::fill(m.output_weights.begin(), m.output_weights.end(), 0.0f);
    m.output_bias = 0;
}

}  // namespace

TrainResult train(std::span<const data::DatasetRecord> records, const TrainConfig& config) {
    config.validate();
    if (records.size() < 2) throw InputError("training needs at least 2 records, got " + std::to_string(records.size()));

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng(derive_seed(config.seed, Stage::TrainSplit));
    split_rng.shuffle(std::span(order));
    const std::size_t n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(config.validation_fraction * static_cast<double>(records.size()))), 1, records.size() - 1);

    std::vector<Example> val;
    std::vector<Example> trn;
    val.reserve(n_val);
    trn.reserve(records.size() - n_val);
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_val ? val : trn).push_back(make_example(records[order[i]], config.wdl_scale));

    TrainResult result;
    NnueModel model = glorot_init<float>(config.seed);
    NnueModel velocity(model.input_dim);
    NnueModel grad(model.input_dim);
    result.model = model;
    result.best_val_mse = dataset_loss(model, val);

    double lr = config.learning_rate;
    int stale = 0;
    std::vector<Example> batch;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(config.seed, Stage::TrainShuffle, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(std::span(trn));
        for (std::size_t start = 0; start < trn.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const auto part = std::span<const Example>(trn).subspan(start, std::min<std::size_t>(config.batch_size, trn.size() - start));
            zero(grad);
            const double loss = batch_loss<float>(model, part, &grad);
            if (!std::isfinite(loss))
                throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(start / config.batch_size) + ", learning rate " + fmt::format("{:g}", lr));
            const auto mu = static_cast<float>(config.momentum);
            const auto step = static_cast<float>(lr);
            for_each_param(model, velocity, grad, [mu, step](float& w, float& v, float& g) {
                v = mu * v - step * g;
                w += v;
            });
        }
        EpochLog entry;
        entry.epoch = epoch;
        entry.learning_rate = lr;
        entry.train_mse = dataset_loss(model, trn);
        entry.val_mse = dataset_loss(model, val);
        if (!std::isfinite(entry.train_mse) || !std::isfinite(entry.val_mse))
            throw DivergenceError("non-finite loss after epoch " + std::to_string(epoch) + " (train " + std::to_string(entry.train_mse) +
                                  ", validation " + std::to_string(entry.val_mse) + ", learning rate " + std::to_string(lr) + ")");
        result.log.push_back(entry);
        if (entry.val_mse < result.best_val_mse) {
            result.best_val_mse = entry.val_mse;
            result.best_epoch = epoch;
            result.model = model;
            stale = 0;
        } else if (++stale >= config.plateau_patience) {
            lr *= 0.5;
            stale = 0;
        }
    }
    return result;
}

void write_train_log(std::span<const EpochLog> log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "epoch,train_mse,val_mse\n";
    out.precision(9);
    for (const EpochLog& e : log) out << e.epoch << ',' << e.train_mse << ',' << e.val_mse << '\n';
}

}  // namespace xq::nnue
