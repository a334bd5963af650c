#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xq/dataset.hpp"
#include "xq/search.hpp"

namespace xq::nnue {

inline constexpr int kHidden = 128;
// Per perspective: own 7 piece types then the opponent's 7, 90 squares each,
// with the perspective's own side at the bottom.
inline constexpr int kPlanes = 14;
inline constexpr int kInputDim = kPlanes * kSquares;

int feature_index(Color perspective, Piece piece, Square s);

struct Features {
    std::vector<int> red;    // sorted
    std::vector<int> black;  // sorted
};

Features encode_features(const Position& p);

// Weights in row-major order: feature weights [input_dim][kHidden], feature
// bias [kHidden], output weights [2 * kHidden] (side to move first), output bias.
template <typename Real>
struct BasicModel {
    int input_dim = kInputDim;
    std::vector<Real> feature_weights;
    std::vector<Real> feature_bias;
    std::vector<Real> output_weights;
    Real output_bias = 0;

    BasicModel() : BasicModel(kInputDim) {}
    explicit BasicModel(int dim)
        : input_dim(dim),
          feature_weights(static_cast<std::size_t>(dim) * kHidden, Real(0)),
          feature_bias(kHidden, Real(0)),
          output_weights(2 * kHidden, Real(0)) {}

    friend bool operator==(const BasicModel&, const BasicModel&) = default;
};

using NnueModel = BasicModel<float>;

template <typename Real>
using BasicAccumulator = std::array<std::array<Real, kHidden>, 2>;  // indexed by perspective color

using Accumulator = BasicAccumulator<float>;

template <typename Real>
void refresh_accumulator(const BasicModel<Real>& model, std::span<const int> features, std::array<Real, kHidden>& out);

Accumulator refresh(const NnueModel& model, const Position& p);

// Subtracts the removed feature rows and adds the added ones.
void accumulator_apply(const NnueModel& model, std::array<float, kHidden>& acc, std::span<const int> removed,
                       std::span<const int> added);

struct FeatureDelta {
    std::array<int, 2> removed{};
    std::array<int, 1> added{};
    int removed_count = 0;
};

// Feature changes for one perspective caused by the move in `token`.
FeatureDelta move_delta(Color perspective, const UndoToken& token);

// Pre-sigmoid output for the given accumulators.
template <typename Real>
Real output_logit(const BasicModel<Real>& model, const BasicAccumulator<Real>& acc, Color side_to_move);

template <typename Real>
Real forward(const BasicModel<Real>& model, std::span<const int> red_features, std::span<const int> black_features,
             Color side_to_move);

inline constexpr double kDefaultWdlScale = 400.0;
inline constexpr Score kEvalClamp = 10000;

// Centipawns, side-to-move relative: K times the logit of the network output.
Score nnue_evaluate(const NnueModel& model, const Accumulator& acc, Color side_to_move,
                    double wdl_scale = kDefaultWdlScale);

double cp_to_wdl(double cp, double wdl_scale = kDefaultWdlScale);

// Accumulator stack that follows the search through push/pop.
class NnueEval final : public EvalSource {
public:
    explicit NnueEval(const NnueModel& model, double wdl_scale = kDefaultWdlScale);

    void reset(const Position& root) override;
    void push(const Position& after, const UndoToken& token) override;
    void pop() override;
    Score evaluate(const Position& p) override;

    const Accumulator& top() const { return stack_.back().acc; }

private:
    struct Frame {
        std::uint64_t hash;
        Accumulator acc;
    };
    const NnueModel* model_;
    double wdl_scale_;
    std::vector<Frame> stack_;
};

EvalFactory nnue_factory(const NnueModel& model, double wdl_scale = kDefaultWdlScale);

inline constexpr std::array<char, 4> kModelMagic = {'N', 'N', 'M', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

void save_model(const NnueModel& model, const std::filesystem::path& path);
// Throws InputError on bad magic, version, dimensions, size or non-finite values.
NnueModel load_model(const std::filesystem::path& path, int expected_input_dim = kInputDim);

// ---- training ----

struct TrainConfig {
    double learning_rate = 0.1;
    double momentum = 0.9;
    int batch_size = 1024;
    int epochs = 30;
    double wdl_scale = kDefaultWdlScale;
    std::uint64_t seed = 1;
    double validation_fraction = 0.1;
    // Epochs without a validation improvement before the rate is halved.
    int plateau_patience = 1;

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double train_mse = 0;
    double val_mse = 0;
    double learning_rate = 0;
};

struct TrainResult {
    NnueModel model;
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_val_mse = 0;
};

// Training example: feature lists already ordered side to move first.
struct Example {
    std::vector<std::uint16_t> own;
    std::vector<std::uint16_t> other;
    double target = 0.5;
};

Example make_example(const data::DatasetRecord& r, double wdl_scale = kDefaultWdlScale);

template <typename Real>
BasicModel<Real> glorot_init(std::uint64_t seed, int input_dim = kInputDim);

// Mean squared error over `batch`; adds d(loss)/d(parameter) into `grad` when non-null.
template <typename Real>
double batch_loss(const BasicModel<Real>& model, std::span<const Example> batch, BasicModel<Real>* grad);

TrainResult train(std::span<const data::DatasetRecord> records, const TrainConfig& config);

void write_train_log(std::span<const EpochLog> log, const std::filesystem::path& path);

}  // namespace xq::nnue
