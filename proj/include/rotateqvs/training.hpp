#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rotateqvs/dataset.hpp"
#include "rotateqvs/model.hpp"

namespace rqvs {

struct TrainConfig {
    std::int32_t k = 500;
    double lr = 0.1;
    std::int32_t eta = 10;  ///< negatives per positive
    double gamma = 110.0;   ///< margin
    std::int32_t granularity = 1;
    std::int32_t epochs = 500;
    std::int32_t batch_size = 512;
    std::int32_t valid_every = 25;
    std::uint64_t seed = 1;
    ScoreAgg agg = ScoreAgg::l1;

    void validate() const; // throws InfeasibleSpecError on out-of-range values
};

/// Published best settings per benchmark: lr 0.1, k 500, eta 10 everywhere;
/// margin and granularity per dataset (icews14 110/1, icews05-15 120/2,
/// yago11k 50/100, gdelt 110/1). Throws UnknownDatasetError otherwise.
TrainConfig default_config(const std::string& dataset_name);

/// Per-parameter squared-gradient accumulators, same shapes as the model.
struct AdagradState {
    QuaternionTable entity, relation, time;
    double eps = 1e-10;
};

AdagradState make_adagrad_state(const ModelParams& p);

/// acc += g^2; param -= lr * g / (sqrt(acc) + eps), over touched rows only.
void adagrad_step(ModelParams& p, const SparseGrads& grads, AdagradState& state, double lr);

struct EpochLog {
    std::int32_t epoch = 0;
    double mean_loss = 0.0;
    std::optional<double> valid_mrr; ///< set on validation epochs
};

struct TrainResult {
    ModelParams best;           ///< highest validation MRR seen (final params if never validated)
    std::vector<EpochLog> log;  ///< one entry per epoch
    std::int32_t best_epoch = 0;
    double best_mrr = -1.0;     ///< -1 when validation never ran
};

/// Invoked whenever validation MRR improves; used to write checkpoints.
using ImproveCallback = std::function<void(const ModelParams&, std::int32_t epoch, double mrr)>;

/// Seeded Adagrad loop: shuffle train each epoch, draw eta negatives per
/// positive, accumulate analytic gradients per batch, apply one Adagrad step
/// per batch. Validates on the valid split every valid_every epochs (and on
/// the last epoch), keeping the best-MRR parameters. Shuffling, negative
/// sampling, and initialization use independent streams of the seed, so runs
/// are bitwise reproducible single-threaded. threads only parallelizes
/// validation ranking.
TrainResult train(const Dataset& data, const TrainConfig& cfg, int threads = 1,
                  const ImproveCallback& on_improve = {});

/// CSV: epoch, mean_loss, valid_mrr (blank when not computed).
void write_train_log_csv(const std::vector<EpochLog>& log, const std::string& path);

} // namespace rqvs
