#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rotateqvs/dataset.hpp"
#include "rotateqvs/kernels.hpp"
#include "rotateqvs/quaternion_vector.hpp"
#include "rotateqvs/rng.hpp"

namespace rqvs {

/// How per-coordinate residual norms are folded into one score:
/// l1 sums them, l2 takes the 2-norm over all 4k components.
enum class ScoreAgg { l1, l2 };

ScoreAgg score_agg_from_string(const std::string& name); // throws UnknownLabelError
const char* to_string(ScoreAgg agg);

/// The learned state: one quaternion vector per entity, relation, and
/// timestamp. Time rows are stored raw; every forward pass normalizes them
/// coordinate-wise first, so the unit constraint always holds where it
/// matters and updates never have to re-project.
struct ModelParams {
    QuaternionTable entity, relation, time;
    std::int32_t k = 0;
    ScoreAgg agg = ScoreAgg::l1;
    std::uint64_t seed = 0; ///< recorded in checkpoints for provenance
    std::int32_t epoch = 0; ///< epoch the parameters were captured at

    std::int32_t n_entities() const { return static_cast<std::int32_t>(entity.rows()); }
    std::int32_t n_relations() const { return static_cast<std::int32_t>(relation.rows()); }
    std::int32_t n_times() const { return static_cast<std::int32_t>(time.rows()); }
};

/// All coordinates drawn uniform in [-6/sqrt(4k), +6/sqrt(4k)], time rows
/// included (they become usable through on-the-fly normalization).
ModelParams init_params(std::int32_t n_e, std::int32_t n_r, std::int32_t n_tau, std::int32_t k,
                        Rng& rng);

/// e rotated coordinate-wise by the normalization of tau_raw. Real parts and
/// per-coordinate norms are preserved.
QuaternionVector time_specific_entity(ConstQuatView e, ConstQuatView tau_raw);

/// Forward pass with intermediates kept, for inspection and tests.
struct ScoreBreakdown {
    QuaternionVector s_t, o_t;
    QuaternionVector residual; ///< s_t + r - conj(o_t)
    double value = 0.0;        ///< aggregated residual norm; lower = more plausible
};

ScoreBreakdown score(const ModelParams& p, const Quadruple& q);

/// Score only, no intermediates retained.
double score_value(const ModelParams& p, const Quadruple& q);

/// Margin loss over one positive and its negatives:
/// softplus(f(pos) - gamma) + sum_i softplus(gamma - f(neg_i)),
/// which is -log sigmoid(gamma - f(pos)) - sum_i log sigmoid(f(neg_i) - gamma)
/// computed in the stable form.
double loss(const ModelParams& p, const Quadruple& pos, const std::vector<Quadruple>& negs,
            double gamma);

enum class Table : std::uint8_t { entity, relation, time };

/// Gradient accumulator over touched rows only. Rows appear in first-touch
/// order, which makes downstream application deterministic.
class SparseGrads {
public:
    struct Entry {
        Table table;
        std::int32_t row;
        QuaternionVector g;
    };

    explicit SparseGrads(std::int32_t k) : k_(k) {}

    /// Accumulator for (table, row), created zeroed on first touch.
    QuatView at(Table table, std::int32_t row);

    const std::vector<Entry>& entries() const { return entries_; }
    void clear();

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::int32_t k_;
};

/// Scratch buffers for the fused forward/backward pass, reusable across calls.
struct ModelWorkspace {
    QuaternionVector ut, s_t, o_t, res, g, h, t1, t2;
    std::vector<double> inv_norms;
    void resize(std::int32_t k);
};

/// Computes the margin loss for (pos, negs) and adds the analytic gradient of
/// every touched entity, relation, and raw time coordinate into out. The
/// gradient chains through the on-the-fly time normalization. Returns the
/// loss value.
double loss_and_gradients(const ModelParams& p, const Quadruple& pos,
                          const std::vector<Quadruple>& negs, double gamma, ModelWorkspace& ws,
                          SparseGrads& out);

/// Convenience wrapper for tests: gradients alone.
SparseGrads gradients(const ModelParams& p, const Quadruple& pos,
                      const std::vector<Quadruple>& negs, double gamma);

/// Checkpoint layout: a short text header (n_e, n_r, n_tau, k, score_agg,
/// seed, epoch, one `key value` pair per line, closed by "end_header"),
/// followed by the three tables as little-endian IEEE-754 doubles in channel
/// order (entity w,x,y,z; relation w,x,y,z; time w,x,y,z). Round-trips
/// bit-exactly.
void save_checkpoint(const ModelParams& p, const std::string& path);
ModelParams load_checkpoint(const std::string& path); // IoError on damage

} // namespace rqvs
