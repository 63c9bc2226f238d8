#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rotateqvs/dataset.hpp"
#include "rotateqvs/model.hpp"
#include "rotateqvs/rng.hpp"

namespace rqvs {

// Relation-pattern diagnostics. Everything here reports raw numbers;
// thresholds and verdicts belong to whoever consumes them. A relation trained
// on symmetric facts is expected to show a small real-part share, an inverse
// pair small inversion residuals, an evolved pair high transport similarity.

/// ||Re(r)||_2 / ||r||_2 over the k coordinates, in [0, 1].
/// 0 = pure imaginary (the symmetric signature), 1 = pure real.
double real_part_magnitude(ConstQuatView r); // ZeroNormError on an all-zero row
double real_part_magnitude(const ModelParams& p, std::int32_t r_id);

/// (||Re(r1)+Re(r2)||_2, ||Im(r1)-Im(r2)||_2), both normalized by
/// ||r1||_2 + ||r2||_2. An ideal inverse pair gives (0, 0).
std::pair<double, double> inversion_residual(ConstQuatView r1, ConstQuatView r2);
std::pair<double, double> inversion_residual(const ModelParams& p, std::int32_t r1_id,
                                             std::int32_t r2_id);

/// r1 conjugated coordinate-wise by normalize(tau2) * normalize(tau1)^-1: the
/// prediction of how r1 looks after moving from time tau1 to tau2. Preserves
/// real parts and coordinate norms.
QuaternionVector temporal_transport(ConstQuatView r1, ConstQuatView tau1, ConstQuatView tau2);
QuaternionVector temporal_transport(const ModelParams& p, std::int32_t r_id, std::int32_t tau1_id,
                                    std::int32_t tau2_id);

/// Cosine over the flattened 4k real coordinates, in [-1, 1].
double cosine_similarity(ConstQuatView x, ConstQuatView y); // ZeroNormError on zero input

/// (max_m | |r1[m]| - |r2[m]| |, max_m |Re(r1[m]) - Re(r2[m])|): how far the
/// pair is from the evolution pattern's necessary conditions (equal coordinate
/// norms, equal real parts).
std::pair<double, double> deduction_check(ConstQuatView r1, ConstQuatView r2);
std::pair<double, double> deduction_check(const ModelParams& p, std::int32_t r1_id,
                                          std::int32_t r2_id);

/// Two facts over the same (head, tail), candidate for the evolution pattern.
struct FactPair {
    Quadruple base, target;
};

struct HistogramBin {
    double lo = 0.0, hi = 0.0;
    double pos_density = 0.0, neg_density = 0.0;
};

struct EvolutionHistogram {
    std::vector<HistogramBin> bins;     ///< covers [-1, 1] at the given width
    std::vector<double> positive;       ///< raw similarities, one per pair
    std::vector<double> negative;       ///< raw similarities, negatives_per_pair per pair
    double positive_mean() const;
    double negative_mean() const;
};

/// For each pair: transport the base relation from base time to target time,
/// take cosine similarity against the target relation (positive population)
/// and against uniformly sampled relations different from the target
/// (negative population). Bin both at bin_width and normalize to densities.
/// Empty input produces an empty table.
EvolutionHistogram evolution_histogram(const std::vector<FactPair>& pairs, int negatives_per_pair,
                                       const ModelParams& p, double bin_width, Rng& rng);

/// CSV: bin_lo, bin_hi, positive_density, negative_density.
void write_histogram_csv(const EvolutionHistogram& h, const std::string& path);

} // namespace rqvs
