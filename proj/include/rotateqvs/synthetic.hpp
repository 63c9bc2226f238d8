#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rotateqvs/dataset.hpp"

namespace rqvs {

/// Shape of a generated graph with planted relation patterns.
struct SyntheticSpec {
    std::int32_t n_entities = 50;
    std::int32_t n_symmetric = 2;
    std::int32_t n_asymmetric = 2;
    std::int32_t n_inverse_pairs = 2;
    std::int32_t n_evolution_chains = 2;
    std::int32_t n_timestamps = 20;
    std::int32_t facts_per_relation = 60;
    std::uint64_t seed = 7;
};

/// A generated graph plus the ground truth of what was planted where.
struct SyntheticData {
    std::vector<RawFact> train, valid, test;

    struct Chain {
        std::string rel_a, rel_b; ///< earlier and later relation of the chain
        std::string t1, t2;       ///< the chain's fixed timestamps, t1 < t2
    };
    std::vector<std::string> symmetric_rels, asymmetric_rels;
    std::vector<std::pair<std::string, std::string>> inverse_pairs;
    std::vector<Chain> evolution_chains;
};

/// Plants the requested patterns:
///   symmetric  - every fact also emitted reversed, same relation
///   asymmetric - single direction, reverse guaranteed absent
///   inverse    - (s, a, o, t) paired with (o, b, s, t)
///   evolution  - (s, a, o, t1) paired with (s, b, o, t2), fixed t1 < t2 per chain
/// Splits 80/10/10. Held-out facts are drawn only from second halves of
/// planted pairs whose first half stays in train, so every held-out query is
/// answerable from the training graph; every entity and relation appears in
/// train. Throws InfeasibleSpecError when the counts cannot support a
/// requested pattern (asymmetric with < 2 entities, evolution with < 2
/// timestamps, nothing planted at all).
SyntheticData generate(const SyntheticSpec& spec);

/// Standard 4-column TSV, year-style integer time labels.
void write_tsv(const std::vector<RawFact>& facts, const std::string& path);

/// Writes train.txt / valid.txt / test.txt under dir.
void write_dataset(const SyntheticData& data, const std::string& dir);

/// In-memory ingestion through the normal assembly path.
Dataset to_dataset(const SyntheticData& data, int granularity = 1);

} // namespace rqvs
