#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rotateqvs/dataset.hpp"
#include "rotateqvs/model.hpp"

namespace rqvs {

enum class Side { head, tail };

/// The four ranking metrics over one population of ranks.
struct Metrics {
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits3 = 0.0;
    double hits10 = 0.0;
};

/// Pooled metrics over all 2*|split| queries plus the per-direction split.
struct EvalReport {
    Metrics all, head, tail;
    std::int64_t n_queries = 0;
};

/// mrr = mean(1/rank), hits@n = fraction with rank <= n.
/// Throws EmptyRanksError on an empty list.
Metrics metrics(const std::vector<std::int32_t>& ranks);

/// Filtered rank of q's true entity on the given side. Candidates are all
/// entities substituted on that side; those forming a true fact at the same
/// timestamp are dropped (the true answer never is); rank = 1 + number of
/// remaining candidates scoring strictly lower. filtered=false keeps every
/// candidate, for debugging only.
std::int32_t rank(const Quadruple& q, const ModelParams& p, const FilterIndex& filter, Side side,
                  bool filtered = true);

/// Both-side ranks for every quadruple of the split, aggregated. Queries are
/// independent; threads > 1 splits them across that many workers with each
/// rank written to its preassigned slot, so the report does not depend on
/// scheduling.
EvalReport evaluate(const std::vector<Quadruple>& split, const ModelParams& p,
                    const FilterIndex& filter, int threads = 1, bool filtered = true);

std::string eval_csv_header();
std::string eval_csv_row(const EvalReport& report);
void print_report(std::ostream& os, const EvalReport& report);

} // namespace rqvs
