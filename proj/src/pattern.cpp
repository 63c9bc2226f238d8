#include "rotateqvs/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace rqvs {
namespace {

double sum_norm_sq(ConstQuatView v) {
    double total = 0.0;
    for (std::size_t m = 0; m < v.n; ++m)
        total += v.at(m).norm_sq();
    return total;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

} // namespace

double real_part_magnitude(ConstQuatView r) {
    const double total = sum_norm_sq(r);
    if (total < detail::kZeroNormSq)
        throw ZeroNormError("relation embedding is identically zero");
    double real = 0.0;
    for (std::size_t m = 0; m < r.n; ++m)
        real += r.w[m] * r.w[m];
    return std::sqrt(real / total);
}

double real_part_magnitude(const ModelParams& p, std::int32_t r_id) {
    return real_part_magnitude(p.relation.row(static_cast<std::size_t>(r_id)));
}

std::pair<double, double> inversion_residual(ConstQuatView r1, ConstQuatView r2) {
    const double denom = std::sqrt(sum_norm_sq(r1)) + std::sqrt(sum_norm_sq(r2));
    if (denom * denom < detail::kZeroNormSq)
        throw ZeroNormError("both relation embeddings are zero");

    double re = 0.0, im = 0.0;
    for (std::size_t m = 0; m < r1.n; ++m) {
        const double dw = r1.w[m] + r2.w[m];
        const double dx = r1.x[m] - r2.x[m];
        const double dy = r1.y[m] - r2.y[m];
        const double dz = r1.z[m] - r2.z[m];
        re += dw * dw;
        im += dx * dx + dy * dy + dz * dz;
    }
    return {std::sqrt(re) / denom, std::sqrt(im) / denom};
}

std::pair<double, double> inversion_residual(const ModelParams& p, std::int32_t r1_id,
                                             std::int32_t r2_id) {
    return inversion_residual(p.relation.row(static_cast<std::size_t>(r1_id)),
                              p.relation.row(static_cast<std::size_t>(r2_id)));
}

QuaternionVector temporal_transport(ConstQuatView r1, ConstQuatView tau1, ConstQuatView tau2) {
    if (r1.n != tau1.n || r1.n != tau2.n)
        throw ShapeMismatchError("transport inputs must share the coordinate count");
    QuaternionVector out(r1.n);
    const QuatView ov = out.view();
    for (std::size_t m = 0; m < r1.n; ++m) {
        const Quaternion u1 = normalize(tau1.at(m)).value();
        const Quaternion u2 = normalize(tau2.at(m)).value();
        const Quaternion q = hamilton(u2, u1.conjugate()); // unit: rotation tau1 -> tau2
        ov.set(m, hamilton(hamilton(q, r1.at(m)), q.conjugate()));
    }
    return out;
}

QuaternionVector temporal_transport(const ModelParams& p, std::int32_t r_id, std::int32_t tau1_id,
                                    std::int32_t tau2_id) {
    return temporal_transport(p.relation.row(static_cast<std::size_t>(r_id)),
                              p.time.row(static_cast<std::size_t>(tau1_id)),
                              p.time.row(static_cast<std::size_t>(tau2_id)));
}

double cosine_similarity(ConstQuatView x, ConstQuatView y) {
    if (x.n != y.n)
        throw ShapeMismatchError("cosine over different coordinate counts");
    const double nx = sum_norm_sq(x), ny = sum_norm_sq(y);
    if (nx < detail::kZeroNormSq || ny < detail::kZeroNormSq)
        throw ZeroNormError("cosine similarity of a zero vector");
    double dot = 0.0;
    for (std::size_t m = 0; m < x.n; ++m)
        dot += inner(x.at(m), y.at(m));
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

std::pair<double, double> deduction_check(ConstQuatView r1, ConstQuatView r2) {
    double norm_gap = 0.0, real_gap = 0.0;
    for (std::size_t m = 0; m < r1.n; ++m) {
        norm_gap = std::fmax(norm_gap, std::fabs(r1.at(m).norm() - r2.at(m).norm()));
        real_gap = std::fmax(real_gap, std::fabs(r1.w[m] - r2.w[m]));
    }
    return {norm_gap, real_gap};
}

std::pair<double, double> deduction_check(const ModelParams& p, std::int32_t r1_id,
                                          std::int32_t r2_id) {
    return deduction_check(p.relation.row(static_cast<std::size_t>(r1_id)),
                           p.relation.row(static_cast<std::size_t>(r2_id)));
}

double EvolutionHistogram::positive_mean() const { return mean(positive); }
double EvolutionHistogram::negative_mean() const { return mean(negative); }

EvolutionHistogram evolution_histogram(const std::vector<FactPair>& pairs, int negatives_per_pair,
                                       const ModelParams& p, double bin_width, Rng& rng) {
    EvolutionHistogram h;
    if (pairs.empty())
        return h;
    if (bin_width <= 0.0 || bin_width > 2.0)
        throw InfeasibleSpecError("histogram bin width must lie in (0, 2]");
    if (negatives_per_pair > 0 && p.n_relations() < 2)
        throw InfeasibleSpecError("negative relation sampling needs at least 2 relations");

    const int n_bins = static_cast<int>(std::ceil(2.0 / bin_width - 1e-9));
    std::vector<std::int64_t> pos_counts(static_cast<std::size_t>(n_bins), 0);
    std::vector<std::int64_t> neg_counts(static_cast<std::size_t>(n_bins), 0);
    const auto bin_of = [&](double sim) {
        int idx = static_cast<int>((sim + 1.0) / bin_width);
        return static_cast<std::size_t>(std::clamp(idx, 0, n_bins - 1));
    };

    for (const FactPair& pair : pairs) {
        const QuaternionVector moved =
            temporal_transport(p, pair.base.r, pair.base.t, pair.target.t);

        const double pos_sim =
            cosine_similarity(moved.view(), p.relation.row(static_cast<std::size_t>(pair.target.r)));
        h.positive.push_back(pos_sim);
        ++pos_counts[bin_of(pos_sim)];

        for (int j = 0; j < negatives_per_pair; ++j) {
            std::int32_t rand_rel = static_cast<std::int32_t>(
                rng.below(static_cast<std::uint64_t>(p.n_relations()) - 1));
            if (rand_rel >= pair.target.r)
                ++rand_rel;
            const double neg_sim = cosine_similarity(
                moved.view(), p.relation.row(static_cast<std::size_t>(rand_rel)));
            h.negative.push_back(neg_sim);
            ++neg_counts[bin_of(neg_sim)];
        }
    }

    const double pos_total = static_cast<double>(h.positive.size());
    const double neg_total = static_cast<double>(h.negative.size());
    h.bins.resize(static_cast<std::size_t>(n_bins));
    for (int i = 0; i < n_bins; ++i) {
        HistogramBin& b = h.bins[static_cast<std::size_t>(i)];
        b.lo = -1.0 + i * bin_width;
        b.hi = b.lo + bin_width;
        b.pos_density = static_cast<double>(pos_counts[static_cast<std::size_t>(i)]) /
                        (pos_total * bin_width);
        b.neg_density = neg_total > 0.0 ? static_cast<double>(neg_counts[static_cast<std::size_t>(i)]) /
                                              (neg_total * bin_width)
                                        : 0.0;
    }
    return h;
}

void write_histogram_csv(const EvolutionHistogram& h, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write histogram: " + path);
    out << "bin_lo,bin_hi,positive_density,negative_density\n";
    char buf[160];
    for (const HistogramBin& b : h.bins) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", b.lo, b.hi, b.pos_density,
                      b.neg_density);
        out << buf;
    }
}

} // namespace rqvs
