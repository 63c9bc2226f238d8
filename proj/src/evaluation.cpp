#include "rotateqvs/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <thread>

namespace rqvs {

Metrics metrics(const std::vector<std::int32_t>& ranks) {
    if (ranks.empty())
        throw EmptyRanksError();
    Metrics m;
    for (const std::int32_t r : ranks) {
        m.mrr += 1.0 / static_cast<double>(r);
        m.hits1 += r <= 1;
        m.hits3 += r <= 3;
        m.hits10 += r <= 10;
    }
    const double n = static_cast<double>(ranks.size());
    m.mrr /= n;
    m.hits1 /= n;
    m.hits3 /= n;
    m.hits10 /= n;
    return m;
}

namespace {

bool contains(const std::vector<std::int32_t>& sorted, std::int32_t id) {
    return std::binary_search(sorted.begin(), sorted.end(), id);
}

} // namespace

std::int32_t rank(const Quadruple& q, const ModelParams& p, const FilterIndex& filter, Side side,
                  bool filtered) {
    const kern::Ops& ops = kern::active();
    const std::size_t k = static_cast<std::size_t>(p.k);
    const bool l1 = p.agg == ScoreAgg::l1;
    const std::int32_t n_e = p.n_entities();

    QuaternionVector ut(k), rotated(k), base(k);
    ops.normalize(p.time.row(q.t), ut.view(), nullptr);

    const ConstQuatView rel = p.relation.row(q.r);
    std::int32_t answer;
    const std::vector<std::int32_t>* known;

    if (side == Side::tail) {
        // Fixed part of the residual: lhs = s_t + r; candidates vary o.
        ops.sandwich(ut.view(), p.entity.row(q.s), rotated.view(), false);
        const QuatView lhs = base.view();
        const ConstQuatView st = rotated.view();
        for (std::size_t m = 0; m < k; ++m) {
            lhs.w[m] = st.w[m] + rel.w[m];
            lhs.x[m] = st.x[m] + rel.x[m];
            lhs.y[m] = st.y[m] + rel.y[m];
            lhs.z[m] = st.z[m] + rel.z[m];
        }
        answer = q.o;
        known = &filter.tails(q.s, q.r, q.t);
    } else {
        // Fixed part: rhs = conj(o_t) - r; candidates vary s.
        ops.sandwich(ut.view(), p.entity.row(q.o), rotated.view(), false);
        const QuatView rhs = base.view();
        const ConstQuatView ot = rotated.view();
        for (std::size_t m = 0; m < k; ++m) {
            rhs.w[m] = ot.w[m] - rel.w[m];
            rhs.x[m] = -ot.x[m] - rel.x[m];
            rhs.y[m] = -ot.y[m] - rel.y[m];
            rhs.z[m] = -ot.z[m] - rel.z[m];
        }
        answer = q.s;
        known = &filter.heads(q.r, q.o, q.t);
    }

    const auto candidate_score = [&](std::int32_t ent) {
        return side == Side::tail
                   ? ops.score_tail(base.view(), p.entity.row(ent), ut.view(), l1)
                   : ops.score_head(base.view(), p.entity.row(ent), ut.view(), l1);
    };

    const double true_score = candidate_score(answer);
    std::int32_t better = 0;
    for (std::int32_t i = 0; i < n_e; ++i) {
        if (i == answer)
            continue;
        if (filtered && contains(*known, i))
            continue;
        if (candidate_score(i) < true_score)
            ++better;
    }
    return better + 1;
}

EvalReport evaluate(const std::vector<Quadruple>& split, const ModelParams& p,
                    const FilterIndex& filter, int threads, bool filtered) {
    const std::size_t n = split.size();
    std::vector<std::int32_t> head_ranks(n), tail_ranks(n);

    const auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            head_ranks[i] = rank(split[i], p, filter, Side::head, filtered);
            tail_ranks[i] = rank(split[i], p, filter, Side::tail, filtered);
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(n, threads < 1 ? 1 : static_cast<std::size_t>(threads));
    if (workers <= 1) {
        work(0, n);
    } else {
        // Each query writes only its own slot, so the result is identical to
        // the sequential one regardless of scheduling.
        kern::active(); // settle kernel selection before going parallel
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t per = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = w * per, hi = std::min(n, lo + per);
            if (lo < hi)
                pool.emplace_back(work, lo, hi);
        }
        for (std::thread& t : pool)
            t.join();
    }

    std::vector<std::int32_t> pooled;
    pooled.reserve(2 * n);
    pooled.insert(pooled.end(), head_ranks.begin(), head_ranks.end());
    pooled.insert(pooled.end(), tail_ranks.begin(), tail_ranks.end());

    EvalReport report;
    report.all = metrics(pooled);
    report.head = metrics(head_ranks);
    report.tail = metrics(tail_ranks);
    report.n_queries = static_cast<std::int64_t>(2 * n);
    return report;
}

std::string eval_csv_header() {
    return "mrr,hits1,hits3,hits10,head_mrr,head_hits1,head_hits3,head_hits10,"
           "tail_mrr,tail_hits1,tail_hits3,tail_hits10,n_queries";
}

std::string eval_csv_row(const EvalReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%lld",
                  r.all.mrr, r.all.hits1, r.all.hits3, r.all.hits10, r.head.mrr, r.head.hits1,
                  r.head.hits3, r.head.hits10, r.tail.mrr, r.tail.hits1, r.tail.hits3,
                  r.tail.hits10, static_cast<long long>(r.n_queries));
    return buf;
}

void print_report(std::ostream& os, const EvalReport& r) {
    char buf[256];
    os << "          MRR   Hits@1   Hits@3  Hits@10\n";
    const auto row = [&](const char* name, const Metrics& m) {
        std::snprintf(buf, sizeof buf, "%-5s  %6.4f   %6.4f   %6.4f   %6.4f\n", name, m.mrr,
                      m.hits1, m.hits3, m.hits10);
        os << buf;
    };
    row("all", r.all);
    row("head", r.head);
    row("tail", r.tail);
    os << "queries " << r.n_queries << "\n";
}

} // namespace rqvs
