#include "rotateqvs/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <vector>

#include "rotateqvs/dataset.hpp"
#include "rotateqvs/evaluation.hpp"
#include "rotateqvs/kernels.hpp"
#include "rotateqvs/model.hpp"
#include "rotateqvs/quaternion.hpp"
#include "rotateqvs/rng.hpp"

namespace rqvs {
namespace {

Quaternion random_quat(Rng& rng, double lo = -2.0, double hi = 2.0) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

Vec3 random_axis(Rng& rng) {
    while (true) {
        const Vec3 v{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double len = v.length();
        if (len > 0.1)
            return (1.0 / len) * v;
    }
}

double max_coord_gap(const Quaternion& a, const Quaternion& b) {
    const Quaternion d = a - b;
    return std::max({std::fabs(d.w), std::fabs(d.x), std::fabs(d.y), std::fabs(d.z)});
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

} // namespace

SuiteResult check_quaternion_algebra(std::uint64_t seed, int cases) {
    Rng rng = Rng::stream(seed, 11);
    double worst_product = 0.0; // hamilton vs 3D-vector form, tol 1e-12
    double worst_norm = 0.0;    // relative norm multiplicativity, tol 1e-10
    double worst_conj = 0.0;    // conjugate anti-homomorphism, tol 1e-12

    for (int i = 0; i < cases; ++i) {
        const Quaternion q1 = random_quat(rng), q2 = random_quat(rng), q3 = random_quat(rng);

        worst_product = std::fmax(worst_product, max_coord_gap(hamilton(q1, q2), hamilton_3d(q1, q2)));

        const double prod_norm = hamilton(q1, q2).norm();
        const double sep_norm = q1.norm() * q2.norm();
        worst_norm =
            std::fmax(worst_norm, std::fabs(prod_norm - sep_norm) / std::fmax(1.0, sep_norm));

        worst_conj = std::fmax(worst_conj, conj_product_residual({q1, q2}));
        worst_conj = std::fmax(worst_conj, conj_product_residual({q1, q2, q3}));
    }

    SuiteResult r;
    r.name = "quaternion-algebra";
    r.max_residual = std::max({worst_product / 1e-12, worst_norm / 1e-10, worst_conj / 1e-12});
    r.pass = r.max_residual <= 1.0;
    r.detail = fmt("product gap %.3g (tol 1e-12), norm mult %.3g rel (tol 1e-10), conj %.3g (tol 1e-12)",
                   worst_product, worst_norm, worst_conj);
    return r;
}

SuiteResult check_rotation_oracle(std::uint64_t seed, int cases) {
    Rng rng = Rng::stream(seed, 12);
    double worst = 0.0; // all three residual families share the 1e-10 tolerance

    for (int i = 0; i < cases; ++i) {
        const Vec3 u = random_axis(rng);
        const double theta = rng.uniform(-2.0 * 3.14159265358979323846, 2.0 * 3.14159265358979323846);
        const Quaternion x = random_quat(rng);
        const UnitQuaternion q = UnitQuaternion::from_axis_angle(u, theta);

        const Quaternion y = rotate(x, q);
        const Vec3 expect = rodrigues_rotate(x.imag(), u, theta);

        worst = std::fmax(worst, std::fabs(y.x - expect.x));
        worst = std::fmax(worst, std::fabs(y.y - expect.y));
        worst = std::fmax(worst, std::fabs(y.z - expect.z));
        worst = std::fmax(worst, std::fabs(y.w - x.w));             // real part fixed
        worst = std::fmax(worst, std::fabs(y.norm() - x.norm()));   // length fixed
    }

    SuiteResult r;
    r.name = "rotation-oracle";
    r.max_residual = worst / 1e-10;
    r.pass = r.max_residual <= 1.0;
    r.detail = fmt("max gap vs axis-angle formula %.3g (tol 1e-10)", worst);
    return r;
}

SuiteResult check_gradients(std::uint64_t seed, int instances) {
    Rng rng = Rng::stream(seed, 13);
    const double step = 1e-5;
    const double rtol = 1e-4, atol = 1e-9;
    double worst_ratio = 0.0; // |analytic - fd| / (atol + rtol*max(|a|,|fd|))
    bool sparse_ok = true;

    for (int inst = 0; inst < instances; ++inst) {
        const auto k = static_cast<std::int32_t>(1 + rng.below(8));
        const auto n_e = static_cast<std::int32_t>(2 + rng.below(4));
        const auto n_r = static_cast<std::int32_t>(1 + rng.below(3));
        const auto n_tau = static_cast<std::int32_t>(1 + rng.below(3));
        const int eta = static_cast<int>(1 + rng.below(3));

        ModelParams p = init_params(n_e, n_r, n_tau, k, rng);
        p.agg = (inst % 2 == 0) ? ScoreAgg::l1 : ScoreAgg::l2; // both aggregations covered

        const Quadruple pos{static_cast<std::int32_t>(rng.below(n_e)),
                            static_cast<std::int32_t>(rng.below(n_r)),
                            static_cast<std::int32_t>(rng.below(n_e)),
                            static_cast<std::int32_t>(rng.below(n_tau))};
        const std::vector<Quadruple> negs = negative_samples(pos, eta, rng, n_e);

        // A margin near the positive's score keeps both sigmoid factors away
        // from saturation, so finite differences stay well conditioned.
        const double gamma = std::fmax(0.1, score_value(p, pos) + rng.uniform(-1.0, 1.0));

        SparseGrads grads = gradients(p, pos, negs, gamma);

        std::set<std::pair<int, std::int32_t>> touched;
        touched.insert({static_cast<int>(Table::relation), pos.r});
        touched.insert({static_cast<int>(Table::time), pos.t});
        touched.insert({static_cast<int>(Table::entity), pos.s});
        touched.insert({static_cast<int>(Table::entity), pos.o});
        for (const Quadruple& n : negs) {
            touched.insert({static_cast<int>(Table::entity), n.s});
            touched.insert({static_cast<int>(Table::entity), n.o});
        }

        for (const SparseGrads::Entry& entry : grads.entries()) {
            if (!touched.count({static_cast<int>(entry.table), entry.row}))
                sparse_ok = false;

            QuaternionTable& table = entry.table == Table::entity    ? p.entity
                                     : entry.table == Table::relation ? p.relation
                                                                      : p.time;
            const QuatView pv = table.row(static_cast<std::size_t>(entry.row));
            const ConstQuatView gv = entry.g.view();
            double* const pchan[4] = {pv.w, pv.x, pv.y, pv.z};
            const double* const gchan[4] = {gv.w, gv.x, gv.y, gv.z};

            for (int c = 0; c < 4; ++c) {
                for (std::int32_t m = 0; m < k; ++m) {
                    double& cell = pchan[c][m];
                    const double saved = cell;
                    cell = saved + step;
                    const double up = loss(p, pos, negs, gamma);
                    cell = saved - step;
                    const double down = loss(p, pos, negs, gamma);
                    cell = saved;

                    const double fd = (up - down) / (2.0 * step);
                    const double a = gchan[c][m];
                    const double ratio =
                        std::fabs(a - fd) / (atol + rtol * std::fmax(std::fabs(a), std::fabs(fd)));
                    worst_ratio = std::fmax(worst_ratio, ratio);
                }
            }
        }
    }

    SuiteResult r;
    r.name = "gradient-check";
    r.max_residual = worst_ratio;
    r.pass = worst_ratio <= 1.0 && sparse_ok;
    r.detail = fmt("worst |analytic-fd| at %.3g of the 1e-4 relative budget", worst_ratio) +
               (sparse_ok ? "" : "; gradient touched an unrelated row");
    return r;
}

namespace {

// Completely separate scoring route for the ranking oracle: per-coordinate
// scalar quaternion calls, no kernel involvement.
double oracle_score(const ModelParams& p, const Quadruple& q) {
    double sum = 0.0, sum_sq = 0.0;
    const ConstQuatView s = p.entity.row(q.s), r = p.relation.row(q.r), o = p.entity.row(q.o),
                        tau = p.time.row(q.t);
    for (std::int32_t m = 0; m < p.k; ++m) {
        const UnitQuaternion ut = normalize(tau.at(m));
        const Quaternion st = rotate(s.at(m), ut);
        const Quaternion ot = rotate(o.at(m), ut);
        const Quaternion res = st + r.at(m) - ot.conjugate();
        sum += res.norm();
        sum_sq += res.norm_sq();
    }
    return p.agg == ScoreAgg::l1 ? sum : std::sqrt(sum_sq);
}

std::int32_t oracle_rank(const ModelParams& p, const FilterIndex& filter, const Quadruple& q,
                         Side side) {
    const std::vector<std::int32_t>& known =
        side == Side::tail ? filter.tails(q.s, q.r, q.t) : filter.heads(q.r, q.o, q.t);
    const std::int32_t answer = side == Side::tail ? q.o : q.s;

    std::vector<double> scores;
    double true_score = 0.0;
    for (std::int32_t ent = 0; ent < p.n_entities(); ++ent) {
        Quadruple candidate = q;
        (side == Side::tail ? candidate.o : candidate.s) = ent;
        const bool is_answer = ent == answer;
        if (!is_answer && std::binary_search(known.begin(), known.end(), ent))
            continue;
        const double sc = oracle_score(p, candidate);
        scores.push_back(sc);
        if (is_answer)
            true_score = sc;
    }
    std::sort(scores.begin(), scores.end());
    const auto below = std::lower_bound(scores.begin(), scores.end(), true_score);
    return static_cast<std::int32_t>(below - scores.begin()) + 1;
}

} // namespace

SuiteResult check_ranking_oracle(std::uint64_t seed, int graphs) {
    Rng rng = Rng::stream(seed, 14);
    std::int64_t queries = 0, mismatches = 0;

    for (int g = 0; g < graphs; ++g) {
        const auto n_e = static_cast<std::int32_t>(2 + rng.below(9));
        const auto n_r = static_cast<std::int32_t>(1 + rng.below(5));
        const auto n_tau = static_cast<std::int32_t>(1 + rng.below(4));
        const auto k = static_cast<std::int32_t>(1 + rng.below(4));
        const int n_facts = static_cast<int>(10 + rng.below(21));

        std::vector<RawFact> raw;
        for (int i = 0; i < n_facts; ++i)
            raw.push_back({"e" + std::to_string(rng.below(n_e)), "r" + std::to_string(rng.below(n_r)),
                           "e" + std::to_string(rng.below(n_e)), std::to_string(rng.below(n_tau))});
        const std::size_t cut1 = raw.size() * 6 / 10, cut2 = raw.size() * 8 / 10;
        const Dataset data = assemble_dataset(
            {raw.begin(), raw.begin() + cut1}, {raw.begin() + cut1, raw.begin() + cut2},
            {raw.begin() + cut2, raw.end()}, TimeMode::year, 1);
        const FilterIndex filter(data);

        ModelParams p = init_params(data.vocab.n_entities(), data.vocab.n_relations(),
                                    data.vocab.n_times(), k, rng);
        p.agg = (g % 2 == 0) ? ScoreAgg::l1 : ScoreAgg::l2;

        for (const auto* split : {&data.train, &data.valid, &data.test}) {
            for (const Quadruple& q : *split) {
                for (const Side side : {Side::head, Side::tail}) {
                    ++queries;
                    if (rank(q, p, filter, side) != oracle_rank(p, filter, q, side))
                        ++mismatches;
                }
            }
        }
    }

    SuiteResult r;
    r.name = "ranking-oracle";
    r.max_residual = static_cast<double>(mismatches);
    r.pass = mismatches == 0;
    r.detail = fmt("%.0f of %.0f ranks differ from materialize-filter-sort",
                   static_cast<double>(mismatches), static_cast<double>(queries));
    return r;
}

SuiteResult check_kernel_equivalence(std::uint64_t seed) {
    SuiteResult r;
    r.name = "kernel-equivalence";
    if (!kern::avx2_supported()) {
        r.pass = true;
        r.detail = "avx2 unavailable on this machine; scalar kernels are the only variant";
        return r;
    }

    const kern::Ops& sc = kern::scalar_ops();
    const kern::Ops& vx = kern::avx2_ops();
    Rng rng = Rng::stream(seed, 15);
    double worst_abs = 0.0, worst_score = 0.0;

    for (const std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{7},
                                std::size_t{32}, std::size_t{67}}) {
        QuaternionVector a(k), b(k), c(k), out_s(k), out_v(k);
        std::vector<double> inv_s(k), inv_v(k);
        for (QuaternionVector* v : {&a, &b, &c})
            for (std::size_t i = 0; i < 4 * k; ++i)
                v->raw()[i] = rng.uniform(-2.0, 2.0);

        const auto compare = [&](const QuaternionVector& x, const QuaternionVector& y) {
            for (std::size_t i = 0; i < 4 * k; ++i)
                worst_abs = std::fmax(worst_abs, std::fabs(x.raw()[i] - y.raw()[i]));
        };

        sc.normalize(a.view(), out_s.view(), inv_s.data());
        vx.normalize(a.view(), out_v.view(), inv_v.data());
        compare(out_s, out_v);
        for (std::size_t i = 0; i < k; ++i)
            worst_abs = std::fmax(worst_abs, std::fabs(inv_s[i] - inv_v[i]));

        sc.hamilton(a.view(), b.view(), out_s.view());
        vx.hamilton(a.view(), b.view(), out_v.view());
        compare(out_s, out_v);

        QuaternionVector unit(k);
        sc.normalize(a.view(), unit.view(), nullptr);
        for (const bool conj : {false, true}) {
            sc.sandwich(unit.view(), b.view(), out_s.view(), conj);
            vx.sandwich(unit.view(), b.view(), out_v.view(), conj);
            compare(out_s, out_v);
        }

        sc.residual(a.view(), b.view(), c.view(), out_s.view());
        vx.residual(a.view(), b.view(), c.view(), out_v.view());
        compare(out_s, out_v);

        double n1s, n2s, n1v, n2v;
        sc.norms(a.view(), &n1s, &n2s);
        vx.norms(a.view(), &n1v, &n2v);
        worst_score = std::fmax(worst_score, std::fabs(n1s - n1v) / std::fmax(1.0, std::fabs(n1s)));
        worst_score = std::fmax(worst_score, std::fabs(n2s - n2v) / std::fmax(1.0, std::fabs(n2s)));

        for (const bool l1 : {true, false}) {
            const double ts = sc.score_tail(a.view(), b.view(), unit.view(), l1);
            const double tv = vx.score_tail(a.view(), b.view(), unit.view(), l1);
            worst_score = std::fmax(worst_score, std::fabs(ts - tv) / std::fmax(1.0, std::fabs(ts)));
            const double hs = sc.score_head(a.view(), b.view(), unit.view(), l1);
            const double hv = vx.score_head(a.view(), b.view(), unit.view(), l1);
            worst_score = std::fmax(worst_score, std::fabs(hs - hv) / std::fmax(1.0, std::fabs(hs)));
        }

        std::vector<double> ps(4 * k), pv(4 * k), accs(4 * k, 0.0), accv(4 * k, 0.0), grad(4 * k);
        for (std::size_t i = 0; i < 4 * k; ++i) {
            ps[i] = pv[i] = rng.uniform(-1.0, 1.0);
            grad[i] = rng.uniform(-1.0, 1.0);
        }
        for (int step = 0; step < 3; ++step) {
            sc.adagrad(ps.data(), accs.data(), grad.data(), 4 * k, 0.1, 1e-10);
            vx.adagrad(pv.data(), accv.data(), grad.data(), 4 * k, 0.1, 1e-10);
        }
        for (std::size_t i = 0; i < 4 * k; ++i) {
            worst_abs = std::fmax(worst_abs, std::fabs(ps[i] - pv[i]));
            worst_abs = std::fmax(worst_abs, std::fabs(accs[i] - accv[i]));
        }
    }

    r.max_residual = std::fmax(worst_abs / 1e-10, worst_score / 1e-12);
    r.pass = r.max_residual <= 1.0;
    r.detail = fmt("coordinate gap %.3g (tol 1e-10), reduction gap %.3g rel (tol 1e-12)", worst_abs,
                   worst_score);
    return r;
}

std::vector<SuiteResult> run_all_checks(std::uint64_t seed) {
    return {check_quaternion_algebra(seed), check_rotation_oracle(seed), check_gradients(seed),
            check_ranking_oracle(seed), check_kernel_equivalence(seed)};
}

} // namespace rqvs
