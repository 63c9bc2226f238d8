#include "rotateqvs/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rqvs {
namespace {

double sigmoid(double x) {
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow on either side.
double softplus(double x) {
    return std::fmax(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double aggregate(double sum_norm, double sum_sq, ScoreAgg agg) {
    return agg == ScoreAgg::l1 ? sum_norm : std::sqrt(sum_sq);
}

} // namespace

ScoreAgg score_agg_from_string(const std::string& name) {
    if (name == "l1")
        return ScoreAgg::l1;
    if (name == "l2")
        return ScoreAgg::l2;
    throw UnknownLabelError(name);
}

const char* to_string(ScoreAgg agg) { return agg == ScoreAgg::l1 ? "l1" : "l2"; }

ModelParams init_params(std::int32_t n_e, std::int32_t n_r, std::int32_t n_tau, std::int32_t k,
                        Rng& rng) {
    ModelParams p;
    p.k = k;
    p.entity = QuaternionTable(static_cast<std::size_t>(n_e), static_cast<std::size_t>(k));
    p.relation = QuaternionTable(static_cast<std::size_t>(n_r), static_cast<std::size_t>(k));
    p.time = QuaternionTable(static_cast<std::size_t>(n_tau), static_cast<std::size_t>(k));

    const double bound = 6.0 / std::sqrt(4.0 * static_cast<double>(k));
    for (QuaternionTable* table : {&p.entity, &p.relation, &p.time}) {
        double* raw = table->raw();
        for (std::size_t i = 0, n = table->raw_size(); i < n; ++i)
            raw[i] = rng.uniform(-bound, bound);
    }
    return p;
}

QuaternionVector time_specific_entity(ConstQuatView e, ConstQuatView tau_raw) {
    if (e.n != tau_raw.n)
        throw ShapeMismatchError("entity and time coordinate counts differ");
    QuaternionVector ut(e.n), out(e.n);
    kern::active().normalize(tau_raw, ut.view(), nullptr);
    kern::active().sandwich(ut.view(), e, out.view(), false);
    return out;
}

ScoreBreakdown score(const ModelParams& p, const Quadruple& q) {
    const kern::Ops& ops = kern::active();
    const std::size_t k = static_cast<std::size_t>(p.k);

    ScoreBreakdown b;
    QuaternionVector ut(k);
    ops.normalize(p.time.row(q.t), ut.view(), nullptr);

    b.s_t.assign_zero(k);
    b.o_t.assign_zero(k);
    b.residual.assign_zero(k);
    ops.sandwich(ut.view(), p.entity.row(q.s), b.s_t.view(), false);
    ops.sandwich(ut.view(), p.entity.row(q.o), b.o_t.view(), false);
    ops.residual(b.s_t.view(), p.relation.row(q.r), b.o_t.view(), b.residual.view());

    double l1 = 0.0, l2 = 0.0;
    ops.norms(b.residual.view(), &l1, &l2);
    b.value = aggregate(l1, l2, p.agg);
    return b;
}

double score_value(const ModelParams& p, const Quadruple& q) { return score(p, q).value; }

double loss(const ModelParams& p, const Quadruple& pos, const std::vector<Quadruple>& negs,
            double gamma) {
    double total = softplus(score_value(p, pos) - gamma);
    for (const Quadruple& neg : negs)
        total += softplus(gamma - score_value(p, neg));
    return total;
}

QuatView SparseGrads::at(Table table, std::int32_t row) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(table) << 32) | static_cast<std::uint32_t>(row);
    const auto [it, fresh] = index_.emplace(key, entries_.size());
    if (fresh)
        entries_.push_back({table, row, QuaternionVector(static_cast<std::size_t>(k_))});
    return entries_[it->second].g.view();
}

void SparseGrads::clear() {
    entries_.clear();
    index_.clear();
}

void ModelWorkspace::resize(std::int32_t k) {
    const std::size_t n = static_cast<std::size_t>(k);
    if (ut.size() != n) {
        for (QuaternionVector* v : {&ut, &s_t, &o_t, &res, &g, &h, &t1, &t2})
            v->assign_zero(n);
        inv_norms.assign(n, 0.0);
    }
}

namespace {

// Backward pass for one scored example. wgt is dL/df. res holds the forward
// residual, f its aggregated norm. Writes into the four touched rows.
//
// Per coordinate, with G the residual direction scaled by wgt, q the unit time
// quaternion, and e the base (pre-rotation) entity:
//   d/d r      = G
//   d/d s      = conj(q) G q            (adjoint of the rotation)
//   d/d o      = conj(q) H q,  H = G with only the real channel negated
//                (the residual holds -conj(o_t))
//   d/d q      = G q conj(e_s) + conj(G) q e_s  +  H q conj(e_o) + conj(H) q e_o
//   d/d tau    = (d/d q - q <q, d/d q>) / |tau_raw|   (normalization chain)
void backprop_example(const ModelParams& p, const Quadruple& q, ConstQuatView ut,
                      const double* inv_norms, ConstQuatView res, double f, double wgt,
                      ModelWorkspace& ws, SparseGrads& out) {
    const std::size_t k = res.n;
    const QuatView G = ws.g.view();

    if (p.agg == ScoreAgg::l1) {
        for (std::size_t m = 0; m < k; ++m) {
            const Quaternion rm = res.at(m);
            const double nm = rm.norm();
            G.set(m, nm > 0.0 ? (wgt / nm) * rm : Quaternion{});
        }
    } else {
        const double scale = f > 0.0 ? wgt / f : 0.0;
        for (std::size_t m = 0; m < k; ++m)
            G.set(m, scale * res.at(m));
    }

    const QuatView grad_s = out.at(Table::entity, q.s);
    const QuatView grad_r = out.at(Table::relation, q.r);
    const QuatView grad_o = out.at(Table::entity, q.o);
    const QuatView grad_t = out.at(Table::time, q.t);
    const ConstQuatView ent_s = p.entity.row(q.s);
    const ConstQuatView ent_o = p.entity.row(q.o);

    for (std::size_t m = 0; m < k; ++m) {
        const Quaternion g = G.at(m);
        const Quaternion h{-g.w, g.x, g.y, g.z};
        const Quaternion quat = ut.at(m);
        const Quaternion qc = quat.conjugate();
        const Quaternion es = ent_s.at(m);
        const Quaternion eo = ent_o.at(m);

        grad_r.add(m, g);
        grad_s.add(m, hamilton(hamilton(qc, g), quat));
        grad_o.add(m, hamilton(hamilton(qc, h), quat));

        const Quaternion gq = hamilton(hamilton(g, quat), es.conjugate()) +
                              hamilton(hamilton(g.conjugate(), quat), es) +
                              hamilton(hamilton(h, quat), eo.conjugate()) +
                              hamilton(hamilton(h.conjugate(), quat), eo);
        // Tangential projection undoes the unit normalization.
        grad_t.add(m, inv_norms[m] * (gq - inner(quat, gq) * quat));
    }
}

} // namespace

double loss_and_gradients(const ModelParams& p, const Quadruple& pos,
                          const std::vector<Quadruple>& negs, double gamma, ModelWorkspace& ws,
                          SparseGrads& out) {
    const kern::Ops& ops = kern::active();
    ws.resize(p.k);

    ops.normalize(p.time.row(pos.t), ws.ut.view(), ws.inv_norms.data());
    ops.sandwich(ws.ut.view(), p.entity.row(pos.s), ws.s_t.view(), false);
    ops.sandwich(ws.ut.view(), p.entity.row(pos.o), ws.o_t.view(), false);

    double sum_norm = 0.0, sum_sq = 0.0;
    ops.residual(ws.s_t.view(), p.relation.row(pos.r), ws.o_t.view(), ws.res.view());
    ops.norms(ws.res.view(), &sum_norm, &sum_sq);
    const double f_pos = aggregate(sum_norm, sum_sq, p.agg);

    double total = softplus(f_pos - gamma);
    backprop_example(p, pos, ws.ut.view(), ws.inv_norms.data(), ws.res.view(), f_pos,
                     sigmoid(f_pos - gamma), ws, out);

    for (const Quadruple& neg : negs) {
        // Negatives share pos's time and one entity; only the corrupted side
        // needs a fresh rotation.
        ConstQuatView st = ws.s_t.view(), ot = ws.o_t.view();
        if (neg.s != pos.s) {
            ops.sandwich(ws.ut.view(), p.entity.row(neg.s), ws.t1.view(), false);
            st = ws.t1.view();
        }
        if (neg.o != pos.o) {
            ops.sandwich(ws.ut.view(), p.entity.row(neg.o), ws.t2.view(), false);
            ot = ws.t2.view();
        }
        ops.residual(st, p.relation.row(neg.r), ot, ws.res.view());
        ops.norms(ws.res.view(), &sum_norm, &sum_sq);
        const double f_neg = aggregate(sum_norm, sum_sq, p.agg);

        total += softplus(gamma - f_neg);
        backprop_example(p, neg, ws.ut.view(), ws.inv_norms.data(), ws.res.view(), f_neg,
                         -sigmoid(gamma - f_neg), ws, out);
    }
    return total;
}

SparseGrads gradients(const ModelParams& p, const Quadruple& pos,
                      const std::vector<Quadruple>& negs, double gamma) {
    SparseGrads out(p.k);
    ModelWorkspace ws;
    loss_and_gradients(p, pos, negs, gamma, ws, out);
    return out;
}

namespace {

constexpr char kMagic[] = "rotateqvs-checkpoint 1";

void write_doubles_le(std::ofstream& out, const double* p, std::size_t n) {
    unsigned char buf[8 * 1024];
    while (n > 0) {
        const std::size_t chunk = n < 1024 ? n : 1024;
        for (std::size_t i = 0; i < chunk; ++i) {
            const std::uint64_t bits = std::bit_cast<std::uint64_t>(p[i]);
            for (int b = 0; b < 8; ++b)
                buf[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
        }
        out.write(reinterpret_cast<const char*>(buf), static_cast<std::streamsize>(8 * chunk));
        p += chunk;
        n -= chunk;
    }
}

void read_doubles_le(std::ifstream& in, double* p, std::size_t n, const std::string& path) {
    unsigned char buf[8 * 1024];
    while (n > 0) {
        const std::size_t chunk = n < 1024 ? n : 1024;
        in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(8 * chunk));
        if (static_cast<std::size_t>(in.gcount()) != 8 * chunk)
            throw IoError("checkpoint truncated: " + path);
        for (std::size_t i = 0; i < chunk; ++i) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= static_cast<std::uint64_t>(buf[i * 8 + b]) << (8 * b);
            p[i] = std::bit_cast<double>(bits);
        }
        p += chunk;
        n -= chunk;
    }
}

} // namespace

void save_checkpoint(const ModelParams& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write checkpoint: " + path);

    out << kMagic << '\n'
        << "n_e " << p.n_entities() << '\n'
        << "n_r " << p.n_relations() << '\n'
        << "n_tau " << p.n_times() << '\n'
        << "k " << p.k << '\n'
        << "score_agg " << to_string(p.agg) << '\n'
        << "seed " << p.seed << '\n'
        << "epoch " << p.epoch << '\n'
        << "end_header\n";

    for (const QuaternionTable* table : {&p.entity, &p.relation, &p.time})
        write_doubles_le(out, table->raw(), table->raw_size());
    if (!out)
        throw IoError("write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open checkpoint: " + path);

    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw IoError("not a checkpoint file: " + path);

    std::int64_t n_e = -1, n_r = -1, n_tau = -1, k = -1, epoch = 0;
    std::uint64_t seed = 0;
    std::string agg = "l1";
    while (std::getline(in, line) && line != "end_header") {
        std::istringstream fields(line);
        std::string key;
        fields >> key;
        if (key == "n_e")
            fields >> n_e;
        else if (key == "n_r")
            fields >> n_r;
        else if (key == "n_tau")
            fields >> n_tau;
        else if (key == "k")
            fields >> k;
        else if (key == "score_agg")
            fields >> agg;
        else if (key == "seed")
            fields >> seed;
        else if (key == "epoch")
            fields >> epoch;
        else
            throw IoError("unknown checkpoint header field '" + key + "' in " + path);
        if (!fields)
            throw IoError("bad checkpoint header line '" + line + "' in " + path);
    }
    if (line != "end_header")
        throw IoError("checkpoint header not terminated: " + path);
    if (n_e < 1 || n_r < 1 || n_tau < 1 || k < 1)
        throw IoError("checkpoint header incomplete: " + path);

    ModelParams p;
    p.k = static_cast<std::int32_t>(k);
    p.agg = score_agg_from_string(agg);
    p.seed = seed;
    p.epoch = static_cast<std::int32_t>(epoch);
    p.entity = QuaternionTable(static_cast<std::size_t>(n_e), static_cast<std::size_t>(k));
    p.relation = QuaternionTable(static_cast<std::size_t>(n_r), static_cast<std::size_t>(k));
    p.time = QuaternionTable(static_cast<std::size_t>(n_tau), static_cast<std::size_t>(k));

    for (QuaternionTable* table : {&p.entity, &p.relation, &p.time})
        read_doubles_le(in, table->raw(), table->raw_size(), path);

    in.peek();
    if (!in.eof())
        throw IoError("trailing bytes after tables: " + path);
    return p;
}

} // namespace rqvs
