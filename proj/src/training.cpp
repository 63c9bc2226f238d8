#include "rotateqvs/training.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "rotateqvs/evaluation.hpp"

namespace rqvs {

void TrainConfig::validate() const {
    const auto fail = [](const char* why) { throw InfeasibleSpecError(why); };
    if (k < 1)
        fail("embedding dimension must be >= 1");
    if (lr <= 0.0)
        fail("learning rate must be positive");
    if (eta < 1)
        fail("need at least one negative per positive");
    if (gamma <= 0.0)
        fail("margin must be positive");
    if (granularity < 1)
        fail("time granularity must be >= 1");
    if (epochs < 0)
        fail("epoch count must be >= 0");
    if (batch_size < 1)
        fail("batch size must be >= 1");
    if (valid_every < 1)
        fail("validation interval must be >= 1");
}

TrainConfig default_config(const std::string& dataset_name) {
    TrainConfig cfg; // lr 0.1, k 500, eta 10 hold for every benchmark
    if (dataset_name == "icews14") {
        cfg.gamma = 110.0;
        cfg.granularity = 1;
    } else if (dataset_name == "icews05-15") {
        cfg.gamma = 120.0;
        cfg.granularity = 2;
    } else if (dataset_name == "yago11k") {
        cfg.gamma = 50.0;
        cfg.granularity = 100;
    } else if (dataset_name == "gdelt") {
        cfg.gamma = 110.0;
        cfg.granularity = 1;
    } else {
        throw UnknownDatasetError(dataset_name);
    }
    return cfg;
}

AdagradState make_adagrad_state(const ModelParams& p) {
    AdagradState state;
    state.entity = QuaternionTable(p.entity.rows(), p.entity.dim());
    state.relation = QuaternionTable(p.relation.rows(), p.relation.dim());
    state.time = QuaternionTable(p.time.rows(), p.time.dim());
    return state;
}

void adagrad_step(ModelParams& p, const SparseGrads& grads, AdagradState& state, double lr) {
    const kern::Ops& ops = kern::active();
    for (const SparseGrads::Entry& e : grads.entries()) {
        QuaternionTable* param = nullptr;
        QuaternionTable* acc = nullptr;
        switch (e.table) {
        case Table::entity:
            param = &p.entity;
            acc = &state.entity;
            break;
        case Table::relation:
            param = &p.relation;
            acc = &state.relation;
            break;
        case Table::time:
            param = &p.time;
            acc = &state.time;
            break;
        }
        const QuatView pv = param->row(static_cast<std::size_t>(e.row));
        const QuatView av = acc->row(static_cast<std::size_t>(e.row));
        const ConstQuatView gv = e.g.view();
        ops.adagrad(pv.w, av.w, gv.w, pv.n, lr, state.eps);
        ops.adagrad(pv.x, av.x, gv.x, pv.n, lr, state.eps);
        ops.adagrad(pv.y, av.y, gv.y, pv.n, lr, state.eps);
        ops.adagrad(pv.z, av.z, gv.z, pv.n, lr, state.eps);
    }
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, int threads,
                  const ImproveCallback& on_improve) {
    cfg.validate();
    if (data.train.empty())
        throw InfeasibleSpecError("cannot train on an empty train split");

    // Independent deterministic streams: 0 init, 1 shuffling, 2 negatives.
    Rng init_rng = Rng::stream(cfg.seed, 0);
    Rng shuffle_rng = Rng::stream(cfg.seed, 1);
    Rng neg_rng = Rng::stream(cfg.seed, 2);

    const std::int32_t n_e = data.vocab.n_entities();
    ModelParams p = init_params(n_e, data.vocab.n_relations(), data.vocab.n_times(), cfg.k,
                                init_rng);
    p.agg = cfg.agg;
    p.seed = cfg.seed;

    TrainResult result;
    if (cfg.epochs == 0) {
        result.best = p;
        return result;
    }

    const FilterIndex filter(data);
    AdagradState state = make_adagrad_state(p);
    SparseGrads grads(cfg.k);
    ModelWorkspace ws;

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    bool captured = false;
    for (std::int32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            grads.clear();
            for (std::size_t i = start; i < end; ++i) {
                const Quadruple& pos = data.train[order[i]];
                const std::vector<Quadruple> negs = negative_samples(pos, cfg.eta, neg_rng, n_e);
                epoch_loss += loss_and_gradients(p, pos, negs, cfg.gamma, ws, grads);
            }
            adagrad_step(p, grads, state, cfg.lr);
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.mean_loss = epoch_loss / static_cast<double>(data.train.size());

        const bool validate_now =
            !data.valid.empty() && (epoch % cfg.valid_every == 0 || epoch == cfg.epochs);
        if (validate_now) {
            const EvalReport report = evaluate(data.valid, p, filter, threads);
            entry.valid_mrr = report.all.mrr;
            if (report.all.mrr > result.best_mrr) {
                result.best_mrr = report.all.mrr;
                result.best_epoch = epoch;
                result.best = p;
                result.best.epoch = epoch;
                captured = true;
                if (on_improve)
                    on_improve(result.best, epoch, report.all.mrr);
            }
        }
        result.log.push_back(std::move(entry));
    }

    if (!captured) { // no validation split: final parameters are the result
        result.best = p;
        result.best.epoch = cfg.epochs;
        result.best_epoch = cfg.epochs;
    }
    return result;
}

void write_train_log_csv(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write training log: " + path);
    out << "epoch,mean_loss,valid_mrr\n";
    char buf[128];
    for (const EpochLog& e : log) {
        if (e.valid_mrr)
            std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", e.epoch, e.mean_loss, *e.valid_mrr);
        else
            std::snprintf(buf, sizeof buf, "%d,%.10g,\n", e.epoch, e.mean_loss);
        out << buf;
    }
}

} // namespace rqvs
