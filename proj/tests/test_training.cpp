#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rotateqvs/dataset.hpp"
#include "rotateqvs/model.hpp"
#include "rotateqvs/rng.hpp"
#include "rotateqvs/training.hpp"

using namespace rqvs;
namespace fs = std::filesystem;

namespace {

bool tables_identical(const QuaternionTable& a, const QuaternionTable& b) {
    return a.raw_size() == b.raw_size() &&
           std::memcmp(a.raw(), b.raw(), a.raw_size() * sizeof(double)) == 0;
}

// Ring over n entities with a forward and a skip-two relation, repeated over a
// few years. The held-out facts also appear in train, which keeps validation
// ranks meaningful on a graph this small.
Dataset ring_dataset(int n_entities, int n_times) {
    const auto ent = [](int i) { return "e" + std::to_string(i); };
    const auto year = [](int t) { return std::to_string(2000 + t); };
    std::vector<RawFact> train, valid, test;
    for (int t = 0; t < n_times; ++t)
        for (int i = 0; i < n_entities; ++i) {
            train.push_back({ent(i), "next", ent((i + 1) % n_entities), year(t)});
            train.push_back({ent((i + 2) % n_entities), "back2", ent(i), year(t)});
        }
    valid.push_back({ent(0), "next", ent(1), year(0)});
    valid.push_back({ent(2), "back2", ent(0), year(1 % n_times)});
    test.push_back({ent(1), "next", ent(2), year(0)});
    return assemble_dataset(train, valid, test, TimeMode::year, 1);
}

} // namespace

TEST_CASE("published per-dataset settings") {
    for (const char* name : {"icews14", "icews05-15", "yago11k", "gdelt"}) {
        const TrainConfig cfg = default_config(name);
        CHECK(cfg.lr == 0.1);
        CHECK(cfg.k == 500);
        CHECK(cfg.eta == 10);
    }
    CHECK(default_config("icews14").gamma == 110.0);
    CHECK(default_config("icews14").granularity == 1);
    CHECK(default_config("icews05-15").gamma == 120.0);
    CHECK(default_config("icews05-15").granularity == 2);
    CHECK(default_config("yago11k").gamma == 50.0);
    CHECK(default_config("yago11k").granularity == 100);
    CHECK(default_config("gdelt").gamma == 110.0);
    CHECK(default_config("gdelt").granularity == 1);
    CHECK_THROWS_AS((void)default_config("freebase"), UnknownDatasetError);
}

TEST_CASE("out-of-range configs are rejected") {
    const TrainConfig good;
    CHECK_NOTHROW(good.validate());

    TrainConfig c = good;
    c.k = 0;
    CHECK_THROWS_AS(c.validate(), InfeasibleSpecError);
    c = good;
    c.lr = 0.0;
    CHECK_THROWS_AS(c.validate(), InfeasibleSpecError);
    c = good;
    c.eta = 0;
    CHECK_THROWS_AS(c.validate(), InfeasibleSpecError);
    c = good;
    c.gamma = -1.0;
    CHECK_THROWS_AS(c.validate(), InfeasibleSpecError);
    c = good;
    c.granularity = 0;
    CHECK_THROWS_AS(c.validate(), InfeasibleSpecError);
    c = good;
    c.epochs = -1;
    CHECK_THROWS_AS(c.validate(), InfeasibleSpecError);
    c = good;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), InfeasibleSpecError);
    c = good;
    c.valid_every = 0;
    CHECK_THROWS_AS(c.validate(), InfeasibleSpecError);
}

TEST_CASE("adagrad leaves parameters alone under zero gradients") {
    Rng rng(3);
    ModelParams p = init_params(3, 2, 2, 2, rng);
    const ModelParams before = p;
    AdagradState state = make_adagrad_state(p);

    SparseGrads none(2);
    adagrad_step(p, none, state, 0.1);
    CHECK(tables_identical(p.entity, before.entity));
    CHECK(tables_identical(p.relation, before.relation));
    CHECK(tables_identical(p.time, before.time));

    // an explicitly zeroed accumulator row changes nothing either
    SparseGrads zeroed(2);
    (void)zeroed.at(Table::entity, 1);
    adagrad_step(p, zeroed, state, 0.1);
    CHECK(tables_identical(p.entity, before.entity));
}

TEST_CASE("first adagrad step moves by about lr in the gradient direction") {
    Rng rng(4);
    ModelParams p = init_params(3, 1, 1, 2, rng);
    AdagradState state = make_adagrad_state(p);
    const double w0 = p.entity.row(1).at(0).w;
    const double x0 = p.entity.row(1).at(0).x;
    const double y0 = p.entity.row(1).at(0).y;
    const Quaternion untouched = p.entity.row(2).at(1);

    SparseGrads g(2);
    g.at(Table::entity, 1).set(0, {2.0, -3.0, 0.0, 0.5});
    const double lr = 0.1;
    adagrad_step(p, g, state, lr);

    CHECK(p.entity.row(1).at(0).w - w0 == doctest::Approx(-lr).epsilon(1e-9));
    CHECK(p.entity.row(1).at(0).x - x0 == doctest::Approx(+lr).epsilon(1e-9));
    CHECK(p.entity.row(1).at(0).y == y0); // zero gradient: exactly unchanged
    const Quaternion after = p.entity.row(2).at(1);
    CHECK(after.w == untouched.w);
    CHECK(after.x == untouched.x);

    // identical second step is strictly smaller and the accumulator is exact
    const double w1 = p.entity.row(1).at(0).w;
    adagrad_step(p, g, state, lr);
    const double d1 = w1 - w0, d2 = p.entity.row(1).at(0).w - w1;
    CHECK(std::fabs(d2) < std::fabs(d1));
    CHECK(std::fabs(d2) == doctest::Approx(lr * 2.0 / std::sqrt(8.0)).epsilon(1e-9));
    CHECK(state.entity.row(1).at(0).w == 8.0);
}

TEST_CASE("zero epochs return the seeded initialization untouched") {
    const Dataset data = ring_dataset(4, 2);
    TrainConfig cfg;
    cfg.k = 3;
    cfg.epochs = 0;
    cfg.seed = 99;

    const TrainResult result = train(data, cfg);
    CHECK(result.log.empty());
    CHECK(result.best_mrr == -1.0);
    CHECK(result.best_epoch == 0);

    Rng init_rng = Rng::stream(cfg.seed, 0);
    const ModelParams expect = init_params(data.vocab.n_entities(), data.vocab.n_relations(),
                                           data.vocab.n_times(), cfg.k, init_rng);
    CHECK(tables_identical(result.best.entity, expect.entity));
    CHECK(tables_identical(result.best.relation, expect.relation));
    CHECK(tables_identical(result.best.time, expect.time));
    CHECK(result.best.seed == 99);
}

TEST_CASE("same seed, same run, bit for bit") {
    const Dataset data = ring_dataset(5, 2);
    TrainConfig cfg;
    cfg.k = 4;
    cfg.epochs = 3;
    cfg.eta = 2;
    cfg.gamma = 4.0;
    cfg.batch_size = 8;
    cfg.valid_every = 2;
    cfg.seed = 31;

    const TrainResult a = train(data, cfg);
    const TrainResult b = train(data, cfg);
    CHECK(tables_identical(a.best.entity, b.best.entity));
    CHECK(tables_identical(a.best.relation, b.best.relation));
    CHECK(tables_identical(a.best.time, b.best.time));
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].mean_loss == b.log[i].mean_loss);
        CHECK(a.log[i].valid_mrr.has_value() == b.log[i].valid_mrr.has_value());
        if (a.log[i].valid_mrr)
            CHECK(*a.log[i].valid_mrr == *b.log[i].valid_mrr);
    }

    TrainConfig other = cfg;
    other.seed = 32;
    const TrainResult c = train(data, other);
    CHECK(!tables_identical(a.best.entity, c.best.entity));
}

TEST_CASE("loss falls from the start on a small graph") {
    const Dataset data = ring_dataset(10, 3);
    TrainConfig cfg;
    cfg.k = 10;
    cfg.epochs = 200;
    cfg.eta = 2;
    cfg.gamma = 5.0;
    cfg.batch_size = 32;
    cfg.valid_every = 25;
    cfg.seed = 1;

    const TrainResult result = train(data, cfg);
    REQUIRE(result.log.size() == 200);
    for (int i = 0; i + 1 < 10; ++i)
        CHECK(result.log[i].mean_loss > result.log[i + 1].mean_loss);
    CHECK(result.log.front().mean_loss > result.log.back().mean_loss);

    // keep-best contract: reported best is the maximum validated MRR
    double best_seen = -1.0;
    for (const EpochLog& e : result.log)
        if (e.valid_mrr)
            best_seen = std::max(best_seen, *e.valid_mrr);
    CHECK(result.best_mrr == best_seen);
    CHECK(result.best_mrr > 0.0);
    CHECK(result.log.back().valid_mrr.has_value()); // final epoch always validates
    CHECK(result.best.epoch == result.best_epoch);
}

TEST_CASE("training demands a non-empty train split") {
    Dataset data = ring_dataset(3, 1);
    data.train.clear();
    TrainConfig cfg;
    cfg.k = 2;
    cfg.epochs = 1;
    CHECK_THROWS_AS((void)train(data, cfg), InfeasibleSpecError);
}

TEST_CASE("the training log lands on disk as csv") {
    std::vector<EpochLog> log(2);
    log[0].epoch = 1;
    log[0].mean_loss = 1.5;
    log[1].epoch = 2;
    log[1].mean_loss = 0.75;
    log[1].valid_mrr = 0.25;

    const std::string path = (fs::temp_directory_path() / "rqvs_test_log.csv").string();
    write_train_log_csv(log, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,mean_loss,valid_mrr");
    std::getline(in, line);
    CHECK(line == "1,1.5,");
    std::getline(in, line);
    CHECK(line == "2,0.75,0.25");
    fs::remove(path);

    CHECK_THROWS_AS(write_train_log_csv(log, "/nonexistent-dir/x.csv"), IoError);
}
