#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "rotateqvs/model.hpp"
#include "rotateqvs/quaternion.hpp"
#include "rotateqvs/rng.hpp"

using namespace rqvs;
namespace fs = std::filesystem;

namespace {

bool tables_identical(const QuaternionTable& a, const QuaternionTable& b) {
    return a.raw_size() == b.raw_size() &&
           std::memcmp(a.raw(), b.raw(), a.raw_size() * sizeof(double)) == 0;
}

// Overwrites entity row `o` so that the quadruple (s, r, o, t) scores exactly
// zero: conj(o_t) = s_t + r  =>  o = rotate_back(conj(s_t + r)).
void plant_zero_residual(ModelParams& p, const Quadruple& q) {
    const ConstQuatView s = p.entity.row(q.s), r = p.relation.row(q.r), tau = p.time.row(q.t);
    const QuatView o = p.entity.row(q.o);
    for (std::int32_t m = 0; m < p.k; ++m) {
        const Quaternion u = normalize(tau.at(m)).value();
        const Quaternion s_t = rotate(s.at(m), normalize(tau.at(m)));
        const Quaternion o_t = (s_t + r.at(m)).conjugate();
        o.set(m, hamilton(hamilton(u.conjugate(), o_t), u));
    }
}

} // namespace

TEST_CASE("initialization is deterministic and bounded") {
    Rng a(7), b(7);
    const ModelParams pa = init_params(4, 3, 5, 8, a);
    const ModelParams pb = init_params(4, 3, 5, 8, b);
    CHECK(tables_identical(pa.entity, pb.entity));
    CHECK(tables_identical(pa.relation, pb.relation));
    CHECK(tables_identical(pa.time, pb.time));

    const double bound = 6.0 / std::sqrt(4.0 * 8.0);
    for (const QuaternionTable* t : {&pa.entity, &pa.relation, &pa.time})
        for (std::size_t i = 0; i < t->raw_size(); ++i)
            CHECK(std::fabs(t->raw()[i]) <= bound);
}

TEST_CASE("initialization shapes follow the requested counts") {
    Rng rng(1);
    const ModelParams p = init_params(1, 1, 1, 1, rng);
    CHECK(p.entity.rows() == 1);
    CHECK(p.relation.rows() == 1);
    CHECK(p.time.rows() == 1);
    CHECK(p.entity.dim() == 1);
    CHECK(p.n_entities() == 1);
    CHECK(p.n_relations() == 1);
    CHECK(p.n_times() == 1);
}

TEST_CASE("an all-real time coordinate rotates nothing") {
    Rng rng(2);
    ModelParams p = init_params(1, 1, 1, 4, rng);
    const QuatView tau = p.time.row(0);
    for (std::size_t m = 0; m < 4; ++m)
        tau.set(m, {0.5 + 0.25 * static_cast<double>(m), 0, 0, 0});
    const QuaternionVector moved = time_specific_entity(p.entity.row(0), p.time.row(0));
    for (std::size_t m = 0; m < 4; ++m) {
        const Quaternion gap = moved.at(m) - p.entity.row(0).at(m);
        CHECK(std::fabs(gap.w) <= 1e-15);
        CHECK(std::fabs(gap.x) <= 1e-15);
        CHECK(std::fabs(gap.y) <= 1e-15);
        CHECK(std::fabs(gap.z) <= 1e-15);
    }
}

TEST_CASE("a pure-real entity is fixed by every time rotation") {
    Rng rng(3);
    ModelParams p = init_params(1, 1, 1, 5, rng);
    const QuatView e = p.entity.row(0);
    for (std::size_t m = 0; m < 5; ++m)
        e.set(m, {1.5 - 0.3 * static_cast<double>(m), 0, 0, 0});
    const QuaternionVector moved = time_specific_entity(p.entity.row(0), p.time.row(0));
    for (std::size_t m = 0; m < 5; ++m) {
        CHECK(std::fabs(moved.at(m).w - e.at(m).w) <= 1e-12);
        CHECK(std::fabs(moved.at(m).x) <= 1e-12);
        CHECK(std::fabs(moved.at(m).y) <= 1e-12);
        CHECK(std::fabs(moved.at(m).z) <= 1e-12);
    }
}

TEST_CASE("time rotation preserves real parts and coordinate norms") {
    Rng rng(4);
    const ModelParams p = init_params(2, 1, 2, 16, rng);
    const QuaternionVector moved = time_specific_entity(p.entity.row(1), p.time.row(1));
    const ConstQuatView e = p.entity.row(1);
    for (std::size_t m = 0; m < 16; ++m) {
        CHECK(std::fabs(moved.at(m).w - e.at(m).w) <= 1e-10);
        CHECK(std::fabs(moved.at(m).norm() - e.at(m).norm()) <= 1e-10);
        // independent route: scalar rotate() coordinate by coordinate
        const Quaternion expect = rotate(e.at(m), normalize(p.time.row(1).at(m)));
        CHECK(std::fabs(moved.at(m).x - expect.x) <= 1e-12);
        CHECK(std::fabs(moved.at(m).y - expect.y) <= 1e-12);
        CHECK(std::fabs(moved.at(m).z - expect.z) <= 1e-12);
    }
}

TEST_CASE("degenerate time coordinates are rejected") {
    Rng rng(5);
    ModelParams p = init_params(1, 1, 1, 2, rng);
    p.time.row(0).set(1, {0, 0, 0, 0});
    CHECK_THROWS_AS((void)time_specific_entity(p.entity.row(0), p.time.row(0)), ZeroNormError);

    QuaternionVector short_e(1);
    CHECK_THROWS_AS((void)time_specific_entity(short_e.cview(), p.time.row(0)),
                    ShapeMismatchError);
}

TEST_CASE("a constructed exact completion scores zero") {
    Rng rng(6);
    for (const ScoreAgg agg : {ScoreAgg::l1, ScoreAgg::l2}) {
        ModelParams p = init_params(3, 2, 2, 6, rng);
        p.agg = agg;
        const Quadruple q{0, 1, 2, 1};
        plant_zero_residual(p, q);
        CHECK(score_value(p, q) <= 1e-12);
    }
}

TEST_CASE("single-coordinate residual norm is the score") {
    Rng rng(7);
    ModelParams p = init_params(2, 1, 1, 1, rng);
    p.time.row(0).set(0, {1, 0, 0, 0});   // identity rotation
    p.entity.row(0).set(0, {0, 0, 0, 0}); // s_t = 0
    p.entity.row(1).set(0, {0, 0, 0, 0}); // conj(o_t) = 0
    p.relation.row(0).set(0, {1, 2, 2, 4});
    const Quadruple q{0, 0, 1, 0};
    p.agg = ScoreAgg::l1;
    CHECK(score_value(p, q) == doctest::Approx(5.0).epsilon(1e-14));
    p.agg = ScoreAgg::l2;
    CHECK(score_value(p, q) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("scaling the stored time row leaves scores unchanged") {
    Rng rng(8);
    ModelParams p = init_params(4, 2, 3, 10, rng);
    const Quadruple q{1, 0, 3, 2};
    const double before = score_value(p, q);
    double* raw = p.time.raw();
    const QuatView row = p.time.row(2);
    for (std::size_t m = 0; m < 10; ++m)
        row.set(m, 2.0 * row.at(m));
    (void)raw;
    CHECK(std::fabs(score_value(p, q) - before) <= 1e-12);
}

TEST_CASE("conjugating after rotation equals rotating the conjugate") {
    Rng rng(9);
    const ModelParams p = init_params(1, 1, 1, 8, rng);
    const ConstQuatView e = p.entity.row(0), tau = p.time.row(0);
    const QuaternionVector rotated = time_specific_entity(e, tau);
    for (std::size_t m = 0; m < 8; ++m) {
        const UnitQuaternion u = normalize(tau.at(m));
        const Quaternion route_a = rotated.at(m).conjugate();
        const Quaternion route_b = rotate(e.at(m).conjugate(), u);
        CHECK(std::fabs(route_a.w - route_b.w) <= 1e-12);
        CHECK(std::fabs(route_a.x - route_b.x) <= 1e-12);
        CHECK(std::fabs(route_a.y - route_b.y) <= 1e-12);
        CHECK(std::fabs(route_a.z - route_b.z) <= 1e-12);
    }
}

TEST_CASE("a pure-imaginary relation admits symmetric zero completions") {
    Rng rng(10);
    ModelParams p = init_params(2, 1, 1, 4, rng);
    const QuatView r = p.relation.row(0);
    for (std::size_t m = 0; m < 4; ++m) {
        Quaternion q = r.at(m);
        q.w = 0.0;
        r.set(m, q);
    }
    const Quadruple q{0, 0, 1, 0};
    plant_zero_residual(p, q);
    CHECK(score_value(p, q) <= 1e-12);
    CHECK(score_value(p, {1, 0, 0, 0}) <= 1e-12); // swapped quadruple

    // with a real part the swapped score stays away from zero
    for (std::size_t m = 0; m < 4; ++m) {
        Quaternion rm = r.at(m);
        rm.w = 0.5;
        r.set(m, rm);
    }
    plant_zero_residual(p, q);
    CHECK(score_value(p, q) <= 1e-12);
    CHECK(score_value(p, {1, 0, 0, 0}) > 0.1);
}

TEST_CASE("margin loss on matched scores is two log two") {
    Rng rng(11);
    ModelParams p = init_params(3, 1, 1, 3, rng);
    // copy entity 2 over entity 1 so the corrupted fact scores identically
    const ConstQuatView src = p.entity.row(1);
    const QuatView dst = p.entity.row(2);
    for (std::size_t m = 0; m < 3; ++m)
        dst.set(m, src.at(m));

    const Quadruple pos{0, 0, 1, 0};
    const std::vector<Quadruple> negs = {{0, 0, 2, 0}};
    const double gamma = score_value(p, pos);
    REQUIRE(gamma > 0.0);
    CHECK(loss(p, pos, negs, gamma) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("a far negative leaves only the positive loss term") {
    Rng rng(12);
    ModelParams p = init_params(3, 1, 1, 2, rng);
    const Quadruple pos{0, 0, 1, 0};
    plant_zero_residual(p, pos); // f(pos) = 0
    const QuatView far = p.entity.row(2);
    for (std::size_t m = 0; m < 2; ++m)
        far.set(m, {300.0, -250.0, 300.0, -250.0});
    const double gamma = 3.0;
    const double expect = std::log1p(std::exp(-gamma)); // softplus(-gamma)
    CHECK(loss(p, pos, {{0, 0, 2, 0}}, gamma) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("zero residuals choose the zero subgradient") {
    // Integer-valued rows and an identity time rotation keep every residual
    // component an exact 0.0, which is the only input that reaches the kink.
    Rng rng(13);
    for (const ScoreAgg agg : {ScoreAgg::l1, ScoreAgg::l2}) {
        ModelParams p = init_params(3, 1, 1, 4, rng);
        p.agg = agg;
        for (std::size_t m = 0; m < 4; ++m) {
            p.time.row(0).set(m, {1, 0, 0, 0});
            const double d = static_cast<double>(m + 1);
            const Quaternion s{1 * d, 2 * d, 3 * d, 4 * d};
            const Quaternion o{5 * d, -6 * d, 7 * d, -8 * d};
            p.entity.row(0).set(m, s);
            p.entity.row(1).set(m, o);
            p.entity.row(2).set(m, o); // the corrupted tail coincides
            p.relation.row(0).set(m, {o.w - s.w, -o.x - s.x, -o.y - s.y, -o.z - s.z});
        }
        const Quadruple pos{0, 0, 1, 0};
        REQUIRE(score_value(p, pos) == 0.0);
        REQUIRE(score_value(p, {0, 0, 2, 0}) == 0.0);

        const SparseGrads grads = gradients(p, pos, {{0, 0, 2, 0}}, 2.0);
        for (const SparseGrads::Entry& entry : grads.entries())
            for (std::size_t i = 0; i < QuaternionVector::raw_size(4); ++i)
                CHECK(entry.g.raw()[i] == 0.0);
    }
}

TEST_CASE("gradients only touch the rows of the examples") {
    Rng rng(14);
    const ModelParams p = init_params(6, 3, 4, 3, rng);
    const Quadruple pos{0, 2, 1, 3};
    Rng neg_rng(77);
    const std::vector<Quadruple> negs = negative_samples(pos, 2, neg_rng, 6);
    const SparseGrads grads = gradients(p, pos, negs, 1.5);

    std::set<std::pair<int, std::int32_t>> allowed = {{1, 2}, {2, 3}, {0, 0}, {0, 1}};
    for (const Quadruple& n : negs) {
        allowed.insert({0, n.s});
        allowed.insert({0, n.o});
    }
    CHECK(!grads.entries().empty());
    for (const SparseGrads::Entry& e : grads.entries())
        CHECK(allowed.count({static_cast<int>(e.table), e.row}) == 1);
}

TEST_CASE("analytic gradient matches a finite difference spot check") {
    Rng rng(15);
    for (const ScoreAgg agg : {ScoreAgg::l1, ScoreAgg::l2}) {
        ModelParams p = init_params(3, 2, 2, 4, rng);
        p.agg = agg;
        const Quadruple pos{0, 1, 1, 1};
        const std::vector<Quadruple> negs = {{2, 1, 1, 1}, {0, 1, 2, 1}};
        const double gamma = score_value(p, pos) + 0.3;

        const SparseGrads grads = gradients(p, pos, negs, gamma);
        double analytic = 0.0;
        for (const SparseGrads::Entry& e : grads.entries())
            if (e.table == Table::relation && e.row == 1)
                analytic = e.g.view().w[2];

        const double h = 1e-5;
        double& cell = p.relation.row(1).w[2];
        const double saved = cell;
        cell = saved + h;
        const double up = loss(p, pos, negs, gamma);
        cell = saved - h;
        const double down = loss(p, pos, negs, gamma);
        cell = saved;
        const double fd = (up - down) / (2.0 * h);
        CHECK(std::fabs(analytic - fd) <= 1e-4 * std::fmax(1.0, std::fabs(fd)));
    }
}

TEST_CASE("checkpoints round-trip bit for bit") {
    Rng rng(16);
    ModelParams p = init_params(5, 2, 3, 4, rng);
    p.agg = ScoreAgg::l2;
    p.seed = 123456789012345ULL;
    p.epoch = 42;

    const std::string path =
        (fs::temp_directory_path() / "rqvs_test_checkpoint.bin").string();
    save_checkpoint(p, path);
    const ModelParams q = load_checkpoint(path);

    CHECK(q.k == p.k);
    CHECK(q.agg == p.agg);
    CHECK(q.seed == p.seed);
    CHECK(q.epoch == p.epoch);
    CHECK(q.n_entities() == 5);
    CHECK(q.n_relations() == 2);
    CHECK(q.n_times() == 3);
    CHECK(tables_identical(p.entity, q.entity));
    CHECK(tables_identical(p.relation, q.relation));
    CHECK(tables_identical(p.time, q.time));
    fs::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
    const std::string path = (fs::temp_directory_path() / "rqvs_test_bad.bin").string();
    {
        std::ofstream f(path, std::ios::binary);
        f << "some other file\n";
    }
    CHECK_THROWS_AS((void)load_checkpoint(path), IoError);

    Rng rng(17);
    save_checkpoint(init_params(2, 1, 1, 2, rng), path);
    fs::resize_file(path, fs::file_size(path) - 16); // drop the tail
    CHECK_THROWS_AS((void)load_checkpoint(path), IoError);
    CHECK_THROWS_AS((void)load_checkpoint((fs::temp_directory_path() / "rqvs_none.bin").string()),
                    IoError);
    fs::remove(path);
}
