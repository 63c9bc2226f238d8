#include "rotateqvs/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "rotateqvs/rng.hpp"

namespace rqvs {
namespace {

// One planted quadruple, with the bookkeeping needed for splitting.
struct Planted {
    RawFact fact;
    std::string rel;     // owning relation label (for the per-relation cap)
    bool completable;    // second half of a planted pair; its partner stays in train
};

class Builder {
public:
    explicit Builder(const SyntheticSpec& spec)
        : spec_(spec), gen_(Rng::stream(spec.seed, 0)), split_(Rng::stream(spec.seed, 1)) {}

    SyntheticData run();

private:
    std::string entity(std::int32_t i) const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "e%03d", i);
        return buf;
    }
    std::string stamp(std::int32_t i) const { return std::to_string(i); }

    std::int32_t next_subject() {
        const std::int32_t s = cursor_;
        cursor_ = (cursor_ + 1) % spec_.n_entities;
        return s;
    }
    std::int32_t random_other(std::int32_t s) {
        auto o = static_cast<std::int32_t>(gen_.below(static_cast<std::uint64_t>(spec_.n_entities) - 1));
        if (o >= s)
            ++o;
        return o;
    }
    std::uint64_t key(std::int32_t s, std::int32_t o, std::int32_t t) const {
        return (static_cast<std::uint64_t>(s) * spec_.n_entities + static_cast<std::uint64_t>(o)) *
                   spec_.n_timestamps +
               static_cast<std::uint64_t>(t);
    }

    void push(std::int32_t s, const std::string& rel, std::int32_t o, std::int32_t t,
              bool completable) {
        planted_.push_back({{entity(s), rel, entity(o), stamp(t)}, rel, completable});
    }

    void plant_symmetric(const std::string& rel);
    void plant_asymmetric(const std::string& rel);
    void plant_inverse(const std::string& rel_a, const std::string& rel_b);
    void plant_evolution(SyntheticData::Chain& chain);

    const SyntheticSpec& spec_;
    Rng gen_, split_;
    std::int32_t cursor_ = 0;
    std::vector<Planted> planted_;
    std::unordered_set<std::uint64_t> used_; // per-relation-family, cleared between families
};

void Builder::plant_symmetric(const std::string& rel) {
    used_.clear();
    for (std::int32_t f = 0; f < spec_.facts_per_relation; ++f) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const std::int32_t s = next_subject();
            const std::int32_t o = random_other(s);
            const auto t = static_cast<std::int32_t>(gen_.below(spec_.n_timestamps));
            if (used_.count(key(s, o, t)) || used_.count(key(o, s, t)))
                continue;
            used_.insert(key(s, o, t));
            used_.insert(key(o, s, t));
            push(s, rel, o, t, false);
            push(o, rel, s, t, true); // reverse direction, inferable from the first
            break;
        }
    }
}

void Builder::plant_asymmetric(const std::string& rel) {
    used_.clear();
    for (std::int32_t f = 0; f < spec_.facts_per_relation; ++f) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const std::int32_t s = next_subject();
            const std::int32_t o = random_other(s);
            const auto t = static_cast<std::int32_t>(gen_.below(spec_.n_timestamps));
            // The reverse must stay absent for the pattern to hold.
            if (used_.count(key(s, o, t)) || used_.count(key(o, s, t)))
                continue;
            used_.insert(key(s, o, t));
            push(s, rel, o, t, false);
            break;
        }
    }
}

void Builder::plant_inverse(const std::string& rel_a, const std::string& rel_b) {
    used_.clear();
    for (std::int32_t f = 0; f < spec_.facts_per_relation; ++f) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const std::int32_t s = next_subject();
            const std::int32_t o = random_other(s);
            const auto t = static_cast<std::int32_t>(gen_.below(spec_.n_timestamps));
            if (used_.count(key(s, o, t)))
                continue;
            used_.insert(key(s, o, t));
            push(s, rel_a, o, t, false);
            push(o, rel_b, s, t, true);
            break;
        }
    }
}

void Builder::plant_evolution(SyntheticData::Chain& chain) {
    used_.clear();
    // One fixed timestamp pair per chain, so a single rotation relates the
    // two relations across every fact of the chain.
    const auto t1 = static_cast<std::int32_t>(gen_.below(spec_.n_timestamps - 1));
    const auto t2 =
        t1 + 1 + static_cast<std::int32_t>(gen_.below(spec_.n_timestamps - 1 - t1));
    chain.t1 = stamp(t1);
    chain.t2 = stamp(t2);

    for (std::int32_t f = 0; f < spec_.facts_per_relation; ++f) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const std::int32_t s = next_subject();
            const std::int32_t o = random_other(s);
            if (used_.count(key(s, o, 0)))
                continue;
            used_.insert(key(s, o, 0));
            push(s, chain.rel_a, o, t1, false);
            push(s, chain.rel_b, o, t2, true);
            break;
        }
    }
}

SyntheticData Builder::run() {
    SyntheticData data;

    for (std::int32_t i = 0; i < spec_.n_symmetric; ++i) {
        data.symmetric_rels.push_back("sym" + std::to_string(i));
        plant_symmetric(data.symmetric_rels.back());
    }
    for (std::int32_t i = 0; i < spec_.n_asymmetric; ++i) {
        data.asymmetric_rels.push_back("asym" + std::to_string(i));
        plant_asymmetric(data.asymmetric_rels.back());
    }
    for (std::int32_t i = 0; i < spec_.n_inverse_pairs; ++i) {
        const std::string a = "inv" + std::to_string(i) + "_a";
        const std::string b = "inv" + std::to_string(i) + "_b";
        data.inverse_pairs.emplace_back(a, b);
        plant_inverse(a, b);
    }
    for (std::int32_t i = 0; i < spec_.n_evolution_chains; ++i) {
        SyntheticData::Chain chain;
        chain.rel_a = "evo" + std::to_string(i) + "_a";
        chain.rel_b = "evo" + std::to_string(i) + "_b";
        plant_evolution(chain);
        data.evolution_chains.push_back(std::move(chain));
    }

    // 80/10/10. Only completable facts may leave train, capped at half of any
    // relation's quadruples so the pattern stays learnable.
    std::unordered_map<std::string, std::int64_t> rel_total, rel_taken;
    for (const Planted& pl : planted_)
        ++rel_total[pl.rel];

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < planted_.size(); ++i)
        if (planted_[i].completable)
            candidates.push_back(i);
    split_.shuffle(candidates);

    const auto target = static_cast<std::int64_t>(planted_.size() / 5); // 20%
    std::vector<bool> held(planted_.size(), false);
    std::int64_t taken = 0;
    std::vector<std::size_t> holdout;
    for (const std::size_t i : candidates) {
        if (taken >= target)
            break;
        const std::string& rel = planted_[i].rel;
        if (2 * (rel_taken[rel] + 1) > rel_total[rel])
            continue;
        ++rel_taken[rel];
        ++taken;
        held[i] = true;
        holdout.push_back(i);
    }

    for (std::size_t i = 0; i < planted_.size(); ++i)
        if (!held[i])
            data.train.push_back(planted_[i].fact);
    for (std::size_t j = 0; j < holdout.size(); ++j)
        (j % 2 == 0 ? data.valid : data.test).push_back(planted_[holdout[j]].fact);

    return data;
}

} // namespace

SyntheticData generate(const SyntheticSpec& spec) {
    const auto fail = [](const std::string& why) { throw InfeasibleSpecError(why); };

    const std::int64_t n_rels = static_cast<std::int64_t>(spec.n_symmetric) + spec.n_asymmetric +
                                2 * spec.n_inverse_pairs + 2 * spec.n_evolution_chains;
    if (spec.n_symmetric < 0 || spec.n_asymmetric < 0 || spec.n_inverse_pairs < 0 ||
        spec.n_evolution_chains < 0)
        fail("negative relation counts");
    if (n_rels == 0)
        fail("no relation family requested");
    if (spec.facts_per_relation < 1)
        fail("facts_per_relation must be >= 1");
    if (spec.n_entities < 2)
        fail("planted patterns need at least 2 entities (facts never relate an entity to itself)");
    if (spec.n_timestamps < 1)
        fail("need at least 1 timestamp");
    if (spec.n_evolution_chains > 0 && spec.n_timestamps < 2)
        fail("evolution chains need at least 2 timestamps");

    return Builder(spec).run();
}

void write_tsv(const std::vector<RawFact>& facts, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    for (const RawFact& f : facts)
        out << f.head << '\t' << f.rel << '\t' << f.tail << '\t' << f.time << '\n';
}

void write_dataset(const SyntheticData& data, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_tsv(data.train, (base / "train.txt").string());
    write_tsv(data.valid, (base / "valid.txt").string());
    write_tsv(data.test, (base / "test.txt").string());
}

Dataset to_dataset(const SyntheticData& data, int granularity) {
    return assemble_dataset(data.train, data.valid, data.test, TimeMode::year, granularity);
}

} // namespace rqvs
