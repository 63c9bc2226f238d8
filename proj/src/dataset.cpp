#include "rotateqvs/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace rqvs {
namespace {

bool all_digits(const std::string& s, std::size_t from, std::size_t to) {
    if (from >= to)
        return false;
    for (std::size_t i = from; i < to; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            return false;
    return true;
}

/// "YYYY-MM-DD" -> y*10000 + m*100 + d. Light validation: digit groups and
// calendar-plausible month/day ranges.
std::optional<std::int64_t> try_date_key(const std::string& s) {
    const auto p1 = s.find('-');
    if (p1 == std::string::npos || p1 == 0)
        return std::nullopt;
    const auto p2 = s.find('-', p1 + 1);
    if (p2 == std::string::npos)
        return std::nullopt;
    if (!all_digits(s, 0, p1) || !all_digits(s, p1 + 1, p2) || !all_digits(s, p2 + 1, s.size()))
        return std::nullopt;
    const long y = std::strtol(s.c_str(), nullptr, 10);
    const long m = std::strtol(s.c_str() + p1 + 1, nullptr, 10);
    const long d = std::strtol(s.c_str() + p2 + 1, nullptr, 10);
    if (m < 1 || m > 12 || d < 1 || d > 31)
        return std::nullopt;
    return static_cast<std::int64_t>(y) * 10000 + m * 100 + d;
}

// Optionally signed integer, fully consumed.
std::optional<std::int64_t> try_year_key(const std::string& s) {
    const std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
    if (!all_digits(s, start, s.size()))
        return std::nullopt;
    return std::strtoll(s.c_str(), nullptr, 10);
}

// Leading optionally signed year of an interval endpoint such as
// "1816-##-##", "-431-06-01", or a bare "1816". Returns the canonical year
// label alongside the key.
std::optional<std::pair<std::int64_t, std::string>> try_begin_year(const std::string& s) {
    std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
    std::size_t end = i;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end])))
        ++end;
    if (end == i)
        return std::nullopt;
    if (end < s.size() && s[end] != '-')
        return std::nullopt;
    const std::string label = s.substr(0, end);
    return std::make_pair(std::strtoll(label.c_str(), nullptr, 10), label);
}

std::optional<std::int64_t> try_time_key(const std::string& label, TimeMode mode) {
    switch (mode) {
    case TimeMode::date:
        return try_date_key(label);
    case TimeMode::year:
        return try_year_key(label);
    case TimeMode::interval:
        if (auto r = try_begin_year(label))
            return r->first;
        return std::nullopt;
    }
    return std::nullopt;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
}

} // namespace

TimeMode time_mode_from_string(const std::string& name) {
    if (name == "date")
        return TimeMode::date;
    if (name == "year")
        return TimeMode::year;
    if (name == "interval")
        return TimeMode::interval;
    throw UnknownLabelError(name);
}

const char* to_string(TimeMode mode) {
    switch (mode) {
    case TimeMode::date:
        return "date";
    case TimeMode::year:
        return "year";
    case TimeMode::interval:
        return "interval";
    }
    return "?";
}

std::int64_t time_sort_key(const std::string& label, TimeMode mode) {
    if (auto key = try_time_key(label, mode))
        return *key;
    throw UnknownLabelError(label);
}

std::vector<RawFact> parse_quadruple_file(const std::string& path, TimeMode mode) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open quadruple file: " + path);

    std::vector<RawFact> facts;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;

        const std::vector<std::string> cols = split_tabs(line);
        const std::size_t want = (mode == TimeMode::interval) ? 5 : 4;
        if (cols.size() != want)
            throw MalformedLineError(path, line_no,
                                     "expected " + std::to_string(want) + " tab-separated columns, got " +
                                         std::to_string(cols.size()));

        std::string time_label;
        if (mode == TimeMode::interval) {
            const auto begin = try_begin_year(cols[3]);
            if (!begin)
                throw MalformedLineError(path, line_no, "unparsable interval begin: " + cols[3]);
            time_label = begin->second;
        } else {
            if (!try_time_key(cols[3], mode))
                throw MalformedLineError(path, line_no, "unparsable time label: " + cols[3]);
            time_label = cols[3];
        }
        facts.push_back({cols[0], cols[1], cols[2], std::move(time_label)});
    }
    return facts;
}

std::unordered_map<std::string, std::int32_t>
bin_timestamps(const std::vector<std::string>& labels, TimeMode mode, int granularity) {
    if (granularity < 1)
        throw InfeasibleSpecError("time granularity must be >= 1");

    std::vector<std::pair<std::int64_t, std::string>> distinct;
    {
        std::unordered_map<std::string, bool> seen;
        for (const std::string& label : labels)
            if (seen.emplace(label, true).second)
                distinct.emplace_back(time_sort_key(label, mode), label);
    }
    std::sort(distinct.begin(), distinct.end());

    std::unordered_map<std::string, std::int32_t> map;
    map.reserve(distinct.size());
    for (std::size_t i = 0; i < distinct.size(); ++i)
        map.emplace(distinct[i].second, static_cast<std::int32_t>(i / granularity));
    return map;
}

std::int32_t Vocabulary::entity_id(const std::string& label) const {
    const auto it = entity_ids_.find(label);
    if (it == entity_ids_.end())
        throw UnknownLabelError(label);
    return it->second;
}

std::int32_t Vocabulary::relation_id(const std::string& label) const {
    const auto it = relation_ids_.find(label);
    if (it == relation_ids_.end())
        throw UnknownLabelError(label);
    return it->second;
}

std::int32_t Vocabulary::time_id(const std::string& label) const {
    const auto it = time_ids_.find(label);
    if (it == time_ids_.end())
        throw UnknownLabelError(label);
    return it->second;
}

const std::string& Vocabulary::entity_label(std::int32_t id) const {
    return entity_labels_.at(static_cast<std::size_t>(id));
}

const std::string& Vocabulary::relation_label(std::int32_t id) const {
    return relation_labels_.at(static_cast<std::size_t>(id));
}

const std::string& Vocabulary::time_label(std::int32_t id) const {
    return time_bin_first_label_.at(static_cast<std::size_t>(id));
}

std::int32_t Vocabulary::intern_entity(const std::string& label) {
    const auto [it, fresh] = entity_ids_.emplace(label, n_entities());
    if (fresh)
        entity_labels_.push_back(label);
    return it->second;
}

std::int32_t Vocabulary::intern_relation(const std::string& label) {
    const auto [it, fresh] = relation_ids_.emplace(label, n_relations());
    if (fresh)
        relation_labels_.push_back(label);
    return it->second;
}

void Vocabulary::build_time_map(const std::vector<std::string>& labels, TimeMode mode,
                                int granularity) {
    time_ids_ = bin_timestamps(labels, mode, granularity);

    time_entries_.assign(time_ids_.begin(), time_ids_.end());
    std::sort(time_entries_.begin(), time_entries_.end(),
              [&](const auto& a, const auto& b) {
                  return std::make_pair(time_sort_key(a.first, mode), a.first) <
                         std::make_pair(time_sort_key(b.first, mode), b.first);
              });

    n_tau_ = time_entries_.empty() ? 0 : time_entries_.back().second + 1;
    time_bin_first_label_.assign(static_cast<std::size_t>(n_tau_), {});
    for (auto it = time_entries_.rbegin(); it != time_entries_.rend(); ++it)
        time_bin_first_label_[static_cast<std::size_t>(it->second)] = it->first;
}

Dataset assemble_dataset(const std::vector<RawFact>& train, const std::vector<RawFact>& valid,
                         const std::vector<RawFact>& test, TimeMode mode, int granularity) {
    Dataset d;
    d.mode = mode;
    d.granularity = granularity;

    std::vector<std::string> time_labels;
    const std::vector<RawFact>* splits[3] = {&train, &valid, &test};
    for (const auto* split : splits) {
        for (const RawFact& f : *split) {
            d.vocab.intern_entity(f.head);
            d.vocab.intern_relation(f.rel);
            d.vocab.intern_entity(f.tail);
            time_labels.push_back(f.time);
        }
    }
    d.vocab.build_time_map(time_labels, mode, granularity);

    const auto encode = [&](const std::vector<RawFact>& raw, std::vector<Quadruple>& out) {
        out.reserve(raw.size());
        for (const RawFact& f : raw)
            out.push_back({d.vocab.entity_id(f.head), d.vocab.relation_id(f.rel),
                           d.vocab.entity_id(f.tail), d.vocab.time_id(f.time)});
    };
    encode(train, d.train);
    encode(valid, d.valid);
    encode(test, d.test);
    return d;
}

namespace {

std::string resolve_split_file(const std::string& dir, const char* name) {
    namespace fs = std::filesystem;
    const fs::path with_ext = fs::path(dir) / (std::string(name) + ".txt");
    if (fs::exists(with_ext))
        return with_ext.string();
    const fs::path bare = fs::path(dir) / name;
    if (fs::exists(bare))
        return bare.string();
    throw IoError("missing dataset file: " + with_ext.string() + " (also tried " + bare.string() +
                  ")");
}

} // namespace

Dataset load_dataset(const std::string& dir, TimeMode mode, int granularity) {
    if (!std::filesystem::is_directory(dir))
        throw IoError("dataset directory does not exist: " + dir);
    const auto train = parse_quadruple_file(resolve_split_file(dir, "train"), mode);
    const auto valid = parse_quadruple_file(resolve_split_file(dir, "valid"), mode);
    const auto test = parse_quadruple_file(resolve_split_file(dir, "test"), mode);
    return assemble_dataset(train, valid, test, mode, granularity);
}

void dump_vocabulary(const Vocabulary& vocab, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    const auto open = [&](const char* name) {
        std::ofstream out(fs::path(dir) / name);
        if (!out)
            throw IoError(std::string("cannot write ") + name + " under " + dir);
        return out;
    };

    auto ents = open("entities.tsv");
    for (std::int32_t i = 0; i < vocab.n_entities(); ++i)
        ents << i << '\t' << vocab.entity_label(i) << '\n';

    auto rels = open("relations.tsv");
    for (std::int32_t i = 0; i < vocab.n_relations(); ++i)
        rels << i << '\t' << vocab.relation_label(i) << '\n';

    auto times = open("times.tsv");
    for (const auto& [label, id] : vocab.time_entries())
        times << id << '\t' << label << '\n';
}

const std::vector<std::int32_t> FilterIndex::kEmpty;

FilterIndex::FilterIndex(const Dataset& data)
    : n_e_(static_cast<std::uint64_t>(data.vocab.n_entities())),
      n_r_(static_cast<std::uint64_t>(data.vocab.n_relations())),
      n_tau_(static_cast<std::uint64_t>(data.vocab.n_times())) {
    const std::vector<Quadruple>* splits[3] = {&data.train, &data.valid, &data.test};
    for (const auto* split : splits) {
        for (const Quadruple& q : *split) {
            tails_[tail_key(q.s, q.r, q.t)].push_back(q.o);
            heads_[head_key(q.r, q.o, q.t)].push_back(q.s);
        }
    }
    for (auto* index : {&tails_, &heads_}) {
        for (auto& [key, ids] : *index) {
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        }
    }
}

std::uint64_t FilterIndex::tail_key(std::int32_t s, std::int32_t r, std::int32_t t) const {
    return (static_cast<std::uint64_t>(s) * n_r_ + static_cast<std::uint64_t>(r)) * n_tau_ +
           static_cast<std::uint64_t>(t);
}

std::uint64_t FilterIndex::head_key(std::int32_t r, std::int32_t o, std::int32_t t) const {
    return (static_cast<std::uint64_t>(r) * n_e_ + static_cast<std::uint64_t>(o)) * n_tau_ +
           static_cast<std::uint64_t>(t);
}

const std::vector<std::int32_t>& FilterIndex::tails(std::int32_t s, std::int32_t r,
                                                    std::int32_t t) const {
    const auto it = tails_.find(tail_key(s, r, t));
    return it == tails_.end() ? kEmpty : it->second;
}

const std::vector<std::int32_t>& FilterIndex::heads(std::int32_t r, std::int32_t o,
                                                    std::int32_t t) const {
    const auto it = heads_.find(head_key(r, o, t));
    return it == heads_.end() ? kEmpty : it->second;
}

std::vector<Quadruple> negative_samples(const Quadruple& q, int eta, Rng& rng, std::int32_t n_e) {
    std::vector<Quadruple> negs;
    negs.reserve(static_cast<std::size_t>(eta));
    for (int i = 0; i < eta; ++i) {
        Quadruple neg = q;
        const bool corrupt_head = rng.below(2) == 0;
        const std::int32_t original = corrupt_head ? q.s : q.o;
        // Uniform over the n_e - 1 ids that differ from the original.
        std::int32_t pick = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n_e) - 1));
        if (pick >= original)
            ++pick;
        (corrupt_head ? neg.s : neg.o) = pick;
        negs.push_back(neg);
    }
    return negs;
}

} // namespace rqvs
