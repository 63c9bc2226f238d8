#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rotateqvs/errors.hpp"
#include "rotateqvs/rng.hpp"

namespace rqvs {

/// One integer-coded fact: head entity, relation, tail entity, timestamp bin.
struct Quadruple {
    std::int32_t s = 0;
    std::int32_t r = 0;
    std::int32_t o = 0;
    std::int32_t t = 0;

    friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

/// How the time column is read.
///   date     - ISO YYYY-MM-DD in column 4
///   year     - integer year (possibly negative) in column 4
///   interval - five columns; the begin year of [column 4, column 5] is kept
enum class TimeMode { date, year, interval };

TimeMode time_mode_from_string(const std::string& name); // throws UnknownLabelError
const char* to_string(TimeMode mode);

/// A fact as read from disk, strings intact. `time` holds the canonical label
/// (the raw date, the year token, or the begin year for intervals).
struct RawFact {
    std::string head, rel, tail, time;
};

/// Reads one tab-separated quadruple file. Throws MalformedLineError with the
/// offending line number on wrong column counts or unparsable time labels;
/// IoError when the file cannot be opened.
std::vector<RawFact> parse_quadruple_file(const std::string& path, TimeMode mode);

/// Chronological sort key for a canonical time label.
std::int64_t time_sort_key(const std::string& label, TimeMode mode);

/// Distinct labels sorted chronologically, numbered consecutively, then
/// integer-divided by g. The result maps every input label to its bin id;
/// bin count = ceil(distinct / g). Monotone: earlier label, smaller-or-equal id.
std::unordered_map<std::string, std::int32_t>
bin_timestamps(const std::vector<std::string>& labels, TimeMode mode, int granularity);

/// String-to-id bijections for entities and relations (insertion order over
/// train, then valid, then test) and the chronologically ordered, binned time
/// map. Total over the union of all splits.
class Vocabulary {
public:
    std::int32_t entity_id(const std::string& label) const;   // UnknownLabelError
    std::int32_t relation_id(const std::string& label) const; // UnknownLabelError
    std::int32_t time_id(const std::string& label) const;     // UnknownLabelError

    const std::string& entity_label(std::int32_t id) const;
    const std::string& relation_label(std::int32_t id) const;
    /// Earliest raw label falling in the bin. The inverse is exact at g = 1.
    const std::string& time_label(std::int32_t id) const;

    std::int32_t n_entities() const { return static_cast<std::int32_t>(entity_labels_.size()); }
    std::int32_t n_relations() const { return static_cast<std::int32_t>(relation_labels_.size()); }
    std::int32_t n_times() const { return n_tau_; }

    /// All distinct raw time labels in chronological order, with bin ids.
    const std::vector<std::pair<std::string, std::int32_t>>& time_entries() const {
        return time_entries_;
    }

    std::int32_t intern_entity(const std::string& label);
    std::int32_t intern_relation(const std::string& label);
    void build_time_map(const std::vector<std::string>& labels, TimeMode mode, int granularity);

private:
    std::unordered_map<std::string, std::int32_t> entity_ids_, relation_ids_, time_ids_;
    std::vector<std::string> entity_labels_, relation_labels_;
    std::vector<std::string> time_bin_first_label_;
    std::vector<std::pair<std::string, std::int32_t>> time_entries_;
    std::int32_t n_tau_ = 0;
};

struct Dataset {
    std::vector<Quadruple> train, valid, test;
    Vocabulary vocab;
    TimeMode mode = TimeMode::date;
    int granularity = 1;
};

/// Builds a Dataset from in-memory raw facts. All splits are scanned before
/// vocabularies freeze, so test-only entities still get ids.
Dataset assemble_dataset(const std::vector<RawFact>& train, const std::vector<RawFact>& valid,
                         const std::vector<RawFact>& test, TimeMode mode, int granularity);

/// Loads dir/{train,valid,test}.txt (falling back to extensionless names).
Dataset load_dataset(const std::string& dir, TimeMode mode, int granularity);

/// Writes entities.tsv / relations.tsv / times.tsv as "id<TAB>label" lines.
void dump_vocabulary(const Vocabulary& vocab, const std::string& dir);

/// Known completions per (s, r, t) and per (r, o, t) over train+valid+test,
/// for time-wise filtered ranking. Immutable once built.
class FilterIndex {
public:
    explicit FilterIndex(const Dataset& data);

    /// True tails for (s, r, t), sorted ascending; empty when none recorded.
    const std::vector<std::int32_t>& tails(std::int32_t s, std::int32_t r, std::int32_t t) const;
    /// True heads for (r, o, t), sorted ascending.
    const std::vector<std::int32_t>& heads(std::int32_t r, std::int32_t o, std::int32_t t) const;

private:
    std::uint64_t tail_key(std::int32_t s, std::int32_t r, std::int32_t t) const;
    std::uint64_t head_key(std::int32_t r, std::int32_t o, std::int32_t t) const;

    std::unordered_map<std::uint64_t, std::vector<std::int32_t>> tails_, heads_;
    std::uint64_t n_e_ = 0, n_r_ = 0, n_tau_ = 0;
    static const std::vector<std::int32_t> kEmpty;
};

/// eta corruptions of q: each picks a side (head or tail) uniformly and swaps
/// in a uniform entity id different from the one it replaces. Relation and
/// time stay fixed. Accidental true facts are NOT filtered out.
std::vector<Quadruple> negative_samples(const Quadruple& q, int eta, Rng& rng, std::int32_t n_e);

} // namespace rqvs
