// Command-line front end: train / eval / analyze / check / synth.
//
// Every command writes a manifest.txt into --out before heavy work starts
// (command, resolved configuration, data paths, seeds, start time) and
// appends artifact checksums plus the finish time afterwards, so a run can
// be reproduced from its output directory alone.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "rotateqvs/dataset.hpp"
#include "rotateqvs/errors.hpp"
#include "rotateqvs/evaluation.hpp"
#include "rotateqvs/model.hpp"
#include "rotateqvs/pattern.hpp"
#include "rotateqvs/rng.hpp"
#include "rotateqvs/selfcheck.hpp"
#include "rotateqvs/synthetic.hpp"
#include "rotateqvs/training.hpp"

namespace fs = std::filesystem;
using namespace rqvs;

namespace {

// ---------------------------------------------------------------- utilities

std::string now_utc() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string shell_quote(const std::string& arg) {
    const bool plain = !arg.empty() && arg.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZ"
                                                             "abcdefghijklmnopqrstuvwxyz"
                                                             "0123456789_-./=:,+@%") ==
                                          std::string::npos;
    if (plain)
        return arg;
    std::string out = "'";
    for (const char c : arg)
        out += (c == '\'') ? "'\\''" : std::string(1, c);
    out += "'";
    return out;
}

std::string join_argv(int argc, char** argv) {
    std::string line;
    for (int i = 0; i < argc; ++i) {
        if (i)
            line += ' ';
        line += shell_quote(argv[i]);
    }
    return line;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (const char c : s) {
        out += c;
        if (c == '"')
            out += '"';
    }
    out += '"';
    return out;
}

std::pair<std::uint64_t, std::uint64_t> fnv1a64_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot read artifact for checksumming: " + path);
    std::uint64_t hash = 14695981039346656037ULL, bytes = 0;
    char buf[65536];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) {
        const std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
        bytes += static_cast<std::uint64_t>(n);
    }
    return {hash, bytes};
}

using KvList = std::vector<std::pair<std::string, std::string>>;

std::string g_argv_line; // set once in main, recorded in every manifest

void begin_manifest(const std::string& out_dir, const std::string& command, const KvList& kv) {
    const std::string path = out_dir + "/manifest.txt";
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw IoError("cannot write " + path);
    f << "command = " << command << "\n";
    f << "argv = " << g_argv_line << "\n";
    f << "started_utc = " << now_utc() << "\n";
    for (const auto& [k, v] : kv)
        f << k << " = " << v << "\n";
}

void finish_manifest(const std::string& out_dir, const std::vector<std::string>& artifacts) {
    std::ofstream f(out_dir + "/manifest.txt", std::ios::app);
    if (!f)
        throw IoError("cannot append to " + out_dir + "/manifest.txt");
    for (const std::string& name : artifacts) {
        const auto [hash, bytes] = fnv1a64_file(out_dir + "/" + name);
        char hex[24];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
        f << "artifact = " << name << " fnv1a64=" << hex << " bytes=" << bytes << "\n";
    }
    f << "finished_utc = " << now_utc() << "\n";
}

std::string lowercase(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

// Flat key=value text, one pair per line; keys are the long flag names
// without the leading dashes. '#' starts a comment. Values here override
// dataset defaults and lose to explicit command-line flags.
class ConfigFile {
public:
    ConfigFile() = default;

    ConfigFile(const std::string& path, std::initializer_list<const char*> allowed)
        : path_(path) {
        std::ifstream f(path);
        if (!f)
            throw IoError("cannot read config file " + path);
        std::string line;
        for (int no = 1; std::getline(f, line); ++no) {
            if (const std::size_t hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                if (!trim(line).empty())
                    throw IoError(path + ":" + std::to_string(no) + ": expected key=value");
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            if (std::none_of(allowed.begin(), allowed.end(),
                             [&](const char* k) { return key == k; }))
                throw IoError(path + ":" + std::to_string(no) + ": unknown key '" + key + "'");
            kv_[key] = trim(line.substr(eq + 1));
        }
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    const std::string& str(const std::string& key) const { return kv_.at(key); }

    std::int32_t integer(const std::string& key) const {
        const std::string& v = str(key);
        try {
            std::size_t used = 0;
            const long n = std::stol(v, &used);
            if (used == v.size())
                return static_cast<std::int32_t>(n);
        } catch (const std::exception&) {
        }
        throw IoError(path_ + ": key '" + key + "' needs an integer, got '" + v + "'");
    }

    double real(const std::string& key) const {
        const std::string& v = str(key);
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used == v.size())
                return x;
        } catch (const std::exception&) {
        }
        throw IoError(path_ + ": key '" + key + "' needs a number, got '" + v + "'");
    }

    std::vector<std::uint64_t> seed_list(const std::string& key) const {
        const std::string& v = str(key);
        std::vector<std::uint64_t> out;
        std::size_t pos = 0;
        while (pos <= v.size()) {
            const std::size_t comma = v.find(',', pos);
            const std::string part = trim(v.substr(pos, comma - pos));
            try {
                std::size_t used = 0;
                if (part.empty() || part[0] == '-')
                    throw std::invalid_argument(part);
                out.push_back(std::stoull(part, &used));
                if (used != part.size())
                    throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw IoError(path_ + ": key '" + key + "' needs comma-separated seeds, got '" +
                              v + "'");
            }
            if (comma == std::string::npos)
                break;
            pos = comma + 1;
        }
        return out;
    }

private:
    std::string path_;
    std::map<std::string, std::string> kv_;
};

bool year_like(const std::string& s) {
    if (s.empty())
        return false;
    const std::size_t start = s[0] == '-' ? 1 : 0;
    if (start == s.size())
        return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

// Dataset-name conventions first, then a sniff of the train file: five
// columns means an interval dataset, an integer time column means years,
// a dashed one means dates.
TimeMode resolve_time_mode(const std::string& flag, const std::string& dataset,
                           const std::string& data_dir) {
    if (flag != "auto")
        return time_mode_from_string(flag);

    const std::string ds = lowercase(dataset);
    if (ds.rfind("icews", 0) == 0)
        return TimeMode::date;
    if (ds.rfind("yago", 0) == 0 || ds.rfind("wikidata", 0) == 0)
        return TimeMode::interval;
    if (ds.rfind("gdelt", 0) == 0)
        return TimeMode::year;

    for (const char* name : {"train.txt", "train"}) {
        std::ifstream f(data_dir + "/" + name);
        if (!f)
            continue;
        std::string line;
        while (std::getline(f, line)) {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            std::vector<std::string> cols;
            std::size_t pos = 0;
            while (true) {
                const std::size_t tab = line.find('\t', pos);
                cols.push_back(line.substr(pos, tab - pos));
                if (tab == std::string::npos)
                    break;
                pos = tab + 1;
            }
            if (cols.size() >= 5)
                return TimeMode::interval;
            if (cols.size() == 4) {
                if (year_like(cols[3]))
                    return TimeMode::year;
                if (cols[3].find('-', 1) != std::string::npos)
                    return TimeMode::date;
                throw IoError("cannot infer time mode from time label '" + cols[3] +
                              "'; pass --time-mode");
            }
            throw IoError("cannot infer time mode: first data line has " +
                          std::to_string(cols.size()) + " columns");
        }
    }
    throw IoError("cannot infer time mode: no train file under " + data_dir);
}

void check_shapes(const ModelParams& p, const Dataset& data, const std::string& checkpoint) {
    const Vocabulary& v = data.vocab;
    if (p.n_entities() != v.n_entities() || p.n_relations() != v.n_relations() ||
        p.n_times() != v.n_times()) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "checkpoint %s holds %d entities / %d relations / %d timestamps, "
                      "dataset has %d / %d / %d",
                      checkpoint.c_str(), p.n_entities(), p.n_relations(), p.n_times(),
                      v.n_entities(), v.n_relations(), v.n_times());
        throw ShapeMismatchError(buf);
    }
}

void print_dataset_summary(const std::string& dir, const Dataset& d) {
    std::printf("loaded %s: %d entities, %d relations, %d timestamps (%s, granularity %d); "
                "facts train %zu, valid %zu, test %zu\n",
                dir.c_str(), d.vocab.n_entities(), d.vocab.n_relations(), d.vocab.n_times(),
                to_string(d.mode), d.granularity, d.train.size(), d.valid.size(), d.test.size());
}

// ------------------------------------------------------------------- train

struct TrainArgs {
    std::string dataset, data_dir, out, config, time_mode = "auto", score_agg;
    std::int32_t dim = 0, eta = 0, granularity = 0, epochs = 0, batch = 0, valid_every = 0;
    double lr = 0.0, margin = 0.0;
    int threads = 1;
    std::vector<std::uint64_t> seeds;
};

TrainConfig resolve_train_config(const CLI::App* cmd, const TrainArgs& a, const ConfigFile& file) {
    TrainConfig cfg;
    if (!a.dataset.empty()) {
        try {
            cfg = default_config(a.dataset);
        } catch (const UnknownDatasetError&) {
            // unknown names (synthetic runs, ad-hoc dirs) keep the built-ins
        }
    }
    if (cmd->count("--dim"))
        cfg.k = a.dim;
    else if (file.has("dim"))
        cfg.k = file.integer("dim");
    if (cmd->count("--lr"))
        cfg.lr = a.lr;
    else if (file.has("lr"))
        cfg.lr = file.real("lr");
    if (cmd->count("--margin"))
        cfg.gamma = a.margin;
    else if (file.has("margin"))
        cfg.gamma = file.real("margin");
    if (cmd->count("--neg-ratio"))
        cfg.eta = a.eta;
    else if (file.has("neg-ratio"))
        cfg.eta = file.integer("neg-ratio");
    if (cmd->count("--granularity"))
        cfg.granularity = a.granularity;
    else if (file.has("granularity"))
        cfg.granularity = file.integer("granularity");
    if (cmd->count("--epochs"))
        cfg.epochs = a.epochs;
    else if (file.has("epochs"))
        cfg.epochs = file.integer("epochs");
    if (cmd->count("--batch-size"))
        cfg.batch_size = a.batch;
    else if (file.has("batch-size"))
        cfg.batch_size = file.integer("batch-size");
    if (cmd->count("--valid-every"))
        cfg.valid_every = a.valid_every;
    else if (file.has("valid-every"))
        cfg.valid_every = file.integer("valid-every");
    if (cmd->count("--score-agg"))
        cfg.agg = score_agg_from_string(a.score_agg);
    else if (file.has("score-agg"))
        cfg.agg = score_agg_from_string(file.str("score-agg"));
    return cfg;
}

int resolve_threads(const CLI::App* cmd, int flag, const ConfigFile& file,
                    const std::string& path) {
    if (cmd->count("--threads") || !file.has("threads"))
        return flag;
    const int threads = file.integer("threads");
    if (threads < 1)
        throw IoError(path + ": key 'threads' needs a positive integer");
    return threads;
}

std::string resolve_time_mode_flag(const CLI::App* cmd, const std::string& flag,
                                   const ConfigFile& file) {
    if (cmd->count("--time-mode") || !file.has("time-mode"))
        return flag;
    return file.str("time-mode");
}

int run_train(const CLI::App* cmd, const TrainArgs& a) {
    ConfigFile file;
    if (!a.config.empty())
        file = ConfigFile(a.config, {"dim", "lr", "margin", "neg-ratio", "granularity", "epochs",
                                     "batch-size", "valid-every", "seed", "threads", "score-agg",
                                     "time-mode"});
    fs::create_directories(a.out);
    TrainConfig cfg = resolve_train_config(cmd, a, file);
    cfg.validate();
    std::vector<std::uint64_t> seeds = a.seeds;
    if (seeds.empty())
        seeds = file.has("seed") ? file.seed_list("seed") : std::vector<std::uint64_t>{1};
    const int threads = resolve_threads(cmd, a.threads, file, a.config);

    const TimeMode mode =
        resolve_time_mode(resolve_time_mode_flag(cmd, a.time_mode, file), a.dataset, a.data_dir);
    const Dataset data = load_dataset(a.data_dir, mode, cfg.granularity);
    print_dataset_summary(a.data_dir, data);

    KvList kv = {{"dataset", a.dataset},
                 {"data_dir", a.data_dir},
                 {"out", a.out},
                 {"time_mode", to_string(mode)},
                 {"dim", std::to_string(cfg.k)},
                 {"lr", fmt_double(cfg.lr)},
                 {"margin", fmt_double(cfg.gamma)},
                 {"neg_ratio", std::to_string(cfg.eta)},
                 {"granularity", std::to_string(cfg.granularity)},
                 {"epochs", std::to_string(cfg.epochs)},
                 {"batch_size", std::to_string(cfg.batch_size)},
                 {"valid_every", std::to_string(cfg.valid_every)},
                 {"score_agg", to_string(cfg.agg)},
                 {"threads", std::to_string(threads)},
                 {"n_entities", std::to_string(data.vocab.n_entities())},
                 {"n_relations", std::to_string(data.vocab.n_relations())},
                 {"n_timestamps", std::to_string(data.vocab.n_times())}};
    std::string seed_list;
    for (const std::uint64_t s : seeds)
        seed_list += (seed_list.empty() ? "" : ",") + std::to_string(s);
    kv.emplace_back("seeds", seed_list);
    begin_manifest(a.out, "train", kv);

    dump_vocabulary(data.vocab, a.out);
    std::vector<std::string> artifacts = {"entities.tsv", "relations.tsv", "times.tsv"};

    const bool multi = seeds.size() > 1;
    const FilterIndex filter(data);
    std::vector<std::pair<std::uint64_t, Metrics>> summary;

    for (const std::uint64_t seed : seeds) {
        const std::string run_rel = multi ? "run_" + std::to_string(seed) : std::string{};
        const std::string run_dir = multi ? a.out + "/" + run_rel : a.out;
        fs::create_directories(run_dir);
        const std::string ckpt = run_dir + "/checkpoint.bin";

        cfg.seed = seed;
        const auto on_improve = [&](const ModelParams& p, std::int32_t epoch, double mrr) {
            save_checkpoint(p, ckpt);
            std::printf("  seed %llu epoch %d: valid MRR %.4f, checkpoint written\n",
                        static_cast<unsigned long long>(seed), epoch, mrr);
            std::fflush(stdout);
        };

        std::printf("training seed %llu (%d epochs)...\n",
                    static_cast<unsigned long long>(seed), cfg.epochs);
        std::fflush(stdout);
        const TrainResult result = train(data, cfg, threads, on_improve);

        save_checkpoint(result.best, ckpt);
        write_train_log_csv(result.log, run_dir + "/train_log.csv");
        const std::string prefix = multi ? run_rel + "/" : std::string{};
        artifacts.push_back(prefix + "checkpoint.bin");
        artifacts.push_back(prefix + "train_log.csv");

        if (result.best_mrr >= 0.0)
            std::printf("  best valid MRR %.4f at epoch %d\n", result.best_mrr, result.best_epoch);
        if (!result.log.empty())
            std::printf("  final mean loss %.6f\n", result.log.back().mean_loss);

        if (multi && !data.test.empty()) {
            const EvalReport rep = evaluate(data.test, result.best, filter, threads);
            std::ofstream f(run_dir + "/eval.csv");
            f << eval_csv_header() << "\n" << eval_csv_row(rep) << "\n";
            artifacts.push_back(prefix + "eval.csv");
            summary.emplace_back(seed, rep.all);
        }
    }

    if (!summary.empty()) {
        std::ofstream f(a.out + "/seed_summary.csv");
        f << "seed,mrr,hits1,hits3,hits10\n";
        Metrics mean;
        for (const auto& [seed, m] : summary) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%llu,%.10g,%.10g,%.10g,%.10g\n",
                          static_cast<unsigned long long>(seed), m.mrr, m.hits1, m.hits3, m.hits10);
            f << buf;
            mean.mrr += m.mrr;
            mean.hits1 += m.hits1;
            mean.hits3 += m.hits3;
            mean.hits10 += m.hits10;
        }
        const double n = static_cast<double>(summary.size());
        char buf[160];
        std::snprintf(buf, sizeof buf, "mean,%.10g,%.10g,%.10g,%.10g\n", mean.mrr / n,
                      mean.hits1 / n, mean.hits3 / n, mean.hits10 / n);
        f << buf;
        artifacts.push_back("seed_summary.csv");
        std::printf("mean test MRR over %zu seeds: %.4f\n", summary.size(), mean.mrr / n);
    }

    finish_manifest(a.out, artifacts);
    return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
    std::string checkpoint, dataset, data_dir, out = ".", config, split = "test",
                time_mode = "auto";
    std::int32_t granularity = 0;
    int threads = 1;
};

int resolve_granularity(const CLI::App* cmd, const std::string& dataset, std::int32_t flag,
                        const ConfigFile& file = {}) {
    int g = 1;
    if (!dataset.empty()) {
        try {
            g = default_config(dataset).granularity;
        } catch (const UnknownDatasetError&) {
        }
    }
    if (cmd->count("--granularity"))
        g = flag;
    else if (file.has("granularity"))
        g = file.integer("granularity");
    return g;
}

int run_eval(const CLI::App* cmd, const EvalArgs& a) {
    ConfigFile file;
    if (!a.config.empty())
        file = ConfigFile(a.config, {"split", "granularity", "threads", "time-mode"});
    fs::create_directories(a.out);
    const ModelParams p = load_checkpoint(a.checkpoint);
    const int granularity = resolve_granularity(cmd, a.dataset, a.granularity, file);
    const TimeMode mode =
        resolve_time_mode(resolve_time_mode_flag(cmd, a.time_mode, file), a.dataset, a.data_dir);
    const int threads = resolve_threads(cmd, a.threads, file, a.config);
    std::string split_name = a.split;
    if (!cmd->count("--split") && file.has("split")) {
        split_name = file.str("split");
        if (split_name != "train" && split_name != "valid" && split_name != "test")
            throw IoError(a.config + ": key 'split' must be train, valid, or test");
    }
    const Dataset data = load_dataset(a.data_dir, mode, granularity);
    print_dataset_summary(a.data_dir, data);
    check_shapes(p, data, a.checkpoint);

    begin_manifest(a.out, "eval",
                   {{"checkpoint", a.checkpoint},
                    {"dataset", a.dataset},
                    {"data_dir", a.data_dir},
                    {"out", a.out},
                    {"split", split_name},
                    {"time_mode", to_string(mode)},
                    {"granularity", std::to_string(granularity)},
                    {"dim", std::to_string(p.k)},
                    {"score_agg", to_string(p.agg)},
                    {"checkpoint_seed", std::to_string(p.seed)},
                    {"checkpoint_epoch", std::to_string(p.epoch)},
                    {"threads", std::to_string(threads)}});

    const std::vector<Quadruple>& split =
        split_name == "train" ? data.train : split_name == "valid" ? data.valid : data.test;
    const FilterIndex filter(data);
    const EvalReport rep = evaluate(split, p, filter, threads);

    std::printf("%s split, time-wise filtered:\n", split_name.c_str());
    print_report(std::cout, rep);
    std::ofstream f(a.out + "/eval.csv");
    if (!f)
        throw IoError("cannot write " + a.out + "/eval.csv");
    f << eval_csv_header() << "\n" << eval_csv_row(rep) << "\n";
    f.close();

    finish_manifest(a.out, {"eval.csv"});
    return 0;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string checkpoint, dataset, data_dir, out = ".", time_mode = "auto";
    std::string relation, relation2, head, tail, time1, time2;
    std::int32_t granularity = 0;
    int max_pairs = 250, negatives = 10;
    double bin_width = 0.01;
    std::uint64_t seed = 42;
};

struct AnalyzeContext {
    ModelParams params;
    Dataset data;
};

AnalyzeContext load_analyze_context(const CLI::App* cmd, const AnalyzeArgs& a) {
    AnalyzeContext ctx{load_checkpoint(a.checkpoint), {}};
    const int granularity = resolve_granularity(cmd, a.dataset, a.granularity);
    const TimeMode mode = resolve_time_mode(a.time_mode, a.dataset, a.data_dir);
    ctx.data = load_dataset(a.data_dir, mode, granularity);
    check_shapes(ctx.params, ctx.data, a.checkpoint);
    return ctx;
}

KvList analyze_kv(const AnalyzeArgs& a, std::initializer_list<std::pair<std::string, std::string>> extra) {
    KvList kv = {{"checkpoint", a.checkpoint},
                 {"dataset", a.dataset},
                 {"data_dir", a.data_dir},
                 {"out", a.out}};
    kv.insert(kv.end(), extra.begin(), extra.end());
    return kv;
}

int run_analyze_symmetry(const CLI::App* cmd, const AnalyzeArgs& a) {
    fs::create_directories(a.out);
    const AnalyzeContext ctx = load_analyze_context(cmd, a);
    begin_manifest(a.out, "analyze symmetry", analyze_kv(a, {{"relation", a.relation}}));

    std::vector<std::int32_t> ids;
    if (!a.relation.empty())
        ids.push_back(ctx.data.vocab.relation_id(a.relation));
    else
        for (std::int32_t r = 0; r < ctx.data.vocab.n_relations(); ++r)
            ids.push_back(r);

    std::ofstream f(a.out + "/symmetry.csv");
    if (!f)
        throw IoError("cannot write " + a.out + "/symmetry.csv");
    f << "relation,real_part_magnitude\n";
    for (const std::int32_t r : ids) {
        const double m = real_part_magnitude(ctx.params, r);
        f << csv_field(ctx.data.vocab.relation_label(r)) << "," << fmt_double(m) << "\n";
        if (ids.size() <= 20)
            std::printf("%-40s real-part share %.4f\n", ctx.data.vocab.relation_label(r).c_str(), m);
    }
    std::printf("wrote %zu rows to %s/symmetry.csv\n", ids.size(), a.out.c_str());
    finish_manifest(a.out, {"symmetry.csv"});
    return 0;
}

int run_analyze_inversion(const CLI::App* cmd, const AnalyzeArgs& a) {
    fs::create_directories(a.out);
    const AnalyzeContext ctx = load_analyze_context(cmd, a);
    begin_manifest(a.out, "analyze inversion",
                   analyze_kv(a, {{"relation", a.relation}, {"relation2", a.relation2}}));

    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    if (!a.relation.empty() && !a.relation2.empty()) {
        pairs.emplace_back(ctx.data.vocab.relation_id(a.relation),
                           ctx.data.vocab.relation_id(a.relation2));
    } else {
        const std::int32_t n = ctx.data.vocab.n_relations();
        for (std::int32_t i = 0; i < n; ++i)
            for (std::int32_t j = i + 1; j < n; ++j)
                pairs.emplace_back(i, j);
    }

    std::ofstream f(a.out + "/inversion.csv");
    if (!f)
        throw IoError("cannot write " + a.out + "/inversion.csv");
    f << "relation_a,relation_b,real_residual,imag_residual\n";
    for (const auto& [i, j] : pairs) {
        const auto [re, im] = inversion_residual(ctx.params, i, j);
        f << csv_field(ctx.data.vocab.relation_label(i)) << ","
          << csv_field(ctx.data.vocab.relation_label(j)) << "," << fmt_double(re) << ","
          << fmt_double(im) << "\n";
        if (pairs.size() <= 20)
            std::printf("%s <-> %s: real residual %.4f, imaginary residual %.4f\n",
                        ctx.data.vocab.relation_label(i).c_str(),
                        ctx.data.vocab.relation_label(j).c_str(), re, im);
    }
    std::printf("wrote %zu rows to %s/inversion.csv\n", pairs.size(), a.out.c_str());
    finish_manifest(a.out, {"inversion.csv"});
    return 0;
}

int run_analyze_deduction(const CLI::App* cmd, const AnalyzeArgs& a) {
    fs::create_directories(a.out);
    const AnalyzeContext ctx = load_analyze_context(cmd, a);
    const Vocabulary& v = ctx.data.vocab;

    // Default to the first and last timestamp bins when no times are given.
    const std::int32_t t1 = a.time1.empty() ? 0 : v.time_id(a.time1);
    const std::int32_t t2 = a.time2.empty() ? v.n_times() - 1 : v.time_id(a.time2);
    begin_manifest(a.out, "analyze deduction",
                   analyze_kv(a, {{"relation", a.relation},
                                  {"relation2", a.relation2},
                                  {"time", v.time_label(t1)},
                                  {"time2", v.time_label(t2)}}));

    const std::int32_t r1 = v.relation_id(a.relation);
    const std::int32_t r2 = v.relation_id(a.relation2);
    const QuaternionVector moved = temporal_transport(ctx.params, r1, t1, t2);
    const double cos = cosine_similarity(moved.cview(), ctx.params.relation.row(r2));
    const auto [norm_gap, real_gap] = deduction_check(ctx.params, r1, r2);

    std::ofstream f(a.out + "/deduction.csv");
    if (!f)
        throw IoError("cannot write " + a.out + "/deduction.csv");
    f << "relation_a,relation_b,time_1,time_2,transport_cosine,max_norm_gap,max_real_gap\n";
    f << csv_field(a.relation) << "," << csv_field(a.relation2) << ","
      << csv_field(v.time_label(t1)) << "," << csv_field(v.time_label(t2)) << ","
      << fmt_double(cos) << "," << fmt_double(norm_gap) << "," << fmt_double(real_gap) << "\n";

    std::printf("%s moved %s -> %s vs %s: cosine %.4f, norm gap %.4f, real gap %.4f\n",
                a.relation.c_str(), v.time_label(t1).c_str(), v.time_label(t2).c_str(),
                a.relation2.c_str(), cos, norm_gap, real_gap);
    finish_manifest(a.out, {"deduction.csv"});
    return 0;
}

int run_analyze_evolution(const CLI::App* cmd, const AnalyzeArgs& a) {
    fs::create_directories(a.out);
    const AnalyzeContext ctx = load_analyze_context(cmd, a);
    const Vocabulary& v = ctx.data.vocab;
    begin_manifest(a.out, "analyze evolution",
                   analyze_kv(a, {{"head", a.head},
                                  {"tail", a.tail},
                                  {"max_pairs", std::to_string(a.max_pairs)},
                                  {"negatives", std::to_string(a.negatives)},
                                  {"bin_width", fmt_double(a.bin_width)},
                                  {"seed", std::to_string(a.seed)}}));

    const std::int32_t head_id = a.head.empty() ? -1 : v.entity_id(a.head);
    const std::int32_t tail_id = a.tail.empty() ? -1 : v.entity_id(a.tail);

    // Candidate pairs: two facts over the same (head, tail), strictly ordered
    // in time; the earlier relation is the transport base.
    std::vector<Quadruple> all = ctx.data.train;
    all.insert(all.end(), ctx.data.valid.begin(), ctx.data.valid.end());
    all.insert(all.end(), ctx.data.test.begin(), ctx.data.test.end());

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (head_id >= 0 && all[i].s != head_id)
            continue;
        if (tail_id >= 0 && all[i].o != tail_id)
            continue;
        const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(all[i].s))
                                   << 32) |
                                  static_cast<std::uint32_t>(all[i].o);
        groups[key].push_back(i);
    }

    std::vector<FactPair> pairs;
    for (const auto& [key, idx] : groups)
        for (const std::size_t i : idx)
            for (const std::size_t j : idx)
                if (all[i].t < all[j].t)
                    pairs.push_back({all[i], all[j]});

    Rng cap_rng = Rng::stream(a.seed, 22);
    if (pairs.size() > static_cast<std::size_t>(a.max_pairs)) {
        cap_rng.shuffle(pairs);
        pairs.resize(static_cast<std::size_t>(a.max_pairs));
    }

    Rng neg_rng = Rng::stream(a.seed, 21);
    const EvolutionHistogram h =
        evolution_histogram(pairs, a.negatives, ctx.params, a.bin_width, neg_rng);
    write_histogram_csv(h, a.out + "/evolution.csv");

    if (pairs.empty()) {
        std::printf("no temporally ordered fact pairs matched; wrote an empty histogram\n");
    } else {
        std::printf("%zu fact pairs: transported-vs-target cosine mean %.4f, "
                    "random-relation mean %.4f\n",
                    pairs.size(), h.positive_mean(), h.negative_mean());
    }
    finish_manifest(a.out, {"evolution.csv"});
    return 0;
}

// ------------------------------------------------------------------- check

struct CheckArgs {
    std::string suite = "all", out;
    std::uint64_t seed = 42;
};

int run_check(const CheckArgs& a) {
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        begin_manifest(a.out, "check", {{"suite", a.suite}, {"seed", std::to_string(a.seed)}});
    }

    std::vector<SuiteResult> results;
    if (a.suite == "all")
        results = run_all_checks(a.seed);
    else if (a.suite == "quaternion")
        results = {check_quaternion_algebra(a.seed)};
    else if (a.suite == "rotation")
        results = {check_rotation_oracle(a.seed)};
    else if (a.suite == "gradients")
        results = {check_gradients(a.seed)};
    else if (a.suite == "ranking")
        results = {check_ranking_oracle(a.seed)};
    else
        results = {check_kernel_equivalence(a.seed)};

    bool all_pass = true;
    for (const SuiteResult& r : results) {
        std::printf("[%s] %-20s budget used %-9.3g %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.max_residual, r.detail.c_str());
        all_pass = all_pass && r.pass;
    }

    if (!a.out.empty()) {
        std::ofstream f(a.out + "/checks.csv");
        f << "suite,pass,budget_used,detail\n";
        for (const SuiteResult& r : results)
            f << r.name << "," << (r.pass ? 1 : 0) << "," << fmt_double(r.max_residual) << ","
              << csv_field(r.detail) << "\n";
        f.close();
        finish_manifest(a.out, {"checks.csv"});
    }
    return all_pass ? 0 : 2;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
    std::string out;
    SyntheticSpec spec;
};

int run_synth(const SynthArgs& a) {
    fs::create_directories(a.out);
    begin_manifest(a.out, "synth",
                   {{"out", a.out},
                    {"entities", std::to_string(a.spec.n_entities)},
                    {"symmetric", std::to_string(a.spec.n_symmetric)},
                    {"asymmetric", std::to_string(a.spec.n_asymmetric)},
                    {"inverse", std::to_string(a.spec.n_inverse_pairs)},
                    {"evolution", std::to_string(a.spec.n_evolution_chains)},
                    {"timestamps", std::to_string(a.spec.n_timestamps)},
                    {"facts_per_relation", std::to_string(a.spec.facts_per_relation)},
                    {"seed", std::to_string(a.spec.seed)}});

    const SyntheticData data = generate(a.spec);
    write_dataset(data, a.out);

    std::ofstream f(a.out + "/planted.tsv");
    if (!f)
        throw IoError("cannot write " + a.out + "/planted.tsv");
    for (const std::string& r : data.symmetric_rels)
        f << "symmetric\t" << r << "\n";
    for (const std::string& r : data.asymmetric_rels)
        f << "asymmetric\t" << r << "\n";
    for (const auto& [ra, rb] : data.inverse_pairs)
        f << "inverse\t" << ra << "\t" << rb << "\n";
    for (const SyntheticData::Chain& c : data.evolution_chains)
        f << "evolution\t" << c.rel_a << "\t" << c.rel_b << "\t" << c.t1 << "\t" << c.t2 << "\n";
    f.close();

    std::printf("wrote %zu train / %zu valid / %zu test facts to %s\n", data.train.size(),
                data.valid.size(), data.test.size(), a.out.c_str());
    finish_manifest(a.out, {"train.txt", "valid.txt", "test.txt", "planted.tsv"});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    g_argv_line = join_argv(argc, argv);

    CLI::App app{"Temporal knowledge-graph embeddings with quaternion time rotations"};
    app.require_subcommand(1);
    int rc = 0;

    // train ------------------------------------------------------------
    auto train_args = std::make_shared<TrainArgs>();
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write checkpoints");
    train_cmd->add_option("--dataset", train_args->dataset,
                          "Dataset name; known benchmarks select published defaults");
    train_cmd->add_option("--data-dir", train_args->data_dir, "Directory with train/valid/test")
        ->required();
    train_cmd->add_option("--out", train_args->out, "Output directory")->required();
    train_cmd->add_option("--dim", train_args->dim, "Quaternion coordinates per embedding")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", train_args->lr, "Adagrad learning rate")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--margin", train_args->margin, "Loss margin");
    train_cmd->add_option("--neg-ratio", train_args->eta, "Negatives per positive")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--granularity", train_args->granularity, "Timestamp bins merged")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", train_args->epochs, "Training epochs")
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--batch-size", train_args->batch, "Positives per Adagrad step")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--valid-every", train_args->valid_every, "Validation period, epochs")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train_args->seeds,
                          "Seed; repeat or comma-separate for a multi-seed run")
        ->delimiter(',');
    train_cmd->add_option("--threads", train_args->threads, "Worker threads for validation")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--score-agg", train_args->score_agg, "Coordinate aggregation")
        ->check(CLI::IsMember({"l1", "l2"}));
    train_cmd->add_option("--time-mode", train_args->time_mode, "Time column format")
        ->check(CLI::IsMember({"auto", "date", "year", "interval"}));
    train_cmd->add_option("--config", train_args->config, "Flat key=value file; flags override it")
        ->check(CLI::ExistingFile);
    train_cmd->callback([&rc, train_cmd, train_args] { rc = run_train(train_cmd, *train_args); });

    // eval -------------------------------------------------------------
    auto eval_args = std::make_shared<EvalArgs>();
    CLI::App* eval_cmd = app.add_subcommand("eval", "Rank a checkpoint on one split");
    eval_cmd->add_option("--checkpoint", eval_args->checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--dataset", eval_args->dataset, "Dataset name for defaults");
    eval_cmd->add_option("--data-dir", eval_args->data_dir, "Directory with train/valid/test")
        ->required();
    eval_cmd->add_option("--out", eval_args->out, "Output directory");
    eval_cmd->add_option("--split", eval_args->split, "Split to rank")
        ->check(CLI::IsMember({"train", "valid", "test"}));
    eval_cmd->add_option("--granularity", eval_args->granularity, "Timestamp bins merged")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--threads", eval_args->threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--time-mode", eval_args->time_mode, "Time column format")
        ->check(CLI::IsMember({"auto", "date", "year", "interval"}));
    eval_cmd->add_option("--config", eval_args->config, "Flat key=value file; flags override it")
        ->check(CLI::ExistingFile);
    eval_cmd->callback([&rc, eval_cmd, eval_args] { rc = run_eval(eval_cmd, *eval_args); });

    // analyze ----------------------------------------------------------
    auto an_args = std::make_shared<AnalyzeArgs>();
    CLI::App* an_cmd = app.add_subcommand("analyze", "Relation-pattern diagnostics");
    an_cmd->require_subcommand(1);

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--checkpoint", an_args->checkpoint, "Checkpoint file")->required();
        sub->add_option("--dataset", an_args->dataset, "Dataset name for defaults");
        sub->add_option("--data-dir", an_args->data_dir, "Directory with train/valid/test")
            ->required();
        sub->add_option("--out", an_args->out, "Output directory");
        sub->add_option("--granularity", an_args->granularity, "Timestamp bins merged")
            ->check(CLI::PositiveNumber);
        sub->add_option("--time-mode", an_args->time_mode, "Time column format")
            ->check(CLI::IsMember({"auto", "date", "year", "interval"}));
    };

    CLI::App* sym_cmd = an_cmd->add_subcommand(
        "symmetry", "Real-part share per relation (0 = symmetric signature)");
    add_common(sym_cmd);
    sym_cmd->add_option("--relation", an_args->relation, "Single relation label");
    sym_cmd->callback([&rc, sym_cmd, an_args] { rc = run_analyze_symmetry(sym_cmd, *an_args); });

    CLI::App* inv_cmd =
        an_cmd->add_subcommand("inversion", "Inverse-pair residuals between relations");
    add_common(inv_cmd);
    inv_cmd->add_option("--relation", an_args->relation, "First relation label");
    inv_cmd->add_option("--relation2", an_args->relation2, "Second relation label");
    inv_cmd->callback([&rc, inv_cmd, an_args] { rc = run_analyze_inversion(inv_cmd, *an_args); });

    CLI::App* ded_cmd = an_cmd->add_subcommand(
        "deduction", "Transport one relation across time, compare with another");
    add_common(ded_cmd);
    ded_cmd->add_option("--relation", an_args->relation, "Relation to transport")->required();
    ded_cmd->add_option("--relation2", an_args->relation2, "Relation to compare against")
        ->required();
    ded_cmd->add_option("--time", an_args->time1, "Source time label (default: earliest)");
    ded_cmd->add_option("--time2", an_args->time2, "Target time label (default: latest)");
    ded_cmd->callback([&rc, ded_cmd, an_args] { rc = run_analyze_deduction(ded_cmd, *an_args); });

    CLI::App* evo_cmd = an_cmd->add_subcommand(
        "evolution", "Similarity histogram of time-transported relations");
    add_common(evo_cmd);
    evo_cmd->add_option("--head", an_args->head, "Restrict pairs to this head entity");
    evo_cmd->add_option("--tail", an_args->tail, "Restrict pairs to this tail entity");
    evo_cmd->add_option("--max-pairs", an_args->max_pairs, "Cap on sampled fact pairs")
        ->check(CLI::PositiveNumber);
    evo_cmd->add_option("--negatives", an_args->negatives, "Random relations per pair")
        ->check(CLI::PositiveNumber);
    evo_cmd->add_option("--bin-width", an_args->bin_width, "Histogram bin width over [-1, 1]");
    evo_cmd->add_option("--seed", an_args->seed, "Sampling seed");
    evo_cmd->callback([&rc, evo_cmd, an_args] { rc = run_analyze_evolution(evo_cmd, *an_args); });

    // check ------------------------------------------------------------
    auto check_args = std::make_shared<CheckArgs>();
    CLI::App* check_cmd = app.add_subcommand("check", "Property suites and numeric oracles");
    check_cmd->add_option("--suite", check_args->suite, "Which suite to run")
        ->check(CLI::IsMember({"all", "quaternion", "rotation", "gradients", "ranking", "kernels"}));
    check_cmd->add_option("--seed", check_args->seed, "Seed for randomized cases");
    check_cmd->add_option("--out", check_args->out, "Optional output directory for results CSV");
    check_cmd->callback([&rc, check_args] { rc = run_check(*check_args); });

    // synth ------------------------------------------------------------
    auto synth_args = std::make_shared<SynthArgs>();
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "Generate a graph with planted relation patterns");
    synth_cmd->add_option("--out", synth_args->out, "Output directory")->required();
    synth_cmd->add_option("--entities", synth_args->spec.n_entities, "Entity count");
    synth_cmd->add_option("--symmetric", synth_args->spec.n_symmetric, "Symmetric relations");
    synth_cmd->add_option("--asymmetric", synth_args->spec.n_asymmetric, "Asymmetric relations");
    synth_cmd->add_option("--inverse", synth_args->spec.n_inverse_pairs, "Inverse relation pairs");
    synth_cmd->add_option("--evolution", synth_args->spec.n_evolution_chains, "Evolution chains");
    synth_cmd->add_option("--timestamps", synth_args->spec.n_timestamps, "Distinct timestamps");
    synth_cmd->add_option("--facts-per-relation", synth_args->spec.facts_per_relation,
                          "Planted facts per relation");
    synth_cmd->add_option("--seed", synth_args->spec.seed, "Generator seed");
    synth_cmd->callback([&rc, synth_args] { rc = run_synth(*synth_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
