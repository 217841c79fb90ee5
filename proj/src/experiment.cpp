#include "idfd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "idfd/checkpoint.hpp"
#include "idfd/errors.hpp"
#include "idfd/format.hpp"
#include "idfd/spectral.hpp"

namespace idfd {

namespace {

using Setter = std::function<void(RunConfig&, std::string_view)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct KeyEntry {
    ConfigKey key;
    Setter set;
    Getter get;
};

std::size_t to_size(std::string_view key, std::string_view text) {
    long long v = 0;
    try {
        v = parse_integer(text);
    } catch (const DomainError&) {
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(text) + "'");
    }
    if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
}

double to_real(std::string_view key, std::string_view text) {
    try {
        return parse_double(text);
    } catch (const DomainError&) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    }
}

bool to_bool(std::string_view key, std::string_view text) {
    if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "off" || text == "no") return false;
    throw ConfigError(std::string(key) + ": expected a boolean, got '" + std::string(text) + "'");
}

std::string widths_to_string(const std::vector<std::size_t>& widths) {
    std::string out;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(widths[i]);
    }
    return out;
}

std::vector<std::size_t> widths_from_string(std::string_view text) {
    std::vector<std::size_t> out;
    if (text.empty() || text == "none") return out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = text.find(',', start);
        out.push_back(to_size("hidden", text.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
KeyEntry size_key(std::string_view name, std::string_view help, T RunConfig::*outer,
                  std::size_t T::*inner) {
    return {{name, help},
            [=](RunConfig& c, std::string_view v) { c.*outer.*inner = to_size(name, v); },
            [=](const RunConfig& c) { return std::to_string(c.*outer.*inner); }};
}

template <class T>
KeyEntry real_key(std::string_view name, std::string_view help, T RunConfig::*outer,
                  double T::*inner) {
    return {{name, help},
            [=](RunConfig& c, std::string_view v) { c.*outer.*inner = to_real(name, v); },
            [=](const RunConfig& c) { return format_double(c.*outer.*inner); }};
}

KeyEntry size_key(std::string_view name, std::string_view help, std::size_t RunConfig::*field) {
    return {{name, help},
            [=](RunConfig& c, std::string_view v) { c.*field = to_size(name, v); },
            [=](const RunConfig& c) { return std::to_string(c.*field); }};
}

KeyEntry real_key(std::string_view name, std::string_view help, double RunConfig::*field) {
    return {{name, help},
            [=](RunConfig& c, std::string_view v) { c.*field = to_real(name, v); },
            [=](const RunConfig& c) { return format_double(c.*field); }};
}

KeyEntry bool_key(std::string_view name, std::string_view help, bool RunConfig::*field) {
    return {{name, help},
            [=](RunConfig& c, std::string_view v) { c.*field = to_bool(name, v); },
            [=](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

KeyEntry u64_key(std::string_view name, std::string_view help,
                 std::function<std::uint64_t&(RunConfig&)> ref) {
    return {{name, help},
            [=](RunConfig& c, std::string_view v) {
                ref(c) = static_cast<std::uint64_t>(to_size(name, v));
            },
            [=](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

const std::vector<KeyEntry>& key_table() {
    static const std::vector<KeyEntry> table = [] {
        std::vector<KeyEntry> t;
        t.push_back(u64_key("seed", "root seed for parameters, bank, shuffling and augmentation",
                            [](RunConfig& c) -> std::uint64_t& { return c.train.seed; }));
        t.push_back({{"mode", "objective: ID, IDFO or IDFD"},
                     [](RunConfig& c, std::string_view v) { c.mode = parse_objective_mode(v); },
                     [](const RunConfig& c) { return std::string(to_string(c.mode)); }});
        t.push_back(real_key("lr", "initial learning rate", &RunConfig::train, &TrainConfig::lr0));
        t.push_back(real_key("momentum", "SGD momentum", &RunConfig::train, &TrainConfig::momentum_beta));
        t.push_back(size_key("batch_size", "minibatch size", &RunConfig::train, &TrainConfig::batch_size));
        t.push_back(size_key("epochs", "training epochs", &RunConfig::train, &TrainConfig::epochs));
        t.push_back(size_key("warm_epochs", "epochs before the first decay", &RunConfig::train,
                             &TrainConfig::warm_epochs));
        t.push_back(size_key("decay_every", "epochs between later decays", &RunConfig::train,
                             &TrainConfig::decay_every));
        t.push_back(real_key("decay_factor", "learning-rate decay factor", &RunConfig::train,
                             &TrainConfig::decay_factor));
        t.push_back(real_key("tau", "instance softmax temperature", &RunConfig::train, &TrainConfig::tau));
        t.push_back(real_key("tau2", "feature softmax temperature", &RunConfig::train, &TrainConfig::tau2));
        t.push_back(real_key("alpha", "weight of the feature term", &RunConfig::train, &TrainConfig::alpha));
        t.push_back(real_key("bank_momentum", "memory bank blending momentum", &RunConfig::train,
                             &TrainConfig::bank_momentum));
        t.push_back({{"hidden", "comma-separated hidden widths, or none"},
                     [](RunConfig& c, std::string_view v) { c.train.hidden = widths_from_string(v); },
                     [](const RunConfig& c) {
                         return c.train.hidden.empty() ? std::string("none")
                                                       : widths_to_string(c.train.hidden);
                     }});
        t.push_back(size_key("dim", "representation dimension", &RunConfig::train, &TrainConfig::dim));
        t.push_back(size_key("clusters", "k for clustering; 0 uses the label count", &RunConfig::clusters));
        t.push_back(size_key("restarts", "k-means restarts", &RunConfig::restarts));
        t.push_back(size_key("eval_every", "evaluation cadence in epochs; 0 disables", &RunConfig::eval_every));
        t.push_back(size_key("eval_window", "trailing evaluations averaged for ACC mean/std",
                             &RunConfig::eval_window));
        t.push_back({{"eval_source", "representations to cluster: encoded or bank"},
                     [](RunConfig& c, std::string_view v) {
                         if (v == "encoded") c.eval_source = EvalSource::Encoded;
                         else if (v == "bank") c.eval_source = EvalSource::Bank;
                         else throw ConfigError("eval_source must be encoded or bank");
                     },
                     [](const RunConfig& c) {
                         return std::string(c.eval_source == EvalSource::Bank ? "bank" : "encoded");
                     }});
        t.push_back(bool_key("spectral", "also run spectral clustering at each evaluation",
                             &RunConfig::spectral));
        t.push_back(real_key("aug_flip", "horizontal flip probability", &RunConfig::aug_flip));
        t.push_back(size_key("aug_crop", "random crop padding in pixels", &RunConfig::aug_crop));
        t.push_back(real_key("aug_jitter", "multiplicative jitter amplitude", &RunConfig::aug_jitter));
        t.push_back(real_key("aug_gray", "grayscale probability", &RunConfig::aug_gray));
        t.push_back(real_key("aug_noise", "additive Gaussian noise sigma", &RunConfig::aug_noise));
        t.push_back({{"data_path", "dataset file; empty generates a sphere mixture"},
                     [](RunConfig& c, std::string_view v) { c.data_path = std::string(v); },
                     [](const RunConfig& c) { return c.data_path; }});
        t.push_back({{"data_format", "csv, csv-labeled or image"},
                     [](RunConfig& c, std::string_view v) { c.data_format = parse_dataset_format(v); },
                     [](const RunConfig& c) { return std::string(to_string(c.data_format)); }});
        t.push_back(size_key("gen_k", "generated clusters", &RunConfig::gen, &SphereMixtureSpec::k));
        t.push_back(size_key("gen_n", "generated samples", &RunConfig::gen, &SphereMixtureSpec::n));
        t.push_back(size_key("gen_dim", "generated dimension", &RunConfig::gen, &SphereMixtureSpec::dim));
        t.push_back(real_key("gen_separation", "minimum angle between cluster directions",
                             &RunConfig::gen, &SphereMixtureSpec::separation));
        t.push_back(real_key("gen_noise", "per-coordinate noise sigma", &RunConfig::gen,
                             &SphereMixtureSpec::noise));
        t.push_back(u64_key("data_seed", "seed for the generated dataset",
                            [](RunConfig& c) -> std::uint64_t& { return c.data_seed; }));
        t.push_back({{"output_dir", "directory for reports; empty writes nothing"},
                     [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
                     [](const RunConfig& c) { return c.output_dir.string(); }});
        t.push_back(bool_key("checkpoint", "write checkpoint.bin", &RunConfig::write_checkpoint));
        return t;
    }();
    return table;
}

const KeyEntry& find_key(std::string_view key) {
    for (const auto& e : key_table()) {
        if (e.key.name == key) return e;
    }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& e : key_table()) out.push_back(e.key);
        return out;
    }();
    return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
    find_key(key).set(cfg, trim(value));
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) {
    return find_key(key).get(cfg);
}

RunConfig parse_run_config(std::istream& in, RunConfig base) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view t = trim(line);
        if (const auto hash = t.find('#'); hash != std::string_view::npos) t = trim(t.substr(0, hash));
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            set_config_value(base, trim(t.substr(0, eq)), t.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_run_config(in, std::move(base));
}

void validate(const RunConfig& cfg) {
    validate(cfg.train);
    if (cfg.restarts == 0) throw ConfigError("restarts must be positive");
    if (cfg.eval_window == 0) throw ConfigError("eval_window must be positive");
    auto unit = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    unit(cfg.aug_flip, "aug_flip");
    unit(cfg.aug_gray, "aug_gray");
    if (!(cfg.aug_jitter >= 0.0 && cfg.aug_jitter < 1.0)) throw ConfigError("aug_jitter must lie in [0, 1)");
    if (!(cfg.aug_noise >= 0.0)) throw ConfigError("aug_noise must be non-negative");
    if (cfg.data_path.empty()) {
        if (cfg.gen.k == 0 || cfg.gen.n < cfg.gen.k) throw ConfigError("need 1 <= gen_k <= gen_n");
        if (cfg.gen.dim == 0) throw ConfigError("gen_dim must be positive");
        if (!(cfg.gen.separation >= 0.0)) throw ConfigError("gen_separation must be non-negative");
        if (!(cfg.gen.noise >= 0.0)) throw ConfigError("gen_noise must be non-negative");
    }
}

std::string resolved_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& e : key_table()) {
        if (e.key.name == "output_dir") continue;
        out += e.key.name;
        out += '=';
        out += e.get(cfg);
        out += '\n';
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(resolved_config(cfg))));
    return buf;
}

AugmentationSpec augmentation_of(const RunConfig& cfg, const SampleShape& shape) {
    AugmentationSpec spec{shape, {}};
    if (cfg.aug_flip > 0.0) spec.transforms.emplace_back(HorizontalFlip{cfg.aug_flip});
    if (cfg.aug_crop > 0) spec.transforms.emplace_back(RandomCrop{cfg.aug_crop});
    if (cfg.aug_jitter > 0.0) spec.transforms.emplace_back(ColorJitter{cfg.aug_jitter});
    if (cfg.aug_gray > 0.0) spec.transforms.emplace_back(RandomGrayscale{cfg.aug_gray});
    if (cfg.aug_noise > 0.0) spec.transforms.emplace_back(GaussianNoise{cfg.aug_noise});
    return spec;
}

Dataset dataset_of(const RunConfig& cfg) {
    if (!cfg.data_path.empty()) return load_dataset(cfg.data_path, cfg.data_format);
    SeededRng rng(cfg.data_seed);
    return gen_sphere_mixture(cfg.gen, rng);
}

// ---------------------------------------------------------------------------
// Report files

std::string history_header(ObjectiveMode mode, bool with_metrics, bool with_spectral) {
    std::string h = "epoch,L_I,";
    h += mode == ObjectiveMode::IDFO ? "L_FO" : "L_F";
    if (with_metrics) h += ",ACC,NMI,ARI";
    h += ",lr";
    if (with_metrics && with_spectral) h += ",SP_ACC,SP_NMI,SP_ARI";
    return h;
}

namespace {

void append_scores(std::string& line, const std::optional<ClusterScores>& s) {
    if (s) {
        line += ',' + format_double(s->acc) + ',' + format_double(s->nmi) + ',' + format_double(s->ari);
    } else {
        line += ",,,";
    }
}

std::string history_row(const EpochRecord& r, const std::optional<ClusterScores>* spectral,
                        bool with_metrics) {
    std::string line = std::to_string(r.epoch) + ',' + format_double(r.loss_instance) + ',' +
                       format_double(r.loss_feature);
    if (with_metrics) append_scores(line, r.scores);
    line += ',' + format_double(r.lr);
    if (with_metrics && spectral) append_scores(line, *spectral);
    return line;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

std::pair<double, double> mean_std(std::span<const double> xs) {
    if (xs.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

}  // namespace

void write_history_csv(std::ostream& os, const RunReport& report, bool with_metrics,
                       bool with_spectral) {
    os << history_header(report.mode, with_metrics, with_spectral) << '\n';
    for (std::size_t i = 0; i < report.history.size(); ++i) {
        const std::optional<ClusterScores>* sp = nullptr;
        static const std::optional<ClusterScores> none;
        if (with_spectral) sp = i < report.spectral_history.size() ? &report.spectral_history[i] : &none;
        os << history_row(report.history[i], sp, with_metrics) << '\n';
    }
}

HistoryTable read_history_csv(std::istream& is) {
    HistoryTable t;
    std::string line;
    if (!std::getline(is, line)) throw EmptyInput("history CSV has no header");
    auto split = [](std::string_view s) {
        std::vector<std::string_view> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = s.find(',', start);
            cells.push_back(s.substr(start, comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return cells;
    };
    for (auto c : split(line)) t.columns.emplace_back(c);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.columns.size()) {
            throw DimensionMismatch("history row has " + std::to_string(cells.size()) + " cells, header " +
                                    std::to_string(t.columns.size()));
        }
        std::vector<std::optional<double>> row;
        for (auto c : cells) {
            if (c.empty()) row.emplace_back();
            else row.emplace_back(parse_double(c));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_history_table(std::ostream& os, const HistoryTable& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            if (!row[i]) continue;
            // Integral columns such as epoch print without an exponent either way.
            os << format_double(*row[i]);
        }
        os << '\n';
    }
}

namespace {

using nlohmann::json;

json scores_json(const std::optional<ClusterScores>& s) {
    if (!s) return nullptr;
    return {{"acc", s->acc}, {"nmi", s->nmi}, {"ari", s->ari}};
}

std::optional<ClusterScores> scores_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return ClusterScores{j.at("acc").get<double>(), j.at("nmi").get<double>(), j.at("ari").get<double>()};
}

}  // namespace

std::string summary_json(const RunReport& report, const RunConfig& cfg) {
    json j;
    j["config_hash"] = report.config_hash;
    json conf = json::object();
    for (const auto& e : key_table()) {
        if (e.key.name == "output_dir") continue;
        conf[std::string(e.key.name)] = e.get(cfg);
    }
    j["config"] = conf;
    j["mode"] = std::string(to_string(report.mode));
    j["seed"] = report.seed;
    j["n"] = report.n;
    j["k"] = report.k;
    j["final"] = scores_json(report.final_scores);
    j["spectral"] = scores_json(report.spectral_scores);
    j["acc_window_mean"] = report.acc_window_mean;
    j["acc_window_std"] = report.acc_window_std;
    j["mean_abs_correlation"] = report.mean_abs_correlation;
    j["undefined_correlations"] = report.undefined_correlations;
    json hist = json::array();
    for (std::size_t i = 0; i < report.history.size(); ++i) {
        const auto& r = report.history[i];
        json row = {{"epoch", r.epoch},
                    {"loss_instance", r.loss_instance},
                    {"loss_feature", r.loss_feature},
                    {"loss_total", r.loss_total},
                    {"lr", r.lr},
                    {"scores", scores_json(r.scores)}};
        if (i < report.spectral_history.size()) row["spectral"] = scores_json(report.spectral_history[i]);
        hist.push_back(std::move(row));
    }
    j["history"] = std::move(hist);
    return j.dump(2) + "\n";
}

RunReport parse_summary_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("summary JSON: ") + e.what());
    }
    RunReport r;
    try {
        r.config_hash = j.at("config_hash").get<std::string>();
        r.mode = parse_objective_mode(j.at("mode").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        r.n = j.at("n").get<std::size_t>();
        r.k = j.at("k").get<std::size_t>();
        r.final_scores = scores_from(j.at("final"));
        r.spectral_scores = scores_from(j.at("spectral"));
        r.acc_window_mean = j.at("acc_window_mean").get<double>();
        r.acc_window_std = j.at("acc_window_std").get<double>();
        r.mean_abs_correlation = j.at("mean_abs_correlation").get<double>();
        r.undefined_correlations = j.at("undefined_correlations").get<std::size_t>();
        bool any_spectral = false;
        for (const auto& row : j.at("history")) {
            EpochRecord e;
            e.epoch = row.at("epoch").get<std::size_t>();
            e.loss_instance = row.at("loss_instance").get<double>();
            e.loss_feature = row.at("loss_feature").get<double>();
            e.loss_total = row.at("loss_total").get<double>();
            e.lr = row.at("lr").get<double>();
            e.scores = scores_from(row.at("scores"));
            r.history.push_back(e);
            any_spectral = any_spectral || row.contains("spectral");
        }
        if (any_spectral) {
            for (const auto& row : j.at("history")) {
                r.spectral_history.push_back(row.contains("spectral") ? scores_from(row.at("spectral"))
                                                                      : std::nullopt);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("summary JSON: ") + e.what());
    }
    return r;
}

void write_sweep_csv(std::ostream& os, const SweepReport& report) {
    os << "parameter,value,acc_mean,acc_std,acc,nmi,ari,mean_abs_corr\n";
    for (const auto& row : report.rows) {
        const auto& r = row.report;
        os << to_string(report.parameter) << ',' << format_double(row.value) << ','
           << format_double(r.acc_window_mean) << ',' << format_double(r.acc_window_std);
        if (r.final_scores) {
            os << ',' << format_double(r.final_scores->acc) << ',' << format_double(r.final_scores->nmi)
               << ',' << format_double(r.final_scores->ari);
        } else {
            os << ",,,";
        }
        os << ',' << format_double(r.mean_abs_correlation) << '\n';
    }
}

Matrix read_matrix_csv(std::istream& is) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        std::size_t count = 0;
        std::string_view s = line;
        std::size_t start = 0;
        for (;;) {
            const auto comma = s.find(',', start);
            values.push_back(parse_double(trim(s.substr(start, comma - start))));
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows == 0) cols = count;
        else if (count != cols) throw DimensionMismatch("ragged matrix CSV");
        ++rows;
    }
    if (rows == 0) throw EmptyInput("matrix CSV is empty");
    return Matrix(rows, cols, std::move(values));
}

// ---------------------------------------------------------------------------
// Runs

namespace {

constexpr std::uint64_t kEvalStream = 0x6576616c;  // k-means seeds for evaluation

struct Evaluator {
    const RunConfig& cfg;
    const Matrix& features;
    Partition truth;
    std::size_t k;

    Matrix representations(const TrainState& s) const {
        return cfg.eval_source == EvalSource::Bank ? s.bank.vectors() : encode(s.params, features);
    }

    ClusterScores kmeans_scores(const Matrix& rep, const TrainState& s) const {
        const SeededRng rng = SeededRng(cfg.train.seed).derive(kEvalStream).derive(s.epoch);
        const auto res = kmeans(rep, k, rng, {cfg.restarts, 300});
        return score(truth, res.partition);
    }

    ClusterScores spectral_scores(const Matrix& rep, const TrainState& s) const {
        const SeededRng rng = SeededRng(cfg.train.seed).derive(kEvalStream + 1).derive(s.epoch);
        const auto p = spectral_cluster(rep, cfg.train.tau, k, rng, {cfg.restarts, 300});
        return score(truth, p);
    }
};

class OutputSink {
public:
    explicit OutputSink(const std::filesystem::path& dir) : dir_(dir) {
        if (dir_.empty()) return;
        std::filesystem::create_directories(dir_);
        std::filesystem::remove(dir_ / "FAILED");
    }
    bool enabled() const noexcept { return !dir_.empty(); }
    std::filesystem::path path(const char* name) const { return dir_ / name; }

    void open_history(const std::string& header) {
        if (!enabled()) return;
        history_.open(path("history.csv"), std::ios::binary | std::ios::trunc);
        if (!history_) throw Error("cannot write " + path("history.csv").string());
        history_ << header << '\n';
        history_.flush();
    }
    void history_line(const std::string& line) {
        if (!enabled()) return;
        history_ << line << '\n';
        history_.flush();
    }
    void close_history() {
        if (history_.is_open()) history_.close();
    }
    void fail(const std::string& what) noexcept {
        if (!enabled()) return;
        try {
            close_history();
            std::ofstream marker(path("FAILED"), std::ios::trunc);
            marker << what << '\n';
        } catch (...) {
        }
    }

private:
    std::filesystem::path dir_;
    std::ofstream history_;
};

RunReport run_impl(const RunConfig& cfg, const Dataset& data, OutputSink& sink) {
    validate(cfg);
    validate(data);
    const bool with_metrics = cfg.eval_every > 0;
    const bool with_spectral = with_metrics && cfg.spectral;
    const Matrix features = data.features();

    std::size_t k = cfg.clusters != 0 ? cfg.clusters : data.label_count();
    if (with_metrics && !data.labels) {
        throw ConfigError("evaluation needs ground-truth labels; set eval_every = 0");
    }
    if (k == 0) k = 1;
    if (k > data.size()) throw ConfigError("more clusters than samples");

    RunReport report;
    report.config_hash = config_hash(cfg);
    report.mode = cfg.mode;
    report.seed = cfg.train.seed;
    report.n = data.size();
    report.k = k;

    Evaluator eval{cfg, features, data.labels ? Partition::from_labels(*data.labels) : Partition{}, k};
    const AugmentationSpec aug = augmentation_of(cfg, data.shape);
    validate(aug);

    sink.open_history(history_header(cfg.mode, with_metrics, with_spectral));
    TrainState state = initial_state(features.cols(), features.rows(), cfg.train);
    std::vector<double> window;
    for (std::size_t e = 0; e < cfg.train.epochs; ++e) {
        EpochRecord rec = run_epoch(state, features, cfg.train, aug, cfg.mode);
        std::optional<ClusterScores> sp;
        const bool due = with_metrics && (state.epoch % cfg.eval_every == 0 || e + 1 == cfg.train.epochs);
        if (due) {
            const Matrix rep = eval.representations(state);
            rec.scores = eval.kmeans_scores(rep, state);
            window.push_back(rec.scores->acc);
            if (with_spectral) sp = eval.spectral_scores(rep, state);
        }
        sink.history_line(history_row(rec, with_spectral ? &sp : nullptr, with_metrics));
        report.history.push_back(rec);
        if (with_spectral) report.spectral_history.push_back(sp);
    }
    sink.close_history();

    const Matrix encoded = encode(state.params, features);
    const Matrix rep = eval.representations(state);
    if (data.labels) {
        if (!report.history.empty() && report.history.back().scores) {
            report.final_scores = report.history.back().scores;
            if (with_spectral) report.spectral_scores = report.spectral_history.back();
        } else {
            report.final_scores = eval.kmeans_scores(rep, state);
            if (cfg.spectral) report.spectral_scores = eval.spectral_scores(rep, state);
        }
    }
    const std::size_t take = std::min(window.size(), cfg.eval_window);
    std::tie(report.acc_window_mean, report.acc_window_std) =
        mean_std(std::span<const double>(window).last(take));
    const CorrelationReport corr = feature_correlation(encoded);
    report.mean_abs_correlation = mean_abs_offdiagonal(corr.correlation);
    report.undefined_correlations = corr.undefined_entries;

    if (sink.enabled()) {
        write_text(sink.path("summary.json"), summary_json(report, cfg));
        nlohmann::json m = {{"k", report.k}, {"n", report.n}, {"seed", report.seed}};
        if (report.final_scores) {
            m["acc"] = report.final_scores->acc;
            m["nmi"] = report.final_scores->nmi;
            m["ari"] = report.final_scores->ari;
        } else {
            m["acc"] = m["nmi"] = m["ari"] = nullptr;
        }
        write_text(sink.path("metrics.json"), m.dump(2) + "\n");
        std::ostringstream c;
        write_matrix_csv(c, corr.correlation);
        write_text(sink.path("correlation.csv"), c.str());
        std::ostringstream emb;
        write_matrix_csv(emb, encoded);
        write_text(sink.path("embeddings.csv"), emb.str());
        if (cfg.write_checkpoint) save_checkpoint(sink.path("checkpoint.bin"), state);
    }
    return report;
}

}  // namespace

RunReport run_experiment(const RunConfig& cfg, const Dataset& data) {
    OutputSink sink(cfg.output_dir);
    try {
        return run_impl(cfg, data, sink);
    } catch (const std::exception& e) {
        sink.fail(e.what());
        throw;
    }
}

RunReport run_experiment(const RunConfig& cfg) {
    validate(cfg);
    Dataset data;
    try {
        data = dataset_of(cfg);
    } catch (const std::exception& e) {
        OutputSink(cfg.output_dir).fail(e.what());
        throw;
    }
    return run_experiment(cfg, data);
}

SweepParameter parse_sweep_parameter(std::string_view text) {
    if (text == "tau") return SweepParameter::Tau;
    if (text == "tau2") return SweepParameter::Tau2;
    if (text == "alpha") return SweepParameter::Alpha;
    throw ConfigError("sweep parameter must be tau, tau2 or alpha, got '" + std::string(text) + "'");
}

std::string_view to_string(SweepParameter p) noexcept {
    switch (p) {
        case SweepParameter::Tau: return "tau";
        case SweepParameter::Tau2: return "tau2";
        case SweepParameter::Alpha: return "alpha";
    }
    return "?";
}

RunConfig with_parameter(RunConfig cfg, SweepParameter parameter, double value) {
    switch (parameter) {
        case SweepParameter::Tau: cfg.train.tau = value; break;
        case SweepParameter::Tau2: cfg.train.tau2 = value; break;
        case SweepParameter::Alpha: cfg.train.alpha = value; break;
    }
    return cfg;
}

SweepReport sweep(const RunConfig& cfg, SweepParameter parameter, const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    validate(cfg);
    const Dataset data = dataset_of(cfg);
    SweepReport out{parameter, {}};
    for (std::size_t i = 0; i < values.size(); ++i) {
        RunConfig run = with_parameter(cfg, parameter, values[i]);
        if (!cfg.output_dir.empty()) {
            run.output_dir = cfg.output_dir / (std::string(to_string(parameter)) + "_" + std::to_string(i));
        }
        out.rows.push_back({values[i], run_experiment(run, data)});
    }
    if (!cfg.output_dir.empty()) {
        std::ostringstream os;
        write_sweep_csv(os, out);
        write_text(cfg.output_dir / "sweep.csv", os.str());
    }
    return out;
}

}  // namespace idfd
