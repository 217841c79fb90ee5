#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idfd/augment.hpp"
#include "idfd/clustering.hpp"
#include "idfd/dataset.hpp"
#include "idfd/losses.hpp"
#include "idfd/trainer.hpp"

namespace idfd {

enum class EvalSource { Encoded, Bank };

/// Everything a run depends on. Serialised as `key = value` lines; the key
/// set is fixed (see config_keys()) and unknown keys are rejected.
struct RunConfig {
    TrainConfig train;
    ObjectiveMode mode = ObjectiveMode::IDFD;

    std::size_t clusters = 0;  ///< 0: number of distinct ground-truth labels
    std::size_t restarts = 10;
    std::size_t eval_every = 1;  ///< 0 disables per-epoch evaluation
    std::size_t eval_window = 20;  ///< trailing evaluations averaged by sweep
    EvalSource eval_source = EvalSource::Encoded;
    bool spectral = false;

    // Augmentation, applied in the order flip, crop, jitter, grayscale, noise.
    double aug_flip = 0.0;
    std::size_t aug_crop = 0;
    double aug_jitter = 0.0;
    double aug_gray = 0.0;
    double aug_noise = 0.1;

    // Data: a file when data_path is set, otherwise a generated sphere mixture.
    std::string data_path;
    DatasetFormat data_format = DatasetFormat::CsvLabeled;
    SphereMixtureSpec gen = {4, 400, 32, 1.0, 0.25};
    std::uint64_t data_seed = 0;

    std::filesystem::path output_dir;  ///< empty: nothing is written
    bool write_checkpoint = true;
};

struct ConfigKey {
    std::string_view name;
    std::string_view help;
};
/// Every recognised key, in canonical order.
const std::vector<ConfigKey>& config_keys();

/// Applies one assignment; throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

/// Parses `key = value` lines; blank lines and `#` comments are ignored.
/// Later assignments override earlier ones.
RunConfig parse_run_config(std::istream& in, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Cross-field checks (schema ranges, augmentation shape, training config).
void validate(const RunConfig& cfg);

/// Canonical `key=value` lines in config_keys() order. output_dir is left
/// out: it decides where results go, not what they are.
std::string resolved_config(const RunConfig& cfg);
/// fnv1a64 of resolved_config, as 16 lowercase hex digits.
std::string config_hash(const RunConfig& cfg);

AugmentationSpec augmentation_of(const RunConfig& cfg, const SampleShape& shape);
Dataset dataset_of(const RunConfig& cfg);

struct RunReport {
    std::string config_hash;
    ObjectiveMode mode = ObjectiveMode::IDFD;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<EpochRecord> history;
    /// Per-epoch spectral scores, parallel to history; empty unless enabled.
    std::vector<std::optional<ClusterScores>> spectral_history;
    std::optional<ClusterScores> final_scores;
    std::optional<ClusterScores> spectral_scores;
    /// ACC over the last eval_window evaluated epochs.
    double acc_window_mean = 0.0;
    double acc_window_std = 0.0;
    double mean_abs_correlation = 0.0;
    std::size_t undefined_correlations = 0;

    bool operator==(const RunReport&) const = default;
};

/// Train, evaluate at the configured cadence, and write into output_dir:
///   history.csv      epoch,L_I,<L_F|L_FO>,ACC,NMI,ARI,lr  (metric columns
///                    only when eval_every > 0; SP_ACC,SP_NMI,SP_ARI appended
///                    when spectral is on; cells of unevaluated epochs empty)
///   summary.json     full report plus resolved config and its hash
///   metrics.json     {acc, nmi, ari, k, n, seed} of the final evaluation
///   correlation.csv  d x d feature correlation of the final encodings
///   embeddings.csv   final encodings, one sample per line
///   checkpoint.bin   final TrainState
/// On failure, whatever has been written stays, a FAILED file records the
/// error and the exception is rethrown.
RunReport run_experiment(const RunConfig& cfg);

/// Same, on an already loaded dataset.
RunReport run_experiment(const RunConfig& cfg, const Dataset& data);

enum class SweepParameter { Tau, Tau2, Alpha };
SweepParameter parse_sweep_parameter(std::string_view text);
std::string_view to_string(SweepParameter p) noexcept;

struct SweepRow {
    double value = 0.0;
    RunReport report;
};

struct SweepReport {
    SweepParameter parameter = SweepParameter::Tau;
    std::vector<SweepRow> rows;
};

/// One run per value, each in output_dir/<parameter>_<index>, plus
/// output_dir/sweep.csv:
///   parameter,value,acc_mean,acc_std,acc,nmi,ari,mean_abs_corr
SweepReport sweep(const RunConfig& cfg, SweepParameter parameter, const std::vector<double>& values);

RunConfig with_parameter(RunConfig cfg, SweepParameter parameter, double value);

// Writers and loaders for the report files.
std::string history_header(ObjectiveMode mode, bool with_metrics, bool with_spectral);
void write_history_csv(std::ostream& os, const RunReport& report, bool with_metrics,
                       bool with_spectral);
struct HistoryTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;  ///< nullopt: empty cell
    bool operator==(const HistoryTable&) const = default;
};
HistoryTable read_history_csv(std::istream& is);
void write_history_table(std::ostream& os, const HistoryTable& table);

std::string summary_json(const RunReport& report, const RunConfig& cfg);
/// Reconstructs the report stored by summary_json.
RunReport parse_summary_json(std::string_view text);

void write_sweep_csv(std::ostream& os, const SweepReport& report);

Matrix read_matrix_csv(std::istream& is);

}  // namespace idfd
