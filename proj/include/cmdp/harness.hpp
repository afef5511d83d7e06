#pragma once

#include "cmdp/design.hpp"
#include "cmdp/envs.hpp"
#include "cmdp/features.hpp"
#include "cmdp/solvers.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cmdp {

struct EstimatorSpec {
    enum class Kind { exact, monte_carlo };
    Kind kind = Kind::exact;
    int m = 100;
    double eps_trunc = 1e-3;
    double delta = 0.05;
    /// Ridge of the least-squares fit against the weighted Gram; 0 gives the minimum-norm fit.
    double fit_nu = 0.0;
};

struct FeatureSpec {
    enum class Kind { one_hot, tile_coding, random };
    Kind kind = Kind::one_hot;
    std::array<int, 2> tile_size{1, 1};
    int n_tilings = 1;
    std::vector<std::array<int, 2>> offsets;
    int dim = 4;
    std::uint64_t seed = 0;
};

struct CoresetSpec {
    /// Use every state-action pair instead of the greedy design.
    bool full = true;
    double eps_prime = 1.0;
    double nu = 1.0;
};

/// One hyperparameter axis of a sweep, e.g. alpha_lambda = {1, 2, 5}.
struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct ExperimentConfig {
    EnvSpec env;
    SolverConfig solver;
    EstimatorSpec estimator;
    FeatureSpec features;
    CoresetSpec coreset;
    std::vector<std::uint64_t> seeds{0};
    std::string output = "runs";
    std::vector<SweepAxis> sweep;
    /// Canonical JSON the config was parsed from; hashed into CSV headers.
    nlohmann::json source;
};

/// Parse and validate; unknown keys and bad values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical (sorted-key, compact) JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

/// Feature map for a config; requires a grid environment for tile coding.
FeatureMap make_features(const ExperimentConfig& config, const TabularCmdp& cmdp);

/// Coreset for a config (greedy design or full enumeration).
Coreset make_coreset(const ExperimentConfig& config, const FeatureMap& features);

/// Shared, immutable inputs of a run.
struct RunContext {
    std::shared_ptr<const TabularCmdp> cmdp;
    std::shared_ptr<const FeatureMap> features;
    std::shared_ptr<const Coreset> coreset;
};

RunContext make_context(const ExperimentConfig& config);

/// Estimator for a run; sampled estimators derive every stream from `seed`.
QEstimator make_estimator(const ExperimentConfig& config, const RunContext& context, std::uint64_t seed);

struct ExperimentResult {
    IterateLog log;
    std::uint64_t seed = 0;
    std::filesystem::path csv;
};

/// Run one (config, seed) and write its CSV (when `csv` is non-empty).
ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                                const std::filesystem::path& csv, const RunContext* context = nullptr);

/// CSV text for an iterate log; header lines start with '#'.
std::string format_csv(const ExperimentConfig& config, const IterateLog& log, std::uint64_t seed,
                       const std::vector<std::pair<std::string, std::string>>& extra_header = {});

/// Per-cell aggregate over seeds.
struct CellSummary {
    int index = 0;
    std::vector<std::pair<std::string, double>> params;
    std::string status = "ok";
    std::string message;
    int n_seeds = 0;
    /// Final running OG, (1/T) sum (J_r* - J_r).
    double og_mean = 0.0;
    double og_ci95 = 0.0;
    /// Final running CV with the positive part.
    double cv_mean = 0.0;
    /// Final (1/T) sum (b - J_c), signed; used by the best-cell rule.
    double signed_cv_mean = 0.0;
    double signed_cv_ci95 = 0.0;
};

struct SweepResult {
    std::vector<CellSummary> cells;
    /// Least og_mean among ok cells with signed CV in [-0.25, 0]; -1 when none qualifies.
    int best_cell = -1;
    std::filesystem::path summary_csv;

    /// max - min og_mean over ok cells.
    double og_spread() const;
};

/// Cartesian product of the sweep axes, first axis slowest.
std::vector<std::vector<std::pair<std::string, double>>> sweep_cells(const std::vector<SweepAxis>& axes);

/// Apply one cell's hyperparameters to a copy of the solver config.
SolverConfig apply_cell(SolverConfig base, const std::vector<std::pair<std::string, double>>& cell);

/// Seed of a (cell, master seed) run: derive_seed(master, {cell}).
std::uint64_t cell_seed(std::uint64_t master, int cell);

/// Run every cell for every seed on `jobs` worker threads. Failing cells are
/// recorded with their error and do not stop the others. Writes per-run CSVs and
/// summary.csv under config.output unless write_files is false.
SweepResult run_sweep(const ExperimentConfig& config, int jobs = 1, bool write_files = true);

/// Index of the best cell per the rule above.
int select_best_cell(const std::vector<CellSummary>& cells, double cv_low = -0.25, double cv_high = 0.0);

/// Human-readable summary of every summary.csv below `dir`.
std::string report_directory(const std::filesystem::path& dir);

/// Oracle quantities (J_r*, J_c*, zeta, lambda_hat*, eps_b) for a config's environment.
nlohmann::json oracle_report(const ExperimentConfig& config);

/// Coreset points, weights and sup-leverage for a config.
nlohmann::json coreset_report(const ExperimentConfig& config);

} // namespace cmdp
