#pragma once

// The fitting pipeline over a survey dataset: a single parameter, one per
// format, prior recovery from the binary family, and plot data.

#include "erbr/dataset.hpp"
#include "erbr/fitting.hpp"
#include "erbr/recovery.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace erbr {

struct ReplicationConfig {
    FitConfig fit;
    RecoveryConfig recovery;
    bool recover = true;  // run binary recovery and the recovered-prior refit
    std::uint64_t seed = 0;  // echoed only; the pipeline has no random steps
};

struct Table2Row {
    std::string format;
    double rmse_fitted = 0.0;
    double rmse_lambda0 = 0.0;
    double rmse_lambda1 = 0.0;
};

struct Table3Row {
    std::string format;
    bool family = false;
    double lambda_partition = 0.0;
    double rmse_partition = 0.0;
    double rmse_single = 0.0;
    std::string note;  // set when the exact binary fit was unavailable
};

struct FormatFit {
    double lambda = 0.0;
    double rmse = 0.0;
};

struct Table4Row {
    std::string format;
    std::optional<FormatFit> true_prior;
    std::optional<FormatFit> recovered_prior;
};

struct RecoveredPrior {
    std::string status;  // "ok", "no_solution" or "degenerate"
    std::optional<Prior> prior;
    double lambda = 0.0;
    std::vector<double> roots;
    double sum_residual = 0.0;
};

struct FigureRow {
    std::string partition;  // member label
    std::string bin;
    double truth = 0.0;     // bin mass under the base prior
    double empirical = 0.0;
    double model = 0.0;             // report at the single fitted lambda
    double model_partition = 0.0;   // report at the format's own lambda
};

struct FigureData {
    std::string format;
    std::vector<FigureRow> rows;
};

struct ReplicationReport {
    std::string base_prior;  // "true" or "recovered"
    std::vector<double> base_probs;
    double lambda_single = 0.0;
    double rmse_single = 0.0;
    std::string weighting;
    std::vector<Table2Row> table2;
    std::vector<Table3Row> table3;
    std::optional<RecoveredPrior> recovered;
    std::vector<Table4Row> table4;
    std::vector<FigureData> figures;
    std::vector<std::string> state_labels;
    std::vector<std::string> diagnostics;
    std::uint64_t seed = 0;
};

/// Index of the binary family usable for recovery: a family whose members are
/// {w}|~w covering every state. Empty when there is none.
std::optional<std::size_t> find_binary_family(const BeliefDataset& dataset);

/// Binary reports taken from that family.
BinaryReportSet binary_reports(const BeliefDataset& dataset, std::size_t family_index);

/// Fits against the true prior when the dataset has one, otherwise against
/// the recovered prior. ConfigurationError when recovery is requested without
/// a binary family, or when there is neither a true prior nor recovery;
/// ConsistencyError when the base prior had to be recovered and recovery
/// found no solution.
ReplicationReport replicate(const BeliefDataset& dataset, const ReplicationConfig& config = {});

std::string report_to_json(const ReplicationReport& report);

/// Writes report.json, table2.csv, table3.csv, table4.csv and one
/// fig_<format>.csv per figure. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ReplicationReport& report, const std::filesystem::path& out_dir);

}  // namespace erbr
