#pragma once

// Partition-format survey data: the coin-toss designs, dataset files and the
// conversion to fitting rows.

#include "erbr/fitting.hpp"
#include "erbr/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace erbr {

/// Binomial(n, p) over states 0..n. p must lie strictly inside (0, 1).
Prior binomial_prior(int n, double p);
Prior binomial_prior(const SpacePtr& space, int n, double p);

struct PartitionFormat {
    std::string name;
    bool family = false;
    std::vector<Partition> partitions;
};

/// The four elicitation formats over 0..10 heads: P1 (eleven singletons),
/// P2 {0-3|4|5|6|7-10}, P3 {0-4|5|6-10}, and the family P4 of the eleven
/// binary partitions {k}|~k.
std::vector<PartitionFormat> standard_partitions();
std::vector<PartitionFormat> standard_partitions(const SpacePtr& space);

struct DatasetMember {
    Partition partition;
    std::vector<double> empirical;
};

struct DatasetFormat {
    std::string name;
    bool family = false;
    std::vector<DatasetMember> members;
};

struct PriorSource {
    enum class Kind { kBinomial, kExplicit };
    Kind kind = Kind::kExplicit;
    int n = 0;
    double p = 0.5;
};

struct BeliefDataset {
    SpacePtr space;
    std::vector<DatasetFormat> formats;
    std::optional<Prior> true_prior;
    std::optional<PriorSource> prior_source;
    std::string metadata;
    std::vector<std::string> diagnostics;  // renormalization warnings and the like

    std::size_t record_count() const;
    const DatasetFormat* find_format(const std::string& name) const;
};

enum class DatasetFileFormat { kJson, kCsv };

struct LoadOptions {
    double sum_tolerance = 1e-6;
};

/// Reads and validates a dataset. Rows summing to 1 within the tolerance are
/// renormalized with a diagnostic; rows beyond it are rejected. Schema
/// problems raise ParseError; bins that do not partition the space raise
/// StructuralError.
BeliefDataset load_dataset(const std::filesystem::path& path, DatasetFileFormat format,
                           const LoadOptions& options = {});
BeliefDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});  // by extension
BeliefDataset parse_dataset_json(std::string_view text, const LoadOptions& options = {});
BeliefDataset parse_dataset_csv(std::string_view text, const LoadOptions& options = {});

/// JSON text in the dataset schema (bins written in range notation).
std::string dataset_to_json(const BeliefDataset& dataset);

/// Fitting rows for every member, with base probabilities induced by `prior`.
/// Member labels are "<format>" for single-member formats and
/// "<format>[i]" otherwise.
std::vector<FitRow> fit_rows(const BeliefDataset& dataset, const Prior& prior);
std::vector<FitRow> fit_rows(const DatasetFormat& format, const Prior& prior);

std::string member_label(const DatasetFormat& format, std::size_t index);

}  // namespace erbr
