#pragma once

// RMSE fitting of the regularization parameter against empirical bin means.

#include "erbr/scalar_search.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace erbr {

/// One elicited partition: the induced base probabilities of its bins, the
/// empirical mean report per bin, and the format it belongs to.
struct FitRow {
    std::vector<double> base;
    std::vector<double> empirical;
    std::string format;
    std::string label;  // identifies the partition inside its format
};

/// How the members of a multi-partition format are combined into one RMSE.
enum class FamilyAggregation {
    kPooled,    // one RMSE over all bins of all members
    kAveraged,  // mean of the per-member RMSEs
};

struct FitConfig {
    search::GridSearch grid;  // defaults: [-2, 4] step 0.01, golden refine to 1e-12
    FamilyAggregation aggregation = FamilyAggregation::kPooled;
};

struct FitResult {
    double lambda = 1.0;
    std::map<std::string, double> lambda_by_partition;  // per-partition fits only
    double rmse = 0.0;
    std::map<std::string, double> rmse_by_partition;    // keyed by format or member label
    std::string weighting;
    std::size_t clipped = 0;  // empirical values pulled into [1e-9, 1 - 1e-9]
};

double rmse(std::span<const double> predicted, std::span<const double> observed);

/// RMSE of a group of rows at one lambda, combined per `aggregation`.
double group_rmse(std::span<const FitRow> rows, double lambda, FamilyAggregation aggregation);

/// Per-format RMSE at a given lambda, formats in first-appearance order.
std::map<std::string, double> rmse_by_format(std::span<const FitRow> rows, double lambda,
                                             FamilyAggregation aggregation);

/// A single lambda minimizing the simple average of per-format RMSEs, so a
/// format with many partitions weighs the same as a single-partition one.
FitResult fit_lambda_single(std::span<const FitRow> rows, const FitConfig& config = {});

/// Best lambda for one partition. Binary partitions use the exact solution
/// logit(empirical) / logit(base); NoExactFit when base is 1/2 and the
/// empirical value is not.
FitResult fit_lambda_per_partition(const FitRow& row, const FitConfig& config = {});

/// One lambda shared by a family of partitions.
FitResult fit_family_common_lambda(std::span<const FitRow> rows, const FitConfig& config = {});

}  // namespace erbr
