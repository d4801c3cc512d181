#include "erbr/fitting.hpp"

#include "erbr/error.hpp"
#include "erbr/model.hpp"
#include "erbr/reporting.hpp"

#include <algorithm>
#include <cmath>

namespace erbr {
namespace {

constexpr double kClip = 1e-9;

void validate(const FitRow& row) {
    if (row.base.empty() || row.base.size() != row.empirical.size()) {
        throw StructuralError("fit row '" + row.label + "': base and empirical vectors must be non-empty and equal length");
    }
    for (double b : row.base) {
        if (!(b > 0.0)) throw DomainError("fit row '" + row.label + "': base probabilities must be strictly positive");
    }
}

double squared_error_sum(const FitRow& row, double lambda, std::size_t& count) {
    const std::vector<double> model = reported_beliefs(row.base, Lambda(lambda));
    double s = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double d = model[i] - row.empirical[i];
        s += d * d;
    }
    count += model.size();
    return s;
}

std::vector<std::string> format_order(std::span<const FitRow> rows) {
    std::vector<std::string> order;
    for (const FitRow& r : rows) {
        if (std::find(order.begin(), order.end(), r.format) == order.end()) order.push_back(r.format);
    }
    return order;
}

std::vector<FitRow> rows_of(std::span<const FitRow> rows, const std::string& format) {
    std::vector<FitRow> out;
    for (const FitRow& r : rows) {
        if (r.format == format) out.push_back(r);
    }
    return out;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

double rmse(std::span<const double> predicted, std::span<const double> observed) {
    if (predicted.size() != observed.size() || predicted.empty()) throw StructuralError("rmse: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - observed[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predicted.size()));
}

double group_rmse(std::span<const FitRow> rows, double lambda, FamilyAggregation aggregation) {
    if (rows.empty()) throw StructuralError("group_rmse: no rows");
    if (aggregation == FamilyAggregation::kPooled) {
        std::size_t count = 0;
        double s = 0.0;
        for (const FitRow& r : rows) s += squared_error_sum(r, lambda, count);
        return std::sqrt(s / static_cast<double>(count));
    }
    double total = 0.0;
    for (const FitRow& r : rows) {
        std::size_t count = 0;
        total += std::sqrt(squared_error_sum(r, lambda, count) / static_cast<double>(count));
    }
    return total / static_cast<double>(rows.size());
}

std::map<std::string, double> rmse_by_format(std::span<const FitRow> rows, double lambda,
                                             FamilyAggregation aggregation) {
    std::map<std::string, double> out;
    for (const std::string& f : format_order(rows)) out[f] = group_rmse(rows_of(rows, f), lambda, aggregation);
    return out;
}

FitResult fit_lambda_single(std::span<const FitRow> rows, const FitConfig& config) {
    if (rows.empty()) throw StructuralError("fit_lambda_single: empty dataset");
    for (const FitRow& r : rows) validate(r);

    std::vector<std::vector<FitRow>> groups;
    for (const std::string& f : format_order(rows)) groups.push_back(rows_of(rows, f));

    auto objective = [&](double l) {
        double total = 0.0;
        for (const auto& g : groups) total += group_rmse(g, l, config.aggregation);
        return total / static_cast<double>(groups.size());
    };
    const search::Minimum best = search::grid_then_golden(objective, config.grid);

    FitResult out;
    out.lambda = best.x;
    out.rmse = best.value;
    out.rmse_by_partition = rmse_by_format(rows, best.x, config.aggregation);
    out.weighting = config.aggregation == FamilyAggregation::kPooled
                        ? "mean of per-format RMSE; bins pooled within a format"
                        : "mean of per-format RMSE; member RMSEs averaged within a format";
    return out;
}

FitResult fit_lambda_per_partition(const FitRow& row, const FitConfig& config) {
    validate(row);
    FitResult out;
    out.weighting = "single partition";
    if (row.base.size() == 2) {
        double emp = row.empirical[0];
        const double clipped = std::clamp(emp, kClip, 1.0 - kClip);
        if (clipped != emp) out.clipped = 1;
        emp = clipped;
        const double base = row.base[0] / (row.base[0] + row.base[1]);
        if (base == 0.5) {
            if (emp != 0.5) {
                throw NoExactFit("fit_lambda_per_partition: base probability 1/2 forces a report of 1/2");
            }
            out.lambda = 1.0;
        } else {
            out.lambda = logit(emp) / logit(base);
        }
        std::size_t count = 0;
        out.rmse = std::sqrt(squared_error_sum(row, out.lambda, count) / static_cast<double>(count));
    } else {
        const FitRow one[] = {row};
        const search::Minimum best = search::grid_then_golden(
            [&](double l) { return group_rmse(one, l, FamilyAggregation::kPooled); }, config.grid);
        out.lambda = best.x;
        out.rmse = best.value;
    }
    out.lambda_by_partition[row.label] = out.lambda;
    out.rmse_by_partition[row.label] = out.rmse;
    return out;
}

FitResult fit_family_common_lambda(std::span<const FitRow> rows, const FitConfig& config) {
    if (rows.empty()) throw StructuralError("fit_family_common_lambda: empty family");
    for (const FitRow& r : rows) validate(r);
    const search::Minimum best =
        search::grid_then_golden([&](double l) { return group_rmse(rows, l, config.aggregation); }, config.grid);

    FitResult out;
    out.lambda = best.x;
    out.rmse = best.value;
    for (const FitRow& r : rows) {
        std::size_t count = 0;
        out.rmse_by_partition[r.label] = std::sqrt(squared_error_sum(r, best.x, count) / static_cast<double>(count));
    }
    out.weighting = config.aggregation == FamilyAggregation::kPooled ? "family bins pooled"
                                                                      : "family member RMSEs averaged";
    return out;
}

}  // namespace erbr
