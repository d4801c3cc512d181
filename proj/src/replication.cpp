#include "erbr/replication.hpp"

#include "erbr/error.hpp"
#include "erbr/notation.hpp"
#include "erbr/reporting.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace erbr {
namespace {

struct FormatFitOutcome {
    FormatFit fit;
    std::string note;
};

FormatFitOutcome fit_format(const DatasetFormat& format, const Prior& prior, const FitConfig& config) {
    const std::vector<FitRow> rows = fit_rows(format, prior);
    FormatFitOutcome out;
    if (format.family || rows.size() > 1) {
        const FitResult r = fit_family_common_lambda(rows, config);
        out.fit = {r.lambda, r.rmse};
        return out;
    }
    try {
        const FitResult r = fit_lambda_per_partition(rows.front(), config);
        out.fit = {r.lambda, r.rmse};
        if (r.clipped) out.note = "empirical value clipped";
    } catch (const NoExactFit&) {
        const FitResult r = fit_family_common_lambda(rows, config);
        out.fit = {r.lambda, r.rmse};
        out.note = "no exact binary fit; grid search used";
    }
    return out;
}

std::optional<std::size_t> singleton_of(const Partition& p) {
    if (p.size() != 2) return std::nullopt;
    if (p.bin(0).size() == 1) return p.bin(0).states().front();
    if (p.bin(1).size() == 1) return p.bin(1).states().front();
    return std::nullopt;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string safe_name(const std::string& s) {
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out.empty() ? "_" : out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::optional<std::size_t> find_binary_family(const BeliefDataset& dataset) {
    const std::size_t n = dataset.space->size();
    for (std::size_t f = 0; f < dataset.formats.size(); ++f) {
        const DatasetFormat& fmt = dataset.formats[f];
        if (!fmt.family) continue;
        std::vector<bool> seen(n, false);
        bool ok = true;
        for (const auto& m : fmt.members) {
            const auto w = singleton_of(m.partition);
            if (!w || seen[*w]) {
                ok = false;
                break;
            }
            seen[*w] = true;
        }
        if (ok && std::find(seen.begin(), seen.end(), false) == seen.end()) return f;
    }
    return std::nullopt;
}

BinaryReportSet binary_reports(const BeliefDataset& dataset, std::size_t family_index) {
    const DatasetFormat& fmt = dataset.formats.at(family_index);
    std::vector<double> mu(dataset.space->size(), 0.0);
    for (const auto& m : fmt.members) {
        const auto w = singleton_of(m.partition);
        if (!w) throw StructuralError("binary_reports: format '" + fmt.name + "' is not a binary family");
        const std::size_t bin = m.partition.bin(0).size() == 1 && m.partition.bin(0).states().front() == *w ? 0 : 1;
        mu[*w] = m.empirical[bin];
    }
    return BinaryReportSet(dataset.space, std::move(mu));
}

ReplicationReport replicate(const BeliefDataset& dataset, const ReplicationConfig& config) {
    if (dataset.formats.empty()) throw ConfigurationError("replicate: dataset has no formats");
    ReplicationReport report;
    report.seed = config.seed;
    report.state_labels = dataset.space->labels();
    report.diagnostics = dataset.diagnostics;

    if (config.recover) {
        const auto family = find_binary_family(dataset);
        if (!family) {
            throw ConfigurationError(
                "replicate: recovery requested but the dataset has no binary family {w}|~w covering every state");
        }
        RecoveredPrior rec;
        const BinaryRecovery outcome = recover_from_binary(binary_reports(dataset, *family), config.recovery);
        if (const auto* ok = std::get_if<RecoveryResult>(&outcome)) {
            rec.status = "ok";
            rec.prior = ok->prior;
            rec.lambda = ok->lambda;
            rec.roots = ok->roots_found;
            rec.sum_residual = ok->sum_residual;
            if (ok->multiple_roots()) report.diagnostics.push_back("recovery found several roots; kept the one closest to 1");
        } else if (std::holds_alternative<NoSolution>(outcome)) {
            rec.status = "no_solution";
        } else {
            rec.status = "degenerate";
        }
        report.recovered = std::move(rec);
    } else if (!dataset.true_prior) {
        throw ConfigurationError("replicate: the dataset has no true prior and recovery is disabled");
    }

    const Prior* base = nullptr;
    if (dataset.true_prior) {
        base = &*dataset.true_prior;
        report.base_prior = "true";
    } else {
        if (!report.recovered->prior) {
            throw ConsistencyError("replicate: no true prior and binary recovery failed (" + report.recovered->status + ")",
                                   0.0);
        }
        base = &*report.recovered->prior;
        report.base_prior = "recovered";
    }
    report.base_probs = base->probs();

    const std::vector<FitRow> rows = fit_rows(dataset, *base);
    const FitResult single = fit_lambda_single(rows, config.fit);
    report.lambda_single = single.lambda;
    report.rmse_single = single.rmse;
    report.weighting = single.weighting;
    const auto at0 = rmse_by_format(rows, 0.0, config.fit.aggregation);
    const auto at1 = rmse_by_format(rows, 1.0, config.fit.aggregation);

    for (const DatasetFormat& f : dataset.formats) {
        report.table2.push_back({f.name, single.rmse_by_partition.at(f.name), at0.at(f.name), at1.at(f.name)});

        const FormatFitOutcome own = fit_format(f, *base, config.fit);
        report.table3.push_back(
            {f.name, f.family, own.fit.lambda, own.fit.rmse, single.rmse_by_partition.at(f.name), own.note});

        FigureData fig{f.name, {}};
        for (std::size_t i = 0; i < f.members.size(); ++i) {
            const auto& m = f.members[i];
            const std::vector<double> truth = induced_prior(*base, m.partition);
            const std::vector<double> model = reported_beliefs(truth, Lambda(single.lambda));
            const std::vector<double> model_own = reported_beliefs(truth, Lambda(own.fit.lambda));
            for (std::size_t b = 0; b < m.partition.size(); ++b) {
                fig.rows.push_back({member_label(f, i), format_bin(m.partition.bin(b), *dataset.space), truth[b],
                                    m.empirical[b], model[b], model_own[b]});
            }
        }
        report.figures.push_back(std::move(fig));
    }

    if (report.recovered) {
        for (std::size_t k = 0; k < dataset.formats.size(); ++k) {
            const DatasetFormat& f = dataset.formats[k];
            Table4Row row{f.name, std::nullopt, std::nullopt};
            if (dataset.true_prior) row.true_prior = FormatFit{report.table3[k].lambda_partition, report.table3[k].rmse_partition};
            if (report.recovered->prior) row.recovered_prior = fit_format(f, *report.recovered->prior, config.fit).fit;
            report.table4.push_back(std::move(row));
        }
    }
    return report;
}

std::string report_to_json(const ReplicationReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["seed"] = report.seed;
    j["states"] = report.state_labels;
    j["base_prior"] = report.base_prior;
    j["base_probs"] = report.base_probs;
    j["lambda_single"] = report.lambda_single;
    j["rmse_single"] = report.rmse_single;
    j["weighting"] = report.weighting;

    ordered_json t2 = ordered_json::array();
    for (const auto& r : report.table2) {
        t2.push_back({{"format", r.format},
                      {"rmse_fitted", r.rmse_fitted},
                      {"rmse_lambda0", r.rmse_lambda0},
                      {"rmse_lambda1", r.rmse_lambda1}});
    }
    j["table2"] = std::move(t2);

    ordered_json t3 = ordered_json::array();
    for (const auto& r : report.table3) {
        ordered_json row{{"format", r.format},
                         {"family", r.family},
                         {"lambda_partition", r.lambda_partition},
                         {"rmse_partition", r.rmse_partition},
                         {"rmse_single", r.rmse_single}};
        if (!r.note.empty()) row["note"] = r.note;
        t3.push_back(std::move(row));
    }
    j["table3"] = std::move(t3);

    if (report.recovered) {
        const auto& rec = *report.recovered;
        ordered_json jr{{"status", rec.status}};
        if (rec.prior) {
            jr["lambda"] = rec.lambda;
            jr["probs"] = rec.prior->probs();
            jr["roots"] = rec.roots;
            jr["sum_residual"] = rec.sum_residual;
        }
        j["recovered_prior"] = std::move(jr);
    } else {
        j["recovered_prior"] = nullptr;
    }

    auto fit_json = [](const std::optional<FormatFit>& f) -> ordered_json {
        if (!f) return nullptr;
        return {{"lambda", f->lambda}, {"rmse", f->rmse}};
    };
    ordered_json t4 = ordered_json::array();
    for (const auto& r : report.table4) {
        t4.push_back({{"format", r.format}, {"true_prior", fit_json(r.true_prior)}, {"recovered_prior", fit_json(r.recovered_prior)}});
    }
    j["table4"] = std::move(t4);

    ordered_json figs = ordered_json::array();
    for (const auto& f : report.figures) {
        ordered_json rows = ordered_json::array();
        for (const auto& r : f.rows) {
            rows.push_back({{"partition", r.partition},
                            {"bin", r.bin},
                            {"true", r.truth},
                            {"empirical", r.empirical},
                            {"model", r.model},
                            {"model_partition", r.model_partition}});
        }
        figs.push_back({{"format", f.format}, {"rows", std::move(rows)}});
    }
    j["figure_data"] = std::move(figs);
    j["diagnostics"] = report.diagnostics;
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit_report(const ReplicationReport& report, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        const auto path = out_dir / name;
        write_file(path, text);
        written.push_back(path);
    };

    emit("report.json", report_to_json(report));

    std::string t2 = "format,lambda,rmse_fitted,rmse_lambda0,rmse_lambda1\n";
    for (const auto& r : report.table2) {
        t2 += csv_field(r.format) + "," + format_real(report.lambda_single) + "," + format_real(r.rmse_fitted) + "," +
              format_real(r.rmse_lambda0) + "," + format_real(r.rmse_lambda1) + "\n";
    }
    emit("table2.csv", t2);

    std::string t3 = "format,family,lambda_partition,rmse_partition,rmse_single\n";
    for (const auto& r : report.table3) {
        t3 += csv_field(r.format) + "," + (r.family ? "true" : "false") + "," + format_real(r.lambda_partition) + "," +
              format_real(r.rmse_partition) + "," + format_real(r.rmse_single) + "\n";
    }
    emit("table3.csv", t3);

    auto opt = [](const std::optional<FormatFit>& f, bool lambda) {
        return f ? format_real(lambda ? f->lambda : f->rmse) : std::string();
    };
    std::string t4 = "format,lambda_true,rmse_true,lambda_recovered,rmse_recovered\n";
    for (const auto& r : report.table4) {
        t4 += csv_field(r.format) + "," + opt(r.true_prior, true) + "," + opt(r.true_prior, false) + "," +
              opt(r.recovered_prior, true) + "," + opt(r.recovered_prior, false) + "\n";
    }
    emit("table4.csv", t4);

    for (const auto& f : report.figures) {
        std::string text = "partition,bin,true,empirical,model,model_partition\n";
        for (const auto& r : f.rows) {
            text += csv_field(r.partition) + "," + csv_field(r.bin) + "," + format_real(r.truth) + "," +
                    format_real(r.empirical) + "," + format_real(r.model) + "," + format_real(r.model_partition) + "\n";
        }
        emit("fig_" + safe_name(f.format) + ".csv", text);
    }
    return written;
}

}  // namespace erbr
