#include "wmh/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wmh/nifti_io.hpp"

namespace wmh {

std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&]() {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(row);
        row.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_row();
        } else {
            field += c;
        }
    }
    if (!field.empty() || !row.empty()) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        end_row();
    }
    return rows;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw VolumeError("cannot open CSV: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    auto rows = parse_csv_text(ss.str());
    if (rows.empty()) throw VolumeError("empty CSV: " + path);
    CsvTable t;
    t.columns = rows.front();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != t.columns.size())
            throw VolumeError("CSV row " + std::to_string(i + 1) + " has wrong field count: " +
                              path);
        t.rows.push_back(rows[i]);
    }
    return t;
}

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

SummaryStats summarize(const std::vector<double>& values) {
    SummaryStats s;
    s.n = values.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    s.median = percentile(values, 50.0);
    s.q1 = percentile(values, 25.0);
    s.q3 = percentile(values, 75.0);
    return s;
}

std::string format_median_iqr(const SummaryStats& s, int precision) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(precision);
    os << s.median << " (" << s.q1 << ", " << s.q3 << ")";
    return os.str();
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"dsc", "hd95_mm", "avd_pct", "lesion_recall",
                                                   "lesion_f1"};
    return names;
}

namespace {

std::optional<double> metric_value(const CaseMetrics& m, const std::string& name) {
    if (name == "dsc") return m.dsc;
    if (name == "hd95_mm") return m.hd95_mm;
    if (name == "avd_pct") return m.avd_pct;
    if (name == "lesion_recall") return m.lesion_recall;
    if (name == "lesion_f1") return m.lesion_f1;
    throw VolumeError("unknown metric: " + name);
}

bool metric_higher_is_better(const std::string& name) {
    return name != "hd95_mm" && name != "avd_pct";
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

}  // namespace

EvalReport run_evaluation(const std::vector<EvalInput>& inputs, const EvalOptions& options) {
    EvalReport report;
    report.cases.resize(inputs.size());

    // Per-model union of masks for stratified scores accumulates after the
    // per-case pass; stratified rows are computed per case and merged.
    struct StratAcc {
        std::vector<int> gt_total, gt_hit, pred_total, pred_hit;
    };
    std::map<std::string, StratAcc> strat;
    std::size_t n_bins = options.bin_edges.size() - 1;

    std::mutex strat_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= inputs.size()) break;
            const EvalInput& in = inputs[i];
            EvalCaseResult& out = report.cases[i];
            out.case_id = in.case_id;
            out.model = in.model;
            try {
                BinaryMask3D pred = read_nifti_mask(in.pred_path);
                BinaryMask3D gt = read_nifti_mask(in.gt_path);
                out.metrics =
                    evaluate_case(pred, gt, options.connectivity, options.hd95_rule);
                auto rows =
                    size_stratified_pr(pred, gt, options.connectivity, options.bin_edges);
                std::lock_guard<std::mutex> lock(strat_mutex);
                StratAcc& acc = strat[in.model];
                if (acc.gt_total.empty()) {
                    acc.gt_total.assign(n_bins, 0);
                    acc.gt_hit.assign(n_bins, 0);
                    acc.pred_total.assign(n_bins, 0);
                    acc.pred_hit.assign(n_bins, 0);
                }
                for (std::size_t b = 0; b < n_bins; ++b) {
                    acc.gt_total[b] += static_cast<int>(rows[b].n_gt);
                    acc.pred_total[b] += static_cast<int>(rows[b].n_pred);
                    if (rows[b].recall)
                        acc.gt_hit[b] += static_cast<int>(
                            std::llround(*rows[b].recall * static_cast<double>(rows[b].n_gt)));
                    if (rows[b].precision)
                        acc.pred_hit[b] += static_cast<int>(std::llround(
                            *rows[b].precision * static_cast<double>(rows[b].n_pred)));
                }
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };

    int n_workers = std::max(1, options.n_workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    for (const auto& c : report.cases) {
        if (!c.error.empty()) report.any_failed = true;
        if (std::find(report.models.begin(), report.models.end(), c.model) ==
            report.models.end())
            report.models.push_back(c.model);
    }

    // Per-model summaries over defined values.
    for (const auto& model : report.models) {
        for (const auto& metric : metric_names()) {
            std::vector<double> vals;
            for (const auto& c : report.cases) {
                if (c.model != model || !c.error.empty()) continue;
                auto v = metric_value(c.metrics, metric);
                if (v) vals.push_back(*v);
            }
            report.summaries[model][metric] = summarize(vals);
        }
    }

    for (const auto& [model, acc] : strat) {
        std::vector<SizeBinRow> rows(n_bins);
        for (std::size_t b = 0; b < n_bins; ++b) {
            rows[b].bin_low = options.bin_edges[b];
            rows[b].bin_high = options.bin_edges[b + 1];
            rows[b].n_gt = acc.gt_total[b];
            rows[b].n_pred = acc.pred_total[b];
            if (acc.gt_total[b] > 0)
                rows[b].recall = static_cast<double>(acc.gt_hit[b]) / acc.gt_total[b];
            if (acc.pred_total[b] > 0)
                rows[b].precision = static_cast<double>(acc.pred_hit[b]) / acc.pred_total[b];
        }
        report.stratified[model] = rows;
    }

    if (report.models.size() >= 2) {
        for (const auto& metric : metric_names()) {
            MetricTable table = metric_table(report, metric);
            if (table.n_complete_rows() >= 2) {
                report.friedman[metric] =
                    friedman_test(table, metric_higher_is_better(metric));
                report.pairwise[metric] = pairwise_comparisons(table);
            }
        }
    }
    return report;
}

MetricTable metric_table(const EvalReport& report, const std::string& metric) {
    MetricTable table;
    table.model_names = report.models;
    // collect case ids in first-seen order
    std::vector<std::string> case_ids;
    for (const auto& c : report.cases)
        if (std::find(case_ids.begin(), case_ids.end(), c.case_id) == case_ids.end())
            case_ids.push_back(c.case_id);
    for (const auto& id : case_ids) {
        std::vector<std::optional<double>> row(report.models.size());
        for (const auto& c : report.cases) {
            if (c.case_id != id || !c.error.empty()) continue;
            auto mi = std::find(report.models.begin(), report.models.end(), c.model) -
                      report.models.begin();
            row[mi] = metric_value(c.metrics, metric);
        }
        table.rows.push_back(row);
    }
    return table;
}

std::string eval_cases_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "case_id,model,dsc,hd95_mm,avd_pct,lesion_recall,lesion_f1,error\n";
    for (const auto& c : report.cases) {
        os << c.case_id << "," << c.model << ",";
        if (c.error.empty()) {
            os << fmt(c.metrics.dsc) << "," << fmt_opt(c.metrics.hd95_mm) << ","
               << fmt_opt(c.metrics.avd_pct) << "," << fmt_opt(c.metrics.lesion_recall) << ","
               << fmt(c.metrics.lesion_f1) << ",";
        } else {
            os << ",,,,,\"" << c.error << "\"";
        }
        os << "\n";
    }
    return os.str();
}

std::string eval_stratified_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "model,bin_low,bin_high,recall,precision,n_gt,n_pred\n";
    for (const auto& model : report.models) {
        auto it = report.stratified.find(model);
        if (it == report.stratified.end()) continue;
        for (const auto& r : it->second) {
            os << model << "," << fmt(r.bin_low) << ","
               << (std::isinf(r.bin_high) ? "inf" : fmt(r.bin_high)) << ","
               << fmt_opt(r.recall) << "," << fmt_opt(r.precision) << "," << r.n_gt << ","
               << r.n_pred << "\n";
        }
    }
    return os.str();
}

std::string eval_summary_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["models"] = report.models;
    nlohmann::ordered_json summaries = nlohmann::ordered_json::object();
    for (const auto& model : report.models) {
        nlohmann::ordered_json ms = nlohmann::ordered_json::object();
        auto it = report.summaries.find(model);
        if (it != report.summaries.end()) {
            for (const auto& metric : metric_names()) {
                const SummaryStats& s = it->second.at(metric);
                ms[metric] = {{"n", s.n},         {"mean", s.mean}, {"std", s.stddev},
                              {"median", s.median}, {"q1", s.q1},   {"q3", s.q3},
                              {"median_iqr", format_median_iqr(s)}};
            }
        }
        summaries[model] = ms;
    }
    j["summaries"] = summaries;

    nlohmann::ordered_json stats = nlohmann::ordered_json::object();
    for (const auto& metric : metric_names()) {
        auto it = report.friedman.find(metric);
        if (it == report.friedman.end()) continue;
        const FriedmanResult& f = it->second;
        nlohmann::ordered_json fj = {{"chi2", f.chi2},
                                     {"df", f.df},
                                     {"p_value", f.p_value},
                                     {"n_used", f.n_used},
                                     {"n_dropped", f.n_dropped},
                                     {"mean_ranks", f.mean_ranks},
                                     {"all_ties", f.all_ties},
                                     {"significant_at_0.05", f.p_value < 0.05}};
        nlohmann::ordered_json pj = nlohmann::ordered_json::array();
        for (const auto& p : report.pairwise.at(metric)) {
            pj.push_back({{"model_a", report.models[p.model_a]},
                          {"model_b", report.models[p.model_b]},
                          {"statistic", p.statistic},
                          {"p_raw", p.p_raw},
                          {"p_corrected", p.p_corrected},
                          {"n_nonzero", p.n_nonzero},
                          {"all_zero", p.all_zero},
                          {"low_n_warning", p.low_n_warning}});
        }
        stats[metric] = {{"friedman", fj}, {"pairwise", pj}};
    }
    j["statistics"] = stats;

    std::size_t n_failed = 0;
    for (const auto& c : report.cases) n_failed += !c.error.empty();
    j["n_cases"] = report.cases.size();
    j["n_failed"] = n_failed;
    return j.dump(2) + "\n";
}

}  // namespace wmh
