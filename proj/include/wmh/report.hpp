#ifndef WMH_REPORT_HPP
#define WMH_REPORT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wmh/metrics.hpp"
#include "wmh/stats.hpp"

namespace wmh {

/// One parsed manifest line; column access by header name.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 when absent
    const std::string& cell(std::size_t row, int col) const { return rows[row][col]; }
};

/// Parse a CSV file with a header row. Handles double-quoted fields.
CsvTable read_csv(const std::string& path);
std::vector<std::vector<std::string>> parse_csv_text(const std::string& text);

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample std, n-1
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

SummaryStats summarize(const std::vector<double>& values);

/// "3.35 (1.14, 5.00)" style median + IQR string.
std::string format_median_iqr(const SummaryStats& s, int precision = 2);

struct EvalCaseResult {
    std::string case_id;
    std::string model;
    CaseMetrics metrics;
    std::string error;  // nonempty when the case failed
};

struct EvalInput {
    std::string case_id;
    std::string model;
    std::string pred_path;
    std::string gt_path;
};

struct EvalOptions {
    Connectivity connectivity = Connectivity::Corners26;
    Hd95Rule hd95_rule = Hd95Rule::MaxOfDirected;
    std::vector<double> bin_edges = default_size_bin_edges();
    int n_workers = 1;
};

struct EvalReport {
    std::vector<EvalCaseResult> cases;                 // manifest order
    std::vector<std::string> models;                   // first-seen order
    std::map<std::string, std::map<std::string, SummaryStats>> summaries;  // model -> metric
    std::map<std::string, std::vector<SizeBinRow>> stratified;             // model -> rows
    std::map<std::string, FriedmanResult> friedman;                        // metric -> result
    std::map<std::string, std::vector<PairwiseResult>> pairwise;           // metric -> results
    bool any_failed = false;
};

/// Run the five-metric battery over matched prediction/ground-truth pairs,
/// then per-model summaries and (for >= 2 models) Friedman + pairwise
/// statistics. Case order in the output follows the input order regardless
/// of worker count.
EvalReport run_evaluation(const std::vector<EvalInput>& inputs, const EvalOptions& options = {});

/// Metric names in report order.
const std::vector<std::string>& metric_names();

std::string eval_cases_csv(const EvalReport& report);
std::string eval_stratified_csv(const EvalReport& report);
std::string eval_summary_json(const EvalReport& report);  // schema_version tagged

/// Build a MetricTable (cases x models) for one metric from case results;
/// higher_is_better per metric is handled by the caller.
MetricTable metric_table(const EvalReport& report, const std::string& metric);

}  // namespace wmh

#endif
