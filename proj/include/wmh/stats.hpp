#ifndef WMH_STATS_HPP
#define WMH_STATS_HPP

#include <optional>
#include <string>
#include <vector>

#include "wmh/volume.hpp"

namespace wmh {

/// Cases x models table of metric values; nullopt marks a missing value.
/// Rows with any missing entry are dropped before ranking.
struct MetricTable {
    std::vector<std::string> model_names;
    std::vector<std::vector<std::optional<double>>> rows;

    std::size_t n_models() const { return model_names.size(); }
    std::size_t n_complete_rows() const;
};

struct FriedmanResult {
    double chi2 = 0.0;
    int df = 0;
    double p_value = 1.0;
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
    std::vector<double> mean_ranks;
    bool all_ties = false;  // every row fully tied; chi2 reported as 0
};

/// Friedman related-samples rank ANOVA with average ranks for ties and the
/// standard tie-correction divisor. higher_is_better orients the reported
/// mean ranks (rank 1 = best).
FriedmanResult friedman_test(const MetricTable& table, bool higher_is_better = true);

enum class PairwiseCorrection { None, Bonferroni };
enum class PairwiseTest { WilcoxonSignedRank, Sign };

struct PairwiseResult {
    std::size_t model_a = 0;
    std::size_t model_b = 0;
    double statistic = 0.0;  // min(W+, W-) for Wilcoxon; min sign count for Sign
    double p_raw = 1.0;
    double p_corrected = 1.0;
    std::size_t n_nonzero = 0;  // pairs remaining after dropping zero differences
    bool all_zero = false;
    bool low_n_warning = false;  // fewer than 6 usable pairs
};

/// All-pairs two-sided comparison. Wilcoxon signed-rank drops zero
/// differences, uses the exact null distribution for n <= 25 and the normal
/// approximation with continuity and tie correction above.
std::vector<PairwiseResult> pairwise_comparisons(
    const MetricTable& table, PairwiseCorrection correction = PairwiseCorrection::Bonferroni,
    PairwiseTest test = PairwiseTest::WilcoxonSignedRank);

/// Chi-square upper-tail probability, absolute error < 1e-10.
double chi_square_sf(double x, int df);

/// Two-sided Wilcoxon signed-rank on paired samples; exposed for reuse.
PairwiseResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

/// Average ranks of values (1-based, ties averaged).
std::vector<double> average_ranks(const std::vector<double>& values);

}  // namespace wmh

#endif
