#include "wmh/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wmh {

std::size_t MetricTable::n_complete_rows() const {
    std::size_t n = 0;
    for (const auto& row : rows) {
        bool complete = row.size() == n_models() &&
                        std::all_of(row.begin(), row.end(),
                                    [](const auto& v) { return v.has_value(); });
        n += complete;
    }
    return n;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double chi_square_sf(double x, int df) {
    if (x < 0 || df < 1) throw VolumeError("chi_square_sf: invalid arguments");
    if (x == 0.0) return 1.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

FriedmanResult friedman_test(const MetricTable& table, bool higher_is_better) {
    std::size_t k = table.n_models();
    if (k < 2) throw VolumeError("friedman: need at least 2 models");

    FriedmanResult res;
    res.df = static_cast<int>(k) - 1;
    res.mean_ranks.assign(k, 0.0);

    std::vector<double> rank_sums(k, 0.0);
    double tie_term = 0.0;  // sum over rows of sum(t^3 - t)
    std::size_t n = 0;
    for (const auto& row : table.rows) {
        bool complete = row.size() == k && std::all_of(row.begin(), row.end(), [](const auto& v) {
                            return v.has_value();
                        });
        if (!complete) {
            ++res.n_dropped;
            continue;
        }
        std::vector<double> vals(k);
        for (std::size_t j = 0; j < k; ++j)
            vals[j] = higher_is_better ? -row[j].value() : row[j].value();
        auto ranks = average_ranks(vals);
        for (std::size_t j = 0; j < k; ++j) rank_sums[j] += ranks[j];
        // tie groups within this row
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && sorted[j + 1] == sorted[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
        ++n;
    }
    if (n < 2) throw VolumeError("friedman: fewer than 2 complete cases");
    res.n_used = n;
    for (std::size_t j = 0; j < k; ++j)
        res.mean_ranks[j] = rank_sums[j] / static_cast<double>(n);

    double dk = static_cast<double>(k), dn = static_cast<double>(n);
    double chi2 = 0.0;
    for (double rj : rank_sums) chi2 += rj * rj;
    chi2 = 12.0 / (dn * dk * (dk + 1.0)) * chi2 - 3.0 * dn * (dk + 1.0);
    double correction = 1.0 - tie_term / (dn * (dk * dk * dk - dk));
    if (correction <= 0.0) {
        res.all_ties = true;
        res.chi2 = 0.0;
        res.p_value = 1.0;
        return res;
    }
    res.chi2 = chi2 / correction;
    res.p_value = chi_square_sf(res.chi2, res.df);
    return res;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Exact two-sided p for the signed-rank statistic: distribution of W+ by
// subset-sum DP over the (doubled, hence integer) observed ranks.
double exact_signed_rank_p(const std::vector<double>& ranks, double w_min) {
    std::vector<long long> r2(ranks.size());
    long long total = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        r2[i] = std::llround(2.0 * ranks[i]);
        total += r2[i];
    }
    std::vector<double> dp(total + 1, 0.0);
    dp[0] = 1.0;
    for (long long r : r2)
        for (long long s = total; s >= r; --s) dp[s] += dp[s - r];
    double n_total = std::pow(2.0, static_cast<double>(ranks.size()));
    long long w2 = std::llround(2.0 * w_min);
    double tail_lo = 0.0, tail_hi = 0.0;
    for (long long s = 0; s <= w2; ++s) tail_lo += dp[s];
    for (long long s = total - w2; s <= total; ++s) tail_hi += dp[s];
    return std::min(1.0, (tail_lo + tail_hi) / n_total);
}

double binom_cdf_half(std::size_t x, std::size_t n) {
    // P(X <= x) for X ~ Binomial(n, 1/2)
    double p = 0.0;
    double term = std::pow(0.5, static_cast<double>(n));  // C(n,0) * 0.5^n
    for (std::size_t i = 0; i <= x; ++i) {
        p += term;
        term *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    return std::min(p, 1.0);
}

}  // namespace

PairwiseResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw VolumeError("wilcoxon: length mismatch");
    PairwiseResult res;
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    res.n_nonzero = diffs.size();
    res.low_n_warning = diffs.size() < 6;
    if (diffs.empty()) {
        res.all_zero = true;
        res.p_raw = 1.0;
        return res;
    }
    std::vector<double> abs_d(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) abs_d[i] = std::abs(diffs[i]);
    auto ranks = average_ranks(abs_d);
    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i)
        (diffs[i] > 0 ? w_plus : w_minus) += ranks[i];
    double w = std::min(w_plus, w_minus);
    res.statistic = w;

    std::size_t n = diffs.size();
    if (n <= 25) {
        res.p_raw = exact_signed_rank_p(ranks, w);
    } else {
        double dn = static_cast<double>(n);
        double mu = dn * (dn + 1.0) / 4.0;
        double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
        // tie correction on |d| ranks
        std::vector<double> sorted = abs_d;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
        double z = (w - mu + 0.5) / std::sqrt(var);  // continuity correction
        res.p_raw = std::min(1.0, 2.0 * normal_cdf(z));
    }
    return res;
}

namespace {

PairwiseResult sign_test(const std::vector<double>& a, const std::vector<double>& b) {
    PairwiseResult res;
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        if (d > 0) ++pos;
        else if (d < 0) ++neg;
    }
    res.n_nonzero = pos + neg;
    res.low_n_warning = res.n_nonzero < 6;
    if (res.n_nonzero == 0) {
        res.all_zero = true;
        res.p_raw = 1.0;
        return res;
    }
    std::size_t x = std::min(pos, neg);
    res.statistic = static_cast<double>(x);
    res.p_raw = std::min(1.0, 2.0 * binom_cdf_half(x, res.n_nonzero));
    return res;
}

}  // namespace

std::vector<PairwiseResult> pairwise_comparisons(const MetricTable& table,
                                                 PairwiseCorrection correction,
                                                 PairwiseTest test) {
    std::size_t k = table.n_models();
    if (k < 2) throw VolumeError("pairwise: need at least 2 models");
    std::vector<PairwiseResult> out;
    std::size_t n_pairs = k * (k - 1) / 2;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            std::vector<double> va, vb;
            for (const auto& row : table.rows) {
                if (row.size() == k && row[a].has_value() && row[b].has_value()) {
                    va.push_back(row[a].value());
                    vb.push_back(row[b].value());
                }
            }
            PairwiseResult r = test == PairwiseTest::WilcoxonSignedRank
                                   ? wilcoxon_signed_rank(va, vb)
                                   : sign_test(va, vb);
            r.model_a = a;
            r.model_b = b;
            r.p_corrected = correction == PairwiseCorrection::Bonferroni
                                ? std::min(1.0, r.p_raw * static_cast<double>(n_pairs))
                                : r.p_raw;
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace wmh
