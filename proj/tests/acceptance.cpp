// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.
#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "wmh/metrics.hpp"
#include "wmh/morphology.hpp"
#include "wmh/nifti_io.hpp"
#include "wmh/phantom.hpp"
#include "wmh/report.hpp"
#include "wmh/scores.hpp"
#include "wmh/staple.hpp"
#include "wmh/stats.hpp"

using namespace wmh;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++g_failures;
}

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Partition equality up to label renaming, both directions.
bool same_partition(const std::vector<std::int32_t>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] == 0) != (b[i] == 0)) return false;
        if (a[i] == 0) continue;
        auto [ia, oka] = ab.emplace(a[i], b[i]);
        if (!oka && ia->second != b[i]) return false;
        auto [ib, okb] = ba.emplace(b[i], a[i]);
        if (!okb && ib->second != a[i]) return false;
    }
    return true;
}

std::string run_tool(const std::string& args, int* rc_out = nullptr) {
    std::string cmd = std::string(WMHTOOL_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return "";
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    int rc = pclose(pipe);
    if (rc_out) *rc_out = WEXITSTATUS(rc);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

void criterion_nifti_roundtrip() {
    auto t0 = Clock::now();
    std::mt19937 rng(2026);
    std::uniform_real_distribution<float> uf(-50.0f, 200.0f);
    bool ok = true;
    std::string detail;
    fs::path dir = fs::temp_directory_path() / "wmh_accept_nifti";
    fs::create_directories(dir);
    for (int trial = 0; trial < 100 && ok; ++trial) {
        std::uniform_int_distribution<int> ud(4, 14);
        std::array<int, 3> dims{ud(rng), ud(rng), ud(rng)};
        std::uniform_real_distribution<double> us(0.5, 3.0);
        Geometry geo = make_geometry(dims, {us(rng), us(rng), us(rng)});
        geo.affine[3] = us(rng) * 10.0;
        geo.affine[7] = -us(rng) * 10.0;
        geo.affine[11] = us(rng) * 5.0;
        bool gz = trial % 2 == 0;
        bool as_uint8 = trial % 3 == 0;
        std::string path = (dir / ("v" + std::to_string(trial) +
                                   (gz ? ".nii.gz" : ".nii"))).string();
        Volume3D v(geo);
        if (as_uint8) {
            std::uniform_int_distribution<int> ub(0, 255);
            for (auto& x : v.data) x = static_cast<double>(ub(rng));
            write_nifti(v, path, NiftiOutputType::Uint8);
        } else {
            for (auto& x : v.data) x = static_cast<double>(uf(rng));
            write_nifti(v, path, NiftiOutputType::Float32);
        }
        Volume3D r = read_nifti(path);
        if (r.geom.dims != geo.dims || r.data != v.data) {
            ok = false;
            detail = "voxel mismatch on trial " + std::to_string(trial);
            break;
        }
        for (int k = 0; k < 3 && ok; ++k)
            if (std::abs(r.geom.spacing[k] - geo.spacing[k]) > 1e-6) ok = false;
        for (int k = 0; k < 16 && ok; ++k)
            if (std::abs(r.geom.affine[k] - geo.affine[k]) > 1e-6) ok = false;
        if (!ok) detail = "header mismatch on trial " + std::to_string(trial);
    }
    double dt = elapsed_s(t0);
    if (ok && dt >= 10.0) {
        ok = false;
        detail = "too slow";
    }
    std::ostringstream d;
    d.precision(2);
    d << std::fixed << dt << " s" << (detail.empty() ? "" : "; " + detail);
    report("nifti round-trip: 100 volumes voxel-exact, header 1e-6, < 10 s", ok, d.str());
}

void criterion_connected_components() {
    auto t0 = Clock::now();
    std::mt19937 rng(31);
    bool ok = true;
    for (int trial = 0; trial < 500 && ok; ++trial) {
        std::uniform_real_distribution<double> ud(0.1, 0.7);
        BinaryMask3D m = oracle::random_mask(rng, {8, 8, 8}, ud(rng));
        for (Connectivity c :
             {Connectivity::Faces6, Connectivity::Edges18, Connectivity::Corners26}) {
            LabelMap3D got = connected_components(m, c);
            if (!same_partition(got.labels, oracle::flood_fill_labels(m, c))) ok = false;
        }
    }
    double dt = elapsed_s(t0);
    if (dt >= 30.0) ok = false;
    std::ostringstream d;
    d.precision(2);
    d << std::fixed << dt << " s";
    report("connected components: 500 masks x {6,18,26} equal flood-fill oracle, < 30 s", ok,
           d.str());
}

void criterion_diameter_opening() {
    std::mt19937 rng(47);
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        std::uniform_real_distribution<double> ud(0.05, 0.5);
        BinaryMask3D m = oracle::random_mask(rng, {10, 10, 10}, ud(rng));
        BinaryMask3D opened = diameter_opening(m, 5);

        // Component-filter oracle: keep components with max bbox extent >= 5.
        std::vector<int> labels = oracle::flood_fill_labels(m, Connectivity::Corners26);
        int n_labels = 0;
        for (int l : labels) n_labels = std::max(n_labels, l);
        std::vector<std::array<int, 6>> bb(
            n_labels + 1, {INT32_MAX, INT32_MAX, INT32_MAX, -1, -1, -1});
        for (int z = 0; z < 10; ++z)
            for (int y = 0; y < 10; ++y)
                for (int x = 0; x < 10; ++x) {
                    int l = labels[m.geom.index(x, y, z)];
                    if (!l) continue;
                    auto& b = bb[l];
                    b[0] = std::min(b[0], x);
                    b[1] = std::min(b[1], y);
                    b[2] = std::min(b[2], z);
                    b[3] = std::max(b[3], x);
                    b[4] = std::max(b[4], y);
                    b[5] = std::max(b[5], z);
                }
        std::vector<bool> keep(n_labels + 1, false);
        for (int l = 1; l <= n_labels; ++l) {
            int ext = std::max({bb[l][3] - bb[l][0], bb[l][4] - bb[l][1],
                                bb[l][5] - bb[l][2]}) + 1;
            keep[l] = ext >= 5;
        }
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            std::uint8_t want = labels[i] && keep[labels[i]] ? 1 : 0;
            if (opened.data[i] != want) ok = false;
        }
        if (diameter_opening(opened, 5).data != opened.data) ok = false;
    }
    report("diameter_opening: 200 masks equal component-filter oracle; idempotent", ok);
}

void criterion_metrics() {
    std::mt19937 rng(53);
    bool ok = true;
    std::string detail;

    // Counting-oracle equivalence for dice/avd/lesion_recall/lesion_f1.
    for (int trial = 0; trial < 100 && ok; ++trial) {
        std::uniform_real_distribution<double> ud(0.05, 0.5);
        BinaryMask3D p = oracle::random_mask(rng, {9, 9, 9}, ud(rng));
        BinaryMask3D g = oracle::random_mask(rng, {9, 9, 9}, ud(rng));
        std::size_t tp = 0, np = 0, ng = 0;
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            tp += p.data[i] && g.data[i];
            np += p.data[i];
            ng += g.data[i];
        }
        double dice_ref = (np + ng) == 0 ? 1.0 : 2.0 * tp / static_cast<double>(np + ng);
        if (dice(p, g) != dice_ref) {
            ok = false;
            detail = "dice";
        }
        if (ng > 0) {
            double avd_ref = 100.0 * std::abs(static_cast<double>(np) -
                                              static_cast<double>(ng)) / ng;
            if (avd(p, g).value() != avd_ref) {
                ok = false;
                detail = "avd";
            }
        }
        // Component-level oracle from flood fill.
        auto pl = oracle::flood_fill_labels(p, Connectivity::Corners26);
        auto gl = oracle::flood_fill_labels(g, Connectivity::Corners26);
        int npc = 0, ngc = 0;
        for (int l : pl) npc = std::max(npc, l);
        for (int l : gl) ngc = std::max(ngc, l);
        std::vector<bool> g_hit(ngc + 1, false), p_hit(npc + 1, false);
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            if (gl[i] && p.data[i]) g_hit[gl[i]] = true;
            if (pl[i] && g.data[i]) p_hit[pl[i]] = true;
        }
        int tpg = 0, tpp = 0;
        for (int l = 1; l <= ngc; ++l) tpg += g_hit[l];
        for (int l = 1; l <= npc; ++l) tpp += p_hit[l];
        if (ngc > 0) {
            double recall_ref = static_cast<double>(tpg) / ngc;
            if (lesion_recall(p, g).value() != recall_ref) {
                ok = false;
                detail = "lesion_recall";
            }
        }
        double f1_ref = (npc + ngc) == 0
                            ? 1.0
                            : 2.0 * tpp / (2.0 * tpp + (npc - tpp) + (ngc - tpg));
        if (lesion_f1(p, g) != f1_ref) {
            ok = false;
            detail = "lesion_f1";
        }
    }

    // hd95 vs all-pairs oracle, anisotropic spacings included.
    for (int trial = 0; trial < 100 && ok; ++trial) {
        std::uniform_int_distribution<int> ud(4, 12);
        std::uniform_real_distribution<double> us(0.6, 2.0);
        std::array<int, 3> dims{ud(rng), ud(rng), ud(rng)};
        std::array<double, 3> spacing{us(rng), us(rng), us(rng)};
        BinaryMask3D p = oracle::random_mask(rng, dims, 0.25, spacing);
        BinaryMask3D g = oracle::random_mask(rng, dims, 0.25, spacing);
        if (p.empty_mask() || g.empty_mask()) continue;
        double got = hd95(p, g).value();
        double want = oracle::hd95_allpairs(p, g);
        if (std::abs(got - want) > 1e-9) {
            ok = false;
            detail = "hd95 diff " + std::to_string(std::abs(got - want));
        }
    }
    report("metrics: counting oracles exact; hd95 all-pairs oracle to 1e-9 on 100 pairs", ok,
           detail);
}

void criterion_staple() {
    auto t0 = Clock::now();
    std::mt19937 rng(61);
    bool ok = true;
    std::string detail;
    StapleOptions exact;
    exact.restrict_to_bbox = false;

    for (int trial = 0; trial < 1000 && ok; ++trial) {
        RaterStack stack;
        Geometry geo = make_geometry({2, 2, 2});
        std::vector<std::vector<int>> votes(3, std::vector<int>(8, 0));
        std::uniform_int_distribution<int> ub(0, 1);
        for (int j = 0; j < 3; ++j) {
            BinaryMask3D m(geo);
            for (int i = 0; i < 8; ++i) {
                votes[j][i] = ub(rng);
                m.data[i] = static_cast<std::uint8_t>(votes[j][i]);
            }
            stack.masks.push_back(m);
        }
        // Majority correspondence holds at the symmetric starting posterior
        // (before any parameter update); converged EM is checked against the
        // straight-loop oracle below.
        StapleParams init;
        init.sensitivity = {0.9, 0.9, 0.9};
        init.specificity = {0.9, 0.9, 0.9};
        init.prior = 0.5;
        StapleParams init0 = init;
        init0.max_iters = 0;
        StapleResult res0 = staple(stack, init0, exact);
        BinaryMask3D mv = majority_vote(stack);
        if (res0.fused.data != mv.data) {
            ok = false;
            detail = "fused != majority on trial " + std::to_string(trial);
        }
        StapleResult res = staple(stack, init, exact);
        auto oref = oracle::staple_em_oracle(votes, 0.9, 0.9, 0.5);
        for (int i = 0; i < 8; ++i)
            if (std::abs(res.weights.data[i] - oref.w[i]) > 1e-9) {
                ok = false;
                detail = "weight field mismatch";
            }
    }

    // Log-likelihood monotone on 50 random 16^3 stacks.
    for (int trial = 0; trial < 50 && ok; ++trial) {
        RaterStack stack;
        std::uniform_real_distribution<double> ud(0.1, 0.5);
        double density = ud(rng);
        for (int j = 0; j < 3; ++j)
            stack.masks.push_back(oracle::random_mask(rng, {16, 16, 16}, density));
        StapleResult res = staple(stack, default_staple_init(stack), exact);
        for (std::size_t i = 1; i < res.log_likelihood.size(); ++i)
            if (res.log_likelihood[i] < res.log_likelihood[i - 1] - 1e-8) {
                ok = false;
                detail = "log-likelihood decreased";
            }
    }
    double dt = elapsed_s(t0);
    if (dt >= 60.0) ok = false;
    std::ostringstream d;
    d.precision(2);
    d << std::fixed << dt << " s" << (detail.empty() ? "" : "; " + detail);
    report("staple: 1000 stacks majority + EM oracle 1e-9; LL monotone on 50 stacks, < 60 s",
           ok, d.str());
}

void criterion_scores() {
    bool ok = true;
    std::string detail;

    Geometry g1 = make_geometry({1, 1, 1});
    ProbabilityMap3D half(g1, 0.5);
    BinaryMask3D one(g1, true);
    if (std::abs(tversky_index(half, one) - 1.5 / 1.925) > 1e-12) {
        ok = false;
        detail = "tversky scalar";
    }
    if (std::abs(tversky_focal_loss(half, one) - std::pow(1.0 - 1.5 / 1.925, 0.75)) > 1e-12) {
        ok = false;
        detail = "focal scalar";
    }
    Geometry g3 = make_geometry({3, 1, 1});
    BinaryMask3D fp(g3), fg(g3);
    fp.at(0, 0, 0) = 1;
    fg.at(0, 0, 0) = 1;
    fg.at(1, 0, 0) = 1;
    if (std::abs(f_beta_score(fp, fg) - 0.6) > 1e-12) {
        ok = false;
        detail = "f-beta scalar";
    }

    std::mt19937 rng(71);
    for (int trial = 0; trial < 100 && ok; ++trial) {
        BinaryMask3D p = oracle::random_mask(rng, {6, 6, 6}, 0.3);
        BinaryMask3D g = oracle::random_mask(rng, {6, 6, 6}, 0.3);
        ProbabilityMap3D pp(p.geom);
        std::size_t tp = 0, np = 0, ng = 0;
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            pp.data[i] = p.data[i] ? 1.0 : 0.0;
            tp += p.data[i] && g.data[i];
            np += p.data[i];
            ng += g.data[i];
        }
        TverskyParams half_params;
        half_params.alpha = half_params.beta = 0.5;
        double ti = tversky_index(pp, g, half_params);
        double smoothed = (2.0 * tp + 2.0) / (static_cast<double>(np + ng) + 2.0);
        if (std::abs(ti - smoothed) > 1e-9) {
            ok = false;
            detail = "dice correspondence";
        }
        TverskyParams g1p;
        g1p.gamma = 1.0;
        if (tversky_focal_loss(pp, g, g1p) != 1.0 - tversky_index(pp, g, g1p)) {
            ok = false;
            detail = "gamma=1 identity";
        }
    }
    report("tversky/f-beta: scalars 1e-12; alpha=beta=0.5 dice 1e-9; gamma=1 identity exact",
           ok, detail);
}

void criterion_stats() {
    bool ok = true;
    std::string detail;

    // Perfect ordering: n=10 rows, k=3 models, same rank order every row.
    MetricTable t;
    t.model_names = {"a", "b", "c"};
    for (int i = 0; i < 10; ++i)
        t.rows.push_back({1.0 + i, 2.0 + i, 3.0 + i});
    FriedmanResult f = friedman_test(t);
    if (std::abs(f.chi2 - 20.0) > 1e-12 || f.df != 2 ||
        std::abs(f.p_value - std::exp(-10.0)) > 1e-12) {
        ok = false;
        detail = "perfect-ordering table";
    }

    // Monotone transform invariance must be exact (ranks are unchanged).
    std::mt19937 rng(83);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int trial = 0; trial < 100 && ok; ++trial) {
        MetricTable a;
        a.model_names = {"a", "b", "c", "d"};
        for (int i = 0; i < 8; ++i) {
            std::vector<std::optional<double>> row;
            for (int j = 0; j < 4; ++j) row.push_back(ud(rng));
            a.rows.push_back(row);
        }
        MetricTable b = a;
        for (auto& row : b.rows)
            for (auto& v : row) v = std::exp(3.0 * v.value() + 1.0);
        FriedmanResult fa = friedman_test(a), fb = friedman_test(b);
        if (fa.chi2 != fb.chi2 || fa.p_value != fb.p_value || fa.mean_ranks != fb.mean_ranks) {
            ok = false;
            detail = "monotone invariance";
        }
    }

    // Wilcoxon exact p vs full 2^12 sign enumeration.
    for (int trial = 0; trial < 20 && ok; ++trial) {
        std::vector<double> x(12), y(12);
        std::uniform_int_distribution<int> grid(0, 9);  // force occasional ties
        for (int i = 0; i < 12; ++i) {
            x[i] = grid(rng);
            y[i] = grid(rng);
            if (x[i] == y[i]) y[i] += 1.0;  // keep n fixed at 12 nonzero diffs
        }
        PairwiseResult pr = wilcoxon_signed_rank(x, y);

        std::vector<double> absd(12);
        for (int i = 0; i < 12; ++i) absd[i] = std::abs(x[i] - y[i]);
        std::vector<double> ranks = average_ranks(absd);
        double w_plus = 0.0;
        for (int i = 0; i < 12; ++i)
            if (x[i] - y[i] > 0) w_plus += ranks[i];
        double total = 0.0;
        for (double r : ranks) total += r;
        double w_obs = std::min(w_plus, total - w_plus);
        int count = 0;
        for (int s = 0; s < (1 << 12); ++s) {
            double wp = 0.0;
            for (int i = 0; i < 12; ++i)
                if (s & (1 << i)) wp += ranks[i];
            if (std::min(wp, total - wp) <= w_obs + 1e-12) ++count;
        }
        double p_enum = static_cast<double>(count) / 4096.0;
        if (std::abs(pr.p_raw - std::min(1.0, p_enum)) > 1e-12) {
            ok = false;
            detail = "wilcoxon enumeration, trial " + std::to_string(trial);
        }
    }
    report("friedman chi2=20/df=2/p=exp(-10) 1e-12; invariance exact; wilcoxon 2^12 oracle",
           ok, detail);
}

void criterion_end_to_end() {
    auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    fs::path dir = fs::temp_directory_path() / "wmh_accept_e2e";
    fs::remove_all(dir);
    fs::create_directories(dir);

    std::string summaries[2];
    for (int round = 0; round < 2 && ok; ++round) {
        std::string ph = (dir / ("ph" + std::to_string(round))).string();
        int rc = 0;
        run_tool("phantom --out-dir " + ph +
                     " --seed 42 --cases 30 --dims 48 48 48 --n-lesions 4"
                     " --light-degrade 0.15 --heavy-degrade 0.75",
                 &rc);
        if (rc != 0) {
            ok = false;
            detail = "phantom generation failed";
            break;
        }
        std::string ev = (dir / ("ev" + std::to_string(round))).string();
        run_tool("evaluate --pred-manifest " + ph + "/pred_manifest.csv --gt-manifest " + ph +
                     "/gt_manifest.csv --out-dir " + ev + " --workers 1",
                 &rc);
        if (rc != 0) {
            ok = false;
            detail = "evaluate failed";
            break;
        }
        summaries[round] = slurp(ev + "/summary.json");
        if (round == 0) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(summaries[0]);
            } catch (...) {
                ok = false;
                detail = "summary.json unparseable";
                break;
            }
            if (j["schema_version"] != 1) {
                ok = false;
                detail = "schema_version";
            }
            double light = j["summaries"]["light"]["dsc"]["mean"].get<double>();
            double heavy = j["summaries"]["heavy"]["dsc"]["mean"].get<double>();
            if (!(light > heavy)) {
                ok = false;
                detail = "light model not ranked higher";
            }
            double p = j["statistics"]["dsc"]["friedman"]["p_value"].get<double>();
            if (!(p < 0.05)) {
                ok = false;
                detail = "friedman p = " + std::to_string(p);
            }
            // CSV sanity: header + 60 rows.
            std::string csv = slurp(ev + "/case_metrics.csv");
            if (std::count(csv.begin(), csv.end(), '\n') != 61) {
                ok = false;
                detail = "case_metrics row count";
            }
        }
    }
    if (ok && summaries[0] != summaries[1]) {
        ok = false;
        detail = "not deterministic under fixed seed";
    }
    double dt = elapsed_s(t0);
    if (dt >= 120.0) ok = false;
    std::ostringstream d;
    d.precision(2);
    d << std::fixed << dt << " s" << (detail.empty() ? "" : "; " + detail);
    report("end-to-end: 30 phantoms, light > heavy DSC, friedman p < 0.05, deterministic, < 2 min",
           ok, d.str());
}

void criterion_performance() {
    bool ok = true;
    std::string detail;

    // Five-metric evaluation of one 256 x 256 x 192 case, single-threaded.
    Geometry geo = make_geometry({256, 256, 192}, {1.0, 1.0, 1.0});
    BinaryMask3D gt(geo), pred(geo);
    auto sphere = [&](BinaryMask3D& m, double cx, double cy, double cz, double r) {
        int x0 = std::max(0, static_cast<int>(cx - r - 1));
        int x1 = std::min(geo.dims[0] - 1, static_cast<int>(cx + r + 1));
        int y0 = std::max(0, static_cast<int>(cy - r - 1));
        int y1 = std::min(geo.dims[1] - 1, static_cast<int>(cy + r + 1));
        int z0 = std::max(0, static_cast<int>(cz - r - 1));
        int z1 = std::min(geo.dims[2] - 1, static_cast<int>(cz + r + 1));
        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    double dx = x - cx, dy = y - cy, dz = z - cz;
                    if (dx * dx + dy * dy + dz * dz <= r * r) m.at(x, y, z) = 1;
                }
    };
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> ux(30.0, 220.0), uz(30.0, 160.0), ur(4.0, 18.0);
    for (int i = 0; i < 40; ++i) {
        double cx = ux(rng), cy = ux(rng), cz = uz(rng), r = ur(rng);
        sphere(gt, cx, cy, cz, r);
        sphere(pred, cx + 1.5, cy - 1.0, cz + 0.5, r * 0.9);
    }
    auto t0 = Clock::now();
    CaseMetrics m = evaluate_case(pred, gt);
    double dt_metrics = elapsed_s(t0);
    if (!(m.dsc > 0.0) || !m.hd95_mm.has_value()) {
        ok = false;
        detail = "metric values degenerate";
    }
    if (dt_metrics >= 5.0) {
        ok = false;
        detail = "metrics too slow";
    }

    // STAPLE of three 256^3 masks.
    Geometry sg = make_geometry({256, 256, 256});
    RaterStack stack;
    for (int j = 0; j < 3; ++j) {
        BinaryMask3D mj(sg);
        double phase = 0.05 * j;
        for (int z = 0; z < 256; ++z)
            for (int y = 0; y < 256; ++y) {
                double fy = std::sin(0.04 * y + phase);
                std::size_t base = sg.index(0, y, z);
                for (int x = 0; x < 256; ++x)
                    mj.data[base + x] =
                        (std::sin(0.03 * x) + fy + std::cos(0.05 * z) > 0.4) ? 1 : 0;
            }
        stack.masks.push_back(std::move(mj));
    }
    auto t1 = Clock::now();
    StapleResult res = staple(stack);
    double dt_staple = elapsed_s(t1);
    if (!res.converged && res.n_iters < 100) ok = false;
    if (dt_staple >= 30.0) {
        ok = false;
        detail = "staple too slow";
    }
    std::ostringstream d;
    d.precision(2);
    d << std::fixed << "metrics " << dt_metrics << " s, staple " << dt_staple << " s ("
      << res.n_iters << " iters)" << (detail.empty() ? "" : "; " + detail);
    report("performance: 256x256x192 five-metric < 5 s; staple of three 256^3 masks < 30 s",
           ok, d.str());
}

}  // namespace

int main() {
    criterion_nifti_roundtrip();
    criterion_connected_components();
    criterion_diameter_opening();
    criterion_metrics();
    criterion_staple();
    criterion_scores();
    criterion_stats();
    criterion_end_to_end();
    criterion_performance();
    if (g_failures) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria passed\n";
    return 0;
}
