// Batch CLI for the WMH segmentation evaluation pipeline: preprocessing,
// STAPLE fusion, five-metric evaluation, intensity distributions, phantom
// generation, and nonparametric model-comparison statistics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "wmh/metrics.hpp"
#include "wmh/morphology.hpp"
#include "wmh/nifti_io.hpp"
#include "wmh/phantom.hpp"
#include "wmh/preprocess.hpp"
#include "wmh/report.hpp"
#include "wmh/staple.hpp"
#include "wmh/stats.hpp"
#include "wmh/volume.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int default_workers() {
    if (const char* env = std::getenv("WMH_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

wmh::Connectivity parse_connectivity(int c) {
    switch (c) {
        case 6: return wmh::Connectivity::Faces6;
        case 18: return wmh::Connectivity::Edges18;
        case 26: return wmh::Connectivity::Corners26;
    }
    throw CLI::ValidationError("connectivity must be 6, 18 or 26");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw wmh::VolumeError("cannot write " + path);
    f << text;
}

std::optional<double> parse_opt_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

struct ManifestEntry {
    std::string case_id;
    std::string path;
    std::string scanner_label;
    std::string mask_path;
    std::string model;
};

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    wmh::CsvTable t = wmh::read_csv(path);
    int id_col = t.column_index("case_id");
    int path_col = t.column_index("path");
    if (id_col < 0 || path_col < 0)
        throw wmh::VolumeError("manifest must have case_id and path columns: " + path);
    int scanner_col = t.column_index("scanner_label");
    int mask_col = t.column_index("mask_path");
    int model_col = t.column_index("model");
    std::vector<ManifestEntry> entries;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        ManifestEntry e;
        e.case_id = t.cell(r, id_col);
        e.path = t.cell(r, path_col);
        if (scanner_col >= 0) e.scanner_label = t.cell(r, scanner_col);
        if (mask_col >= 0) e.mask_path = t.cell(r, mask_col);
        if (model_col >= 0) e.model = t.cell(r, model_col);
        entries.push_back(e);
    }
    if (entries.empty())
        throw wmh::VolumeError("manifest has no cases: " + path);
    return entries;
}

int cmd_preprocess(const std::string& manifest_path, const std::string& out_dir,
                   double resample_mm, int min_diameter, bool keep_background_zero,
                   bool sample_std) {
    auto entries = read_manifest(manifest_path);
    fs::create_directories(out_dir);
    int failures = 0;
    for (const auto& e : entries) {
        try {
            wmh::Volume3D vol = wmh::read_nifti(e.path);
            vol = wmh::clamp_negatives(vol);
            if (!e.mask_path.empty()) {
                wmh::BinaryMask3D mask = wmh::read_nifti_mask(e.mask_path);
                mask = wmh::diameter_opening(mask, min_diameter);
                if (resample_mm > 0.0)
                    mask = wmh::resample_mask(mask, {resample_mm, resample_mm, resample_mm});
                wmh::write_nifti(mask, (fs::path(out_dir) / (e.case_id + "_mask.nii.gz")).string());
            }
            wmh::ZStandardizeOptions zopts;
            zopts.keep_background_zero = keep_background_zero;
            zopts.population_std = !sample_std;
            vol = wmh::zstandardize_foreground(vol, zopts);
            if (resample_mm > 0.0)
                vol = wmh::resample(vol, {resample_mm, resample_mm, resample_mm});
            wmh::write_nifti(vol, (fs::path(out_dir) / (e.case_id + "_flair.nii.gz")).string());
            std::cout << e.case_id << ": ok\n";
        } catch (const std::exception& ex) {
            std::cerr << e.case_id << ": error: " << ex.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}

int cmd_evaluate(const std::string& pred_manifest, const std::string& gt_manifest,
                 const std::string& out_dir, int connectivity, bool pooled,
                 std::vector<double> bin_edges, int workers) {
    auto preds = read_manifest(pred_manifest);
    auto gts = read_manifest(gt_manifest);
    std::map<std::string, std::string> gt_by_case;
    for (const auto& g : gts) gt_by_case[g.case_id] = g.path;

    std::vector<wmh::EvalInput> inputs;
    for (const auto& p : preds) {
        auto it = gt_by_case.find(p.case_id);
        if (it == gt_by_case.end())
            throw wmh::VolumeError("no ground truth for case " + p.case_id);
        inputs.push_back({p.case_id, p.model.empty() ? "model" : p.model, p.path, it->second});
    }

    wmh::EvalOptions opts;
    opts.connectivity = parse_connectivity(connectivity);
    opts.hd95_rule = pooled ? wmh::Hd95Rule::Pooled : wmh::Hd95Rule::MaxOfDirected;
    if (!bin_edges.empty()) {
        bin_edges.push_back(std::numeric_limits<double>::infinity());
        opts.bin_edges = bin_edges;
    }
    opts.n_workers = workers;

    wmh::EvalReport report = wmh::run_evaluation(inputs, opts);
    fs::create_directories(out_dir);
    write_text((fs::path(out_dir) / "case_metrics.csv").string(), wmh::eval_cases_csv(report));
    write_text((fs::path(out_dir) / "size_stratified.csv").string(),
               wmh::eval_stratified_csv(report));
    write_text((fs::path(out_dir) / "summary.json").string(), wmh::eval_summary_json(report));

    for (const auto& model : report.models) {
        const auto& s = report.summaries.at(model).at("dsc");
        std::cout << model << ": DSC " << s.mean << " +/- " << s.stddev << " (n=" << s.n
                  << ")\n";
    }
    if (report.any_failed) {
        std::cerr << "some cases failed; see case_metrics.csv\n";
        return 1;
    }
    return 0;
}

int cmd_fuse(const std::vector<std::string>& input_paths, const std::string& out_path,
             const std::string& weights_path, const std::string& params_path, bool majority,
             bool exact, double init_p, double init_q, int max_iters, double tol) {
    wmh::RaterStack stack;
    for (const auto& p : input_paths) stack.masks.push_back(wmh::read_nifti_mask(p));
    stack.validate();

    if (majority) {
        wmh::write_nifti(wmh::majority_vote(stack), out_path);
        return 0;
    }
    wmh::StapleParams init = wmh::default_staple_init(stack);
    init.sensitivity.assign(stack.n_raters(), init_p);
    init.specificity.assign(stack.n_raters(), init_q);
    init.max_iters = max_iters;
    init.tol = tol;
    wmh::StapleOptions sopts;
    sopts.restrict_to_bbox = !exact;
    wmh::StapleResult res = wmh::staple(stack, init, sopts);
    wmh::write_nifti(res.fused, out_path);
    if (!weights_path.empty()) {
        wmh::Volume3D w(res.weights.geom);
        w.data = res.weights.data;
        wmh::write_nifti(w, weights_path);
    }
    if (!params_path.empty()) {
        ordered_json j;
        j["schema_version"] = 1;
        j["sensitivity"] = res.params.sensitivity;
        j["specificity"] = res.params.specificity;
        j["prior"] = res.params.prior;
        j["n_iters"] = res.n_iters;
        j["converged"] = res.converged;
        j["log_likelihood"] = res.log_likelihood;
        write_text(params_path, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_distribution(const std::string& manifest_path, int n_bins, const std::string& out_path) {
    auto entries = read_manifest(manifest_path);
    // Pool foreground values per scanner group into one histogram each.
    std::map<std::string, std::vector<const ManifestEntry*>> groups;
    for (const auto& e : entries) groups[e.scanner_label].push_back(&e);

    std::ostringstream os;
    os << "scanner_label,bin_center,density\n";
    for (const auto& [label, members] : groups) {
        // Concatenate foreground voxels of the group into a single 1D volume.
        std::vector<double> values;
        for (const auto* e : members) {
            wmh::Volume3D v = wmh::read_nifti(e->path);
            for (double x : v.data)
                if (x > 0.0) values.push_back(x);
        }
        if (values.empty()) {
            std::cerr << "warning: group '" << label << "' has empty foreground, skipped\n";
            continue;
        }
        wmh::Volume3D pooled(wmh::make_geometry({static_cast<int>(values.size()), 1, 1}));
        pooled.data = values;
        auto bins = wmh::foreground_distribution(pooled, n_bins);
        for (const auto& b : bins)
            os << label << "," << b.center << "," << b.density << "\n";
    }
    write_text(out_path, os.str());
    return 0;
}

int cmd_phantom(const std::string& out_dir, std::uint64_t seed, int n_cases,
                std::vector<int> dims, std::vector<double> spacing, int n_lesions,
                double noise_sigma, double light_degrade, double heavy_degrade) {
    fs::create_directories(out_dir);
    std::ostringstream gt_manifest, flair_manifest, pred_manifest;
    gt_manifest << "case_id,path\n";
    flair_manifest << "case_id,path,scanner_label\n";
    pred_manifest << "case_id,model,path\n";

    wmh::PhantomOptions popts;
    popts.dims = {dims[0], dims[1], dims[2]};
    popts.spacing = {spacing[0], spacing[1], spacing[2]};
    popts.n_lesions = n_lesions;
    popts.noise_sigma = noise_sigma;

    for (int c = 0; c < n_cases; ++c) {
        std::uint64_t case_seed = seed + static_cast<std::uint64_t>(c) * 1000003ULL;
        wmh::PhantomCase pc = wmh::generate_phantom(case_seed, popts);
        std::string id = "case" + std::to_string(c);
        std::string flair = (fs::path(out_dir) / (id + "_flair.nii.gz")).string();
        std::string gt = (fs::path(out_dir) / (id + "_gt.nii.gz")).string();
        wmh::write_nifti(pc.image, flair);
        wmh::write_nifti(pc.mask, gt);
        gt_manifest << id << "," << gt << "\n";
        flair_manifest << id << "," << flair << "," << (c % 2 ? "scannerB" : "scannerA") << "\n";

        if (light_degrade > 0.0 || heavy_degrade > 0.0) {
            wmh::DegradeOptions light{light_degrade, 0.0, light_degrade / 2.0};
            wmh::DegradeOptions heavy{heavy_degrade, heavy_degrade / 2.0, heavy_degrade};
            std::string lp = (fs::path(out_dir) / (id + "_light.nii.gz")).string();
            std::string hp = (fs::path(out_dir) / (id + "_heavy.nii.gz")).string();
            wmh::write_nifti(wmh::degrade_mask(pc.mask, case_seed + 1, light), lp);
            wmh::write_nifti(wmh::degrade_mask(pc.mask, case_seed + 2, heavy), hp);
            pred_manifest << id << ",light," << lp << "\n";
            pred_manifest << id << ",heavy," << hp << "\n";
        }
    }
    write_text((fs::path(out_dir) / "gt_manifest.csv").string(), gt_manifest.str());
    write_text((fs::path(out_dir) / "flair_manifest.csv").string(), flair_manifest.str());
    if (light_degrade > 0.0 || heavy_degrade > 0.0)
        write_text((fs::path(out_dir) / "pred_manifest.csv").string(), pred_manifest.str());
    return 0;
}

int cmd_stats(const std::string& metrics_csv, const std::string& out_path, bool no_bonferroni,
              bool sign_test) {
    wmh::CsvTable t = wmh::read_csv(metrics_csv);
    int id_col = t.column_index("case_id");
    int model_col = t.column_index("model");
    if (id_col < 0 || model_col < 0)
        throw wmh::VolumeError("metrics CSV needs case_id and model columns");

    std::vector<std::string> models, case_ids;
    for (const auto& row : t.rows) {
        if (std::find(models.begin(), models.end(), row[model_col]) == models.end())
            models.push_back(row[model_col]);
        if (std::find(case_ids.begin(), case_ids.end(), row[id_col]) == case_ids.end())
            case_ids.push_back(row[id_col]);
    }

    ordered_json j;
    j["schema_version"] = 1;
    j["models"] = models;
    ordered_json per_metric = ordered_json::object();
    for (const auto& metric : wmh::metric_names()) {
        int mcol = t.column_index(metric);
        if (mcol < 0) continue;
        wmh::MetricTable table;
        table.model_names = models;
        for (const auto& id : case_ids) {
            std::vector<std::optional<double>> row(models.size());
            for (const auto& r : t.rows) {
                if (r[id_col] != id) continue;
                auto mi = std::find(models.begin(), models.end(), r[model_col]) - models.begin();
                row[mi] = parse_opt_double(r[mcol]);
            }
            table.rows.push_back(row);
        }
        if (models.size() < 2 || table.n_complete_rows() < 2) continue;
        bool higher = metric != "hd95_mm" && metric != "avd_pct";
        wmh::FriedmanResult f = wmh::friedman_test(table, higher);
        auto pw = wmh::pairwise_comparisons(
            table, no_bonferroni ? wmh::PairwiseCorrection::None
                                 : wmh::PairwiseCorrection::Bonferroni,
            sign_test ? wmh::PairwiseTest::Sign : wmh::PairwiseTest::WilcoxonSignedRank);
        ordered_json fj = {{"chi2", f.chi2},         {"df", f.df},
                           {"p_value", f.p_value},   {"n_used", f.n_used},
                           {"n_dropped", f.n_dropped}, {"mean_ranks", f.mean_ranks},
                           {"all_ties", f.all_ties},
                           {"significant_at_0.05", f.p_value < 0.05}};
        ordered_json pj = ordered_json::array();
        for (const auto& p : pw)
            pj.push_back({{"model_a", models[p.model_a]},
                          {"model_b", models[p.model_b]},
                          {"statistic", p.statistic},
                          {"p_raw", p.p_raw},
                          {"p_corrected", p.p_corrected},
                          {"n_nonzero", p.n_nonzero},
                          {"all_zero", p.all_zero},
                          {"low_n_warning", p.low_n_warning}});
        per_metric[metric] = {{"friedman", fj}, {"pairwise", pj}};
    }
    j["statistics"] = per_metric;
    write_text(out_path, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WMH segmentation evaluation toolkit"};
    app.require_subcommand(1);

    // preprocess
    auto* pre = app.add_subcommand("preprocess",
                                   "Clamp negatives, z-standardize foreground, optional "
                                   "diameter opening and isotropic resampling");
    std::string pre_manifest, pre_out = "preprocessed";
    double pre_resample = 0.0;
    int pre_min_diameter = 5;
    bool pre_keep_bg = false, pre_sample_std = false;
    pre->add_option("--manifest", pre_manifest, "CSV with case_id,path[,mask_path]")->required();
    pre->add_option("--out-dir", pre_out, "Output directory");
    pre->add_option("--resample", pre_resample, "Isotropic target spacing in mm (0 = off)");
    pre->add_option("--min-diameter", pre_min_diameter,
                    "Diameter opening threshold in voxels for masks");
    pre->add_flag("--keep-background-zero", pre_keep_bg,
                  "Keep background at 0 after z-standardization");
    pre->add_flag("--sample-std", pre_sample_std, "Use sample (n-1) std instead of population");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Five-metric evaluation plus statistics");
    std::string ev_pred, ev_gt, ev_out = "evaluation";
    int ev_conn = 26, ev_workers = default_workers();
    bool ev_pooled = false;
    std::vector<double> ev_edges;
    ev->add_option("--pred-manifest", ev_pred, "CSV with case_id,model,path")->required();
    ev->add_option("--gt-manifest", ev_gt, "CSV with case_id,path")->required();
    ev->add_option("--out-dir", ev_out, "Output directory");
    ev->add_option("--connectivity", ev_conn, "Lesion connectivity: 6, 18 or 26");
    ev->add_flag("--hd95-pooled", ev_pooled,
                 "Pool both directed surface distances before the percentile");
    ev->add_option("--bin-edges", ev_edges,
                   "Voxel-count size bin edges (an implicit +inf edge is appended)");
    ev->add_option("--workers", ev_workers, "Worker thread count (env WMH_WORKERS)");

    // fuse
    auto* fu = app.add_subcommand("fuse", "STAPLE (or majority-vote) fusion of aligned masks");
    std::vector<std::string> fu_inputs;
    std::string fu_out, fu_weights, fu_params;
    bool fu_majority = false, fu_exact = false;
    double fu_p = 0.9, fu_q = 0.9, fu_tol = 1e-6;
    int fu_iters = 100;
    fu->add_option("inputs", fu_inputs, "Input mask paths")->required()->expected(-1);
    fu->add_option("--out", fu_out, "Fused mask output path")->required();
    fu->add_option("--weights", fu_weights, "Posterior weight volume output path");
    fu->add_option("--params-json", fu_params, "Final sensitivity/specificity JSON path");
    fu->add_flag("--majority", fu_majority, "Majority vote instead of STAPLE");
    fu->add_flag("--exact", fu_exact, "Full-volume EM instead of vote bounding box");
    fu->add_option("--init-sensitivity", fu_p, "Initial p_j");
    fu->add_option("--init-specificity", fu_q, "Initial q_j");
    fu->add_option("--max-iters", fu_iters, "EM iteration cap");
    fu->add_option("--tol", fu_tol, "Convergence tolerance on max |dW|");

    // distribution
    auto* di = app.add_subcommand("distribution",
                                  "Foreground intensity histograms grouped by scanner_label");
    std::string di_manifest, di_out = "distribution.csv";
    int di_bins = 100;
    di->add_option("--manifest", di_manifest, "CSV with case_id,path,scanner_label")->required();
    di->add_option("--bins", di_bins, "Histogram bin count");
    di->add_option("--out", di_out, "Output CSV path");

    // phantom
    auto* ph = app.add_subcommand("phantom", "Generate synthetic FLAIR/mask test cases");
    std::string ph_out = "phantom";
    std::uint64_t ph_seed = 0;
    int ph_cases = 1, ph_lesions = 5;
    std::vector<int> ph_dims = {64, 64, 64};
    std::vector<double> ph_spacing = {1.0, 1.0, 1.0};
    double ph_noise = 0.05, ph_light = 0.0, ph_heavy = 0.0;
    ph->add_option("--out-dir", ph_out, "Output directory");
    ph->add_option("--seed", ph_seed, "Base seed");
    ph->add_option("--cases", ph_cases, "Number of cases");
    ph->add_option("--dims", ph_dims, "Volume dimensions")->expected(3);
    ph->add_option("--spacing", ph_spacing, "Voxel spacing in mm")->expected(3);
    ph->add_option("--n-lesions", ph_lesions, "Lesions per case");
    ph->add_option("--noise-sigma", ph_noise, "Gaussian noise sigma");
    ph->add_option("--light-degrade", ph_light,
                   "Also emit a lightly degraded prediction at this rate");
    ph->add_option("--heavy-degrade", ph_heavy,
                   "Also emit a heavily degraded prediction at this rate");

    // stats
    auto* st = app.add_subcommand("stats", "Friedman + pairwise tests over a metrics CSV");
    std::string st_csv, st_out = "stats.json";
    bool st_nobonf = false, st_sign = false;
    st->add_option("--metrics-csv", st_csv, "case_metrics.csv from evaluate")->required();
    st->add_option("--out", st_out, "Output JSON path");
    st->add_flag("--no-bonferroni", st_nobonf, "Report raw p-values only");
    st->add_flag("--sign-test", st_sign, "Sign test instead of Wilcoxon signed-rank");

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed())
            return cmd_preprocess(pre_manifest, pre_out, pre_resample, pre_min_diameter,
                                  pre_keep_bg, pre_sample_std);
        if (ev->parsed())
            return cmd_evaluate(ev_pred, ev_gt, ev_out, ev_conn, ev_pooled, ev_edges, ev_workers);
        if (fu->parsed())
            return cmd_fuse(fu_inputs, fu_out, fu_weights, fu_params, fu_majority, fu_exact,
                            fu_p, fu_q, fu_iters, fu_tol);
        if (di->parsed()) return cmd_distribution(di_manifest, di_bins, di_out);
        if (ph->parsed())
            return cmd_phantom(ph_out, ph_seed, ph_cases, ph_dims, ph_spacing, ph_lesions,
                               ph_noise, ph_light, ph_heavy);
        if (st->parsed()) return cmd_stats(st_csv, st_out, st_nobonf, st_sign);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
