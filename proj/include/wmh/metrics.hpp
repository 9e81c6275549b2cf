#ifndef WMH_METRICS_HPP
#define WMH_METRICS_HPP

#include <optional>
#include <vector>

#include "wmh/morphology.hpp"
#include "wmh/volume.hpp"

namespace wmh {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t total() const { return tp + fp + fn + tn; }
};

ConfusionCounts confusion_counts(const BinaryMask3D& pred, const BinaryMask3D& gt);

/// Per-case record of the five test metrics. hd95 and avd are undefined when
/// the relevant masks are empty.
struct CaseMetrics {
    double dsc = 0.0;
    std::optional<double> hd95_mm;
    std::optional<double> avd_pct;
    std::optional<double> lesion_recall;
    double lesion_f1 = 0.0;
};

/// 2|P∩G| / (|P|+|G|); 1.0 when both empty.
double dice(const BinaryMask3D& pred, const BinaryMask3D& gt);

enum class Hd95Rule { MaxOfDirected, Pooled };

/// 95th percentile Hausdorff distance in mm between boundary voxels
/// (a foreground voxel with a background face-neighbor or on the volume
/// edge). Empty-mask input is undefined: nullopt.
std::optional<double> hd95(const BinaryMask3D& pred, const BinaryMask3D& gt,
                           Hd95Rule rule = Hd95Rule::MaxOfDirected);

/// 100 * ||P| - |G|| / |G|; undefined for empty gt.
std::optional<double> avd(const BinaryMask3D& pred, const BinaryMask3D& gt);

/// Fraction of gt components touched by at least one predicted voxel;
/// undefined for empty gt.
std::optional<double> lesion_recall(const BinaryMask3D& pred, const BinaryMask3D& gt,
                                    Connectivity conn = Connectivity::Corners26);

/// Component-level F1: TP = pred components overlapping gt, FP = pred
/// components missing gt, FN = gt components missed; 1.0 when both empty.
double lesion_f1(const BinaryMask3D& pred, const BinaryMask3D& gt,
                 Connectivity conn = Connectivity::Corners26);

CaseMetrics evaluate_case(const BinaryMask3D& pred, const BinaryMask3D& gt,
                          Connectivity conn = Connectivity::Corners26,
                          Hd95Rule rule = Hd95Rule::MaxOfDirected);

struct SizeBinRow {
    double bin_low;   // inclusive, voxel count
    double bin_high;  // exclusive
    std::optional<double> recall;
    std::optional<double> precision;
    std::size_t n_gt = 0;
    std::size_t n_pred = 0;
};

/// Default voxel-count bin edges for size-stratified scores.
std::vector<double> default_size_bin_edges();

/// Lesion recall/precision stratified by component size: gt lesions binned by
/// their own voxel count for recall, pred lesions for precision.
std::vector<SizeBinRow> size_stratified_pr(const BinaryMask3D& pred, const BinaryMask3D& gt,
                                           Connectivity conn,
                                           const std::vector<double>& bin_edges);

/// Boundary voxels: foreground with at least one background face-neighbor
/// (volume border counts as background).
BinaryMask3D boundary_voxels(const BinaryMask3D& mask);

/// Exact squared Euclidean distance (mm^2) from every voxel center to the
/// nearest seed voxel center, honoring anisotropic spacing.
std::vector<double> squared_distance_transform(const BinaryMask3D& seeds);

/// Percentile with linear interpolation between order statistics
/// (rank = q/100 * (n-1)).
double percentile(std::vector<double> values, double q);

}  // namespace wmh

#endif
