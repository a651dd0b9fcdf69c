#pragma once

#include <array>
#include <map>
#include <vector>

#include "spermmorph/raster.hpp"

namespace spermmorph {

/// Predicted parsing with one confidence per instance. Instances without an
/// entry default to confidence 1.
struct ParsingPrediction {
    InstancePartMask mask;
    std::map<InstanceId, double> confidence;
};

struct MiouResult {
    double miou = 1.0;  ///< 1 when no class occurs in either mask
    std::map<PartLabel, double> per_part;  ///< only classes present in pred or gt
};

struct MetricOptions {
    double ap_threshold = 0.5;
    double pcp_threshold = 0.5;
    bool pcp_unmatched_zero = true;  ///< false excludes unmatched gt instances
};

struct MetricReport {
    double miou = 0.0;
    double ap_p_50 = 0.0;
    double ap_p_vol = 0.0;
    double pcp_50 = 0.0;
    std::map<PartLabel, double> per_part_iou;
};

inline constexpr std::array<double, 9> kApVolThresholds = {0.1, 0.2, 0.3, 0.4, 0.5,
                                                          0.6, 0.7, 0.8, 0.9};

/// Part-class IoU ignoring instance IDs. Throws InvalidArgument on a size mismatch.
MiouResult miou(const InstancePartMask& pred, const InstancePartMask& gt);

/// Mean part IoU between one predicted and one ground-truth instance over the
/// parts present in either.
double instance_score(const InstancePartMask& pred, InstanceId pred_id, const InstancePartMask& gt,
                      InstanceId gt_id);

/// Area under the all-point interpolated precision/recall curve. Predictions are
/// matched greedily by descending confidence; a prediction is a true positive
/// when its best unmatched gt instance scores above `threshold`.
double ap_p(const ParsingPrediction& pred, const InstancePartMask& gt, double threshold);
double ap_p_vol(const ParsingPrediction& pred, const InstancePartMask& gt);

/// Mean over gt instances of the fraction of their parts whose part IoU with the
/// matched prediction exceeds `threshold`.
double pcp(const ParsingPrediction& pred, const InstancePartMask& gt, double threshold,
           bool unmatched_zero = true);

/// Pools image pairs: IoU from summed intersections and unions, AP over all
/// predictions of the dataset ranked together, PCP over all gt instances.
class ParsingAccumulator {
public:
    explicit ParsingAccumulator(MetricOptions options = {});

    void add(const ParsingPrediction& pred, const InstancePartMask& gt);
    [[nodiscard]] MetricReport report() const;

private:
    struct Ranked {
        double confidence;
        std::size_t image;
        std::size_t order;  ///< tie-break inside the image
        bool tp;
    };

    MetricOptions options_;
    std::size_t images_ = 0;
    std::array<std::size_t, kPartLabelCount> inter_{};
    std::array<std::size_t, kPartLabelCount> uni_{};
    std::size_t gt_instances_ = 0;
    std::size_t pred_instances_ = 0;
    // Per threshold: ranked predictions. Index kApVolThresholds.size() is the AP threshold.
    std::vector<std::vector<Ranked>> ranked_;
    double pcp_sum_ = 0.0;
    std::size_t pcp_count_ = 0;
};

MetricReport evaluate_parsing(const ParsingPrediction& pred, const InstancePartMask& gt,
                              const MetricOptions& options = {});

}  // namespace spermmorph
