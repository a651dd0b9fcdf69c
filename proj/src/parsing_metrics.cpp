#include "spermmorph/parsing_metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

#include "spermmorph/error.hpp"

namespace spermmorph {

namespace {

void check_dims(const InstancePartMask& a, const InstancePartMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw InvalidArgument("prediction is " + std::to_string(a.width()) + "x" +
                              std::to_string(a.height()) + " but ground truth is " +
                              std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

using PartCounts = std::array<std::size_t, kPartLabelCount>;

// Overlap statistics between every predicted and every gt instance.
struct PairStats {
    std::vector<InstanceId> pred_ids, gt_ids;
    std::vector<std::size_t> pred_first, gt_first;
    std::vector<PartCounts> pred_cnt, gt_cnt;
    std::vector<PartCounts> inter;  // pred-major

    PairStats(const InstancePartMask& pred, const InstancePartMask& gt) {
        check_dims(pred, gt);
        pred_ids = pred.instance_ids();
        gt_ids = gt.instance_ids();
        const std::size_t np = pred_ids.size();
        const std::size_t ng = gt_ids.size();
        pred_first.assign(np, SIZE_MAX);
        gt_first.assign(ng, SIZE_MAX);
        pred_cnt.assign(np, PartCounts{});
        gt_cnt.assign(ng, PartCounts{});
        inter.assign(np * ng, PartCounts{});
        auto index_of = [](const std::vector<InstanceId>& ids, InstanceId id) {
            return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
        };
        const auto pp = pred.parts();
        const auto pi = pred.instances();
        const auto gp = gt.parts();
        const auto gi = gt.instances();
        for (std::size_t k = 0; k < pp.size(); ++k) {
            std::size_t i = SIZE_MAX, j = SIZE_MAX;
            if (pi[k] != 0) {
                i = index_of(pred_ids, pi[k]);
                ++pred_cnt[i][static_cast<std::size_t>(pp[k])];
                pred_first[i] = std::min(pred_first[i], k);
            }
            if (gi[k] != 0) {
                j = index_of(gt_ids, gi[k]);
                ++gt_cnt[j][static_cast<std::size_t>(gp[k])];
                gt_first[j] = std::min(gt_first[j], k);
            }
            if (i != SIZE_MAX && j != SIZE_MAX && pp[k] == gp[k]) {
                ++inter[i * ng + j][static_cast<std::size_t>(pp[k])];
            }
        }
    }

    [[nodiscard]] std::size_t n_pred() const { return pred_ids.size(); }
    [[nodiscard]] std::size_t n_gt() const { return gt_ids.size(); }

    // NaN-free: returns -1 when the part is absent from both.
    [[nodiscard]] double part_iou(std::size_t i, std::size_t j, std::size_t p) const {
        const std::size_t in = inter[i * n_gt() + j][p];
        const std::size_t un = pred_cnt[i][p] + gt_cnt[j][p] - in;
        return un == 0 ? -1.0 : static_cast<double>(in) / static_cast<double>(un);
    }

    [[nodiscard]] double score(std::size_t i, std::size_t j) const {
        double sum = 0.0;
        int n = 0;
        for (PartLabel part : kForegroundParts) {
            const double v = part_iou(i, j, static_cast<std::size_t>(part));
            if (v >= 0.0) {
                sum += v;
                ++n;
            }
        }
        return n == 0 ? 0.0 : sum / n;
    }
};

struct MatchResult {
    std::vector<std::size_t> pred_order;  // indices in ranking order
    std::vector<bool> tp;                 // per ranked position
    std::vector<std::size_t> gt_match;    // gt index -> pred index or SIZE_MAX
};

double confidence_of(const ParsingPrediction& pred, InstanceId id) {
    const auto it = pred.confidence.find(id);
    return it == pred.confidence.end() ? 1.0 : it->second;
}

// Ranking ties fall back to the first pixel in scan order so that results do
// not depend on the numeric IDs.
std::vector<std::size_t> rank_predictions(const PairStats& s, const ParsingPrediction& pred) {
    std::vector<std::size_t> order(s.n_pred());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ca = confidence_of(pred, s.pred_ids[a]);
        const double cb = confidence_of(pred, s.pred_ids[b]);
        if (ca != cb) return ca > cb;
        return s.pred_first[a] < s.pred_first[b];
    });
    return order;
}

MatchResult greedy_match(const PairStats& s, const std::vector<std::size_t>& order, double threshold) {
    MatchResult m;
    m.pred_order = order;
    m.gt_match.assign(s.n_gt(), SIZE_MAX);
    for (std::size_t i : order) {
        std::size_t best = SIZE_MAX;
        double best_score = -1.0;
        for (std::size_t j = 0; j < s.n_gt(); ++j) {
            if (m.gt_match[j] != SIZE_MAX) continue;
            const double sc = s.score(i, j);
            if (sc > best_score || (sc == best_score && s.gt_first[j] < s.gt_first[best])) {
                best = j;
                best_score = sc;
            }
        }
        const bool hit = best != SIZE_MAX && best_score > threshold;
        if (hit) m.gt_match[best] = i;
        m.tp.push_back(hit);
    }
    return m;
}

double average_precision(const std::vector<bool>& tp_ranked, std::size_t n_gt) {
    if (n_gt == 0) return tp_ranked.empty() ? 1.0 : 0.0;
    const std::size_t n = tp_ranked.size();
    std::vector<double> precision(n);
    std::size_t tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (tp_ranked[k]) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    }
    // Interpolated precision: running maximum from the right.
    for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
    double ap = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (tp_ranked[k]) ap += precision[k];
    }
    return ap / static_cast<double>(n_gt);
}

// Per gt instance PCP values; unmatched instances give nullopt.
std::vector<std::optional<double>> pcp_values(const PairStats& s, const MatchResult& m, double threshold) {
    std::vector<std::optional<double>> out(s.n_gt());
    for (std::size_t j = 0; j < s.n_gt(); ++j) {
        if (m.gt_match[j] == SIZE_MAX) continue;
        int present = 0;
        int correct = 0;
        for (PartLabel part : kForegroundParts) {
            const auto p = static_cast<std::size_t>(part);
            if (s.gt_cnt[j][p] == 0) continue;
            ++present;
            if (s.part_iou(m.gt_match[j], j, p) > threshold) ++correct;
        }
        out[j] = present == 0 ? 0.0 : static_cast<double>(correct) / present;
    }
    return out;
}

}  // namespace

MiouResult miou(const InstancePartMask& pred, const InstancePartMask& gt) {
    check_dims(pred, gt);
    PartCounts in{}, un{};
    const auto pp = pred.parts();
    const auto gp = gt.parts();
    for (std::size_t k = 0; k < pp.size(); ++k) {
        const auto a = static_cast<std::size_t>(pp[k]);
        const auto b = static_cast<std::size_t>(gp[k]);
        if (a == b) {
            ++in[a];
            ++un[a];
        } else {
            ++un[a];
            ++un[b];
        }
    }
    MiouResult r;
    double sum = 0.0;
    for (PartLabel part : kForegroundParts) {
        const auto p = static_cast<std::size_t>(part);
        if (un[p] == 0) continue;
        r.per_part[part] = static_cast<double>(in[p]) / static_cast<double>(un[p]);
        sum += r.per_part[part];
    }
    if (!r.per_part.empty()) r.miou = sum / static_cast<double>(r.per_part.size());
    return r;
}

double instance_score(const InstancePartMask& pred, InstanceId pred_id, const InstancePartMask& gt,
                      InstanceId gt_id) {
    const PairStats s(pred, gt);
    const auto pi = std::find(s.pred_ids.begin(), s.pred_ids.end(), pred_id);
    const auto gi = std::find(s.gt_ids.begin(), s.gt_ids.end(), gt_id);
    if (pi == s.pred_ids.end() || gi == s.gt_ids.end()) {
        throw InvalidArgument("unknown instance ID");
    }
    return s.score(static_cast<std::size_t>(pi - s.pred_ids.begin()),
                   static_cast<std::size_t>(gi - s.gt_ids.begin()));
}

double ap_p(const ParsingPrediction& pred, const InstancePartMask& gt, double threshold) {
    const PairStats s(pred.mask, gt);
    const auto m = greedy_match(s, rank_predictions(s, pred), threshold);
    return average_precision(m.tp, s.n_gt());
}

double ap_p_vol(const ParsingPrediction& pred, const InstancePartMask& gt) {
    const PairStats s(pred.mask, gt);
    const auto order = rank_predictions(s, pred);
    double sum = 0.0;
    for (double t : kApVolThresholds) sum += average_precision(greedy_match(s, order, t).tp, s.n_gt());
    return sum / static_cast<double>(kApVolThresholds.size());
}

double pcp(const ParsingPrediction& pred, const InstancePartMask& gt, double threshold,
           bool unmatched_zero) {
    const PairStats s(pred.mask, gt);
    if (s.n_gt() == 0) return s.n_pred() == 0 ? 1.0 : 0.0;
    const auto m = greedy_match(s, rank_predictions(s, pred), threshold);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : pcp_values(s, m, threshold)) {
        if (v) {
            sum += *v;
            ++n;
        } else if (unmatched_zero) {
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

ParsingAccumulator::ParsingAccumulator(MetricOptions options)
    : options_(options), ranked_(kApVolThresholds.size() + 1) {}

void ParsingAccumulator::add(const ParsingPrediction& pred, const InstancePartMask& gt) {
    const PairStats s(pred.mask, gt);
    const std::size_t image = images_++;
    const auto pp = pred.mask.parts();
    const auto gp = gt.parts();
    for (std::size_t k = 0; k < pp.size(); ++k) {
        const auto a = static_cast<std::size_t>(pp[k]);
        const auto b = static_cast<std::size_t>(gp[k]);
        ++uni_[a];
        if (a == b) {
            ++inter_[a];
        } else {
            ++uni_[b];
        }
    }
    gt_instances_ += s.n_gt();
    pred_instances_ += s.n_pred();

    const auto order = rank_predictions(s, pred);
    for (std::size_t t = 0; t < ranked_.size(); ++t) {
        const double thr = t < kApVolThresholds.size() ? kApVolThresholds[t] : options_.ap_threshold;
        const auto m = greedy_match(s, order, thr);
        for (std::size_t r = 0; r < order.size(); ++r) {
            ranked_[t].push_back({confidence_of(pred, s.pred_ids[order[r]]), image, r, m.tp[r]});
        }
    }
    const auto m = greedy_match(s, order, options_.pcp_threshold);
    for (const auto& v : pcp_values(s, m, options_.pcp_threshold)) {
        if (v) {
            pcp_sum_ += *v;
            ++pcp_count_;
        } else if (options_.pcp_unmatched_zero) {
            ++pcp_count_;
        }
    }
}

MetricReport ParsingAccumulator::report() const {
    MetricReport r;
    double sum = 0.0;
    for (PartLabel part : kForegroundParts) {
        const auto p = static_cast<std::size_t>(part);
        if (uni_[p] == 0) continue;
        r.per_part_iou[part] = static_cast<double>(inter_[p]) / static_cast<double>(uni_[p]);
        sum += r.per_part_iou[part];
    }
    r.miou = r.per_part_iou.empty() ? 1.0 : sum / static_cast<double>(r.per_part_iou.size());

    auto ap_at = [&](std::size_t t) {
        auto list = ranked_[t];
        std::stable_sort(list.begin(), list.end(), [](const Ranked& a, const Ranked& b) {
            if (a.confidence != b.confidence) return a.confidence > b.confidence;
            if (a.image != b.image) return a.image < b.image;
            return a.order < b.order;
        });
        std::vector<bool> tp;
        tp.reserve(list.size());
        for (const auto& x : list) tp.push_back(x.tp);
        return average_precision(tp, gt_instances_);
    };
    double vol = 0.0;
    for (std::size_t t = 0; t < kApVolThresholds.size(); ++t) vol += ap_at(t);
    r.ap_p_vol = vol / static_cast<double>(kApVolThresholds.size());
    r.ap_p_50 = ap_at(kApVolThresholds.size());
    if (gt_instances_ == 0) {
        r.pcp_50 = pred_instances_ == 0 ? 1.0 : 0.0;
    } else {
        r.pcp_50 = pcp_count_ == 0 ? 0.0 : pcp_sum_ / static_cast<double>(pcp_count_);
    }
    return r;
}

MetricReport evaluate_parsing(const ParsingPrediction& pred, const InstancePartMask& gt,
                              const MetricOptions& options) {
    ParsingAccumulator acc(options);
    acc.add(pred, gt);
    return acc.report();
}

}  // namespace spermmorph
