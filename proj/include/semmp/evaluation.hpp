#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "semmp/annotations.hpp"
#include "semmp/mask.hpp"

namespace semmp::evaluation {

enum class IouMode { Mask, Box };

struct MatchConfig {
    std::vector<double> iou_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    IouMode iou_mode = IouMode::Mask;

    void validate() const;
};

/// |a & b| / |a | b|, 0 when both are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);
double region_iou(const annotations::MaskRegion& a, const annotations::MaskRegion& b);
double box_iou(const annotations::Box& a, const annotations::Box& b);

struct MatchResult {
    std::vector<bool> true_positive;  ///< per prediction, input order
    std::vector<int> matched_gt;      ///< per prediction, -1 when unmatched
    std::vector<bool> gt_matched;
};

/// Greedy matching in descending confidence (file order on ties). Each
/// prediction takes the unmatched ground truth with the highest IoU >= iou_thr,
/// the lower index on ties.
MatchResult match_predictions(const std::vector<annotations::Annotation>& preds,
                              const std::vector<annotations::Annotation>& gts, double iou_thr, Size dims,
                              IouMode mode = IouMode::Mask);

struct ApResult {
    double value = 0.0;
    bool undefined = false;  ///< no ground truth and no predictions
};

/// 101-point interpolated AP over confidence-ordered TP/FP flags.
ApResult average_precision(const std::vector<bool>& tp_flags, std::size_t n_gt);

inline double f1_score(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

inline double fitness(double map50, double map50_95) { return 0.9 * map50 + 0.1 * map50_95; }

struct ImageEval {
    std::string image_id;
    Size dims;
    std::vector<annotations::Annotation> ground_truth;
    std::vector<annotations::Annotation> predictions;
};

struct ImageDiagnostics {
    std::string image_id;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double map50 = 0.0;
    double map50_95 = 0.0;
    double fitness = 0.0;
    double operating_confidence = 0.0;
    std::vector<double> ap_per_threshold;
    std::size_t n_ground_truth = 0;
    std::size_t n_predictions = 0;
    std::vector<ImageDiagnostics> per_image;  ///< at IoU 0.5 and the operating confidence, sorted by id
};

/**
 * Single-class evaluation pooled over the corpus. Images are processed in
 * image_id order, so the report does not depend on input order. P and R are
 * taken at the confidence cutoff with maximal F1 on the IoU 0.5 sweep.
 */
EvalReport compute_metrics(const std::vector<ImageEval>& images, const MatchConfig& cfg = {});

/// One row of the model comparison table; F1 and fitness are derived.
struct ReportRow {
    std::string model;
    double precision = 0.0;
    double recall = 0.0;
    double map50 = 0.0;
    double map50_95 = 0.0;

    double f1() const { return f1_score(precision, recall); }
    double fitness() const { return evaluation::fitness(map50, map50_95); }
};

inline constexpr std::string_view kReportHeader = "model,f1,precision,recall,map50,map50_95,fitness";

/// Full-precision CSV as written by `evaluate`.
std::string format_report_csv(const std::vector<ReportRow>& rows);
/// Three-decimal CSV.
std::string format_report_rounded(const std::vector<ReportRow>& rows);
/// Aligned text table, three decimals.
std::string format_report_table(const std::vector<ReportRow>& rows);
/// Requires a header naming at least model, precision, recall, map50, map50_95.
/// Blank input yields no rows.
std::vector<ReportRow> parse_report_csv(std::string_view text);

std::string format_per_image_csv(const std::vector<ImageDiagnostics>& rows);

}  // namespace semmp::evaluation
