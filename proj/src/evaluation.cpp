#include "semmp/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "semmp/error.hpp"

namespace semmp::evaluation {

using annotations::Annotation;
using annotations::Box;
using annotations::MaskRegion;

void MatchConfig::validate() const {
    if (iou_thresholds.empty()) throw InvalidConfig("at least one IoU threshold is required");
    for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
        const double t = iou_thresholds[i];
        if (!(t > 0.0 && t <= 1.0)) throw InvalidConfig(fmt::format("IoU threshold {} not in (0, 1]", t));
        if (i > 0 && !(t > iou_thresholds[i - 1])) throw InvalidConfig("IoU thresholds must be strictly increasing");
    }
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch(fmt::format("{}x{} vs {}x{}", a.width(), a.height(), b.width(), b.height()));
    }
    std::size_t inter = 0, uni = 0;
    auto ab = a.bits();
    auto bb = b.bits();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        inter += ab[i] & bb[i];
        uni += ab[i] | bb[i];
    }
    return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

double region_iou(const MaskRegion& a, const MaskRegion& b) {
    const int x0 = std::max(a.x0, b.x0);
    const int y0 = std::max(a.y0, b.y0);
    const int x1 = std::min(a.x0 + a.width, b.x0 + b.width);
    const int y1 = std::min(a.y0 + a.height, b.y0 + b.height);
    std::size_t inter = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) inter += (a.at(x, y) && b.at(x, y)) ? 1 : 0;
    }
    const std::size_t uni = a.count + b.count - inter;
    return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

double box_iou(const Box& a, const Box& b) {
    const double iw = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
    const double ih = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

// preds x gts, row-major.
struct IouMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t p, std::size_t g) const { return values[p * cols + g]; }
};

IouMatrix iou_matrix(const std::vector<Annotation>& preds, const std::vector<Annotation>& gts, Size dims, IouMode mode) {
    IouMatrix m{preds.size(), gts.size(), std::vector<double>(preds.size() * gts.size(), 0.0)};
    if (m.values.empty()) return m;

    std::vector<Box> pred_boxes, gt_boxes;
    for (const auto& p : preds) pred_boxes.push_back(annotations::bounding_box(p.polygon, dims));
    for (const auto& g : gts) gt_boxes.push_back(annotations::bounding_box(g.polygon, dims));

    if (mode == IouMode::Box) {
        for (std::size_t p = 0; p < preds.size(); ++p) {
            for (std::size_t g = 0; g < gts.size(); ++g) m.values[p * m.cols + g] = box_iou(pred_boxes[p], gt_boxes[g]);
        }
        return m;
    }

    std::vector<MaskRegion> pred_masks, gt_masks;
    for (const auto& p : preds) pred_masks.push_back(annotations::rasterize_region(p.polygon, dims));
    for (const auto& g : gts) gt_masks.push_back(annotations::rasterize_region(g.polygon, dims));
    for (std::size_t p = 0; p < preds.size(); ++p) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const auto& a = pred_masks[p];
            const auto& b = gt_masks[g];
            const bool disjoint = a.x0 >= b.x0 + b.width || b.x0 >= a.x0 + a.width || a.y0 >= b.y0 + b.height ||
                                  b.y0 >= a.y0 + a.height;
            m.values[p * m.cols + g] = disjoint ? 0.0 : region_iou(a, b);
        }
    }
    return m;
}

std::vector<std::size_t> confidence_order(const std::vector<Annotation>& preds) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!preds[i].confidence) throw MissingConfidence(fmt::format("prediction {} has no confidence", i));
    }
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return *preds[a].confidence > *preds[b].confidence; });
    return order;
}

MatchResult match_with(const IouMatrix& iou, const std::vector<std::size_t>& order, double thr) {
    MatchResult r{std::vector<bool>(iou.rows, false), std::vector<int>(iou.rows, -1), std::vector<bool>(iou.cols, false)};
    for (auto p : order) {
        int best = -1;
        double best_iou = thr;
        for (std::size_t g = 0; g < iou.cols; ++g) {
            if (r.gt_matched[g]) continue;
            const double v = iou.at(p, g);
            if (v >= best_iou && (best < 0 || v > best_iou)) {
                best = static_cast<int>(g);
                best_iou = v;
            }
        }
        if (best >= 0) {
            r.true_positive[p] = true;
            r.matched_gt[p] = best;
            r.gt_matched[static_cast<std::size_t>(best)] = true;
        }
    }
    return r;
}

}  // namespace

MatchResult match_predictions(const std::vector<Annotation>& preds, const std::vector<Annotation>& gts, double iou_thr,
                              Size dims, IouMode mode) {
    const auto order = confidence_order(preds);
    return match_with(iou_matrix(preds, gts, dims, mode), order, iou_thr);
}

ApResult average_precision(const std::vector<bool>& tp_flags, std::size_t n_gt) {
    if (n_gt == 0) return {0.0, tp_flags.empty()};
    if (tp_flags.empty()) return {0.0, false};

    const std::size_t n = tp_flags.size();
    std::vector<double> recall(n), precision(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tp += tp_flags[i] ? 1 : 0;
        recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    }
    for (std::size_t i = n - 1; i-- > 0;) precision[i] = std::max(precision[i], precision[i + 1]);

    double sum = 0.0;
    std::size_t i = 0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        while (i < n && recall[i] < r) ++i;
        if (i == n) break;
        sum += precision[i];
    }
    return {sum / 101.0, false};
}

EvalReport compute_metrics(const std::vector<ImageEval>& images, const MatchConfig& cfg) {
    cfg.validate();

    std::vector<const ImageEval*> sorted;
    for (const auto& img : images) sorted.push_back(&img);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->image_id < b->image_id; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i]->image_id == sorted[i - 1]->image_id) {
            throw MalformedInput(fmt::format("duplicate image id '{}'", sorted[i]->image_id));
        }
    }

    std::vector<double> thresholds = cfg.iou_thresholds;
    auto half = std::find_if(thresholds.begin(), thresholds.end(), [](double t) { return std::abs(t - 0.5) < 1e-12; });
    const bool extra_half = half == thresholds.end();
    if (extra_half) thresholds.push_back(0.5);
    const std::size_t half_index = extra_half ? thresholds.size() - 1 : static_cast<std::size_t>(half - thresholds.begin());

    struct Pooled {
        double confidence;
        std::size_t image;
        std::size_t pred;
    };
    std::vector<Pooled> pooled;
    // flags[t][image][pred]
    std::vector<std::vector<std::vector<bool>>> flags(thresholds.size(), std::vector<std::vector<bool>>(sorted.size()));
    EvalReport report;

    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const ImageEval& img = *sorted[i];
        if (img.dims.width < 1 || img.dims.height < 1) {
            throw DimensionMismatch(fmt::format("image '{}' has invalid size {}x{}", img.image_id, img.dims.width,
                                                img.dims.height));
        }
        const auto order = confidence_order(img.predictions);
        const auto iou = iou_matrix(img.predictions, img.ground_truth, img.dims, cfg.iou_mode);
        for (std::size_t t = 0; t < thresholds.size(); ++t) {
            flags[t][i] = match_with(iou, order, thresholds[t]).true_positive;
        }
        for (std::size_t p = 0; p < img.predictions.size(); ++p) pooled.push_back({*img.predictions[p].confidence, i, p});
        report.n_ground_truth += img.ground_truth.size();
        report.n_predictions += img.predictions.size();
    }

    std::stable_sort(pooled.begin(), pooled.end(), [](const Pooled& a, const Pooled& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.image != b.image) return a.image < b.image;
        return a.pred < b.pred;
    });

    std::vector<double> ap(thresholds.size());
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        std::vector<bool> seq;
        seq.reserve(pooled.size());
        for (const auto& p : pooled) seq.push_back(flags[t][p.image][p.pred]);
        ap[t] = average_precision(seq, report.n_ground_truth).value;
    }
    report.map50 = ap[half_index];
    report.ap_per_threshold.assign(ap.begin(), ap.begin() + static_cast<std::ptrdiff_t>(cfg.iou_thresholds.size()));
    report.map50_95 = std::accumulate(report.ap_per_threshold.begin(), report.ap_per_threshold.end(), 0.0) /
                      static_cast<double>(report.ap_per_threshold.size());
    report.fitness = fitness(report.map50, report.map50_95);

    // Max-F1 operating point on the IoU 0.5 sweep, evaluated at distinct confidences.
    double best_f1 = -1.0;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        tp += flags[half_index][pooled[k].image][pooled[k].pred] ? 1 : 0;
        if (k + 1 < pooled.size() && pooled[k + 1].confidence == pooled[k].confidence) continue;
        const double p = static_cast<double>(tp) / static_cast<double>(k + 1);
        const double r = report.n_ground_truth ? static_cast<double>(tp) / static_cast<double>(report.n_ground_truth) : 0.0;
        const double f = f1_score(p, r);
        if (f > best_f1) {
            best_f1 = f;
            report.precision = p;
            report.recall = r;
            report.f1 = f;
            report.operating_confidence = pooled[k].confidence;
        }
    }

    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const ImageEval& img = *sorted[i];
        ImageDiagnostics d{img.image_id, 0, 0, 0};
        for (std::size_t p = 0; p < img.predictions.size(); ++p) {
            if (*img.predictions[p].confidence < report.operating_confidence) continue;
            if (flags[half_index][i][p]) ++d.tp;
            else ++d.fp;
        }
        d.fn = img.ground_truth.size() - d.tp;
        report.per_image.push_back(std::move(d));
    }
    return report;
}

std::string format_report_csv(const std::vector<ReportRow>& rows) {
    std::string out(kReportHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.model, r.f1(), r.precision, r.recall, r.map50, r.map50_95,
                           r.fitness());
    }
    return out;
}

std::string format_report_rounded(const std::vector<ReportRow>& rows) {
    std::string out(kReportHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += fmt::format("{},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f}\n", r.model, r.f1(), r.precision, r.recall,
                           r.map50, r.map50_95, r.fitness());
    }
    return out;
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
    std::size_t model_w = std::string_view("Model").size();
    for (const auto& r : rows) model_w = std::max(model_w, r.model.size());
    std::string out = fmt::format("{:<{}} | {:>8} | {:>9} | {:>6} | {:>6} | {:>9} | {:>7}\n", "Model", model_w,
                                  "F1-Score", "Precision", "Recall", "mAP50", "mAP50-95", "Fitness");
    out += std::string(model_w, '-') + "-+-" + std::string(8, '-') + "-+-" + std::string(9, '-') + "-+-" +
           std::string(6, '-') + "-+-" + std::string(6, '-') + "-+-" + std::string(9, '-') + "-+-" +
           std::string(7, '-') + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{:<{}} | {:>8.3f} | {:>9.3f} | {:>6.3f} | {:>6.3f} | {:>9.3f} | {:>7.3f}\n", r.model, model_w,
                           r.f1(), r.precision, r.recall, r.map50, r.map50_95, r.fitness());
    }
    return out;
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    double v = 0.0;
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw MalformedInput(fmt::format("report line {}: '{}' is not a number", line_no, cell));
    }
    return v;
}

}  // namespace

std::vector<ReportRow> parse_report_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return {};  // nothing to report
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_cells(line);
    auto column = [&](std::string_view name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw MalformedInput(fmt::format("report header lacks column '{}'", name));
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_model = column("model");
    const std::size_t c_p = column("precision");
    const std::size_t c_r = column("recall");
    const std::size_t c_m50 = column("map50");
    const std::size_t c_m95 = column("map50_95");

    std::vector<ReportRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_cells(line);
        if (cells.size() != header.size()) {
            throw MalformedInput(fmt::format("report line {}: {} cells, header has {}", line_no, cells.size(), header.size()));
        }
        ReportRow row{cells[c_model], parse_cell(cells[c_p], line_no), parse_cell(cells[c_r], line_no),
                      parse_cell(cells[c_m50], line_no), parse_cell(cells[c_m95], line_no)};
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_per_image_csv(const std::vector<ImageDiagnostics>& rows) {
    std::string out = "image_id,tp,fp,fn\n";
    for (const auto& d : rows) out += fmt::format("{},{},{},{}\n", d.image_id, d.tp, d.fp, d.fn);
    return out;
}

}  // namespace semmp::evaluation
