#include "semmp/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "semmp/annotations.hpp"
#include "semmp/dataset.hpp"
#include "semmp/enhance.hpp"
#include "semmp/error.hpp"
#include "semmp/evaluation.hpp"
#include "semmp/image.hpp"
#include "semmp/parallel.hpp"
#include "semmp/porometry.hpp"
#include "semmp/synthgen.hpp"

namespace semmp::cli {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoFailure("write failed on " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoFailure(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

// Writes to the named file, or to `out` when the path is empty or "-".
void emit(const std::string& path, std::string_view text, std::ostream& out) {
    if (path.empty() || path == "-") out << text;
    else write_text(path, text);
}

fs::path relative_to(const fs::path& target, const fs::path& base) {
    const auto t = fs::absolute(target).lexically_normal();
    const auto b = fs::absolute(base).lexically_normal();
    auto rel = t.lexically_relative(b);
    return rel.empty() ? t : rel;
}

std::vector<fs::path> label_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoFailure(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::optional<fs::path> find_image(const fs::path& dir, const std::string& stem) {
    for (const char* ext : {".pgm", ".png"}) {
        const auto p = dir / (stem + ext);
        if (fs::exists(p)) return p;
    }
    return std::nullopt;
}

struct Options {
    int jobs = 1;

    std::vector<std::string> inputs;
    std::string out;
    int side = 1024;

    std::string method;
    enhance::ClaheConfig clahe;

    double min_area = 25.0;
    double max_area = 0.0;

    std::string index;
    std::string pores;
    double factor = 0.6;
    std::string mode = "max_dim";

    std::uint64_t seed = 0;
    double test_frac = 0.2;
    double val_frac = 0.2;

    std::string labels;
    std::string image;
    int width = 1024;
    int height = 1024;
    double ratio = 3.0;

    std::string gt_dir;
    std::string pred_dir;
    std::string images_dir;
    std::string model = "model";
    std::string per_image;
    std::string iou = "mask";

    int n_images = 8;
    synthgen::SynthConfig synth;

    std::string format = "csv";
};

int cmd_crop(const Options& o, std::ostream& err) {
    if (o.side <= 0) throw InvalidConfig("crop side must be positive");
    ensure_dir(o.out);
    parallel_for(o.inputs.size(), o.jobs, [&](std::size_t i) {
        const fs::path in(o.inputs[i]);
        save_image(center_crop(load_image(in), o.side), fs::path(o.out) / (in.stem().string() + ".pgm"));
    });
    err << fmt::format("crop: {} images\n", o.inputs.size());
    return kExitOk;
}

int cmd_enhance(const Options& o, std::ostream& err) {
    if (o.method == "clahe") o.clahe.validate();
    ensure_dir(o.out);
    parallel_for(o.inputs.size(), o.jobs, [&](std::size_t i) {
        const fs::path in(o.inputs[i]);
        const GrayImage img = load_image(in);
        const GrayImage result = o.method == "otsu" ? enhance::otsu_binarize(img).to_image() : enhance::clahe(img, o.clahe);
        save_image(result, fs::path(o.out) / (in.stem().string() + ".pgm"));
    });
    err << fmt::format("enhance ({}): {} images\n", o.method, o.inputs.size());
    return kExitOk;
}

porometry::AreaBounds bounds_from(const Options& o) {
    if (!(o.min_area >= 1.0) || (o.max_area > 0.0 && !(o.min_area < o.max_area))) {
        throw InvalidConfig(fmt::format("area bounds must satisfy 1 <= min < max, got ({}, {})", o.min_area, o.max_area));
    }
    return {o.min_area, o.max_area};
}

int cmd_pores(const Options& o, std::ostream& out, std::ostream& err) {
    const auto bounds = bounds_from(o);
    std::vector<std::string> rows(o.inputs.size());
    parallel_for(o.inputs.size(), o.jobs, [&](std::size_t i) {
        const fs::path in(o.inputs[i]);
        rows[i] = porometry::format_pore_csv_row(in.stem().string(), porometry::estimate_pore_size(load_image(in), bounds));
    });
    std::string text(porometry::kPoreCsvHeader);
    text += '\n';
    for (const auto& r : rows) text += r + '\n';
    emit(o.out, text, out);
    err << fmt::format("pores: {} images\n", rows.size());
    return kExitOk;
}

int cmd_filter_labels(const Options& o, std::ostream& err) {
    if (o.mode != "max_dim" && o.mode != "min_dim") throw InvalidConfig("mode must be max_dim or min_dim");
    const dataset::SizeFilterRule rule{o.factor, o.mode == "max_dim" ? dataset::SizeFilterMode::MaxDim
                                                                      : dataset::SizeFilterMode::MinDim};
    if (!(rule.factor > 0.0)) throw InvalidConfig("size filter factor must be positive");
    const auto bounds = bounds_from(o);

    auto index = dataset::read_index(o.index);
    dataset::load_annotations(index);
    auto& entries = index.entries;

    std::map<std::string, porometry::PoreEstimate> known;
    if (!o.pores.empty()) known = porometry::parse_pore_csv(read_text(o.pores));

    std::vector<Size> dims(entries.size());
    parallel_for(entries.size(), o.jobs, [&](std::size_t i) {
        auto& e = entries[i];
        const GrayImage img = load_image(index.resolve(e.image_path));
        dims[i] = img.size();
        if (auto it = known.find(e.image_id); it != known.end()) {
            e.pore = it->second;
        } else if (o.pores.empty()) {
            e.pore = porometry::estimate_pore_size(img, bounds);
        }
    });

    const auto diagonals = dataset::resolve_pore_diagonals(entries);
    const fs::path out_dir(o.out);
    ensure_dir(out_dir / "labels");
    std::size_t removed = 0, degenerate = 0, kept = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& e = entries[i];
        if (!diagonals[i]) throw ValidationError(fmt::format("no pore diagonal available for '{}'", e.image_id));
        auto outcome = dataset::filter_small_particles(e.annotations, *diagonals[i], rule, dims[i]);
        removed += outcome.removed_count;
        degenerate += outcome.degenerate_count;
        kept += outcome.kept.size();
        e.annotations = std::move(outcome.kept);
        e.image_path = relative_to(index.resolve(e.image_path), out_dir);
        e.label_path = fs::path("labels") / (e.image_id + ".txt");
    }
    const auto before = entries.size();
    auto remaining = dataset::prune_empty_images(std::move(entries));
    for (const auto& e : remaining) write_text(out_dir / e.label_path, annotations::write_label_file(e.annotations, false));
    dataset::write_index(remaining, out_dir / "index.csv");
    err << fmt::format("filter-labels: kept {} annotations, removed {} small, {} degenerate; {} of {} images remain\n",
                       kept, removed, degenerate, remaining.size(), before);
    return kExitOk;
}

int cmd_split(const Options& o, std::ostream& err) {
    const dataset::SplitConfig cfg{o.test_frac, o.val_frac, o.seed};
    cfg.validate();
    const auto index = dataset::read_index(o.index);
    const auto result = dataset::stratified_split(index.entries, cfg);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    const fs::path out_dir(o.out);
    ensure_dir(out_dir);
    auto lines = [](const std::vector<std::string>& ids) {
        std::string s;
        for (const auto& id : ids) s += id + '\n';
        return s;
    };
    write_text(out_dir / "train.txt", lines(result.train));
    write_text(out_dir / "val.txt", lines(result.val));
    write_text(out_dir / "test.txt", lines(result.test));
    err << fmt::format("split: {} train, {} val, {} test\n", result.train.size(), result.val.size(), result.test.size());
    return kExitOk;
}

int cmd_classify(const Options& o, std::ostream& out) {
    if (!(o.ratio > 0.0)) throw InvalidConfig("ratio threshold must be positive");
    Size dims{o.width, o.height};
    if (!o.image.empty()) dims = load_image(o.image).size();
    if (dims.width < 1 || dims.height < 1) throw InvalidConfig("image dimensions must be positive");
    const auto annots = annotations::parse_label_file(read_text(o.labels), annotations::ConfidenceField::Detect);
    std::string text = "index,area_px,length_px,width_px,elongation,class\n";
    for (std::size_t i = 0; i < annots.size(); ++i) {
        const auto m = annotations::shape_metrics(annots[i].polygon, dims.width, dims.height);
        text += fmt::format("{},{},{:.3f},{:.3f},{:.3f},{}\n", i, m.area_px, m.length_px, m.width_px, m.elongation,
                            annotations::to_string(annotations::classify_fiber(m, o.ratio)));
    }
    emit(o.out, text, out);
    return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.width < 1 || o.height < 1) throw InvalidConfig("image dimensions must be positive");
    evaluation::MatchConfig cfg;
    cfg.iou_mode = o.iou == "box" ? evaluation::IouMode::Box : evaluation::IouMode::Mask;
    cfg.validate();

    const auto gt_files = label_files(o.gt_dir);
    const auto pred_files = label_files(o.pred_dir);
    std::map<std::string, fs::path> preds_by_id;
    for (const auto& p : pred_files) preds_by_id[p.stem().string()] = p;
    for (const auto& [id, path] : preds_by_id) {
        if (!fs::exists(fs::path(o.gt_dir) / (id + ".txt"))) {
            throw ValidationError(fmt::format("prediction '{}' has no ground truth file", id));
        }
    }

    std::vector<evaluation::ImageEval> images(gt_files.size());
    std::vector<std::size_t> filled(gt_files.size(), 0);
    parallel_for(gt_files.size(), o.jobs, [&](std::size_t i) {
        auto& img = images[i];
        img.image_id = gt_files[i].stem().string();
        img.dims = {o.width, o.height};
        if (!o.images_dir.empty()) {
            const auto path = find_image(o.images_dir, img.image_id);
            if (!path) throw IoFailure(fmt::format("no image for '{}' in {}", img.image_id, o.images_dir));
            img.dims = load_image(*path).size();
        }
        img.ground_truth = annotations::parse_label_file(read_text(gt_files[i]), false);
        if (auto it = preds_by_id.find(img.image_id); it != preds_by_id.end()) {
            img.predictions = annotations::parse_label_file(read_text(it->second), annotations::ConfidenceField::Detect);
            for (auto& p : img.predictions) {
                if (!p.confidence) {
                    p.confidence = 1.0;
                    ++filled[i];
                }
            }
        }
    });
    std::size_t n_filled = 0;
    for (auto n : filled) n_filled += n;
    if (n_filled) err << fmt::format("warning: {} predictions without confidence scored as 1.0\n", n_filled);

    const auto report = evaluation::compute_metrics(images, cfg);
    const evaluation::ReportRow row{o.model, report.precision, report.recall, report.map50, report.map50_95};
    emit(o.out, evaluation::format_report_csv({row}), out);
    if (!o.per_image.empty()) write_text(o.per_image, evaluation::format_per_image_csv(report.per_image));
    err << fmt::format("evaluate: {} images, {} ground truth, {} predictions, operating confidence {}\n", images.size(),
                       report.n_ground_truth, report.n_predictions, report.operating_confidence);
    return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& err) {
    synthgen::SynthConfig cfg = o.synth;
    cfg.seed = o.seed;
    cfg.validate();
    if (o.n_images < 0) throw InvalidConfig("image count must be non-negative");
    const auto index = synthgen::generate_dataset(cfg, o.n_images, o.out, o.jobs);
    err << fmt::format("synth: {} images, index {}\n", o.n_images, index.string());
    return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
    const auto rows = evaluation::parse_report_csv(read_text(o.inputs.at(0)));
    out << (o.format == "table" ? evaluation::format_report_table(rows) : evaluation::format_report_rounded(rows));
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"SEM microplastic image pipeline: preprocessing, porometry, label curation, evaluation.", "semmp"};
    app.set_config("--config", "", "Flat `key = value` file; use `subcommand.option = value` for subcommand options. "
                                   "Command-line flags take precedence over config values.");
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--jobs", o.jobs, "Worker threads for per-image work (output is identical for any value)")
        ->check(CLI::Range(1, 256));

    auto* crop = app.add_subcommand("crop", "Centre-crop images to a square");
    crop->add_option("--in", o.inputs, "Input images (PGM/PNG)")->required();
    crop->add_option("--out", o.out, "Output directory")->required();
    crop->add_option("--side", o.side, "Crop side in pixels")->capture_default_str();

    auto* enh = app.add_subcommand("enhance", "Otsu binarization or CLAHE");
    enh->add_option("--method", o.method, "otsu or clahe")->required()->check(CLI::IsMember({"otsu", "clahe"}));
    enh->add_option("--in", o.inputs, "Input images")->required();
    enh->add_option("--out", o.out, "Output directory")->required();
    enh->add_option("--tiles-x", o.clahe.tiles_x, "CLAHE tile columns")->capture_default_str();
    enh->add_option("--tiles-y", o.clahe.tiles_y, "CLAHE tile rows")->capture_default_str();
    enh->add_option("--clip", o.clahe.clip_fraction, "CLAHE clip fraction of tile pixels")->capture_default_str();
    enh->add_option("--bins", o.clahe.bins, "CLAHE histogram bins")->capture_default_str();

    auto* pores = app.add_subcommand("pores", "Estimate filter pore size per image (CSV)");
    pores->add_option("--in", o.inputs, "Input images")->required();
    pores->add_option("--out", o.out, "Output CSV (stdout if omitted)");
    pores->add_option("--min-area", o.min_area, "Smallest pore component area, px^2")->capture_default_str();
    pores->add_option("--max-area", o.max_area, "Largest pore component area, px^2 (0: 10% of image)")->capture_default_str();

    auto* filt = app.add_subcommand("filter-labels", "Remove particles below factor x pore diagonal, drop empty images");
    filt->add_option("--index", o.index, "Dataset index CSV")->required();
    filt->add_option("--pores", o.pores, "Pore CSV from `pores`; estimated from the images when omitted");
    filt->add_option("--factor", o.factor, "Threshold as a fraction of the pore diagonal")->capture_default_str();
    filt->add_option("--mode", o.mode, "max_dim or min_dim")->check(CLI::IsMember({"max_dim", "min_dim"}))->capture_default_str();
    filt->add_option("--min-area", o.min_area, "Pore estimation lower area bound")->capture_default_str();
    filt->add_option("--max-area", o.max_area, "Pore estimation upper area bound")->capture_default_str();
    filt->add_option("--out", o.out, "Output directory (labels/ and index.csv)")->required();

    auto* split = app.add_subcommand("split", "Stratified train/val/test split");
    split->add_option("--index", o.index, "Dataset index CSV")->required();
    split->add_option("--seed", o.seed, "Shuffle seed")->capture_default_str();
    split->add_option("--test-frac", o.test_frac, "Test fraction")->capture_default_str();
    split->add_option("--val-frac", o.val_frac, "Validation fraction of the remaining training data")->capture_default_str();
    split->add_option("--out", o.out, "Output directory for train.txt, val.txt, test.txt")->required();

    auto* classify = app.add_subcommand("classify", "Shape metrics and particle/fiber class per annotation");
    classify->add_option("--labels", o.labels, "Label file")->required();
    classify->add_option("--image", o.image, "Image giving the frame size");
    classify->add_option("--width", o.width, "Frame width when no image is given")->capture_default_str();
    classify->add_option("--height", o.height, "Frame height when no image is given")->capture_default_str();
    classify->add_option("--ratio", o.ratio, "Elongation threshold for fibers")->capture_default_str();
    classify->add_option("--out", o.out, "Output CSV (stdout if omitted)");

    auto* eval = app.add_subcommand("evaluate", "Score predictions against ground truth");
    eval->add_option("--gt", o.gt_dir, "Ground-truth label directory")->required();
    eval->add_option("--pred", o.pred_dir, "Prediction label directory")->required();
    eval->add_option("--images", o.images_dir, "Image directory supplying frame sizes");
    eval->add_option("--width", o.width, "Frame width when no image directory is given")->capture_default_str();
    eval->add_option("--height", o.height, "Frame height when no image directory is given")->capture_default_str();
    eval->add_option("--model", o.model, "Model name for the report row")->capture_default_str();
    eval->add_option("--iou", o.iou, "mask or box")->check(CLI::IsMember({"mask", "box"}))->capture_default_str();
    eval->add_option("--out", o.out, "Report CSV (stdout if omitted)");
    eval->add_option("--per-image", o.per_image, "Per-image diagnostics CSV");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic SEM filter dataset with ground truth");
    auto& s = o.synth;
    synth->add_option("--out", o.out, "Output directory")->required();
    synth->add_option("--images", o.n_images, "Number of images")->capture_default_str();
    synth->add_option("--seed", o.seed, "Base seed; image i uses seed + i")->capture_default_str();
    synth->add_option("--side", s.image_side, "Image side")->capture_default_str();
    synth->add_option("--pitch", s.pitch, "Pore pitch")->capture_default_str();
    synth->add_option("--pore-side", s.pore_side, "Pore side")->capture_default_str();
    synth->add_option("--skew", s.skew_deg, "Grid rotation in degrees")->capture_default_str();
    synth->add_option("--particles", s.n_particles, "Instances per image")->capture_default_str();
    synth->add_option("--fiber-fraction", s.fiber_fraction, "Fraction of instances that are fibers")->capture_default_str();
    synth->add_option("--diameter-min", s.particle_diameter.lo)->capture_default_str();
    synth->add_option("--diameter-max", s.particle_diameter.hi)->capture_default_str();
    synth->add_option("--fiber-length-min", s.fiber_length.lo)->capture_default_str();
    synth->add_option("--fiber-length-max", s.fiber_length.hi)->capture_default_str();
    synth->add_option("--fiber-thickness-min", s.fiber_thickness.lo)->capture_default_str();
    synth->add_option("--fiber-thickness-max", s.fiber_thickness.hi)->capture_default_str();
    synth->add_option("--fiber-max-turn", s.fiber_max_turn_deg, "Max polyline joint turn, degrees")->capture_default_str();
    synth->add_option("--gradient", s.illumination_gradient, "Illumination ramp peak-to-peak")->capture_default_str();
    synth->add_option("--noise", s.noise_sigma, "Gaussian noise sigma")->capture_default_str();
    synth->add_option("--background", s.background_level)->capture_default_str();
    synth->add_option("--pore-level", s.pore_level)->capture_default_str();

    auto* report = app.add_subcommand("report", "Format evaluation CSV as a rounded table");
    report->add_option("--in", o.inputs, "Report CSV from `evaluate`")->required()->expected(1);
    report->add_option("--format", o.format, "csv or table")->check(CLI::IsMember({"csv", "table"}))->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (crop->parsed()) return cmd_crop(o, err);
        if (enh->parsed()) return cmd_enhance(o, err);
        if (pores->parsed()) return cmd_pores(o, out, err);
        if (filt->parsed()) return cmd_filter_labels(o, err);
        if (split->parsed()) return cmd_split(o, err);
        if (classify->parsed()) return cmd_classify(o, out);
        if (eval->parsed()) return cmd_evaluate(o, out, err);
        if (synth->parsed()) return cmd_synth(o, err);
        if (report->parsed()) return cmd_report(o, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace semmp::cli
