#include "semmp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "semmp/error.hpp"
#include "semmp/rng.hpp"

namespace semmp::dataset {

namespace fs = std::filesystem;

std::string_view to_string(FilterType type) {
    switch (type) {
        case FilterType::Si1um: return "Si1um";
        case FilterType::Si10um: return "Si10um";
        case FilterType::CrateStraight: return "CrateStraight";
        case FilterType::CrateSkewed: return "CrateSkewed";
    }
    return "?";
}

FilterType parse_filter_type(std::string_view text) {
    for (auto t : kAllFilterTypes) {
        if (to_string(t) == text) return t;
    }
    throw MalformedInput(fmt::format("unknown filter type '{}'", text));
}

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

constexpr std::string_view kIndexHeader = "image_id,filter_type,image_path,label_path";

}  // namespace

DatasetIndex read_index(const fs::path& csv_path) {
    DatasetIndex index;
    index.base_dir = csv_path.parent_path();
    std::istringstream in(read_text(csv_path));
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != kIndexHeader) throw MalformedInput(fmt::format("index header must be '{}'", kIndexHeader));
            continue;
        }
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 4) throw MalformedInput(fmt::format("index line {}: expected 4 columns", line_no));
        if (cells[0].empty()) throw MalformedInput(fmt::format("index line {}: empty image_id", line_no));
        if (!seen.insert(cells[0]).second) {
            throw MalformedInput(fmt::format("index line {}: duplicate image_id '{}'", line_no, cells[0]));
        }
        DatasetEntry e;
        e.image_id = cells[0];
        e.filter_type = parse_filter_type(cells[1]);
        e.image_path = cells[2];
        e.label_path = cells[3];
        index.entries.push_back(std::move(e));
    }
    if (line_no == 0) throw MalformedInput("index file is empty");
    return index;
}

std::string format_index(const std::vector<DatasetEntry>& entries) {
    std::string out(kIndexHeader);
    out += '\n';
    for (const auto& e : entries) {
        out += fmt::format("{},{},{},{}\n", e.image_id, to_string(e.filter_type), e.image_path.generic_string(),
                           e.label_path.generic_string());
    }
    return out;
}

void write_index(const std::vector<DatasetEntry>& entries, const fs::path& csv_path) {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open " + csv_path.string() + " for writing");
    out << format_index(entries);
    if (!out) throw IoFailure("write failed on " + csv_path.string());
}

void load_annotations(DatasetIndex& index) {
    for (auto& e : index.entries) {
        e.annotations = annotations::parse_label_file(read_text(index.resolve(e.label_path)), false);
    }
}

SizeFilterOutcome filter_small_particles(const std::vector<annotations::Annotation>& annots, double pore_diagonal,
                                         SizeFilterRule rule, Size image_dims) {
    if (!(pore_diagonal > 0.0)) throw InvalidConfig(fmt::format("pore diagonal must be positive, got {}", pore_diagonal));
    if (!(rule.factor > 0.0)) throw InvalidConfig(fmt::format("size filter factor must be positive, got {}", rule.factor));

    const double threshold = rule.factor * pore_diagonal;
    SizeFilterOutcome out;
    for (const auto& a : annots) {
        annotations::ShapeMetrics m;
        try {
            m = annotations::shape_metrics(a.polygon, image_dims.width, image_dims.height);
        } catch (const DegeneratePolygon&) {
            ++out.degenerate_count;
            continue;
        }
        const double dim = rule.mode == SizeFilterMode::MaxDim ? m.length_px : m.width_px;
        if (dim >= threshold) out.kept.push_back(a);
        else ++out.removed_count;
    }
    return out;
}

std::vector<DatasetEntry> prune_empty_images(std::vector<DatasetEntry> index) {
    std::erase_if(index, [](const DatasetEntry& e) { return e.annotations.empty(); });
    return index;
}

std::vector<std::optional<double>> resolve_pore_diagonals(const std::vector<DatasetEntry>& entries) {
    std::map<FilterType, std::vector<double>> per_type;
    for (const auto& e : entries) {
        if (e.pore) per_type[e.filter_type].push_back(e.pore->diagonal_px);
    }
    std::map<FilterType, double> medians;
    for (auto& [type, values] : per_type) {
        std::sort(values.begin(), values.end());
        const std::size_t mid = values.size() / 2;
        medians[type] = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    }
    std::vector<std::optional<double>> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        if (e.pore) out.emplace_back(e.pore->diagonal_px);
        else if (auto it = medians.find(e.filter_type); it != medians.end()) out.emplace_back(it->second);
        else out.emplace_back(std::nullopt);
    }
    return out;
}

void SplitConfig::validate() const {
    if (!(test_frac > 0.0 && test_frac < 1.0)) throw InvalidConfig(fmt::format("test fraction {} not in (0, 1)", test_frac));
    if (!(val_frac_of_train > 0.0 && val_frac_of_train < 1.0)) {
        throw InvalidConfig(fmt::format("validation fraction {} not in (0, 1)", val_frac_of_train));
    }
}

std::vector<std::size_t> apportion(const std::vector<std::size_t>& counts, double frac) {
    std::size_t total_n = 0;
    for (auto c : counts) total_n += c;
    const auto target = static_cast<std::size_t>(std::floor(frac * static_cast<double>(total_n) + 0.5));

    std::vector<std::size_t> share(counts.size());
    std::vector<double> remainder(counts.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double quota = frac * static_cast<double>(counts[i]);
        share[i] = std::min(counts[i], static_cast<std::size_t>(std::floor(quota + 1e-9)));
        remainder[i] = quota - static_cast<double>(share[i]);
        assigned += share[i];
    }
    std::vector<std::size_t> order(counts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
        if (share[order[k]] < counts[order[k]]) {
            ++share[order[k]];
            ++assigned;
        }
    }
    return share;
}

SplitResult stratified_split(const std::vector<DatasetEntry>& index, const SplitConfig& cfg) {
    cfg.validate();
    SplitResult result;

    std::vector<std::vector<std::size_t>> strata;
    for (auto type : kAllFilterTypes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < index.size(); ++i) {
            if (index[i].filter_type == type) members.push_back(i);
        }
        if (members.empty()) continue;
        if (members.size() < 3) {
            result.warnings.push_back(fmt::format("EmptyStratum: {} has {} entries, all assigned to train",
                                                  to_string(type), members.size()));
            continue;
        }
        strata.push_back(std::move(members));
    }

    std::vector<std::size_t> sizes;
    for (const auto& s : strata) sizes.push_back(s.size());
    const auto test_counts = apportion(sizes, cfg.test_frac);
    std::vector<std::size_t> rest(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) rest[i] = sizes[i] - test_counts[i];
    const auto val_counts = apportion(rest, cfg.val_frac_of_train);

    enum class Part { Train, Val, Test };
    std::vector<Part> part(index.size(), Part::Train);
    Lcg64 rng(cfg.seed);
    for (std::size_t s = 0; s < strata.size(); ++s) {
        auto& members = strata[s];
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (k < test_counts[s]) part[members[k]] = Part::Test;
            else if (k < test_counts[s] + val_counts[s]) part[members[k]] = Part::Val;
        }
    }
    for (std::size_t i = 0; i < index.size(); ++i) {
        auto& target = part[i] == Part::Test ? result.test : part[i] == Part::Val ? result.val : result.train;
        target.push_back(index[i].image_id);
    }
    return result;
}

}  // namespace semmp::dataset
