#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semmp/annotations.hpp"
#include "semmp/image.hpp"
#include "semmp/porometry.hpp"

namespace semmp::dataset {

enum class FilterType { Si1um, Si10um, CrateStraight, CrateSkewed };

inline constexpr FilterType kAllFilterTypes[] = {FilterType::Si1um, FilterType::Si10um, FilterType::CrateStraight,
                                                  FilterType::CrateSkewed};

std::string_view to_string(FilterType type);
FilterType parse_filter_type(std::string_view text);

struct DatasetEntry {
    std::string image_id;
    FilterType filter_type = FilterType::Si1um;
    std::filesystem::path image_path;
    std::filesystem::path label_path;
    std::vector<annotations::Annotation> annotations;
    std::optional<porometry::PoreEstimate> pore;
};

/// Rows of the index CSV `image_id,filter_type,image_path,label_path`.
/// Relative paths are interpreted against `base_dir` (the index file's directory).
struct DatasetIndex {
    std::filesystem::path base_dir;
    std::vector<DatasetEntry> entries;

    std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : base_dir / p; }
};

DatasetIndex read_index(const std::filesystem::path& csv_path);
std::string format_index(const std::vector<DatasetEntry>& entries);
void write_index(const std::vector<DatasetEntry>& entries, const std::filesystem::path& csv_path);

/// Reads each entry's ground-truth label file into `annotations`.
void load_annotations(DatasetIndex& index);

enum class SizeFilterMode {
    MaxDim,  ///< keep when the longer rectangle side reaches the threshold
    MinDim,  ///< keep when the shorter side reaches it
};

struct SizeFilterRule {
    double factor = 0.6;
    SizeFilterMode mode = SizeFilterMode::MaxDim;
};

struct SizeFilterOutcome {
    std::vector<annotations::Annotation> kept;
    std::size_t removed_count = 0;
    std::size_t degenerate_count = 0;  ///< dropped because shape metrics were undefined
};

/// Removes annotations smaller than rule.factor * pore_diagonal. Order of the
/// kept annotations is preserved.
SizeFilterOutcome filter_small_particles(const std::vector<annotations::Annotation>& annots, double pore_diagonal,
                                         SizeFilterRule rule, Size image_dims);

/// Entries with at least one annotation, in their original order.
std::vector<DatasetEntry> prune_empty_images(std::vector<DatasetEntry> index);

/// For every entry, its own pore diagonal if estimated, else the median over
/// its filter type, else nullopt.
std::vector<std::optional<double>> resolve_pore_diagonals(const std::vector<DatasetEntry>& entries);

struct SplitConfig {
    double test_frac = 0.2;
    double val_frac_of_train = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitResult {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
    std::vector<std::string> warnings;  ///< one per stratum with fewer than 3 entries
};

/// Largest-remainder apportionment of round(frac * sum(counts)) across the strata.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& counts, double frac);

/**
 * Stratified by filter type. Strata are shuffled with one seeded Lcg64 in
 * FilterType order, the first test_k entries of each go to test, the next
 * val_k to validation. Output lists keep index order.
 */
SplitResult stratified_split(const std::vector<DatasetEntry>& index, const SplitConfig& cfg);

}  // namespace semmp::dataset
