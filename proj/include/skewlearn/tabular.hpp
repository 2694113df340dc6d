#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skewlearn/common.hpp"

namespace skewlearn {

enum class ColumnKind {
    numeric,
    categorical,
    ordinal_integer,
};

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

struct ColumnMeta {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;

    bool operator==(const ColumnMeta&) const = default;
};

/// Labeled tabular dataset with per-cell missingness.
///
/// Feature cells live in `values`; a set bit in `missing` marks the cell as
/// absent (its value slot is then meaningless). Categorical columns carry
/// their raw string tokens in `tokens` until an encoder replaces them with
/// integer codes; every other column is numeric-valued from ingestion on.
/// Labels are dense 0-based ids; `label_names` keeps the original tokens for
/// reporting and CSV round trips.
struct Dataset {
    std::vector<ColumnMeta> columns;
    Matrix values;                                 // n_rows x n_cols
    std::vector<std::uint8_t> missing;             // n_rows x n_cols mask
    std::vector<std::vector<std::string>> tokens;  // per column; empty unless categorical
    std::vector<int> labels;                       // class ids in 0..class_count-1
    int class_count = 0;
    std::vector<std::string> label_names;          // id -> original label token
    std::string label_column = "label";
    std::string name = "dataset";

    std::size_t n_rows() const { return values.rows; }
    std::size_t n_cols() const { return values.cols; }

    bool is_missing(std::size_t r, std::size_t c) const { return missing[r * n_cols() + c] != 0; }
    void set_missing(std::size_t r, std::size_t c, bool m) { missing[r * n_cols() + c] = m ? 1 : 0; }

    std::size_t missing_count() const;
    std::vector<std::size_t> class_counts() const;
    std::vector<std::size_t> rows_of_class(int c) const;

    /// True when every cell is present and no categorical column still holds
    /// raw tokens, i.e. the matrix is ready for distance math and learners.
    bool is_complete_numeric() const;

    /// Throws DataError when shape, labels or masks are inconsistent.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Row subset in the given index order; labels/class metadata preserved.
Dataset subset_rows(const Dataset& ds, const std::vector<std::size_t>& rows);

/// Appends a fully-specified numeric row (no missing cells).
void append_row(Dataset& ds, std::span<const double> features, int label);

struct CsvOptions {
    std::vector<std::string> missing_tokens = {"", "NA"};
};

/// Reads an RFC-4180-style CSV with a mandatory header. `schema` lists every
/// CSV column in file order including the label column named by
/// `label_column`; label values must parse as non-negative integers and are
/// remapped to dense 0-based ids in ascending original order.
Dataset load_csv(const std::string& path, const std::vector<ColumnMeta>& schema,
                 const std::string& label_column, const CsvOptions& options = {});

/// Writes the dataset back to CSV. Missing cells become empty fields; labels
/// are written with their original tokens, so load_csv(save_csv(ds))
/// round-trips exactly, missingness mask included.
void save_csv(const Dataset& ds, const std::string& path);

/// Stratified fold assignment: per-class counts across folds differ by at
/// most one.
struct FoldPlan {
    int k = 0;
    std::vector<int> assignments; // length n_rows, values in 0..k-1
    std::uint64_t seed = 0;

    void validate(std::size_t n_rows) const;
};

/// Per-class test counts are round-half-up(test_fraction * class size),
/// clamped to keep at least one row on each side, then the total is fixed up
/// on the largest class. Deterministic in seed.
std::pair<Dataset, Dataset> stratified_holdout(const Dataset& ds, double test_fraction,
                                               std::uint64_t seed);

FoldPlan make_folds(const Dataset& ds, int k, std::uint64_t seed);

} // namespace skewlearn
