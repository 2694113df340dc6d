#include "skewlearn/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace skewlearn {

std::string to_string(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::ordinal_integer: return "ordinal-integer";
    }
    return "numeric";
}

ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::numeric;
    if (s == "categorical") return ColumnKind::categorical;
    if (s == "ordinal-integer" || s == "ordinal_integer") return ColumnKind::ordinal_integer;
    throw ConfigError("unknown column kind '" + s + "'");
}

std::size_t Dataset::missing_count() const {
    std::size_t n = 0;
    for (auto m : missing) n += m != 0;
    return n;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
    for (int y : labels) counts[static_cast<std::size_t>(y)]++;
    return counts;
}

std::vector<std::size_t> Dataset::rows_of_class(int c) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == c) rows.push_back(i);
    }
    return rows;
}

bool Dataset::is_complete_numeric() const {
    if (missing_count() != 0) return false;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (!tokens[j].empty()) return false;
    }
    return true;
}

void Dataset::validate() const {
    const std::size_t n = n_rows();
    const std::size_t d = n_cols();
    if (columns.size() != d) throw DataError("dataset: column metadata does not match matrix width");
    if (labels.size() != n) throw DataError("dataset: label vector length does not match row count");
    if (missing.size() != n * d) throw DataError("dataset: missing mask shape mismatch");
    if (tokens.size() != d) throw DataError("dataset: token storage shape mismatch");
    if (class_count < 2) throw DataError("dataset: needs at least two classes");
    std::set<std::string> names;
    for (const auto& col : columns) {
        if (!names.insert(col.name).second) {
            throw DataError("dataset: duplicate column name '" + col.name + "'");
        }
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
    for (int y : labels) {
        if (y < 0 || y >= class_count) throw DataError("dataset: label id out of range");
        counts[static_cast<std::size_t>(y)]++;
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            throw DataError("dataset: class " + std::to_string(c) + " has no rows");
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        if (!tokens[j].empty() && tokens[j].size() != n) {
            throw DataError("dataset: token column length mismatch");
        }
    }
}

Dataset subset_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.columns = ds.columns;
    out.class_count = ds.class_count;
    out.label_names = ds.label_names;
    out.label_column = ds.label_column;
    out.name = ds.name;
    const std::size_t d = ds.n_cols();
    out.values = Matrix(rows.size(), d);
    out.missing.assign(rows.size() * d, 0);
    out.tokens.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (!ds.tokens[j].empty()) out.tokens[j].resize(rows.size());
    }
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t src = rows[i];
        for (std::size_t j = 0; j < d; ++j) {
            out.values.at(i, j) = ds.values.at(src, j);
            out.missing[i * d + j] = ds.missing[src * d + j];
            if (!ds.tokens[j].empty()) out.tokens[j][i] = ds.tokens[j][src];
        }
        out.labels[i] = ds.labels[src];
    }
    return out;
}

void append_row(Dataset& ds, std::span<const double> features, int label) {
    const std::size_t d = ds.n_cols();
    if (features.size() != d) throw DataError("append_row: feature width mismatch");
    ds.values.data.insert(ds.values.data.end(), features.begin(), features.end());
    ds.values.rows += 1;
    ds.missing.insert(ds.missing.end(), d, 0);
    for (std::size_t j = 0; j < d; ++j) {
        if (!ds.tokens[j].empty()) ds.tokens[j].emplace_back();
    }
    ds.labels.push_back(label);
}

namespace {

// One CSV record, honoring quotes; returns false on EOF with nothing read.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool started = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        started = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // tolerate CRLF
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (!started) return false;
    fields.push_back(std::move(field));
    return true;
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote_field(const std::string& s) {
    if (!needs_quoting(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

} // namespace

Dataset load_csv(const std::string& path, const std::vector<ColumnMeta>& schema,
                 const std::string& label_column, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");

    std::vector<std::string> fields;
    if (!read_record(in, fields)) throw DataError("'" + path + "': empty file");
    if (fields.size() != schema.size()) {
        throw DataError("'" + path + "': header has " + std::to_string(fields.size()) +
                        " columns, schema declares " + std::to_string(schema.size()));
    }
    std::size_t label_idx = schema.size();
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (fields[j] != schema[j].name) {
            throw DataError("'" + path + "': header column " + std::to_string(j + 1) + " is '" +
                            fields[j] + "', schema expects '" + schema[j].name + "'");
        }
        if (schema[j].name == label_column) label_idx = j;
    }
    if (label_idx == schema.size()) {
        throw DataError("'" + path + "': label column '" + label_column + "' not in schema");
    }

    auto is_missing_token = [&](const std::string& s) {
        return std::find(options.missing_tokens.begin(), options.missing_tokens.end(), s) !=
               options.missing_tokens.end();
    };

    Dataset ds;
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (j != label_idx) ds.columns.push_back(schema[j]);
    }
    const std::size_t d = ds.columns.size();
    ds.tokens.resize(d);
    ds.label_column = label_column;
    ds.name = path;

    std::vector<std::int64_t> raw_labels;
    std::vector<double> vals;
    std::vector<std::uint8_t> mask;
    std::vector<std::vector<std::string>> toks(d);
    std::size_t row_number = 1; // header is row 1

    while (read_record(in, fields)) {
        ++row_number;
        if (fields.size() == 1 && fields[0].empty()) continue; // trailing blank line
        if (fields.size() != schema.size()) {
            throw DataError("'" + path + "': row " + std::to_string(row_number) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(schema.size()));
        }
        std::size_t out_j = 0;
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const std::string& cell = fields[j];
            if (j == label_idx) {
                std::int64_t y = 0;
                const char* first = cell.data();
                const char* last = cell.data() + cell.size();
                auto [ptr, ec] = std::from_chars(first, last, y);
                if (ec != std::errc() || ptr != last || y < 0) {
                    throw DataError("'" + path + "': row " + std::to_string(row_number) +
                                    ", column '" + schema[j].name + "': label token '" + cell +
                                    "' is not a non-negative integer");
                }
                raw_labels.push_back(y);
                continue;
            }
            const bool is_cat = schema[j].kind == ColumnKind::categorical;
            if (is_missing_token(cell)) {
                vals.push_back(0.0);
                mask.push_back(1);
                if (is_cat) toks[out_j].emplace_back();
            } else if (is_cat) {
                vals.push_back(0.0);
                mask.push_back(0);
                toks[out_j].push_back(cell);
            } else {
                double v = 0;
                if (!parse_double(cell, v)) {
                    throw DataError("'" + path + "': row " + std::to_string(row_number) +
                                    ", column '" + schema[j].name + "': cannot parse '" + cell +
                                    "' as a number");
                }
                vals.push_back(v);
                mask.push_back(0);
            }
            ++out_j;
        }
    }

    const std::size_t n = raw_labels.size();
    if (n == 0) throw DataError("'" + path + "': no data rows");
    ds.values.rows = n;
    ds.values.cols = d;
    ds.values.data = std::move(vals);
    ds.missing = std::move(mask);
    for (std::size_t j = 0; j < d; ++j) {
        if (ds.columns[j].kind == ColumnKind::categorical) ds.tokens[j] = std::move(toks[j]);
    }

    // Remap original integer labels to dense 0-based ids, ascending.
    std::set<std::int64_t> distinct(raw_labels.begin(), raw_labels.end());
    std::map<std::int64_t, int> to_id;
    for (std::int64_t v : distinct) {
        const int id = static_cast<int>(to_id.size());
        to_id[v] = id;
        ds.label_names.push_back(std::to_string(v));
    }
    ds.class_count = static_cast<int>(to_id.size());
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) ds.labels[i] = to_id[raw_labels[i]];

    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    const std::size_t d = ds.n_cols();
    for (std::size_t j = 0; j < d; ++j) {
        out << quote_field(ds.columns[j].name) << ',';
    }
    out << quote_field(ds.label_column) << '\n';
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!ds.is_missing(i, j)) {
                if (ds.columns[j].kind == ColumnKind::categorical && !ds.tokens[j].empty()) {
                    out << quote_field(ds.tokens[j][i]);
                } else {
                    out << format_double(ds.values.at(i, j));
                }
            }
            out << ',';
        }
        const int y = ds.labels[i];
        out << quote_field(ds.label_names.at(static_cast<std::size_t>(y))) << '\n';
    }
    if (!out) throw DataError("write to '" + path + "' failed");
}

void FoldPlan::validate(std::size_t n_rows) const {
    if (k < 2) throw DataError("fold plan: k must be at least 2");
    if (assignments.size() != n_rows) throw DataError("fold plan: assignment length mismatch");
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int f : assignments) {
        if (f < 0 || f >= k) throw DataError("fold plan: fold id out of range");
        counts[static_cast<std::size_t>(f)]++;
    }
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] == 0) throw DataError("fold plan: fold " + std::to_string(f) + " is empty");
    }
}

namespace {

std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

} // namespace

std::pair<Dataset, Dataset> stratified_holdout(const Dataset& ds, double test_fraction,
                                               std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in (0, 1)");
    }
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < 2) {
            throw DataError("class " + std::to_string(c) +
                            " has fewer than 2 rows; cannot place one row in each side");
        }
    }

    std::vector<std::size_t> test_counts(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
        std::size_t t = round_half_up(test_fraction * static_cast<double>(counts[c]));
        t = std::clamp<std::size_t>(t, 1, counts[c] - 1);
        test_counts[c] = t;
    }
    // Fix the total on the largest class (lowest id on ties).
    const std::size_t target_total = std::clamp<std::size_t>(
        round_half_up(test_fraction * static_cast<double>(ds.n_rows())), counts.size(),
        ds.n_rows() - counts.size());
    std::size_t largest = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[largest]) largest = c;
    }
    std::size_t total = 0;
    for (auto t : test_counts) total += t;
    const std::int64_t diff = static_cast<std::int64_t>(target_total) - static_cast<std::int64_t>(total);
    const std::int64_t adjusted = static_cast<std::int64_t>(test_counts[largest]) + diff;
    test_counts[largest] = static_cast<std::size_t>(std::clamp<std::int64_t>(
        adjusted, 1, static_cast<std::int64_t>(counts[largest]) - 1));

    Rng rng(derive_seed(seed, {seed_tag::holdout}));
    std::vector<std::size_t> test_rows;
    std::vector<std::size_t> train_rows;
    for (int c = 0; c < ds.class_count; ++c) {
        auto rows = ds.rows_of_class(c);
        rng.shuffle(rows);
        const std::size_t t = test_counts[static_cast<std::size_t>(c)];
        test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(t));
        train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(t), rows.end());
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {subset_rows(ds, train_rows), subset_rows(ds, test_rows)};
}

FoldPlan make_folds(const Dataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count must be at least 2");
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < static_cast<std::size_t>(k)) {
            throw DataError("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                            " rows, fewer than k=" + std::to_string(k));
        }
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(ds.n_rows(), 0);
    Rng rng(derive_seed(seed, {seed_tag::folds}));
    // Round-robin within each class keeps per-class fold counts within one of
    // each other; the rotating offset balances the fold totals.
    std::size_t offset = 0;
    for (int c = 0; c < ds.class_count; ++c) {
        auto rows = ds.rows_of_class(c);
        rng.shuffle(rows);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            plan.assignments[rows[i]] = static_cast<int>((offset + i) % static_cast<std::size_t>(k));
        }
        offset = (offset + rows.size()) % static_cast<std::size_t>(k);
    }
    plan.validate(ds.n_rows());
    return plan;
}

} // namespace skewlearn
