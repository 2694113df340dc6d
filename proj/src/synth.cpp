#include "skewlearn/synth.hpp"

#include <cmath>

namespace skewlearn {

void SynthSpec::validate() const {
    if (class_counts.size() < 2) throw ConfigError("synth: need at least two classes");
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        if (class_counts[c] == 0) {
            throw ConfigError("synth: class " + std::to_string(c) + " has zero count");
        }
    }
    if (dims == 0) throw ConfigError("synth: dims must be positive");
    if (separation < 0.0) throw ConfigError("synth: separation must be non-negative");
    if (ordinal_fraction < 0.0 || ordinal_fraction > 1.0) {
        throw ConfigError("synth: ordinal_fraction must lie in [0, 1]");
    }
    if (missing_rate < 0.0 || missing_rate >= 1.0) {
        throw ConfigError("synth: missing_rate must lie in [0, 1)");
    }
}

Dataset generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n_classes = spec.class_counts.size();
    const std::size_t d = spec.dims;

    // Class means: sequential orthogonal offsets, adjacent means at distance
    // `separation` along dimension (c-1) mod d.
    std::vector<std::vector<double>> means(n_classes, std::vector<double>(d, 0.0));
    for (std::size_t c = 1; c < n_classes; ++c) {
        means[c] = means[c - 1];
        means[c][(c - 1) % d] += spec.separation;
    }
    // Per-column grand mean of class means, used to center ordinal columns on
    // the middle of the 1-5 scale.
    std::vector<double> grand(d, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t j = 0; j < d; ++j) grand[j] += means[c][j];
    }
    for (std::size_t j = 0; j < d; ++j) grand[j] /= static_cast<double>(n_classes);

    const std::size_t n_ordinal = static_cast<std::size_t>(
        std::llround(spec.ordinal_fraction * static_cast<double>(d)));

    Dataset ds;
    ds.name = spec.name;
    ds.class_count = static_cast<int>(n_classes);
    for (std::size_t j = 0; j < d; ++j) {
        ColumnMeta col;
        col.name = (j < n_ordinal ? "item_" : "feat_") + std::to_string(j);
        col.kind = j < n_ordinal ? ColumnKind::ordinal_integer : ColumnKind::numeric;
        ds.columns.push_back(col);
    }
    std::size_t n = 0;
    for (auto c : spec.class_counts) n += c;
    ds.values = Matrix(n, d);
    ds.missing.assign(n * d, 0);
    ds.tokens.resize(d);
    ds.labels.reserve(n);
    for (std::size_t c = 0; c < n_classes; ++c) ds.label_names.push_back(std::to_string(c));

    Rng rng(derive_seed(spec.seed, {seed_tag::synth}));
    std::size_t r = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t i = 0; i < spec.class_counts[c]; ++i, ++r) {
            for (std::size_t j = 0; j < d; ++j) {
                const double x = means[c][j] + rng.normal();
                if (j < n_ordinal) {
                    const double centered = 3.0 + (x - grand[j]);
                    ds.values.at(r, j) = std::clamp<double>(std::llround(centered), 1.0, 5.0);
                } else {
                    ds.values.at(r, j) = x;
                }
            }
            ds.labels.push_back(static_cast<int>(c));
        }
    }
    if (spec.missing_rate > 0.0) {
        for (std::size_t i = 0; i < n * d; ++i) {
            if (rng.uniform01() < spec.missing_rate) ds.missing[i] = 1;
        }
        // A column must keep at least one observed value per the imputer's
        // contract; unmask the first cell of any fully-masked column.
        for (std::size_t j = 0; j < d; ++j) {
            bool any = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (!ds.is_missing(i, j)) { any = true; break; }
            }
            if (!any) ds.set_missing(0, j, false);
        }
    }
    ds.validate();
    return ds;
}

} // namespace skewlearn
