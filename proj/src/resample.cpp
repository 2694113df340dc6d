#include "skewlearn/resample.hpp"

#include <algorithm>
#include <cmath>

namespace skewlearn {

std::string to_string(ResampleStrategy s) {
    switch (s) {
    case ResampleStrategy::none: return "none";
    case ResampleStrategy::random_over: return "random_over";
    case ResampleStrategy::smote: return "smote";
    }
    return "none";
}

ResampleStrategy resample_strategy_from_string(const std::string& s) {
    if (s == "none") return ResampleStrategy::none;
    if (s == "random_over") return ResampleStrategy::random_over;
    if (s == "smote") return ResampleStrategy::smote;
    throw ConfigError("unknown resample strategy '" + s + "'");
}

ResampledSet resample(const Dataset& train, const ResampleSpec& spec) {
    switch (spec.strategy) {
    case ResampleStrategy::none: {
        ResampledSet out;
        out.dataset = train;
        out.provenance.assign(train.n_rows(), RowProvenance{});
        return out;
    }
    case ResampleStrategy::random_over: return random_oversample(train, spec);
    case ResampleStrategy::smote: return smote(train, spec);
    }
    throw ConfigError("unknown resample strategy");
}

ResampledSet random_oversample(const Dataset& train, const ResampleSpec& spec) {
    train.validate();
    const auto counts = train.class_counts();
    const std::size_t majority = *std::max_element(counts.begin(), counts.end());

    ResampledSet out;
    out.dataset = train;
    out.provenance.assign(train.n_rows(), RowProvenance{});
    const std::size_t d = train.n_cols();
    std::vector<double> row(d);
    for (int c = 0; c < train.class_count; ++c) {
        const auto rows = train.rows_of_class(c);
        const std::size_t need = majority - rows.size();
        if (need == 0) continue;
        Rng rng(derive_seed(spec.seed, {seed_tag::resample, static_cast<std::uint64_t>(c)}));
        for (std::size_t t = 0; t < need; ++t) {
            const std::size_t src = rows[rng.uniform_index(rows.size())];
            for (std::size_t j = 0; j < d; ++j) row[j] = train.values.at(src, j);
            append_row(out.dataset, row, c);
            const std::size_t new_row = out.dataset.n_rows() - 1;
            for (std::size_t j = 0; j < d; ++j) {
                out.dataset.missing[new_row * d + j] = train.missing[src * d + j];
                if (!train.tokens[j].empty()) out.dataset.tokens[j][new_row] = train.tokens[j][src];
            }
            RowProvenance prov;
            prov.kind = RowProvenance::Kind::duplicate;
            prov.source_i = src;
            out.provenance.push_back(prov);
        }
    }
    return out;
}

ResampledSet smote(const Dataset& train, const ResampleSpec& spec) {
    train.validate();
    if (spec.k_neighbors < 1) throw ConfigError("smote: k_neighbors must be at least 1");
    if (!train.is_complete_numeric()) {
        throw DataError("smote: requires a complete numeric dataset (impute and encode first)");
    }
    for (double v : train.values.data) {
        if (!std::isfinite(v)) throw DataError("smote: non-finite feature value");
    }
    const auto counts = train.class_counts();
    const std::size_t majority = *std::max_element(counts.begin(), counts.end());
    const std::size_t k = static_cast<std::size_t>(spec.k_neighbors);
    const std::size_t d = train.n_cols();

    ResampledSet out;
    out.dataset = train;
    out.provenance.assign(train.n_rows(), RowProvenance{});
    std::vector<double> row(d);
    for (int c = 0; c < train.class_count; ++c) {
        const auto rows = train.rows_of_class(c);
        const std::size_t need = majority - rows.size();
        if (need == 0) continue;
        if (rows.size() <= k) {
            throw DataError("smote: class " + std::to_string(c) + " has " +
                            std::to_string(rows.size()) + " rows, not more than k_neighbors=" +
                            std::to_string(k));
        }
        // k nearest same-class neighbors per class row, ties to lower index.
        const std::size_t m = rows.size();
        std::vector<std::vector<std::size_t>> neighbors(m);
        std::vector<std::pair<double, std::size_t>> dist(m - 1);
        for (std::size_t a = 0; a < m; ++a) {
            std::size_t t = 0;
            for (std::size_t b = 0; b < m; ++b) {
                if (b == a) continue;
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = train.values.at(rows[a], j) - train.values.at(rows[b], j);
                    s += diff * diff;
                }
                dist[t++] = {s, rows[b]};
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                              dist.end());
            neighbors[a].resize(k);
            for (std::size_t q = 0; q < k; ++q) neighbors[a][q] = dist[q].second;
        }

        Rng rng(derive_seed(spec.seed, {seed_tag::resample, static_cast<std::uint64_t>(c)}));
        for (std::size_t t = 0; t < need; ++t) {
            const std::size_t a = rng.uniform_index(m);
            const std::size_t i = rows[a];
            const std::size_t j_row = neighbors[a][rng.uniform_index(k)];
            const double delta = rng.uniform01();
            for (std::size_t j = 0; j < d; ++j) {
                const double xi = train.values.at(i, j);
                row[j] = xi + delta * (train.values.at(j_row, j) - xi);
            }
            append_row(out.dataset, row, c);
            RowProvenance prov;
            prov.kind = RowProvenance::Kind::synthetic;
            prov.source_i = i;
            prov.source_j = j_row;
            prov.delta = delta;
            out.provenance.push_back(prov);
        }
    }
    return out;
}

} // namespace skewlearn
