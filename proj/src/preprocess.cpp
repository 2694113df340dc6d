#include "skewlearn/preprocess.hpp"

#include <cmath>
#include <set>

namespace skewlearn {

EncoderModel fit_encoder(const Dataset& train, UnknownTokenPolicy policy) {
    EncoderModel model;
    model.policy = policy;
    for (std::size_t j = 0; j < train.n_cols(); ++j) {
        if (train.columns[j].kind != ColumnKind::categorical) continue;
        std::set<std::string> vocab;
        for (std::size_t i = 0; i < train.n_rows(); ++i) {
            vocab.insert(train.is_missing(i, j) ? std::string() : train.tokens[j][i]);
        }
        std::map<std::string, int> codes;
        for (const auto& tok : vocab) {
            const int code = static_cast<int>(codes.size());
            codes[tok] = code;
        }
        model.columns.push_back(j);
        model.codes.push_back(std::move(codes));
    }
    return model;
}

ScalerModel fit_scaler(const Dataset& train) {
    ScalerModel model;
    const std::size_t n = train.n_rows();
    for (std::size_t j = 0; j < train.n_cols(); ++j) {
        if (train.columns[j].kind == ColumnKind::categorical) continue;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (train.is_missing(i, j)) {
                throw DataError("scaler: column '" + train.columns[j].name +
                                "' has missing cells; impute first");
            }
            sum += train.values.at(i, j);
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = train.values.at(i, j) - mean;
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        model.columns.push_back(j);
        model.mean.push_back(mean);
        model.stddev.push_back(sd);
        model.constant.push_back(sd < 1e-12);
    }
    return model;
}

Dataset apply(const EncoderModel& encoder, const ScalerModel& scaler, const Dataset& ds) {
    Dataset out = ds;
    for (std::size_t k = 0; k < encoder.columns.size(); ++k) {
        const std::size_t j = encoder.columns[k];
        if (j >= ds.n_cols() || ds.columns[j].kind != ColumnKind::categorical) {
            throw DataError("encoder: column index " + std::to_string(j) +
                            " is not categorical in this dataset");
        }
        const auto& codes = encoder.codes[k];
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            const std::string tok = ds.is_missing(i, j) ? std::string() : ds.tokens[j][i];
            auto it = codes.find(tok);
            int code;
            if (it != codes.end()) {
                code = it->second;
            } else if (encoder.policy == UnknownTokenPolicy::reserve_code) {
                code = static_cast<int>(codes.size());
            } else {
                throw DataError("encoder: unknown token '" + tok + "' in column '" +
                                ds.columns[j].name + "'");
            }
            out.values.at(i, j) = static_cast<double>(code);
            out.set_missing(i, j, false);
        }
        out.tokens[j].clear();
    }
    for (std::size_t k = 0; k < scaler.columns.size(); ++k) {
        const std::size_t j = scaler.columns[k];
        if (j >= ds.n_cols() || ds.columns[j].kind == ColumnKind::categorical) {
            throw DataError("scaler: column index " + std::to_string(j) +
                            " is not numeric in this dataset");
        }
        const double mu = scaler.mean[k];
        const double sd = scaler.constant[k] ? 1.0 : scaler.stddev[k];
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            if (ds.is_missing(i, j)) {
                throw DataError("scaler: column '" + ds.columns[j].name +
                                "' has missing cells; impute first");
            }
            out.values.at(i, j) = (ds.values.at(i, j) - mu) / sd;
        }
    }
    return out;
}

} // namespace skewlearn
