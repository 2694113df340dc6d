#include "skewlearn/model_io.hpp"

#include <fstream>

namespace skewlearn {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "skewlearn-model-v1";

ordered_json matrix_to_json(const Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        ordered_json row = ordered_json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, std::size_t expect_cols) {
    Matrix m;
    m.rows = j.size();
    m.cols = m.rows > 0 ? j.at(0).size() : expect_cols;
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : j) {
        if (row.size() != m.cols) throw ConfigError("model: ragged matrix in JSON");
        for (const auto& v : row) m.data.push_back(v.get<double>());
    }
    return m;
}

ordered_json tree_to_json(const Tree& tree) {
    ordered_json nodes = ordered_json::array();
    for (const TreeNode& n : tree.nodes) {
        nodes.push_back(ordered_json::array({n.feature, n.threshold, n.left, n.right, n.value}));
    }
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree tree;
    for (const auto& e : j) {
        TreeNode n;
        n.feature = e.at(0).get<int>();
        n.threshold = e.at(1).get<double>();
        n.left = e.at(2).get<int>();
        n.right = e.at(3).get<int>();
        n.value = e.at(4).get<std::vector<double>>();
        tree.nodes.push_back(std::move(n));
    }
    return tree;
}

} // namespace

ordered_json params_to_json(const ParamMap& params) {
    ordered_json out = ordered_json::object();
    for (const auto& [key, value] : params) {
        if (const auto* i = std::get_if<std::int64_t>(&value)) out[key] = *i;
        else if (const auto* d = std::get_if<double>(&value)) out[key] = *d;
        else out[key] = std::get<std::string>(value);
    }
    return out;
}

ParamMap params_from_json(const json& j) {
    ParamMap out;
    for (const auto& [key, value] : j.items()) {
        if (value.is_number_integer() || value.is_number_unsigned()) {
            out[key] = value.get<std::int64_t>();
        } else if (value.is_number_float()) {
            out[key] = value.get<double>();
        } else if (value.is_string()) {
            out[key] = value.get<std::string>();
        } else {
            throw ConfigError("parameter '" + key + "' must be a number or string");
        }
    }
    return out;
}

ordered_json model_to_json(const TrainedModel& model) {
    ordered_json j;
    j["format"] = kFormat;
    j["family"] = to_string(model.family);
    j["feature_count"] = model.feature_count;
    j["class_count"] = model.class_count;
    ordered_json state;
    if (const auto* m = std::get_if<LogregModel>(&model.state)) {
        state["weights"] = matrix_to_json(m->weights);
        state["intercepts"] = m->intercepts;
        state["iterations"] = m->iterations;
        state["final_grad_norm"] = m->final_grad_norm;
    } else if (const auto* m = std::get_if<ForestModel>(&model.state)) {
        ordered_json trees = ordered_json::array();
        for (const Tree& t : m->trees) trees.push_back(tree_to_json(t));
        state["trees"] = std::move(trees);
        state["importance"] = m->importance;
    } else if (const auto* m = std::get_if<GbtModel>(&model.state)) {
        ordered_json rounds = ordered_json::array();
        for (const auto& round : m->rounds) {
            ordered_json per_class = ordered_json::array();
            for (const Tree& t : round) per_class.push_back(tree_to_json(t));
            rounds.push_back(std::move(per_class));
        }
        state["rounds"] = std::move(rounds);
        state["learning_rate"] = m->learning_rate;
        state["xgb_mode"] = m->xgb_mode;
        state["importance"] = m->importance;
        state["train_loss"] = m->train_loss;
    } else if (const auto* m = std::get_if<MlpBaggingModel>(&model.state)) {
        state["hidden_units"] = m->hidden_units;
        ordered_json members = ordered_json::array();
        for (const MlpNet& net : m->members) {
            ordered_json e;
            e["w1"] = matrix_to_json(net.w1);
            e["b1"] = net.b1;
            e["w2"] = matrix_to_json(net.w2);
            e["b2"] = net.b2;
            members.push_back(std::move(e));
        }
        state["members"] = std::move(members);
    } else if (const auto* m = std::get_if<SvmOvrModel>(&model.state)) {
        state["gamma"] = m->gamma;
        ordered_json machines = ordered_json::array();
        for (const SvmBinaryModel& bin : m->machines) {
            ordered_json e;
            e["support_vectors"] = matrix_to_json(bin.support_vectors);
            e["coef"] = bin.coef;
            e["bias"] = bin.bias;
            machines.push_back(std::move(e));
        }
        state["machines"] = std::move(machines);
    }
    j["state"] = std::move(state);
    return j;
}

TrainedModel model_from_json(const json& j) {
    if (!j.contains("format") || j.at("format").get<std::string>() != kFormat) {
        throw ConfigError("model: unrecognized format");
    }
    TrainedModel model;
    model.family = family_from_string(j.at("family").get<std::string>());
    model.feature_count = j.at("feature_count").get<int>();
    model.class_count = j.at("class_count").get<int>();
    const json& state = j.at("state");
    const std::size_t d = static_cast<std::size_t>(model.feature_count);
    switch (model.family) {
    case Family::logreg: {
        LogregModel m;
        m.weights = matrix_from_json(state.at("weights"), d);
        m.intercepts = state.at("intercepts").get<std::vector<double>>();
        m.iterations = state.value("iterations", 0);
        m.final_grad_norm = state.value("final_grad_norm", 0.0);
        model.state = std::move(m);
        break;
    }
    case Family::random_forest: {
        ForestModel m;
        for (const auto& t : state.at("trees")) m.trees.push_back(tree_from_json(t));
        m.importance = state.at("importance").get<std::vector<double>>();
        model.state = std::move(m);
        break;
    }
    case Family::gbt:
    case Family::gbt_xgb_mode: {
        GbtModel m;
        for (const auto& round : state.at("rounds")) {
            std::vector<Tree> per_class;
            for (const auto& t : round) per_class.push_back(tree_from_json(t));
            m.rounds.push_back(std::move(per_class));
        }
        m.learning_rate = state.at("learning_rate").get<double>();
        m.xgb_mode = state.at("xgb_mode").get<bool>();
        m.importance = state.at("importance").get<std::vector<double>>();
        m.train_loss = state.at("train_loss").get<std::vector<double>>();
        model.state = std::move(m);
        break;
    }
    case Family::mlp_bagging: {
        MlpBaggingModel m;
        m.hidden_units = state.at("hidden_units").get<int>();
        for (const auto& e : state.at("members")) {
            MlpNet net;
            net.w1 = matrix_from_json(e.at("w1"), d);
            net.b1 = e.at("b1").get<std::vector<double>>();
            net.w2 = matrix_from_json(e.at("w2"), static_cast<std::size_t>(m.hidden_units));
            net.b2 = e.at("b2").get<std::vector<double>>();
            m.members.push_back(std::move(net));
        }
        model.state = std::move(m);
        break;
    }
    case Family::svm_rbf: {
        SvmOvrModel m;
        m.gamma = state.at("gamma").get<double>();
        for (const auto& e : state.at("machines")) {
            SvmBinaryModel bin;
            bin.support_vectors = matrix_from_json(e.at("support_vectors"), d);
            bin.coef = e.at("coef").get<std::vector<double>>();
            bin.bias = e.at("bias").get<double>();
            m.machines.push_back(std::move(bin));
        }
        model.state = std::move(m);
        break;
    }
    }
    return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << model_to_json(model).dump(2) << '\n';
    if (!out) throw DataError("write to '" + path + "' failed");
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return model_from_json(j);
}

} // namespace skewlearn
