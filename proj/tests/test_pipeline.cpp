#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "skewlearn/pipeline.hpp"
#include "test_util.hpp"

using namespace skewlearn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path tmp_root() {
    const auto dir = fs::temp_directory_path() / "skewlearn_pipeline_tests";
    fs::create_directories(dir);
    return dir;
}

json mini_config_json() {
    return json::parse(R"({
      "dataset": {
        "name": "mini",
        "synth": {"class_counts": [60, 30, 15], "dims": 6, "separation": 2.0,
                  "ordinal_fraction": 0.3, "missing_rate": 0.05}
      },
      "holdout": {"test_fraction": 0.25},
      "impute": {"max_iters": 8, "tol": 0.001, "ridge_lambda": 0.001, "rounding": "ceiling"},
      "resample": {"strategy": "random_over", "k_neighbors": 3},
      "cv": {"folds": 3},
      "selection_metric": "weighted_f1",
      "learners": [
        {"family": "logreg", "grid": {"c": [1.0], "max_iterations": [120]}},
        {"family": "random_forest", "grid": {"n_estimators": [15]}}
      ],
      "seed": 7,
      "threads": 1
    })");
}

// Strip every line carrying wall-clock timing, keeping all other bytes.
std::string mask_timing(std::string text) {
    std::string out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(start, end - start);
        if (line.find("\"train_time_seconds\"") == std::string::npos) {
            out += line;
            out += '\n';
        }
        start = end + 1;
    }
    return out;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config validation rejects unknown keys") {
    json cfg = mini_config_json();
    cfg["surprise"] = 1;
    CHECK_THROWS_WITH_AS(parse_pipeline_config(cfg), doctest::Contains("surprise"), ConfigError);

    json cfg2 = mini_config_json();
    cfg2["resample"]["oops"] = true;
    CHECK_THROWS_AS(parse_pipeline_config(cfg2), ConfigError);

    json cfg3 = mini_config_json();
    cfg3["learners"][0]["grid"]["bogus_key"] = {1, 2};
    CHECK_THROWS_AS(parse_pipeline_config(cfg3), ConfigError);

    json cfg4 = mini_config_json();
    cfg4["dataset"].erase("synth");
    CHECK_THROWS_AS(parse_pipeline_config(cfg4), ConfigError);
}

TEST_CASE("the full pipeline produces consistent reports and a comparison table") {
    const PipelineConfig config = parse_pipeline_config(mini_config_json());
    const PipelineResult result = run_pipeline(config);
    REQUIRE(result.outcomes.size() == 2);
    CHECK(result.leakage_audit_passed);
    CHECK(result.n_train + result.n_test == 105);
    CHECK(result.class_counts_test.size() == 3);

    // refit resampling balanced the training classes
    for (const auto& outcome : result.outcomes) {
        const auto& counts = outcome.class_counts_train_resampled;
        for (auto c : counts) CHECK(c == counts[0]);
    }

    // the comparison table re-states per-report fields without recomputation
    const auto comparison = comparison_to_json(result);
    for (const auto& row : comparison.at("rows")) {
        const std::string family = row.at("family").get<std::string>();
        for (const auto& outcome : result.outcomes) {
            if (to_string(outcome.family) != family) continue;
            CHECK(row.at("weighted_f1").get<double>() == outcome.report.prf.weighted_f1);
            CHECK(row.at("weighted_auc").get<double>() == outcome.report.roc.weighted_auc);
            CHECK(row.at("accuracy").get<double>() == outcome.report.prf.accuracy);
        }
    }

    // report invariants
    for (const auto& outcome : result.outcomes) {
        const auto report = report_to_json(result, outcome);
        CHECK(report.at("dataset").at("n_test").get<std::size_t>() == result.n_test);
        CHECK(report.at("cv").at("folds").get<int>() == 3);
        std::int64_t total = 0;
        for (const auto& row : report.at("test").at("confusion")) {
            for (const auto& v : row) total += v.get<std::int64_t>();
        }
        CHECK(total == static_cast<std::int64_t>(result.n_test));
        CHECK(report.contains("train_time_seconds"));
        CHECK(report.contains("seeds"));
        CHECK(report.at("test").contains("per_class"));
        CHECK(report.at("test").contains("macro"));
        CHECK(report.at("test").contains("weighted"));
    }
}

TEST_CASE("artifacts land on disk with a complete manifest") {
    const auto out_dir = (tmp_root() / "artifacts").string();
    fs::remove_all(out_dir);
    const PipelineConfig config = parse_pipeline_config(mini_config_json());
    const auto manifest = run_pipeline_to_dir(config, out_dir);
    CHECK(manifest.at("status") == "complete");
    CHECK(manifest.at("leakage_audit") == "passed");
    for (const auto& artifact : manifest.at("artifacts")) {
        CHECK(fs::exists(fs::path(out_dir) / artifact.get<std::string>()));
    }
    CHECK(fs::exists(fs::path(out_dir) / "report_logreg.json"));
    CHECK(fs::exists(fs::path(out_dir) / "report_random_forest.json"));
    CHECK(fs::exists(fs::path(out_dir) / "comparison.json"));
    CHECK(fs::exists(fs::path(out_dir) / "manifest.json"));
}

TEST_CASE("identical config and seed reproduce the reports byte for byte") {
    const auto dir_a = (tmp_root() / "det_a").string();
    const auto dir_b = (tmp_root() / "det_b").string();
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    const PipelineConfig config = parse_pipeline_config(mini_config_json());
    run_pipeline_to_dir(config, dir_a);
    run_pipeline_to_dir(config, dir_b);
    for (const char* name : {"report_logreg.json", "report_random_forest.json"}) {
        const std::string a = test_util::read_file((fs::path(dir_a) / name).string());
        const std::string b = test_util::read_file((fs::path(dir_b) / name).string());
        CHECK(!a.empty());
        // wall-clock timing is the one physically non-deterministic field
        CHECK(mask_timing(a) == mask_timing(b));
    }
    const std::string ca = test_util::read_file((fs::path(dir_a) / "comparison.json").string());
    const std::string cb = test_util::read_file((fs::path(dir_b) / "comparison.json").string());
    CHECK(mask_timing(ca) == mask_timing(cb));
}

TEST_CASE("a strategy ablation pair runs to completion and reports minority recall") {
    json base = mini_config_json();
    base["dataset"]["synth"]["class_counts"] = {80, 40, 12};
    base["learners"] = json::array(
        {{{"family", "random_forest"}, {"grid", {{"n_estimators", {20}}}}}});
    double recalls[2];
    int idx = 0;
    for (const char* strategy : {"none", "random_over"}) {
        base["resample"]["strategy"] = strategy;
        const PipelineResult result = run_pipeline(parse_pipeline_config(base));
        REQUIRE(result.outcomes.size() == 1);
        const auto& per_class = result.outcomes[0].report.prf.per_class;
        recalls[idx++] = per_class.back().recall; // smallest class is the last id
    }
    CHECK(recalls[0] >= 0.0);
    CHECK(recalls[1] >= 0.0);
}

TEST_CASE("emit_plots writes curve endpoints, consistent counts and valid SVG") {
    const auto out_dir = (tmp_root() / "plots_case").string();
    fs::remove_all(out_dir);
    const PipelineConfig config = parse_pipeline_config(mini_config_json());
    const PipelineResult result = run_pipeline(config);
    const auto report = report_to_json(result, result.outcomes[1]);
    const auto files = emit_plots(report, out_dir, "random_forest");

    int roc_files = 0;
    for (const auto& f : files) {
        if (f.find("_roc_class") == std::string::npos) continue;
        ++roc_files;
        const std::string text = test_util::read_file((fs::path(out_dir) / f).string());
        REQUIRE(!text.empty());
        // first data row is 0,0; last is 1,1
        const auto first_nl = text.find('\n');
        const auto second_nl = text.find('\n', first_nl + 1);
        CHECK(text.substr(first_nl + 1, second_nl - first_nl - 1) == "0,0,inf");
        const auto last_nl = text.rfind('\n', text.size() - 2);
        const std::string last_row = text.substr(last_nl + 1, text.size() - last_nl - 2);
        CHECK(last_row.substr(0, 4) == "1,1,");
    }
    CHECK(roc_files == 3);

    const std::string confusion_csv =
        test_util::read_file((fs::path(out_dir) / "random_forest_confusion.csv").string());
    // row sums equal the per-class supports in the report
    std::istringstream lines(confusion_csv);
    std::string line;
    std::getline(lines, line); // header
    std::size_t class_idx = 0;
    while (std::getline(lines, line)) {
        std::int64_t sum = 0;
        std::size_t pos = line.find(',');
        while (pos != std::string::npos) {
            const auto next = line.find(',', pos + 1);
            sum += std::stoll(line.substr(pos + 1, next - pos - 1));
            pos = next;
        }
        const auto support = report.at("test")
                                 .at("per_class")
                                 .at(class_idx)
                                 .at("support")
                                 .get<std::int64_t>();
        CHECK(sum == support);
        ++class_idx;
    }

    for (const char* svg_name : {"random_forest_roc.svg", "random_forest_confusion.svg"}) {
        const std::string svg = test_util::read_file((fs::path(out_dir) / svg_name).string());
        REQUIRE(!svg.empty());
        CHECK(test_util::xml_well_formed(svg));
    }
}

TEST_CASE("stage failures carry the stage tag") {
    json cfg = mini_config_json();
    cfg["dataset"].erase("synth");
    cfg["dataset"]["csv"] = {{"path", "/nonexistent/file.csv"},
                             {"schema", json::array({{{"name", "a"}, {"kind", "numeric"}},
                                                     {{"name", "label"}, {"kind", "numeric"}}})},
                             {"label_column", "label"}};
    const PipelineConfig config = parse_pipeline_config(cfg);
    CHECK_THROWS_WITH_AS(run_pipeline(config), doctest::Contains("stage load"), DataError);
}

TEST_CASE("failed runs still write a manifest with status failed") {
    const auto out_dir = (tmp_root() / "failed_run").string();
    fs::remove_all(out_dir);
    json cfg = mini_config_json();
    cfg["dataset"]["synth"]["class_counts"] = {10, 3}; // too small for 3 folds after holdout
    const PipelineConfig config = parse_pipeline_config(cfg);
    CHECK_THROWS_AS(run_pipeline_to_dir(config, out_dir), Error);
    const json manifest = json::parse(test_util::read_file((fs::path(out_dir) / "manifest.json").string()));
    CHECK(manifest.at("status") == "failed");
    CHECK(manifest.contains("error"));
}

} // TEST_SUITE
