#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "skewlearn/pipeline.hpp"

namespace skewlearn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

std::string fmt(double v) { return format_double(v); }

std::string roc_svg(const json& report) {
    constexpr double kW = 640, kH = 480, kL = 60, kR = 20, kT = 40, kB = 50;
    const double pw = kW - kL - kR, ph = kH - kT - kB;
    auto px = [&](double x) { return kL + x * pw; };
    auto py = [&](double y) { return kT + (1.0 - y) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
        << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
        << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"15\">One-vs-rest ROC ("
        << xml_escape(report.value("family", std::string("model"))) << ")</text>\n";
    // axes + quarter grid
    for (int i = 0; i <= 4; ++i) {
        const double t = i / 4.0;
        svg << "<line x1=\"" << px(t) << "\" y1=\"" << py(0) << "\" x2=\"" << px(t) << "\" y2=\""
            << py(1) << "\" stroke=\"#dddddd\"/>\n"
            << "<line x1=\"" << px(0) << "\" y1=\"" << py(t) << "\" x2=\"" << px(1) << "\" y2=\""
            << py(t) << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << px(t) << "\" y=\"" << py(0) + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << t
            << "</text>\n"
            << "<text x=\"" << px(0) - 8 << "\" y=\"" << py(t) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << t
            << "</text>\n";
    }
    svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
        << py(0) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0) << "\" y2=\""
        << py(1) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
        << py(1) << "\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n"
        << "<text x=\"" << px(0.5) << "\" y=\"" << kH - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << "false positive rate</text>\n"
        << "<text x=\"16\" y=\"" << py(0.5)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
        << " transform=\"rotate(-90 16 " << py(0.5) << ")\">true positive rate</text>\n";

    const json& curves = report.at("test").at("roc_curves");
    const json& per_class = report.at("test").at("per_class");
    std::size_t color = 0;
    double legend_y = kT + 12;
    for (const auto& curve : curves) {
        if (!curve.value("defined", true)) continue;
        const char* stroke = kPalette[color % 8];
        std::ostringstream pts;
        for (const auto& p : curve.at("points")) {
            pts << px(p.at(0).get<double>()) << "," << py(p.at(1).get<double>()) << " ";
        }
        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        const int cls = curve.at("class").get<int>();
        const json& auc = per_class.at(static_cast<std::size_t>(cls)).at("auc");
        svg << "<line x1=\"" << px(1) - 150 << "\" y1=\"" << legend_y << "\" x2=\""
            << px(1) - 130 << "\" y2=\"" << legend_y << "\" stroke=\"" << stroke
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << px(1) - 124 << "\" y=\"" << legend_y + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">class " << cls << " (AUC "
            << (auc.is_null() ? std::string("n/a") : fmt(std::round(auc.get<double>() * 1000) / 1000))
            << ")</text>\n";
        legend_y += 16;
        ++color;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string confusion_svg(const json& report) {
    const json& m = report.at("test").at("confusion");
    const std::size_t c_count = m.size();
    constexpr double kCell = 56, kL = 90, kT = 70;
    const double kW = kL + kCell * static_cast<double>(c_count) + 30;
    const double kH = kT + kCell * static_cast<double>(c_count) + 40;

    std::int64_t max_count = 1;
    for (const auto& row : m) {
        for (const auto& v : row) max_count = std::max(max_count, v.get<std::int64_t>());
    }

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
        << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
        << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"15\">Confusion matrix ("
        << xml_escape(report.value("family", std::string("model"))) << ")</text>\n"
        << "<text x=\"" << kL + kCell * static_cast<double>(c_count) / 2 << "\" y=\"" << kT - 28
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">predicted</text>\n";
    for (std::size_t t = 0; t < c_count; ++t) {
        for (std::size_t p = 0; p < c_count; ++p) {
            const std::int64_t v = m.at(t).at(p).get<std::int64_t>();
            const double intensity = static_cast<double>(v) / static_cast<double>(max_count);
            const int blue = static_cast<int>(255 - 175 * intensity);
            const int other = static_cast<int>(255 - 225 * intensity);
            const double x = kL + kCell * static_cast<double>(p);
            const double y = kT + kCell * static_cast<double>(t);
            svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\""
                << kCell << "\" fill=\"rgb(" << other << "," << other << "," << blue
                << ")\" stroke=\"#888888\"/>\n"
                << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 4
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
                << (intensity > 0.6 ? "white" : "black") << "\">" << v << "</text>\n";
        }
        svg << "<text x=\"" << kL - 8 << "\" y=\"" << kT + kCell * (static_cast<double>(t) + 0.5) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">true " << t
            << "</text>\n"
            << "<text x=\"" << kL + kCell * (static_cast<double>(t) + 0.5) << "\" y=\"" << kT - 8
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << t
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace

std::vector<std::string> emit_plots(const json& report, const std::string& out_dir,
                                    const std::string& prefix) {
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    if (!report.contains("test")) throw ConfigError("plots: report has no 'test' section");

    for (const auto& curve : report.at("test").at("roc_curves")) {
        if (!curve.value("defined", true)) continue;
        const int cls = curve.at("class").get<int>();
        std::ostringstream csv;
        csv << "fpr,tpr,threshold\n";
        for (const auto& p : curve.at("points")) {
            csv << fmt(p.at(0).get<double>()) << ',' << fmt(p.at(1).get<double>()) << ',';
            if (p.at(2).is_null()) csv << "inf";
            else csv << fmt(p.at(2).get<double>());
            csv << '\n';
        }
        const std::string name = prefix + "_roc_class" + std::to_string(cls) + ".csv";
        write_file(fs::path(out_dir) / name, csv.str());
        written.push_back(name);
    }

    {
        const json& m = report.at("test").at("confusion");
        std::ostringstream csv;
        csv << "true_class";
        for (std::size_t p = 0; p < m.size(); ++p) csv << ",pred_" << p;
        csv << '\n';
        for (std::size_t t = 0; t < m.size(); ++t) {
            csv << t;
            for (const auto& v : m.at(t)) csv << ',' << v.get<std::int64_t>();
            csv << '\n';
        }
        const std::string name = prefix + "_confusion.csv";
        write_file(fs::path(out_dir) / name, csv.str());
        written.push_back(name);
    }

    if (report.contains("feature_importances") && !report.at("feature_importances").is_null()) {
        const json& imp = report.at("feature_importances");
        const json names = report.value("feature_names", json::array());
        std::ostringstream csv;
        csv << "feature,importance\n";
        for (std::size_t j = 0; j < imp.size(); ++j) {
            if (j < names.size()) csv << names.at(j).get<std::string>();
            else csv << "feature_" << j;
            csv << ',' << fmt(imp.at(j).get<double>()) << '\n';
        }
        const std::string name = prefix + "_importance.csv";
        write_file(fs::path(out_dir) / name, csv.str());
        written.push_back(name);
    }

    write_file(fs::path(out_dir) / (prefix + "_roc.svg"), roc_svg(report));
    written.push_back(prefix + "_roc.svg");
    write_file(fs::path(out_dir) / (prefix + "_confusion.svg"), confusion_svg(report));
    written.push_back(prefix + "_confusion.svg");
    return written;
}

} // namespace skewlearn
