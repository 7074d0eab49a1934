#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kinspec/experiments.hpp"

namespace kinspec {

RateRegression fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("InvalidArgument", "x and y differ in length");
    if (x.size() < 4) throw Error("InsufficientSamples", "need at least 4 samples, have " + std::to_string(x.size()));
    RateRegression r;
    r.x = x;
    r.y = y;
    const int n = int(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw Error("InvalidArgument", "samples must be positive");
        double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    const double den = n * sxx - sx * sx;
    if (den <= 0) throw Error("InvalidArgument", "x samples are all equal");
    r.slope = (n * sxy - sx * sy) / den;
    r.intercept = (sy - r.slope * sx) / n;
    double ss_tot = 0, ss_res = 0, mean = sy / n;
    for (int i = 0; i < n; ++i) {
        double b = std::log(y[i]), f = r.intercept + r.slope * std::log(x[i]);
        ss_tot += (b - mean) * (b - mean);
        ss_res += (b - f) * (b - f);
    }
    r.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return r;
}

bool ExperimentResult::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

namespace {

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_svg(const Plot& p) {
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    auto tx = [&](double v) { return p.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return p.logy ? std::log10(v) : v; };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : p.series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if ((p.logx && !(s.x[i] > 0)) || (p.logy && !(s.y[i] > 0))) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (x0 > x1) x0 = 0, x1 = 1;
    if (y0 > y1) y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << p.title << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto label = [&](double v, bool log) { return log ? "1e" + fmt(v) : fmt(v); };
    for (int k = 0; k <= 4; ++k) {
        double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
        double X = L + (W - L - R) * k / 4, Y = H - B - (H - T - B) * k / 4;
        os << "<text x=\"" << X << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << label(fx, p.logx) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
           << label(fy, p.logy) << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">" << p.xlabel
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
       << H / 2 << ")\">" << p.ylabel << "</text>\n";
    for (size_t k = 0; k < p.series.size(); ++k) {
        const auto& s = p.series[k];
        const char* col = kColors[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if ((p.logx && !(s.x[i] > 0)) || (p.logy && !(s.y[i] > 0))) continue;
            os << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 + 15 * k << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
           << col << "\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_result(const ExperimentResult& res, const ExperimentConfig& cfg, const std::string& dir, bool plots) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json j;
    j["schema_version"] = kSummarySchema;
    j["library_version"] = kVersion;
    j["experiment"] = res.experiment;
    j["statement"] = res.statement;
    j["config_hash"] = config_hash(cfg.source);
    j["seed"] = cfg.seed;
    {
        std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        j["timestamp"] = buf;
    }
    j["status"] = res.passed() ? "pass" : "flagged";
    j["checks"] = nlohmann::json::array();
    for (const auto& c : res.checks)
        j["checks"].push_back({{"name", c.name},
                               {"passed", c.passed},
                               {"measured", std::isfinite(c.measured) ? nlohmann::json(c.measured) : nlohmann::json()},
                               {"tolerance", c.tolerance},
                               {"note", c.note}});
    j["data"] = res.data;
    j["files"] = nlohmann::json::array();
    for (const auto& [name, body] : res.csv) {
        std::ofstream(fs::path(dir) / name) << body;
        j["files"].push_back(name);
    }
    if (plots)
        for (const auto& p : res.plots) {
            std::ofstream(fs::path(dir) / p.file) << render_svg(p);
            j["files"].push_back(p.file);
        }
    std::ofstream(fs::path(dir) / "summary.json") << j.dump(2) << "\n";
}

}  // namespace kinspec
