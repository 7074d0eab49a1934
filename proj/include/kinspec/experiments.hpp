#pragma once

#include <json.hpp>
#include <map>
#include <string>

#include "kinspec/kinetic.hpp"

namespace kinspec {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSummarySchema = 1;

struct ModelSpec {
    std::string type = "bgk";  // bgk | variable-frequency
    double nu = 1.0, gamma = 1.0;
};

struct ExperimentConfig {
    std::string experiment;
    ModelSpec model;
    int d = 3, N = 6;
    int lattice = 16;
    double box = 2.0 * M_PI;
    double s = 2.0;
    std::vector<double> eps;
    double T = 0.5, dt = 1e-3;
    std::vector<double> t_grid;
    double sample_every = 0.01;
    std::string data = "well-prepared";  // or ill-prepared
    double amplitude = 0.3;
    double acoustic = 0.01;               // compressible part for ill-prepared data
    int modes = 2;                         // max |m_j| carried by the initial data
    std::vector<double> radii;
    double window = 0.5;
    double alpha0 = 0.5;
    std::string output = "out";
    unsigned long seed = 1;
    bool plots = true;
    std::string source;                    // raw text, hashed into reports
};

// Parses and validates; throws Error("Config", "file:line:col: ...").
ExperimentConfig parse_config(const std::string& text, const std::string& name = "config");
ExperimentConfig load_config(const std::string& path);
std::string config_hash(const std::string& text);  // FNV-1a 64, hex

struct RateRegression {
    std::vector<double> x, y;
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
// Ordinary least squares of log y on log x. Throws InsufficientSamples below 4.
RateRegression fit_rate(const std::vector<double>& x, const std::vector<double>& y);

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};
struct Plot {
    std::string file, title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::vector<PlotSeries> series;
};
std::string render_svg(const Plot& p);

struct ExperimentResult {
    std::string experiment;
    std::string statement;  // the claim this run checks
    std::vector<Check> checks;
    nlohmann::json data = nlohmann::json::object();
    std::map<std::string, std::string> csv;  // file name -> contents
    std::vector<Plot> plots;
    bool passed() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes summary.json, the CSV files and (optionally) SVG plots.
void write_result(const ExperimentResult& res, const ExperimentConfig& cfg, const std::string& dir, bool plots);

// Building blocks shared with the acceptance suite.
LinearCollisionOperator make_model(const HermiteBasis& basis, const ModelSpec& m);
KineticField initial_data(const Lattice& lat, const HermiteBasis& basis, const ExperimentConfig& cfg);

struct LimitRun {
    double eps = 0.0;
    Decomposition dec;
    double sup_gap = 0.0;     // sup over t >= 0.1 of ||f - f_ns||
    double sup_err = 0.0;     // sup over t >= 0.1 of ||f_err||
    double sup_disp = 0.0;    // sup over all t of ||f_disp||
    double frequency = 0.0;   // measured acoustic frequency on the probe mode
    double frequency_expected = 0.0;
};
struct LimitSweep {
    std::vector<LimitRun> runs;
    RateRegression gap_rate, err_rate;
    double norm_ini = 0.0;
};
LimitSweep limit_sweep(const ExperimentConfig& cfg);

}  // namespace kinspec
