#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kinspec/experiments.hpp"

namespace kinspec {

namespace {

const std::set<std::string> kExperiments = {"assumptions", "spectral-scan", "coefficients",
                                            "projector-expansion", "kato", "decay",
                                            "dispersion", "nsf", "limit-sweep"};

struct Reader {
    std::string name;

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        const auto m = n.Mark();
        if (m.is_null()) throw Error("Config", name + ": " + msg);
        throw Error("Config", name + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) + ": " + msg);
    }

    void only_keys(const YAML::Node& n, const std::string& where, const std::set<std::string>& allowed) const {
        if (!n.IsMap()) fail(n, where + " must be a mapping");
        for (auto it = n.begin(); it != n.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (!allowed.count(key)) fail(it->first, "unknown key '" + key + "' in " + where);
        }
    }

    template <class T>
    T scalar(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, what + " must be a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "cannot read " + what + " from '" + n.Scalar() + "'");
        }
    }

    template <class T>
    void opt(const YAML::Node& parent, const char* key, T& out, const std::string& where) const {
        if (parent[key]) out = scalar<T>(parent[key], where + "." + key);
    }

    std::vector<double> list(const YAML::Node& n, const std::string& what) const {
        if (!n.IsSequence()) fail(n, what + " must be a list");
        std::vector<double> out;
        for (const auto& e : n) out.push_back(scalar<double>(e, what + " entry"));
        return out;
    }
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& name) {
    Reader r{name};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw Error("Config", name + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                                  ": " + e.msg);
    }
    if (!root || root.IsNull()) throw Error("Config", name + ": empty configuration");
    r.only_keys(root, "top level",
                {"experiment", "seed", "model", "discretization", "eps", "time", "data", "spectral", "output"});

    ExperimentConfig c;
    c.source = text;
    if (!root["experiment"]) r.fail(root, "missing required key 'experiment'");
    c.experiment = r.scalar<std::string>(root["experiment"], "experiment");
    if (!kExperiments.count(c.experiment)) r.fail(root["experiment"], "unknown experiment '" + c.experiment + "'");
    r.opt(root, "seed", c.seed, "top level");

    if (auto m = root["model"]) {
        r.only_keys(m, "model", {"type", "nu", "gamma"});
        r.opt(m, "type", c.model.type, "model");
        r.opt(m, "nu", c.model.nu, "model");
        r.opt(m, "gamma", c.model.gamma, "model");
        if (c.model.type != "bgk" && c.model.type != "variable-frequency")
            r.fail(m["type"], "model.type must be bgk or variable-frequency");
        if (!(c.model.nu > 0)) r.fail(m, "model.nu must be positive");
    }
    if (auto d = root["discretization"]) {
        r.only_keys(d, "discretization", {"d", "N", "lattice", "box", "s"});
        r.opt(d, "d", c.d, "discretization");
        r.opt(d, "N", c.N, "discretization");
        r.opt(d, "lattice", c.lattice, "discretization");
        r.opt(d, "box", c.box, "discretization");
        r.opt(d, "s", c.s, "discretization");
        if (c.d != 2 && c.d != 3) r.fail(d, "discretization.d must be 2 or 3");
        if (c.N < 4) r.fail(d, "discretization.N must be at least 4");
        if (c.lattice < 4) r.fail(d, "discretization.lattice must be at least 4");
        if (!(c.box > 0)) r.fail(d, "discretization.box must be positive");
    }
    if (auto e = root["eps"]) {
        c.eps = r.list(e, "eps");
        for (double x : c.eps)
            if (!(x > 0)) r.fail(e, "eps entries must be positive");
    }
    if (auto t = root["time"]) {
        r.only_keys(t, "time", {"T", "dt", "grid", "sample_every"});
        r.opt(t, "T", c.T, "time");
        r.opt(t, "dt", c.dt, "time");
        r.opt(t, "sample_every", c.sample_every, "time");
        if (t["grid"]) c.t_grid = r.list(t["grid"], "time.grid");
        if (!(c.T > 0) || !(c.dt > 0) || c.dt > c.T) r.fail(t, "time needs 0 < dt <= T");
        if (!(c.sample_every >= c.dt)) r.fail(t, "time.sample_every must be at least dt");
    }
    if (auto d = root["data"]) {
        r.only_keys(d, "data", {"kind", "amplitude", "acoustic", "modes"});
        r.opt(d, "kind", c.data, "data");
        r.opt(d, "amplitude", c.amplitude, "data");
        r.opt(d, "acoustic", c.acoustic, "data");
        r.opt(d, "modes", c.modes, "data");
        if (c.data != "well-prepared" && c.data != "ill-prepared")
            r.fail(d["kind"], "data.kind must be well-prepared or ill-prepared");
        if (c.modes < 1) r.fail(d, "data.modes must be at least 1");
    }
    if (auto s = root["spectral"]) {
        r.only_keys(s, "spectral", {"radii", "window", "alpha0"});
        if (s["radii"]) c.radii = r.list(s["radii"], "spectral.radii");
        r.opt(s, "window", c.window, "spectral");
        r.opt(s, "alpha0", c.alpha0, "spectral");
    }
    if (auto o = root["output"]) {
        r.only_keys(o, "output", {"dir", "plots"});
        r.opt(o, "dir", c.output, "output");
        r.opt(o, "plots", c.plots, "output");
    }

    if (c.experiment == "limit-sweep" || c.experiment == "decay") {
        if (!root["eps"]) r.fail(root, "experiment '" + c.experiment + "' requires an 'eps' list");
        const size_t need = c.experiment == "limit-sweep" ? 4 : 2;
        if (c.eps.size() < need)
            r.fail(root["eps"], "experiment '" + c.experiment + "' needs at least " + std::to_string(need) + " eps values");
    }
    if (c.experiment == "dispersion" && !c.t_grid.empty() && c.t_grid.size() < 4)
        r.fail(root["time"]["grid"], "dispersion needs at least 4 times");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("Config", path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace kinspec
