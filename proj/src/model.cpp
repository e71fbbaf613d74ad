#include "eitsim/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace eitsim {

std::vector<double> ScanGrid::points() const {
    std::vector<double> p(static_cast<std::size_t>(n > 0 ? n : 0));
    const double h = step();
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = start + h * i;
    if (!p.empty()) p.back() = stop;
    return p;
}

SimConfig cesium_d2_preset() {
    SimConfig c;
    c.atom = AtomSpec{2.65, 2.65, 0.001};
    c.ensemble = EnsembleSpec{560.0, 0.5, 0.5};
    c.probe = FieldSpec{0.1, 0.0, std::nullopt};
    c.coupling = FieldSpec{90.0, 0.0, std::nullopt};
    c.grid = ScanGrid{-1500.0, 1500.0, 3001};
    c.od0 = 0.0;
    return c;
}

void apply_degeneracy_weights(EnsembleSpec& ensemble) {
    ensemble.p1_init = 7.0 / 16.0;
    ensemble.p2_init = 9.0 / 16.0;
}

std::vector<ValidationIssue> validate(const SimConfig& config) {
    std::vector<ValidationIssue> issues;
    auto bad = [&](const char* field, const std::string& msg) {
        issues.push_back({field, msg});
    };
    const AtomSpec& a = config.atom;
    if (!(a.gamma31 >= 0.0)) bad("gamma31", "must be >= 0");
    if (!(a.gamma32 >= 0.0)) bad("gamma32", "must be >= 0");
    if (!(a.gamma31 + a.gamma32 > 0.0)) bad("gamma31", "gamma31 + gamma32 must be > 0");
    if (!(a.gamma12 >= 0.0)) bad("gamma12", "must be >= 0");

    const EnsembleSpec& e = config.ensemble;
    if (!(e.doppler_fwhm > 0.0)) bad("doppler_fwhm", "must be > 0");
    if (!(e.p1_init >= 0.0)) bad("p1_init", "must be >= 0");
    if (!(e.p2_init >= 0.0)) bad("p2_init", "must be >= 0");
    if (std::abs(e.p1_init + e.p2_init - 1.0) > 1e-12)
        bad("p1_init", "p1_init + p2_init must equal 1 (|3> starts empty)");

    if (!(config.probe.rabi >= 0.0)) bad("probe_rabi", "must be >= 0");
    if (config.probe.rabi == 0.0)
        bad("probe_rabi", "probe response undefined at zero probe Rabi");
    if (config.probe.linewidth && !(*config.probe.linewidth >= 0.0))
        bad("probe_linewidth", "must be >= 0");
    if (!(config.coupling.rabi >= 0.0)) bad("coupling_rabi", "must be >= 0");
    if (config.coupling.linewidth && !(*config.coupling.linewidth >= 0.0))
        bad("coupling_linewidth", "must be >= 0");
    if (!std::isfinite(config.coupling.detuning)) bad("coupling_detuning", "must be finite");

    if (config.grid.n < 2) bad("grid_n", "need at least 2 points");
    if (!(config.grid.stop > config.grid.start)) bad("grid_stop", "must exceed grid_start");

    if (!(config.od0 >= 0.0)) bad("od0", "must be >= 0");
    return issues;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_number(const std::string& key, const std::string& text, int line) {
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    // std::from_chars does not accept a leading '+'
    if (b != e && *b == '+') ++b;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e) {
        throw std::runtime_error("config line " + std::to_string(line) + ": value for '" +
                                 key + "' is not a number: '" + text + "'");
    }
    return v;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

SimConfig parse_config(const std::string& text) {
    SimConfig c = cesium_d2_preset();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected 'key = value', got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        double v = parse_number(key, val, lineno);
        if (key == "gamma31") c.atom.gamma31 = v;
        else if (key == "gamma32") c.atom.gamma32 = v;
        else if (key == "gamma12") c.atom.gamma12 = v;
        else if (key == "doppler_fwhm") c.ensemble.doppler_fwhm = v;
        else if (key == "p1_init") c.ensemble.p1_init = v;
        else if (key == "p2_init") c.ensemble.p2_init = v;
        else if (key == "probe_rabi") c.probe.rabi = v;
        else if (key == "probe_linewidth") c.probe.linewidth = v;
        else if (key == "coupling_rabi") c.coupling.rabi = v;
        else if (key == "coupling_detuning") c.coupling.detuning = v;
        else if (key == "coupling_linewidth") c.coupling.linewidth = v;
        else if (key == "grid_start") c.grid.start = v;
        else if (key == "grid_stop") c.grid.stop = v;
        else if (key == "grid_n") c.grid.n = static_cast<int>(v);
        else if (key == "od0") c.od0 = v;
        else
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
    }
    return c;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const SimConfig& c) {
    std::ostringstream out;
    auto kv = [&](const char* k, double v) { out << k << " = " << format_double(v) << "\n"; };
    kv("gamma31", c.atom.gamma31);
    kv("gamma32", c.atom.gamma32);
    kv("gamma12", c.atom.gamma12);
    kv("doppler_fwhm", c.ensemble.doppler_fwhm);
    kv("p1_init", c.ensemble.p1_init);
    kv("p2_init", c.ensemble.p2_init);
    kv("probe_rabi", c.probe.rabi);
    if (c.probe.linewidth) kv("probe_linewidth", *c.probe.linewidth);
    kv("coupling_rabi", c.coupling.rabi);
    kv("coupling_detuning", c.coupling.detuning);
    if (c.coupling.linewidth) kv("coupling_linewidth", *c.coupling.linewidth);
    kv("grid_start", c.grid.start);
    kv("grid_stop", c.grid.stop);
    out << "grid_n = " << c.grid.n << "\n";
    kv("od0", c.od0);
    return out.str();
}

}
