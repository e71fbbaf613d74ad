#pragma once

#include <optional>
#include <string>
#include <vector>

// Parameter types shared by every other module.
//
// Unit convention: all frequencies, decay rates and detunings are ordinary
// frequencies in MHz, with the angular 2*pi factors absorbed uniformly.
// Numbers like 5.3, 560, 90 or 812 enter the equations literally.
// Detunings are laser frequency minus transition frequency (positive = blue).

namespace eitsim {

// Lambda system: two ground states |1>, |2> coupled to a shared excited
// state |3>.
struct AtomSpec {
    double gamma31 = 2.65;   // spontaneous decay rate |3> -> |1>
    double gamma32 = 2.65;   // spontaneous decay rate |3> -> |2>
    double gamma12 = 0.001;  // ground-state coherence decay rate

    double gamma_sum() const { return gamma31 + gamma32; }
};

// One laser field. The Rabi frequency follows the convention that the
// generalized dressed splitting is sqrt(detuning^2 + 4*rabi^2), i.e. the
// on-resonance doublet separation is 2*rabi.
struct FieldSpec {
    double rabi = 0.0;
    double detuning = 0.0;
    std::optional<double> linewidth;  // laser linewidth FWHM, if known
};

// Thermal vapor parameters.
struct EnsembleSpec {
    double doppler_fwhm = 560.0;  // full Doppler linewidth D
    double p1_init = 0.5;         // initial population of |1>
    double p2_init = 0.5;         // initial population of |2>
};

// Uniform probe-detuning grid, inclusive of both endpoints.
struct ScanGrid {
    double start = -1500.0;
    double stop = 1500.0;
    int n = 3001;

    double step() const { return (stop - start) / (n - 1); }
    std::vector<double> points() const;
};

// Everything needed to reproduce one simulation.
struct SimConfig {
    AtomSpec atom;
    EnsembleSpec ensemble;
    FieldSpec probe{0.1, 0.0, std::nullopt};
    FieldSpec coupling{90.0, 0.0, std::nullopt};
    ScanGrid grid;
    double od0 = 0.0;  // optical depth at unit normalized absorption
};

// Sampled absorption curve. `absorption` is the normalized coefficient
// (1 = resonant uncoupled two-level atom with all population in |1>);
// transmission() reuses the same container for T values.
struct Spectrum {
    std::vector<double> detunings;
    std::vector<double> absorption;
    SimConfig meta;
};

// Result of a Lorentzian line fit.
struct PeakFit {
    double center = 0.0;
    double fwhm = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double residual_norm = 0.0;  // RMS of (model - data)
};

// Cesium D2 defaults: Gamma31+Gamma32 = 5.3 (30 ns lifetime, equal
// branching), D = 560, coupling Rabi 90 on resonance, weak 0.1 probe.
SimConfig cesium_d2_preset();

// Optional thermal-degeneracy variant of the initial populations using the
// cesium F=3/F=4 sublevel counts 7/16 and 9/16.
void apply_degeneracy_weights(EnsembleSpec& ensemble);

struct ValidationIssue {
    std::string field;
    std::string message;
};

// Collects every violated invariant; empty result means the configuration
// is usable. Never throws.
std::vector<ValidationIssue> validate(const SimConfig& config);

// --- configuration files -------------------------------------------------
//
// Flat line-oriented `key = value` text. `#` begins a comment line and
// unknown keys are errors. Values are written with shortest round-trip
// formatting so that serialize/parse is bit-exact.

SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);
std::string serialize_config(const SimConfig& config);

// Shortest round-trip decimal formatting used for config files and CSV.
std::string format_double(double v);

}
