#pragma once

#include <cstddef>

#include "eitsim/doppler.hpp"
#include "eitsim/model.hpp"

// Closed-form line physics (dressed states and the analytical linewidth law)
// plus the numerical pipeline: peak detection, Lorentzian fitting, laser
// linewidth convolution and the coupling-detuning sweep.

namespace eitsim {

// Widths of the two absorption peaks,
//   nu_pm = (gamma31 + gamma32 + 2 D)/4 * (1 -+ dc / sqrt(dc^2 + 4 wc^2)),
// so nu_plus + nu_minus = (gamma_sum + 2 D)/2 exactly.
struct LinewidthPair {
    double nu_plus = 0.0;
    double nu_minus = 0.0;
};

LinewidthPair analytic_linewidths(const AtomSpec& atom, const EnsembleSpec& ensemble,
                                  const FieldSpec& coupling);

// Dressed-state energies lambda_pm = (dc +- sqrt(dc^2 + 4 wc^2))/2.
// lambda_plus >= lambda_minus and lambda_plus * lambda_minus = -wc^2.
struct DressedPair {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
};

DressedPair dressed_eigenvalues(const FieldSpec& coupling);

struct Peak {
    std::size_t index = 0;
    double detuning = 0.0;
    double height = 0.0;
};

// Strict local maxima whose topographic prominence is at least
// min_prominence * (max - min), sorted by detuning. An empty result is a
// valid answer for featureless data.
std::vector<Peak> find_peaks(const Spectrum& spec, double min_prominence = 0.02);

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Damped least squares (Levenberg-style) fit of
//   L(d) = offset + amplitude * (w/2)^2 / ((d - center)^2 + (w/2)^2)
// over the samples with detuning in [window_lo, window_hi]. Initial guess:
// center at the window argmax, amplitude = max - min, w from the half-max
// crossing distance, offset = window min. Converges when the relative
// parameter change drops below 1e-10 (at most 200 iterations).
PeakFit fit_lorentzian(const Spectrum& spec, double window_lo, double window_hi);

// Discrete convolution with a unit-area Lorentzian kernel of the given
// FWHM on the same (uniform) grid; near the edges the truncated kernel is
// renormalized. FWHM 0 is the identity.
Spectrum convolve_laser_linewidth(const Spectrum& spec, double total_linewidth_fwhm);

// Two-pass simulation of the narrow feature: a coarse 1 MHz band around the
// dressed prediction lambda_plus to locate the peak, then a fine window
// (0.05 MHz steps for narrow lines, +-25 MHz or +-5 nu_plus, whichever is
// wider) centered on lambda_plus.
Spectrum fine_window_spectrum(const SimConfig& config, double coupling_detuning,
                              const Quadrature& quad);

struct SweepRow {
    double coupling_detuning = 0.0;
    double fwhm_numeric = 0.0;
    double fwhm_analytic = 0.0;
    double peak_center = 0.0;
    double residual = 0.0;
    bool ok = false;
    std::string note;  // failure reason when !ok
};

// For each coupling detuning (sub-Doppler regime |dc| > 2 wc): simulate the
// two-pass grid, pick the detected peak nearest lambda_plus, Lorentz-fit a
// window of +-5 nu_plus around it and pair the result with the analytic
// width. Failures are recorded per row and the sweep continues.
std::vector<SweepRow> sweep_linewidth(const std::vector<double>& detunings,
                                      const SimConfig& config, const Quadrature& quad);

}
