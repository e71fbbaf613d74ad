#pragma once

#include "eitsim/bloch.hpp"
#include "eitsim/model.hpp"

// Maxwell-Boltzmann velocity average of the single-class probe response and
// the Beer-Lambert transmission that turns normalized absorption into the
// measured probe attenuation.

namespace eitsim {

// Doppler-shift nodes with nonnegative weights normalized to sum 1.
struct Quadrature {
    std::vector<double> nodes;    // MHz, strictly increasing, symmetric about 0
    std::vector<double> weights;
};

// Uniform (trapezoidal) nodes over +-span*sigma with Gaussian weights,
// sigma = doppler_fwhm / (2 sqrt(2 ln 2)). n must be odd and >= 11 so a
// node sits exactly at zero; span >= 3.
Quadrature gaussian_quadrature(double doppler_fwhm, int n = 2001, double span = 4.0);

// Gauss-Hermite alternative behind the same type (exact for polynomial
// times Gaussian integrands; nodes are not uniform).
Quadrature gauss_hermite_quadrature(double doppler_fwhm, int n);

// absorption[i] = sum_j weights[j] * response(steady state at probe
// detuning grid[i], Doppler shift nodes[j]); the sum runs in node order so
// results are bit-reproducible. Solver failures are rethrown with the grid
// and node coordinates attached.
Spectrum averaged_spectrum(const AtomSpec& atom, const ScanGrid& probe_grid,
                           const FieldSpec& probe, const FieldSpec& coupling,
                           const EnsembleSpec& ensemble, const Quadrature& quad);

// T(dp) = exp(-od0 * a(dp))
Spectrum transmission(const Spectrum& spec, double od0);

// od0 = -ln(1 - target) / a_peak with a_peak the maximum of the no-coupling
// spectrum for this configuration (coupling Rabi forced to zero).
double calibrate_od(double target_peak_absorption, const SimConfig& config,
                    const Quadrature& quad);

}
