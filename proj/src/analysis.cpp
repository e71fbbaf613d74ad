#include "eitsim/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace eitsim {

LinewidthPair analytic_linewidths(const AtomSpec& atom, const EnsembleSpec& ensemble,
                                  const FieldSpec& coupling) {
    const double dc = coupling.detuning;
    const double wc = coupling.rabi;
    if (wc == 0.0 && dc == 0.0)
        throw std::invalid_argument(
            "analytic_linewidths: indeterminate at zero coupling Rabi and zero detuning");
    const double split = std::sqrt(dc * dc + 4.0 * wc * wc);
    const double pref = (atom.gamma_sum() + 2.0 * ensemble.doppler_fwhm) / 4.0;
    return {pref * (1.0 - dc / split), pref * (1.0 + dc / split)};
}

DressedPair dressed_eigenvalues(const FieldSpec& coupling) {
    const double dc = coupling.detuning;
    const double wc = coupling.rabi;
    const double split = std::sqrt(dc * dc + 4.0 * wc * wc);
    return {(dc + split) / 2.0, (dc - split) / 2.0};
}

std::vector<Peak> find_peaks(const Spectrum& spec, double min_prominence) {
    if (spec.absorption.empty()) throw std::invalid_argument("find_peaks: empty spectrum");
    if (!(min_prominence > 0.0 && min_prominence < 1.0))
        throw std::invalid_argument("find_peaks: min_prominence must lie in (0, 1)");
    const std::vector<double>& y = spec.absorption;
    const std::size_t n = y.size();
    double lo = y[0], hi = y[0];
    for (double v : y) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double threshold = min_prominence * (hi - lo);

    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] > y[i + 1])) continue;
        // topographic prominence: drop to the lowest saddle before
        // re-reaching this height on each side
        double left_min = y[i];
        for (std::size_t k = i; k-- > 0;) {
            left_min = std::min(left_min, y[k]);
            if (y[k] > y[i]) break;
        }
        double right_min = y[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            right_min = std::min(right_min, y[k]);
            if (y[k] > y[i]) break;
        }
        const double prominence = y[i] - std::max(left_min, right_min);
        if (prominence >= threshold)
            peaks.push_back({i, spec.detunings[i], y[i]});
    }
    return peaks;
}

namespace {

inline double lorentz_model(double x, const std::array<double, 4>& p) {
    const double hw = p[1] / 2.0;
    const double dx = x - p[0];
    return p[3] + p[2] * hw * hw / (dx * dx + hw * hw);
}

double sum_sq_residual(const std::vector<double>& x, const std::vector<double>& y,
                       const std::array<double, 4>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = lorentz_model(x[i], p) - y[i];
        s += r * r;
    }
    return s;
}

}  // namespace

PeakFit fit_lorentzian(const Spectrum& spec, double window_lo, double window_hi) {
    if (window_hi < window_lo) std::swap(window_lo, window_hi);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < spec.detunings.size(); ++i) {
        if (spec.detunings[i] >= window_lo && spec.detunings[i] <= window_hi) {
            x.push_back(spec.detunings[i]);
            y.push_back(spec.absorption[i]);
        }
    }
    if (x.size() < 8)
        throw FitError("fit_lorentzian: window holds " + std::to_string(x.size()) +
                       " samples, need at least 8");

    std::size_t imax = 0;
    double ymin = y[0], ymax = y[0];
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > ymax) {
            ymax = y[i];
            imax = i;
        }
        ymin = std::min(ymin, y[i]);
    }
    if (imax == 0 || imax + 1 == y.size())
        throw FitError("fit_lorentzian: window holds no interior maximum");

    // initial guess
    const double half = ymin + 0.5 * (ymax - ymin);
    std::size_t il = imax, ir = imax;
    while (il > 0 && y[il] > half) --il;
    while (ir + 1 < y.size() && y[ir] > half) ++ir;
    double w0 = x[ir] - x[il];
    if (!(w0 > 0.0)) w0 = 2.0 * (x[1] - x[0]);
    std::array<double, 4> p{x[imax], w0, ymax - ymin, ymin};

    // Levenberg damping on the normal equations
    double lambda = 1e-3;
    double sse = sum_sq_residual(x, y, p);
    bool converged = false;
    for (int iter = 0; iter < 200 && !converged; ++iter) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double hw = p[1] / 2.0;
            const double dx = x[i] - p[0];
            const double den = dx * dx + hw * hw;
            const double r = p[3] + p[2] * hw * hw / den - y[i];
            Eigen::Vector4d j;
            j[0] = p[2] * hw * hw * 2.0 * dx / (den * den);
            j[1] = p[2] * hw * dx * dx / (den * den);
            j[2] = hw * hw / den;
            j[3] = 1.0;
            jtj.noalias() += j * j.transpose();
            jtr.noalias() += j * r;
        }
        std::array<double, 4> next = p;
        Eigen::Vector4d step = Eigen::Vector4d::Zero();
        bool improved = false;
        for (int attempt = 0; attempt < 60; ++attempt) {
            Eigen::Matrix4d damped = jtj;
            for (int k = 0; k < 4; ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);
            step = damped.ldlt().solve(-jtr);
            for (int k = 0; k < 4; ++k) next[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k)] + step[k];
            next[1] = std::abs(next[1]);
            const double trial = sum_sq_residual(x, y, next);
            if (std::isfinite(trial) && trial <= sse) {
                improved = true;
                sse = trial;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
        if (!improved) break;  // stuck at a damping wall; convergence check decides
        double rel = 0.0;
        for (int k = 0; k < 4; ++k)
            rel = std::max(rel, std::abs(step[k]) /
                                    std::max(std::abs(next[static_cast<std::size_t>(k)]), 1e-30));
        p = next;
        lambda = std::max(lambda * 0.3, 1e-12);
        converged = rel < 1e-10;
    }
    if (!converged)
        throw FitError("fit_lorentzian: no convergence within 200 iterations");

    PeakFit fit;
    fit.center = p[0];
    fit.fwhm = p[1];
    fit.amplitude = p[2];
    fit.offset = p[3];
    fit.residual_norm = std::sqrt(sse / static_cast<double>(x.size()));
    return fit;
}

Spectrum convolve_laser_linewidth(const Spectrum& spec, double total_linewidth_fwhm) {
    if (!(total_linewidth_fwhm >= 0.0))
        throw std::invalid_argument("convolve_laser_linewidth: FWHM must be >= 0");
    const std::size_t n = spec.detunings.size();
    if (n < 2) throw std::invalid_argument("convolve_laser_linewidth: need at least 2 samples");
    const double h = spec.detunings[1] - spec.detunings[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double step = spec.detunings[i] - spec.detunings[i - 1];
        if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw std::invalid_argument("convolve_laser_linewidth: grid is not uniform");
    }
    if (total_linewidth_fwhm == 0.0) return spec;

    Spectrum out = spec;
    const double hw = total_linewidth_fwhm / 2.0;
    const double hw2 = hw * hw;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0, norm = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = spec.detunings[i] - spec.detunings[j];
            const double k = hw2 / (dx * dx + hw2);
            acc += k * spec.absorption[j];
            norm += k;
        }
        out.absorption[i] = acc / norm;
    }
    return out;
}

Spectrum fine_window_spectrum(const SimConfig& config, double coupling_detuning,
                              const Quadrature& quad) {
    SimConfig c = config;
    c.coupling.detuning = coupling_detuning;
    const DressedPair dressed = dressed_eigenvalues(c.coupling);
    const LinewidthPair widths = analytic_linewidths(c.atom, c.ensemble, c.coupling);

    // pass 1: coarse 1 MHz band, wide enough to see the feature and confirm
    // the prediction before spending fine-grid solves
    const double band = std::max(150.0, 10.0 * widths.nu_plus);
    ScanGrid coarse{dressed.lambda_plus - band, dressed.lambda_plus + band,
                    static_cast<int>(2.0 * band) + 1};
    const Spectrum rough =
        averaged_spectrum(c.atom, coarse, c.probe, c.coupling, c.ensemble, quad);
    double center = dressed.lambda_plus;
    const std::vector<Peak> rough_peaks = find_peaks(rough, 0.02);
    double best = std::numeric_limits<double>::infinity();
    for (const Peak& pk : rough_peaks) {
        const double d = std::abs(pk.detuning - dressed.lambda_plus);
        if (d < best) {
            best = d;
            center = pk.detuning;
        }
    }

    // pass 2: fine window centered on the dressed prediction
    const double half = std::max(25.0, std::min(5.0 * widths.nu_plus, 160.0));
    const int n = half <= 25.0 ? 1001 : static_cast<int>(2.0 * half / 0.05) / 10 * 10 + 1;
    ScanGrid fine{dressed.lambda_plus - half, dressed.lambda_plus + half,
                  std::min(n, 2001)};
    (void)center;
    return averaged_spectrum(c.atom, fine, c.probe, c.coupling, c.ensemble, quad);
}

std::vector<SweepRow> sweep_linewidth(const std::vector<double>& detunings,
                                      const SimConfig& config, const Quadrature& quad) {
    std::vector<SweepRow> rows;
    rows.reserve(detunings.size());
    for (double dc : detunings) {
        SweepRow row;
        row.coupling_detuning = dc;
        try {
            if (!(std::abs(dc) > 2.0 * config.coupling.rabi))
                throw std::invalid_argument(
                    "outside the sub-Doppler regime (need |detuning| > 2 Rabi)");
            SimConfig c = config;
            c.coupling.detuning = dc;
            const DressedPair dressed = dressed_eigenvalues(c.coupling);
            const LinewidthPair widths = analytic_linewidths(c.atom, c.ensemble, c.coupling);
            row.fwhm_analytic = widths.nu_plus;

            const Spectrum fine = fine_window_spectrum(config, dc, quad);
            const std::vector<Peak> peaks = find_peaks(fine, 0.02);
            const Peak* nearest = nullptr;
            double best = std::numeric_limits<double>::infinity();
            for (const Peak& pk : peaks) {
                const double d = std::abs(pk.detuning - dressed.lambda_plus);
                if (d < best) {
                    best = d;
                    nearest = &pk;
                }
            }
            if (!nearest)
                throw FitError("no peak detected near the dressed prediction");

            const double halfwin = 5.0 * widths.nu_plus;
            const PeakFit fit = fit_lorentzian(fine, nearest->detuning - halfwin,
                                               nearest->detuning + halfwin);
            row.fwhm_numeric = fit.fwhm;
            row.peak_center = fit.center;
            row.residual = fit.residual_norm;
            row.ok = true;
        } catch (const std::exception& err) {
            row.ok = false;
            row.note = err.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}
