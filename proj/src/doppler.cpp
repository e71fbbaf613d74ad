#include "eitsim/doppler.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eitsim {

namespace {

constexpr double kFwhmToSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

inline int vec_index(int i, int j) { return i + 3 * j; }

}  // namespace

Quadrature gaussian_quadrature(double doppler_fwhm, int n, double span) {
    if (!(doppler_fwhm > 0.0)) throw std::invalid_argument("doppler_fwhm must be > 0");
    if (n < 11 || n % 2 == 0) throw std::invalid_argument("quadrature n must be odd and >= 11");
    if (!(span >= 3.0)) throw std::invalid_argument("quadrature span must be >= 3 sigma");

    const double sigma = doppler_fwhm / kFwhmToSigma;
    const double lim = span * sigma;
    Quadrature q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    const double h = 2.0 * lim / (n - 1);
    const int half = (n - 1) / 2;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = (i - half) * h;  // exact symmetry, node at 0
        q.nodes[static_cast<std::size_t>(i)] = x;
        double w = std::exp(-x * x / (2.0 * sigma * sigma));
        if (i == 0 || i == n - 1) w *= 0.5;  // trapezoid ends
        q.weights[static_cast<std::size_t>(i)] = w;
        sum += w;
    }
    for (double& w : q.weights) w /= sum;
    return q;
}

Quadrature gauss_hermite_quadrature(double doppler_fwhm, int n) {
    if (!(doppler_fwhm > 0.0)) throw std::invalid_argument("doppler_fwhm must be > 0");
    if (n < 3) throw std::invalid_argument("gauss_hermite n must be >= 3");

    // Golub-Welsch on the Hermite Jacobi matrix, beta_k = sqrt(k/2)
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = std::sqrt(k / 2.0);
        jac(k - 1, k) = b;
        jac(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    const double sigma = doppler_fwhm / kFwhmToSigma;
    Quadrature q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        q.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()[i] * sigma * std::sqrt(2.0);
        const double w = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        q.weights[static_cast<std::size_t>(i)] = w;
        sum += w;
    }
    for (double& w : q.weights) w /= sum;
    // symmetrize against eigensolver round-off
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (q.nodes[static_cast<std::size_t>(j)] -
                                q.nodes[static_cast<std::size_t>(i)]);
        q.nodes[static_cast<std::size_t>(i)] = -x;
        q.nodes[static_cast<std::size_t>(j)] = x;
        const double w = 0.5 * (q.weights[static_cast<std::size_t>(i)] +
                                q.weights[static_cast<std::size_t>(j)]);
        q.weights[static_cast<std::size_t>(i)] = w;
        q.weights[static_cast<std::size_t>(j)] = w;
    }
    if (n % 2 == 1) q.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return q;
}

Spectrum averaged_spectrum(const AtomSpec& atom, const ScanGrid& probe_grid,
                           const FieldSpec& probe, const FieldSpec& coupling,
                           const EnsembleSpec& ensemble, const Quadrature& quad) {
    if (!(probe.rabi > 0.0))
        throw std::invalid_argument("averaged_spectrum: probe Rabi must be positive");
    if (quad.nodes.empty() || quad.nodes.size() != quad.weights.size())
        throw std::invalid_argument("averaged_spectrum: malformed quadrature");

    Spectrum spec;
    spec.detunings = probe_grid.points();
    spec.absorption.resize(spec.detunings.size());
    spec.meta = SimConfig{atom, ensemble, probe, coupling, probe_grid, 0.0};

    const GeneratorTemplate tmpl(atom, probe, coupling);
    const double half_gamma = atom.gamma_sum() / 2.0;
    const bool coupling_off = coupling.rabi == 0.0;
    const std::size_t nn = quad.nodes.size();

    Matrix9c a;
    Vector9c b;
    if (!coupling_off) {
        for (std::size_t gi = 0; gi < spec.detunings.size(); ++gi) {
            const double dp = spec.detunings[gi];
            double acc = 0.0;
            for (std::size_t j = 0; j < nn; ++j) {
                const double shift = quad.nodes[j];
                tmpl.assemble(dp - shift, coupling.detuning - shift, a);
                a.row(vec_index(2, 2)).setZero();
                for (int k = 0; k < 3; ++k) a(vec_index(2, 2), vec_index(k, k)) = 1.0;
                b.setZero();
                b[vec_index(2, 2)] = 1.0;
                const Vector9c x = Eigen::PartialPivLU<Matrix9c>(a).solve(b);
                if (!x.allFinite()) {
                    std::ostringstream msg;
                    msg << "steady-state solve failed at probe detuning " << dp
                        << " MHz, Doppler node " << shift << " MHz";
                    throw SolveError(msg.str());
                }
                acc += quad.weights[j] * std::abs(x[vec_index(2, 0)].imag());
            }
            spec.absorption[gi] = acc * half_gamma / probe.rabi;
        }
    } else {
        // coupling off: quasi-static two-level solve per class (see bloch.hpp)
        for (std::size_t gi = 0; gi < spec.detunings.size(); ++gi) {
            const double dp = spec.detunings[gi];
            double acc = 0.0;
            for (std::size_t j = 0; j < nn; ++j) {
                const double shift = quad.nodes[j];
                const Generator gen =
                    build_generator(atom, FieldSpec{probe.rabi, dp, probe.linewidth},
                                    coupling, VelocityClass{shift});
                DensityMatrix dm;
                try {
                    dm = steady_state(gen, ensemble.p1_init, ensemble.p2_init);
                } catch (const SolveError& err) {
                    std::ostringstream msg;
                    msg << err.what() << " (probe detuning " << dp
                        << " MHz, Doppler node " << shift << " MHz)";
                    throw SolveError(msg.str());
                }
                acc += quad.weights[j] * std::abs(dm.rho31().imag());
            }
            spec.absorption[gi] = acc * half_gamma / probe.rabi;
        }
    }
    return spec;
}

Spectrum transmission(const Spectrum& spec, double od0) {
    if (!(od0 >= 0.0)) throw std::invalid_argument("transmission: od0 must be >= 0");
    Spectrum out = spec;
    out.meta.od0 = od0;
    for (std::size_t i = 0; i < out.absorption.size(); ++i)
        out.absorption[i] = std::exp(-od0 * spec.absorption[i]);
    return out;
}

double calibrate_od(double target_peak_absorption, const SimConfig& config,
                    const Quadrature& quad) {
    if (target_peak_absorption == 0.0) return 0.0;
    if (!(target_peak_absorption > 0.0 && target_peak_absorption < 1.0))
        throw std::invalid_argument("calibrate_od: target absorption must lie in (0, 1)");
    FieldSpec no_coupling = config.coupling;
    no_coupling.rabi = 0.0;
    const Spectrum base = averaged_spectrum(config.atom, config.grid, config.probe,
                                            no_coupling, config.ensemble, quad);
    double a_peak = 0.0;
    for (double v : base.absorption) a_peak = std::max(a_peak, v);
    if (!(a_peak > 0.0)) throw SolveError("calibrate_od: no-coupling spectrum is empty");
    return -std::log1p(-target_peak_absorption) / a_peak;
}

}
