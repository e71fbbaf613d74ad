#pragma once

#include <Eigen/Dense>
#include <complex>

#include "eitsim/model.hpp"

// Rotating-frame Liouvillian of the Lambda system for one velocity class,
// its steady state, and the normalized probe response.
//
// Conventions (basis |1>, |2>, |3>):
//   - effective detunings: dp' = probe.detuning - doppler_shift,
//     dc' = coupling.detuning - doppler_shift (co-propagating beams at
//     nearly equal wavelength share one Doppler shift);
//   - Hamiltonian H = [[0, 0, Wp], [0, dc'-dp', Wc], [Wp, Wc, -dp']],
//     signed so that blue coupling detuning places the upper dressed state
//     lambda+ = (dc' + sqrt(dc'^2 + 4 Wc^2))/2 above the bare line and the
//     sub-Doppler peak moves blue as the coupling detuning grows;
//   - dissipators: decay |3>->|1> at gamma31, |3>->|2> at gamma32, and
//     pure dephasing of the ground coherence rho12 at gamma12.
//
// The density matrix is vectorized column-major: vec(rho)[i + 3j] = rho_ij.

namespace eitsim {

using Matrix3c = Eigen::Matrix3cd;
using Matrix9c = Eigen::Matrix<std::complex<double>, 9, 9>;
using Vector9c = Eigen::Matrix<std::complex<double>, 9, 1>;

// Doppler shift k*v in MHz, common to probe and coupling.
struct VelocityClass {
    double doppler_shift = 0.0;
};

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Steady-state density matrix. `degenerate` marks the nullspace ambiguity
// at gamma12 = 0 and exact two-photon resonance; the returned matrix is
// then the one selected by the replaced-row linear solve.
struct DensityMatrix {
    Matrix3c rho = Matrix3c::Zero();
    bool degenerate = false;

    std::complex<double> rho31() const { return rho(2, 0); }
    double population(int level) const { return rho(level - 1, level - 1).real(); }
};

// Generator of the master equation, d vec(rho)/dt = matrix * vec(rho),
// together with the inputs it was built from.
struct Generator {
    Matrix9c matrix = Matrix9c::Zero();
    Matrix3c hamiltonian = Matrix3c::Zero();
    AtomSpec atom;
    FieldSpec probe;
    FieldSpec coupling;
    VelocityClass v;
};

// Detuning decomposition G(dp', dc') = g0 + dp' * gp + dc' * gc, hoisted
// out of the per-velocity-class loop by the Doppler average.
class GeneratorTemplate {
public:
    GeneratorTemplate(const AtomSpec& atom, const FieldSpec& probe, const FieldSpec& coupling);

    Generator at(const VelocityClass& v) const;

    // matrix only, written into `out` without re-deriving the constant part
    void assemble(double dp_eff, double dc_eff, Matrix9c& out) const;

private:
    Matrix9c g0_, gp_, gc_;
    Matrix3c h0_, hp_, hc_;
    AtomSpec atom_;
    FieldSpec probe_, coupling_;
};

Generator build_generator(const AtomSpec& atom, const FieldSpec& probe,
                          const FieldSpec& coupling, const VelocityClass& v);

// Solves G vec(rho) = 0 with the trace row replaced by Tr rho = 1 and
// verifies the density-matrix contract (Hermitian and unit trace to 1e-10,
// real diagonal within [-1e-9, 1+1e-9]).
//
// With the coupling off the Lindblad chain has no steady state with
// population left in the probed transition (everything optically pumps into
// the uncoupled ground state), so this case is solved in the quasi-static
// transit-limited sense: |2> holds p2_init, the {|1>,|3>} block is closed at
// population p1_init with the full decay rate recycling into |1>. That is
// the standard weak-probe treatment of a thermal vapor and what the initial
// populations are for.
DensityMatrix steady_state(const Generator& gen, double p1_init, double p2_init);

// Normalized absorption a = |Im rho31| * (gamma_sum/2) / probe.rabi, so a
// resonant uncoupled two-level atom with all population in |1> gives 1 in
// the weak-probe limit.
double probe_response(const DensityMatrix& dm, const AtomSpec& atom, const FieldSpec& probe);

}
