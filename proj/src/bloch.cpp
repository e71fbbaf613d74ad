#include "eitsim/bloch.hpp"

#include <cmath>
#include <sstream>

namespace eitsim {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

inline int vec_index(int i, int j) { return i + 3 * j; }

// -i [H, rho] in vectorized form: -i (I (x) H - H^T (x) I)
Matrix9c commutator_part(const Matrix3c& h) {
    Matrix9c g = Matrix9c::Zero();
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) {
                g(vec_index(i, j), vec_index(k, j)) -= kI * h(i, k);
                g(vec_index(i, j), vec_index(i, k)) += kI * h(k, j);
            }
    return g;
}

// L rho L^dag - {L^dag L, rho}/2 in vectorized form
void add_dissipator(Matrix9c& g, const Matrix3c& l) {
    const Matrix3c ldl = l.adjoint() * l;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            const int row = vec_index(i, j);
            for (int k = 0; k < 3; ++k)
                for (int m = 0; m < 3; ++m)
                    g(row, vec_index(k, m)) += l(i, k) * std::conj(l(j, m));
            for (int k = 0; k < 3; ++k) {
                g(row, vec_index(k, j)) -= 0.5 * ldl(i, k);
                g(row, vec_index(i, k)) -= 0.5 * ldl(k, j);
            }
        }
}

Matrix9c dissipator_matrix(const AtomSpec& atom, bool recycle_all_to_1) {
    Matrix9c g = Matrix9c::Zero();
    Matrix3c l = Matrix3c::Zero();
    if (recycle_all_to_1) {
        l(0, 2) = std::sqrt(atom.gamma31 + atom.gamma32);
        add_dissipator(g, l);
    } else {
        if (atom.gamma31 > 0.0) {
            l.setZero();
            l(0, 2) = std::sqrt(atom.gamma31);
            add_dissipator(g, l);
        }
        if (atom.gamma32 > 0.0) {
            l.setZero();
            l(1, 2) = std::sqrt(atom.gamma32);
            add_dissipator(g, l);
        }
    }
    if (atom.gamma12 > 0.0) {
        // sigma_z over the ground pair; decays rho12 at gamma12
        l.setZero();
        l(0, 0) = std::sqrt(atom.gamma12 / 2.0);
        l(1, 1) = -std::sqrt(atom.gamma12 / 2.0);
        add_dissipator(g, l);
    }
    return g;
}

void check_contract(const Matrix3c& rho, const char* what) {
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    const double trace_err = std::abs(rho.trace() - std::complex<double>(1.0));
    double diag_min = 0.0, diag_max = 1.0, diag_imag = 0.0;
    for (int k = 0; k < 3; ++k) {
        diag_min = std::min(diag_min, rho(k, k).real());
        diag_max = std::max(diag_max, rho(k, k).real());
        diag_imag = std::max(diag_imag, std::abs(rho(k, k).imag()));
    }
    if (herm > 1e-10 || trace_err > 1e-10 || diag_imag > 1e-10 ||
        diag_min < -1e-9 || diag_max > 1.0 + 1e-9) {
        std::ostringstream msg;
        msg << what << ": steady state violates density-matrix contract"
            << " (hermiticity " << herm << ", trace error " << trace_err
            << ", diag range [" << diag_min << ", " << diag_max << "])";
        throw SolveError(msg.str());
    }
}

Matrix3c solve_with_constraints(Matrix9c a, const Vector9c& b, double residual_scale,
                                const Matrix9c& check_against) {
    Eigen::PartialPivLU<Matrix9c> lu(a);
    const Vector9c x = lu.solve(b);
    if (!x.allFinite()) throw SolveError("linear solve produced non-finite values");
    // residual against the unmodified generator rows; the replaced rows are
    // linear combinations of the others for a trace-preserving generator
    const double res = (check_against * x).cwiseAbs().maxCoeff();
    if (res > 1e-7 * std::max(1.0, residual_scale))
        throw SolveError("steady-state residual " + std::to_string(res) +
                         " indicates a singular or inconsistent generator");
    Matrix3c rho;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) rho(i, j) = x[vec_index(i, j)];
    return rho;
}

}  // namespace

GeneratorTemplate::GeneratorTemplate(const AtomSpec& atom, const FieldSpec& probe,
                                     const FieldSpec& coupling)
    : atom_(atom), probe_(probe), coupling_(coupling) {
    h0_ = Matrix3c::Zero();
    h0_(0, 2) = h0_(2, 0) = probe.rabi;
    h0_(1, 2) = h0_(2, 1) = coupling.rabi;
    hp_ = Matrix3c::Zero();
    hp_(1, 1) = -1.0;
    hp_(2, 2) = -1.0;
    hc_ = Matrix3c::Zero();
    hc_(1, 1) = 1.0;

    g0_ = commutator_part(h0_) + dissipator_matrix(atom, false);
    gp_ = commutator_part(hp_);
    gc_ = commutator_part(hc_);
}

void GeneratorTemplate::assemble(double dp_eff, double dc_eff, Matrix9c& out) const {
    out = g0_;
    out.noalias() += dp_eff * gp_;
    out.noalias() += dc_eff * gc_;
}

Generator GeneratorTemplate::at(const VelocityClass& v) const {
    Generator gen;
    gen.atom = atom_;
    gen.probe = probe_;
    gen.coupling = coupling_;
    gen.v = v;
    const double dp_eff = probe_.detuning - v.doppler_shift;
    const double dc_eff = coupling_.detuning - v.doppler_shift;
    assemble(dp_eff, dc_eff, gen.matrix);
    gen.hamiltonian = h0_ + dp_eff * hp_ + dc_eff * hc_;
    return gen;
}

Generator build_generator(const AtomSpec& atom, const FieldSpec& probe,
                          const FieldSpec& coupling, const VelocityClass& v) {
    return GeneratorTemplate(atom, probe, coupling).at(v);
}

DensityMatrix steady_state(const Generator& gen, double p1_init, double p2_init) {
    const double dp_eff = gen.probe.detuning - gen.v.doppler_shift;
    const double dc_eff = gen.coupling.detuning - gen.v.doppler_shift;
    const double scale = gen.matrix.cwiseAbs().maxCoeff();

    DensityMatrix out;
    if (gen.coupling.rabi == 0.0) {
        // quasi-static transit-limited solve; see header
        Matrix3c h = gen.hamiltonian;
        h(1, 1) = 0.0;  // |2> is inert, drop its rotating-frame phase
        Matrix9c gq = commutator_part(h) + dissipator_matrix(gen.atom, true);
        const Matrix9c residual_rows = gq;
        Vector9c b = Vector9c::Zero();
        gq.row(vec_index(1, 1)).setZero();
        gq(vec_index(1, 1), vec_index(1, 1)) = 1.0;
        b[vec_index(1, 1)] = p2_init;
        gq.row(vec_index(2, 2)).setZero();
        for (int k = 0; k < 3; ++k) gq(vec_index(2, 2), vec_index(k, k)) = 1.0;
        b[vec_index(2, 2)] = 1.0;
        Matrix9c check = residual_rows;
        check.row(vec_index(1, 1)).setZero();
        check.row(vec_index(2, 2)).setZero();
        out.rho = solve_with_constraints(gq, b, scale, check);
    } else {
        Matrix9c a = gen.matrix;
        Vector9c b = Vector9c::Zero();
        a.row(vec_index(2, 2)).setZero();
        for (int k = 0; k < 3; ++k) a(vec_index(2, 2), vec_index(k, k)) = 1.0;
        b[vec_index(2, 2)] = 1.0;
        Matrix9c check = gen.matrix;
        check.row(vec_index(2, 2)).setZero();
        out.rho = solve_with_constraints(a, b, scale, check);
    }
    check_contract(out.rho, "steady_state");
    out.degenerate = gen.atom.gamma12 == 0.0 &&
                     std::abs(dp_eff - dc_eff) <= 1e-9 * std::max(1.0, std::abs(dp_eff));
    return out;
}

double probe_response(const DensityMatrix& dm, const AtomSpec& atom, const FieldSpec& probe) {
    if (!(probe.rabi > 0.0))
        throw std::invalid_argument("probe_response: probe Rabi frequency must be positive");
    return std::abs(dm.rho31().imag()) * (atom.gamma_sum() / 2.0) / probe.rabi;
}

}
