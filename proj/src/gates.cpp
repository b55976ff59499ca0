#include "qrep/gates.hpp"

#include <cmath>
#include <stdexcept>

namespace qrep {

namespace {

void check_gate_targets(const Register& reg, std::size_t atom, std::size_t photon) {
    if (atom >= reg.subsystem_count() || photon >= reg.subsystem_count()) {
        throw std::out_of_range("gate subsystem index out of range");
    }
    if (reg.kind(atom) != Subsystem::AtomQubit) {
        throw std::invalid_argument("gate atom target is not an atom qubit");
    }
    if (reg.kind(photon) != Subsystem::TimeBinPhoton) {
        throw std::invalid_argument("gate photon target is not a time-bin photon");
    }
}

Register set_photon_to_vacuum(const Register& reg, std::size_t photon, OutcomeChooser& chooser) {
    // The environment absorbs the photon: collapse its which-bin content,
    // then park the subsystem in |vac>. Sampling the bin reproduces the
    // partial trace over lost photons one trajectory at a time.
    auto outcomes = measure(reg, photon, photon_time_bin_basis(), /*keep=*/true);
    std::vector<double> probs;
    for (const auto& o : outcomes) probs.push_back(o.probability);
    const std::size_t picked = chooser.pick(probs);
    const Register& collapsed = outcomes[picked].post;

    if (picked == photon_vacuum) return collapsed;

    // Move the collapsed bin amplitude to the vacuum level.
    Matrix shift(3, 3);
    shift(photon_vacuum, picked) = 1.0;
    shift(picked, photon_vacuum) = 1.0;
    const std::size_t other = picked == photon_early ? photon_late : photon_early;
    shift(other, other) = 1.0;
    return apply_unitary(collapsed, photon, shift);
}

}  // namespace

double cooperativity(const CavityParams& p) {
    if (p.coupling_g <= 0.0 || p.cavity_decay_kappa <= 0.0 || p.atom_decay_gamma <= 0.0) {
        throw std::invalid_argument("cavity parameters must be positive");
    }
    return 4.0 * p.coupling_g * p.coupling_g / (p.cavity_decay_kappa * p.atom_decay_gamma);
}

bool below_typical_cooperativity(double c) {
    return c < 100.0;
}

void GateNoise::validate() const {
    if (success_prob < 0.0 || success_prob > 1.0) {
        throw std::invalid_argument("gate success probability must be in [0, 1]");
    }
    if (error_rate < 0.0 || error_rate >= 1.0) {
        throw std::invalid_argument("gate error rate must be in [0, 1)");
    }
    if (gate_time_s < 0.0) {
        throw std::invalid_argument("gate time must be nonnegative");
    }
}

Matrix pauli_x() { return Matrix(2, 2, {0, 1, 1, 0}); }
Matrix pauli_y() { return Matrix(2, 2, {0, cxd(0, -1), cxd(0, 1), 0}); }
Matrix pauli_z() { return Matrix(2, 2, {1, 0, 0, -1}); }

Matrix half_pi_pulse() {
    const double s = 1.0 / std::sqrt(2.0);
    return Matrix(2, 2, {s, s, s, -s});
}

Matrix rotation_y(double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    return Matrix(2, 2, {c, -s, s, c});
}

const Matrix& controlled_phase_matrix() {
    static const Matrix m = Matrix::diagonal({-1.0, -1.0, 1.0, -1.0, 1.0, 1.0});
    // order: (0,e) (0,l) (0,vac) (1,e) (1,l) (1,vac)
    return m;
}

Matrix photon_pm_change() {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix h(3, 3);
    h(photon_early, photon_early) = s;
    h(photon_early, photon_late) = s;
    h(photon_late, photon_early) = s;
    h(photon_late, photon_late) = -s;
    h(photon_vacuum, photon_vacuum) = 1.0;
    return h;
}

Matrix photon_atom_cnot_matrix() {
    const Matrix h = kron(Matrix::identity(2), photon_pm_change());
    return h * controlled_phase_matrix() * h;
}

Matrix interferometer_map() {
    // |+> -> |e>, |-> -> |l>; on the bin basis this is the rotation
    // |e> -> (|e>+|l>)/sqrt2, |l> -> (|e>-|l>)/sqrt2 with vac fixed.
    return photon_pm_change();
}

Register controlled_phase(const Register& reg, std::size_t atom, std::size_t photon) {
    check_gate_targets(reg, atom, photon);
    const std::size_t targets[2] = {atom, photon};
    return apply_unitary(reg, targets, controlled_phase_matrix());
}

Register photon_atom_cnot(const Register& reg, std::size_t atom, std::size_t photon) {
    return controlled_phase(reg, atom, photon);
}

Matrix encoding_to_canonical(PhotonEncoding encoding) {
    Matrix m = Matrix::identity(3);
    switch (encoding) {
        case PhotonEncoding::TimeBin:
            return m;  // e, l are the canonical levels
        case PhotonEncoding::LinearPol:
            return m;  // H -> e slot, V -> l slot
        case PhotonEncoding::CircularPol: {
            // stored order (R, L); the coupled polarization R plays the
            // late-bin role: R -> l, L -> e
            Matrix p(3, 3);
            p(photon_late, 0) = 1.0;
            p(photon_early, 1) = 1.0;
            p(photon_vacuum, photon_vacuum) = 1.0;
            return p;
        }
    }
    throw std::invalid_argument("unknown photon encoding");
}

Register encode_variant(const Register& reg, std::size_t photon,
                        PhotonEncoding from, PhotonEncoding to) {
    if (photon >= reg.subsystem_count() || reg.kind(photon) != Subsystem::TimeBinPhoton) {
        throw std::invalid_argument("encode_variant target is not a photon");
    }
    const Matrix map = encoding_to_canonical(to).adjoint() * encoding_to_canonical(from);
    return apply_unitary(reg, photon, map);
}

Matrix linear_pol_gate_matrix() {
    // order: (0,H) (0,V) (0,vac) (1,H) (1,V) (1,vac)
    return Matrix::diagonal({1.0, -1.0, 1.0, 1.0, 1.0, 1.0});
}

Matrix circular_pol_gate_matrix() {
    // order: (0,R) (0,L) (0,vac) (1,R) (1,L) (1,vac)
    return Matrix::diagonal({-1.0, -1.0, 1.0, 1.0, -1.0, 1.0});
}

NoisyGateResult noisy_gate(const Register& reg, std::size_t atom, std::size_t photon,
                           const GateNoise& noise, OutcomeChooser& chooser) {
    check_gate_targets(reg, atom, photon);
    noise.validate();

    const double p_ok = noise.success_prob * (1.0 - noise.error_rate);
    const double p_err = noise.success_prob * noise.error_rate;
    const double p_loss = 1.0 - noise.success_prob;
    const double branch_probs[3] = {p_ok, p_loss, p_err};
    const std::size_t branch = chooser.pick(branch_probs);

    NoisyGateResult result;
    if (branch == 0) {
        result.branch = GateBranch::Success;
        result.state = controlled_phase(reg, atom, photon);
        result.state.branch_weight *= p_ok;
    } else if (branch == 1) {
        result.branch = GateBranch::HeraldedLoss;
        result.state = set_photon_to_vacuum(reg, photon, chooser);
        result.state.branch_weight *= p_loss;
    } else {
        result.branch = GateBranch::SilentError;
        Register ideal = controlled_phase(reg, atom, photon);
        const double uniform[3] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        const std::size_t which = chooser.pick(uniform);
        static const char names[3] = {'X', 'Y', 'Z'};
        const Matrix paulis[3] = {pauli_x(), pauli_y(), pauli_z()};
        result.pauli = names[which];
        result.state = apply_unitary(ideal, atom, paulis[which]);
        result.state.branch_weight *= p_err / 3.0;
    }
    return result;
}

}  // namespace qrep
