#include "qrep/protocols.hpp"

#include <cmath>
#include <stdexcept>

namespace qrep {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

std::size_t pick_outcome(OutcomeChooser& chooser, const std::vector<MeasurementOutcome>& outcomes) {
    std::vector<double> probs;
    probs.reserve(outcomes.size());
    for (const auto& o : outcomes) probs.push_back(o.probability);
    return chooser.pick(probs);
}

bool pick_event(OutcomeChooser& chooser, double probability) {
    const double probs[2] = {probability, 1.0 - probability};
    return chooser.pick(probs) == 0;
}

/// Contracts `targets` of `reg` against a reference ket with the same
/// per-subsystem dimensions; returns the squared weight and the normalized
/// remainder (empty when the weight vanishes).
std::pair<double, Register> contract(const Register& reg, std::span<const std::size_t> targets,
                                     const Register& ket) {
    std::vector<Subsystem> rest_layout;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < reg.subsystem_count(); ++i) {
        if (std::find(targets.begin(), targets.end(), i) == targets.end()) {
            rest.push_back(i);
            rest_layout.push_back(reg.kind(i));
        }
    }
    std::size_t rest_dim = 1;
    for (std::size_t r : rest) rest_dim *= reg.dim(r);

    std::vector<cxd> reduced(rest_dim, cxd(0.0, 0.0));
    const auto& amps = reg.amplitudes();
    for (std::size_t idx = 0; idx < amps.size(); ++idx) {
        std::size_t ket_index = 0;
        for (std::size_t t : targets) {
            ket_index = ket_index * reg.dim(t) + reg.level_of(idx, t);
        }
        std::size_t rest_index = 0;
        for (std::size_t r : rest) {
            rest_index = rest_index * reg.dim(r) + reg.level_of(idx, r);
        }
        reduced[rest_index] += std::conj(ket.amplitudes()[ket_index]) * amps[idx];
    }

    double weight = 0.0;
    for (const cxd& a : reduced) weight += std::norm(a);
    if (weight < 1e-15) return {0.0, Register()};
    const double scale = 1.0 / std::sqrt(weight);
    for (cxd& a : reduced) a *= scale;
    return {weight, Register::from_amplitudes(std::move(rest_layout), std::move(reduced))};
}

Matrix atom_cnot_matrix() {
    Matrix m(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return m;
}

Register initialized_atoms() {
    Register a = apply_unitary(Register::atom(0), 0, half_pi_pulse());
    Register b = apply_unitary(Register::atom(0), 0, half_pi_pulse());
    return tensor(a, b);
}

}  // namespace

const char* bell_name(BellLabel label) {
    switch (label) {
        case BellLabel::PhiPlus: return "phi+";
        case BellLabel::PhiMinus: return "phi-";
        case BellLabel::PsiPlus: return "psi+";
        case BellLabel::PsiMinus: return "psi-";
    }
    return "?";
}

Register bell_pair(BellLabel label) {
    std::vector<cxd> amps(4, cxd(0.0, 0.0));
    switch (label) {
        case BellLabel::PhiPlus:
            amps[0] = kSqrtHalf; amps[3] = kSqrtHalf;
            break;
        case BellLabel::PhiMinus:
            amps[0] = kSqrtHalf; amps[3] = -kSqrtHalf;
            break;
        case BellLabel::PsiPlus:
            amps[1] = kSqrtHalf; amps[2] = kSqrtHalf;
            break;
        case BellLabel::PsiMinus:
            amps[1] = kSqrtHalf; amps[2] = -kSqrtHalf;
            break;
    }
    return Register::from_amplitudes({Subsystem::AtomQubit, Subsystem::AtomQubit}, std::move(amps));
}

BellLabel rotate_relabel(BellLabel label) {
    switch (label) {
        case BellLabel::PhiMinus: return BellLabel::PsiPlus;
        case BellLabel::PsiPlus: return BellLabel::PhiMinus;
        default: return label;
    }
}

BellLabel decode_parity_outcomes(char first, char second) {
    if ((first != '+' && first != '-') || (second != '+' && second != '-')) {
        throw std::invalid_argument("parity outcomes must be '+' or '-'");
    }
    if (first == '+') {
        return second == '+' ? BellLabel::PhiPlus : BellLabel::PhiMinus;
    }
    return second == '+' ? BellLabel::PsiPlus : BellLabel::PsiMinus;
}

Matrix bell_correction_matrix(BellLabel label) {
    switch (label) {
        case BellLabel::PhiPlus: return Matrix::identity(2);
        case BellLabel::PhiMinus: return pauli_z();
        case BellLabel::PsiPlus: return pauli_x();
        case BellLabel::PsiMinus: return pauli_z() * pauli_x();
    }
    throw std::invalid_argument("unknown Bell label");
}

const char* bell_correction_name(BellLabel label) {
    switch (label) {
        case BellLabel::PhiPlus: return "I";
        case BellLabel::PhiMinus: return "Z";
        case BellLabel::PsiPlus: return "X";
        case BellLabel::PsiMinus: return "ZX";
    }
    return "?";
}

// ---------------------------------------------------------------------------

void GenerationConfig::validate() const {
    noise_a.validate();
    noise_b.validate();
    for (double v : {eta_link, eta_d, eta_s}) {
        if (v < 0.0 || v > 1.0) {
            throw std::invalid_argument("efficiencies must lie in [0, 1]");
        }
    }
    if (max_photons < 1) {
        throw std::invalid_argument("max_photons must be at least 1");
    }
}

GenerationOutcome generate_entanglement(const GenerationConfig& cfg, OutcomeChooser& chooser) {
    cfg.validate();

    Register atoms = initialized_atoms();  // (A, B)
    bool first_photon = true;
    int photons = 0;

    while (photons < cfg.max_photons) {
        ++photons;

        // Source emission.
        if (!pick_event(chooser, cfg.eta_s)) {
            if (first_photon) {
                return {GenerationOutcome::Kind::VacuumNoOp, BellLabel::PhiPlus, 0, atoms, {}, photons};
            }
            continue;  // empty pulse inside the retry window
        }

        Register joint = tensor(atoms, Register::photon_plus());  // (A, B, p)

        // Reflection at A. A heralded failure here destroys the photon
        // before it entangles with anything, so the atoms are undisturbed.
        NoisyGateResult at_a = noisy_gate(joint, 0, 2, cfg.noise_a, chooser);
        if (at_a.branch == GateBranch::HeraldedLoss) {
            if (first_photon) {
                return {GenerationOutcome::Kind::VacuumNoOp, BellLabel::PhiPlus, 0, atoms, {}, photons};
            }
            continue;
        }
        joint = at_a.state;

        // Fiber (and coupling) between the nodes.
        if (!pick_event(chooser, cfg.eta_link)) {
            const std::size_t keep[2] = {0, 1};
            return {GenerationOutcome::Kind::MixedFailure, BellLabel::PhiPlus, 0, Register(),
                    partial_trace(joint, keep), photons};
        }

        // Reflection at B. Loss here happens after the photon entangled
        // with A, so the attempt cannot be recovered either.
        NoisyGateResult at_b = noisy_gate(joint, 1, 2, cfg.noise_b, chooser);
        if (at_b.branch == GateBranch::HeraldedLoss) {
            const std::size_t keep[2] = {0, 1};
            return {GenerationOutcome::Kind::MixedFailure, BellLabel::PhiPlus, 0, Register(),
                    partial_trace(joint, keep), photons};
        }
        joint = at_b.state;

        auto outcomes = measure(joint, 2, photon_pm_basis());

        if (!pick_event(chooser, cfg.eta_d)) {
            // Reflected but not detected: the detector still absorbed the
            // photon, collapsing the atoms into one parity branch. A fresh
            // photon re-measures the same parity, so this retries.
            const std::size_t picked = pick_outcome(chooser, outcomes);
            atoms = outcomes[picked].post;
            atoms.branch_weight = 1.0;
            first_photon = false;
            continue;
        }

        const std::size_t picked = pick_outcome(chooser, outcomes);
        const std::string& label = outcomes[picked].label;
        Register post = outcomes[picked].post;
        post.branch_weight = 1.0;
        if (label == "vac") {
            // Only reachable if every amplitude was lost upstream.
            return {GenerationOutcome::Kind::VacuumNoOp, BellLabel::PhiPlus, 0, post, {}, photons};
        }
        if (label == "-") {
            post = apply_unitary(post, 1, pauli_x());  // bit flip at B
        }
        return {GenerationOutcome::Kind::Entangled, BellLabel::PhiPlus, label[0], post, {}, photons};
    }

    return {GenerationOutcome::Kind::UndetectedRetryable, BellLabel::PhiPlus, 0, atoms, {}, photons};
}

Register generation_pre_detection_state() {
    Register joint = tensor(initialized_atoms(), Register::photon_plus());
    joint = photon_atom_cnot(joint, 0, 2);
    joint = photon_atom_cnot(joint, 1, 2);
    return joint;
}

// ---------------------------------------------------------------------------

ParityOutcome parity_check(const Register& reg, std::size_t atom_b, std::size_t atom_c,
                           OutcomeChooser& chooser) {
    Register joint = tensor(reg, Register::photon_plus());
    const std::size_t photon = joint.subsystem_count() - 1;
    joint = photon_atom_cnot(joint, atom_c, photon);
    joint = photon_atom_cnot(joint, atom_b, photon);

    auto outcomes = measure(joint, photon, photon_pm_basis());
    const std::size_t picked = pick_outcome(chooser, outcomes);
    if (outcomes[picked].label == "vac") {
        throw std::logic_error("parity photon had vacuum amplitude");
    }
    Register post = outcomes[picked].post;
    post.branch_weight = reg.branch_weight * outcomes[picked].probability;
    return {outcomes[picked].label[0], post};
}

namespace {

/// One parity round with retries. Unregistered photons either never
/// interacted (benign) or were reflected and missed at the detector, which
/// collapses the parity sector; both allow another photon.
std::optional<char> parity_round(Register& state, std::size_t atom_b, std::size_t atom_c,
                                 const GateNoise& noise, const SwapEfficiencies& eta,
                                 int attempt_cap, OutcomeChooser& chooser, int& photons) {
    const double p_interact =
        eta.eta_s * eta.eta_c * eta.eta_c * noise.success_prob * noise.success_prob;

    for (int attempt = 0; attempt < attempt_cap; ++attempt) {
        ++photons;
        if (!pick_event(chooser, p_interact)) {
            continue;  // photon never reached both cavities; atoms untouched
        }

        Register joint = tensor(state, Register::photon_plus());
        const std::size_t photon = joint.subsystem_count() - 1;
        joint = photon_atom_cnot(joint, atom_c, photon);
        if (pick_event(chooser, noise.error_rate)) {
            const double uniform[3] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
            const Matrix paulis[3] = {pauli_x(), pauli_y(), pauli_z()};
            joint = apply_unitary(joint, atom_c, paulis[chooser.pick(uniform)]);
        }
        joint = photon_atom_cnot(joint, atom_b, photon);
        if (pick_event(chooser, noise.error_rate)) {
            const double uniform[3] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
            const Matrix paulis[3] = {pauli_x(), pauli_y(), pauli_z()};
            joint = apply_unitary(joint, atom_b, paulis[chooser.pick(uniform)]);
        }

        auto outcomes = measure(joint, photon, photon_pm_basis());
        const std::size_t picked = pick_outcome(chooser, outcomes);
        Register post = outcomes[picked].post;
        post.branch_weight = state.branch_weight * outcomes[picked].probability;

        if (!pick_event(chooser, eta.eta_d)) {
            state = post;  // parity collapsed but unread; retry resolves it
            continue;
        }
        state = post;
        return outcomes[picked].label[0];
    }
    return std::nullopt;
}

}  // namespace

SwapResult swap_entanglement(const Register& chain, const GateNoise& noise,
                             const SwapEfficiencies& eta, int attempt_cap,
                             OutcomeChooser& chooser) {
    if (chain.subsystem_count() != 4) {
        throw std::invalid_argument("swap_entanglement expects a register holding atoms A,B,C,D");
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (chain.kind(i) != Subsystem::AtomQubit) {
            throw std::invalid_argument("swap_entanglement expects atom qubits");
        }
    }
    if (attempt_cap < 1) {
        throw std::invalid_argument("attempt cap must be at least 1");
    }
    noise.validate();

    Register state = chain;
    int photons = 0;

    std::optional<char> first = parity_round(state, 1, 2, noise, eta, attempt_cap, chooser, photons);
    if (!first) return {false, {0, 0, BellLabel::PhiPlus, "", photons}, Register()};

    state = apply_unitary(state, 1, half_pi_pulse());
    state = apply_unitary(state, 2, half_pi_pulse());

    std::optional<char> second = parity_round(state, 1, 2, noise, eta, attempt_cap, chooser, photons);
    if (!second) return {false, {*first, 0, BellLabel::PhiPlus, "", photons}, Register()};

    const BellLabel bell = decode_parity_outcomes(*first, *second);
    state = apply_unitary(state, 3, bell_correction_matrix(bell));

    // After two parity rounds B and C sit in a definite Bell state; factor
    // them out to leave the teleported (A, D) pair.
    const std::size_t bc[2] = {1, 2};
    for (BellLabel candidate : {BellLabel::PhiPlus, BellLabel::PhiMinus,
                                BellLabel::PsiPlus, BellLabel::PsiMinus}) {
        auto [weight, rest] = contract(state, bc, bell_pair(candidate));
        if (weight > 1.0 - 1e-9) {
            rest.branch_weight = state.branch_weight;
            return {true, {*first, *second, bell, bell_correction_name(bell), photons}, rest};
        }
    }
    throw std::logic_error("station atoms did not factor into a Bell state");
}

// ---------------------------------------------------------------------------

Register mediated_cnot(const Register& reg, std::size_t control, std::size_t target,
                       OutcomeChooser& chooser) {
    Register joint = tensor(reg, Register::photon_plus());
    const std::size_t photon = joint.subsystem_count() - 1;

    joint = photon_atom_cnot(joint, control, photon);
    joint = apply_unitary(joint, photon, interferometer_map());
    joint = photon_atom_cnot(joint, target, photon);

    auto outcomes = measure(joint, photon, photon_pm_basis());
    const std::size_t picked = pick_outcome(chooser, outcomes);
    if (outcomes[picked].label == "vac") {
        throw std::logic_error("mediator photon had vacuum amplitude");
    }
    Register post = outcomes[picked].post;
    post.branch_weight = reg.branch_weight * outcomes[picked].probability;
    if (outcomes[picked].label == "-") {
        // pi pulse about y then about x on the control; equals Z up to a
        // global phase, applied here as Z so matrix identities hold exactly.
        post = apply_unitary(post, control, pauli_z());
    }
    return post;
}

Register mediated_cnot_standard(const Register& reg, std::size_t control, std::size_t target,
                                OutcomeChooser& chooser) {
    Register state = apply_unitary(reg, target, half_pi_pulse());
    state = mediated_cnot(state, control, target, chooser);
    return apply_unitary(state, target, half_pi_pulse());
}

PurifyResult purify(const Register& pair1, const Register& pair2, OutcomeChooser& chooser) {
    for (const Register* pair : {&pair1, &pair2}) {
        if (pair->subsystem_count() != 2 || pair->kind(0) != Subsystem::AtomQubit ||
            pair->kind(1) != Subsystem::AtomQubit) {
            throw std::invalid_argument("purify expects two two-atom pairs");
        }
    }

    Register joint = tensor(pair1, pair2);  // (A1, B1, A2, B2)
    joint = mediated_cnot_standard(joint, 0, 2, chooser);
    joint = mediated_cnot_standard(joint, 1, 3, chooser);

    auto b_outcomes = measure(joint, 3, atom_standard_basis());
    const std::size_t b_pick = pick_outcome(chooser, b_outcomes);
    Register after_b = b_outcomes[b_pick].post;

    auto a_outcomes = measure(after_b, 2, atom_standard_basis());
    const std::size_t a_pick = pick_outcome(chooser, a_outcomes);
    Register post = a_outcomes[a_pick].post;
    post.branch_weight =
        joint.branch_weight * b_outcomes[b_pick].probability * a_outcomes[a_pick].probability;

    const char ma = a_outcomes[a_pick].label[0];
    const char mb = b_outcomes[b_pick].label[0];
    return {ma == mb, post, ma, mb};
}

BsmResult deterministic_bsm(const Register& reg, std::size_t atom1, std::size_t atom2,
                            OutcomeChooser& chooser) {
    for (std::size_t a : {atom1, atom2}) {
        if (a >= reg.subsystem_count() || reg.kind(a) != Subsystem::AtomQubit) {
            throw std::invalid_argument("deterministic_bsm targets must be atom qubits");
        }
    }
    const std::size_t pair[2] = {atom1, atom2};

    Register state = apply_unitary(reg, pair, atom_cnot_matrix());
    state = apply_unitary(state, atom1, half_pi_pulse());

    auto first = measure(state, atom1, atom_standard_basis(), /*keep=*/true);
    const std::size_t p1 = pick_outcome(chooser, first);
    auto second = measure(first[p1].post, atom2, atom_standard_basis(), /*keep=*/true);
    const std::size_t p2 = pick_outcome(chooser, second);

    Register collapsed = second[p2].post;
    collapsed.branch_weight =
        reg.branch_weight * first[p1].probability * second[p2].probability;

    // Undo the decode so the atoms are left in the Bell state just measured.
    collapsed = apply_unitary(collapsed, atom1, half_pi_pulse());
    collapsed = apply_unitary(collapsed, pair, atom_cnot_matrix());

    const char m1 = first[p1].label[0];
    const char m2 = second[p2].label[0];
    BellLabel label;
    if (m2 == '0') {
        label = m1 == '0' ? BellLabel::PhiPlus : BellLabel::PhiMinus;
    } else {
        label = m1 == '0' ? BellLabel::PsiPlus : BellLabel::PsiMinus;
    }
    return {label, m1, m2, collapsed};
}

Register two_sided_prep() {
    // (|+>|phi+> + |+>|phi->)/sqrt2 over (photon, A, B), built term by term.
    const Register plus = Register::photon_plus();
    const Register phi_plus = bell_pair(BellLabel::PhiPlus);
    const Register phi_minus = bell_pair(BellLabel::PhiMinus);

    const Register term_a = tensor(plus, phi_plus);
    const Register term_b = tensor(plus, phi_minus);
    std::vector<cxd> amps(term_a.total_dim());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        amps[i] = kSqrtHalf * (term_a.amplitudes()[i] + term_b.amplitudes()[i]);
    }
    return Register::from_amplitudes(term_a.layout(), std::move(amps));
}

}  // namespace qrep
