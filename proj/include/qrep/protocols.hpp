#pragma once

#include <optional>
#include <string>

#include "qrep/gates.hpp"
#include "qrep/random.hpp"
#include "qrep/register.hpp"

namespace qrep {

enum class BellLabel { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

const char* bell_name(BellLabel label);

/// Two-atom Bell pair.
Register bell_pair(BellLabel label);

/// Relabeling induced by a half-pi pulse on both atoms: PhiPlus and PsiMinus
/// are fixed, PhiMinus and PsiPlus exchange. An involution.
BellLabel rotate_relabel(BellLabel label);

/// Truth table mapping the two parity-photon outcomes to the measured Bell
/// state: (+,+) PhiPlus, (+,-) PhiMinus, (-,+) PsiPlus, (-,-) PsiMinus.
BellLabel decode_parity_outcomes(char first, char second);

/// Pauli frame applied at the far node after a swap: I, Z, X, ZX.
Matrix bell_correction_matrix(BellLabel label);
const char* bell_correction_name(BellLabel label);

// ---------------------------------------------------------------------------
// Heralded entanglement generation across one elementary link.

struct GenerationConfig {
    GateNoise noise_a;
    GateNoise noise_b;
    double eta_link = 1.0;  // fiber transmission folded with both coupling factors
    double eta_d = 1.0;     // detector efficiency
    double eta_s = 1.0;     // source emission probability
    int max_photons = 100;  // cap on the undetected-retry loop

    void validate() const;
};

struct GenerationOutcome {
    enum class Kind {
        Entangled,            // heralded success; state holds the (A, B) pair
        VacuumNoOp,           // nothing reached the first cavity; atoms untouched
        MixedFailure,         // photon lost after entangling with A; attempt aborted
        UndetectedRetryable,  // reflected from both cavities but never detected
    };

    Kind kind = Kind::VacuumNoOp;
    BellLabel label = BellLabel::PhiPlus;
    char detected_sign = 0;  // '+' or '-' on the Entangled branch
    Register state;          // two atoms (A, B); unset on MixedFailure
    DensityMatrix mixed;     // MixedFailure only: traced atom state
    int photons_used = 0;
};

/// One generation attempt: atoms start in |0>, get a half-pi pulse, and a
/// single +-state photon is reflected off cavity A, sent down the link,
/// reflected off cavity B and detected in the +/- basis. A '-' click is
/// repaired with a bit flip at B, so every success ends in PhiPlus.
/// Undetected-but-reflected photons leave the atoms in a recoverable parity
/// branch and the attempt retries with a fresh photon (up to max_photons);
/// any loss after the first reflection aborts the attempt with the atoms in
/// a mixed state.
GenerationOutcome generate_entanglement(const GenerationConfig& cfg, OutcomeChooser& chooser);

/// Joint (A, B, photon) state after both reflections with everything ideal,
/// just before detection.
Register generation_pre_detection_state();

// ---------------------------------------------------------------------------
// Entanglement swapping at a repeater station.

/// Parity measurement of two atoms with one +-state photon reflected off
/// both cavities and detected in +/-: '+' projects onto span{00,11},
/// '-' onto span{01,10}. The photon is created and consumed internally.
struct ParityOutcome {
    char sign = 0;
    Register state;
};
ParityOutcome parity_check(const Register& reg, std::size_t atom_b, std::size_t atom_c,
                           OutcomeChooser& chooser);

struct SwapEfficiencies {
    double eta_d = 1.0;
    double eta_s = 1.0;
    double eta_c = 1.0;
};

struct SwapRecord {
    char first_outcome = 0;
    char second_outcome = 0;
    BellLabel bell = BellLabel::PhiPlus;
    std::string correction;
    int photons_spent = 0;
};

struct SwapResult {
    bool swapped = false;
    SwapRecord record;
    Register state;  // the (A, D) pair when swapped
};

/// Bell measurement of atoms B and C on a register holding (A, B, C, D):
/// one parity photon, half-pi pulses on B and C, a second parity photon,
/// truth-table decode and the Pauli frame applied at D. Each parity round
/// retries up to `attempt_cap` photons; an unregistered photon either never
/// interacted (source, coupling or reflection failure; atoms untouched) or
/// was reflected and missed at the detector, which collapses the parity
/// sector without destroying it. Fails when either round runs out of
/// photons, consuming at most 2*attempt_cap in total.
SwapResult swap_entanglement(const Register& chain, const GateNoise& noise,
                             const SwapEfficiencies& eta, int attempt_cap,
                             OutcomeChooser& chooser);

// ---------------------------------------------------------------------------
// Photon-mediated two-atom gates, purification, complete Bell measurement.

/// CNOT between two distant atoms mediated by one +-state photon: reflect
/// off the control's cavity, recombine time bins, reflect off the target's
/// cavity, detect in +/-; a '-' click is repaired with a pi pulse pair on
/// the control (a Z up to global phase). Control acts in the 0/1 basis, the
/// target in the +/- basis.
Register mediated_cnot(const Register& reg, std::size_t control, std::size_t target,
                       OutcomeChooser& chooser);

/// mediated_cnot with Hadamards on the target before and after: a standard
/// CNOT with both atoms in the 0/1 basis.
Register mediated_cnot_standard(const Register& reg, std::size_t control, std::size_t target,
                                OutcomeChooser& chooser);

struct PurifyResult {
    bool kept = false;
    Register state;  // the surviving (A1, B1) pair when kept
    char outcome_a = 0;
    char outcome_b = 0;
};

/// One purification round: mediated CNOTs A1->A2 and B1->B2, measure the
/// second pair in 0/1, keep the first pair iff the outcomes agree.
PurifyResult purify(const Register& pair1, const Register& pair2, OutcomeChooser& chooser);

struct BsmResult {
    BellLabel label = BellLabel::PhiPlus;
    char m1 = 0;
    char m2 = 0;
    Register state;  // atoms restored to the identified Bell state
};

/// Complete Bell measurement via CNOT + Hadamard decode and two 0/1
/// measurements. The decode is undone afterwards, so the atoms end in the
/// Bell state named by the outcome and the measurement can be repeated.
BsmResult deterministic_bsm(const Register& reg, std::size_t atom1, std::size_t atom2,
                            OutcomeChooser& chooser);

/// Photon-atom-atom state produced by one photon crossing two two-sided
/// cavities: (|+>|PhiPlus> + |+>|PhiMinus>)/sqrt2 over (photon, A, B).
Register two_sided_prep();

}  // namespace qrep
