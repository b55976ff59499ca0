#pragma once

#include <optional>

#include "qrep/random.hpp"
#include "qrep/register.hpp"

namespace qrep {

/// Atom-cavity parameters. Cooperativity is a figure of merit only: gate
/// success and error rates are independent inputs (GateNoise), not derived
/// from these.
struct CavityParams {
    double coupling_g = 0.0;
    double cavity_decay_kappa = 0.0;
    double atom_decay_gamma = 0.0;
    std::optional<double> photon_duration_s;
};

/// C = 4 g^2 / (kappa * Gamma)
double cooperativity(const CavityParams& p);

/// Deterministic photon-atom gates want C of order 100-1000.
bool below_typical_cooperativity(double c);

struct GateNoise {
    double success_prob = 1.0;   // heralded: failure shows up as a missing photon
    double error_rate = 0.0;     // silent single-atom Pauli error after an ideal gate
    double gate_time_s = 10e-6;

    void validate() const;
};

// Single-qubit atom matrices.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
/// Microwave pulse used for atom initialization and the inter-round
/// relabeling: |0> -> (|0>+|1>)/sqrt2, |1> -> (|0>-|1>)/sqrt2.
Matrix half_pi_pulse();
/// Rotation about y by `theta`; two half-pi rotations compose to a bit flip
/// up to global phase.
Matrix rotation_y(double theta);

/// Reflection gate of the single-sided cavity on atom (x) photon(e,l,vac):
/// |0,e> -> -|0,e>, |1,e> -> -|1,e>, |0,l> -> -|0,l>, |1,l> -> |1,l>,
/// vacuum untouched. 6x6, ordered (atom, photon).
const Matrix& controlled_phase_matrix();

/// The same reflection written in the photon +/- basis, where it reads as an
/// atom-controlled photon bit flip with an overall minus sign:
/// H_p * controlled_phase_matrix * H_p.
Matrix photon_atom_cnot_matrix();

/// Photon e/l <-> +/- basis rotation (Hadamard on the two bins, vac fixed).
Matrix photon_pm_change();

/// Time-bin interferometer that recombines |+> into the early bin and |->
/// into the late bin. Used to route the +/- outcome of one cavity into the
/// time-bin input of the next.
Matrix interferometer_map();

/// Applies the cavity reflection gate. `atom` must be an AtomQubit and
/// `photon` a TimeBinPhoton; any vacuum amplitude passes through unchanged.
Register controlled_phase(const Register& reg, std::size_t atom, std::size_t photon);

/// Identical physical operation viewed in the photon +/- basis; provided so
/// protocol code reads like the gate sequences it implements.
Register photon_atom_cnot(const Register& reg, std::size_t atom, std::size_t photon);

/// Alternative photonic encodings for the same gate family. Each variant is
/// a bijection onto the canonical two-level photon basis (vac fixed).
enum class PhotonEncoding { TimeBin, LinearPol, CircularPol };

/// 3x3 relabeling that carries the variant basis onto the canonical one.
Matrix encoding_to_canonical(PhotonEncoding encoding);

Register encode_variant(const Register& reg, std::size_t photon,
                        PhotonEncoding from, PhotonEncoding to);

/// Reflection gate for linear polarization (H, V): the mirror adds a pi
/// shift to |V> when the atom blocks the cavity, i.e. -1 on |0,V> only.
/// Note the atom's coupled ground state is the opposite one in this scheme,
/// so the atom frame is flipped relative to the canonical gate.
Matrix linear_pol_gate_matrix();

/// Reflection gate for circular polarization (R, L): no shift only on
/// |1,R>; -1 elsewhere.
Matrix circular_pol_gate_matrix();

enum class GateBranch { Success, HeraldedLoss, SilentError };

struct NoisyGateResult {
    GateBranch branch = GateBranch::Success;
    Register state;
    char pauli = 0;  // 'X', 'Y' or 'Z' on the SilentError branch
};

/// Gate channel: with probability success*(1-error) the ideal gate; with
/// probability 1-success the photon is lost (replaced by |vac>, noticed only
/// at detection); with probability success*error the ideal gate followed by
/// a uniformly random atom Pauli. Losing an entangled photon collapses the
/// remaining state along the time-bin basis, which realizes the traced-out
/// mixture trajectory by trajectory.
NoisyGateResult noisy_gate(const Register& reg, std::size_t atom, std::size_t photon,
                           const GateNoise& noise, OutcomeChooser& chooser);

}  // namespace qrep
