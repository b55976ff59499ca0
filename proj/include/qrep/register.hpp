#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qrep/matrix.hpp"

namespace qrep {

/// Subsystem kinds. Atoms are qubits; photonic time-bin qubits carry a third
/// level |vac> so "no photon" is a first-class state rather than an exception.
enum class Subsystem { AtomQubit, TimeBinPhoton };

constexpr std::size_t subsystem_dim(Subsystem s) {
    return s == Subsystem::AtomQubit ? 2 : 3;
}

// Photon levels.
inline constexpr std::size_t photon_early = 0;
inline constexpr std::size_t photon_late = 1;
inline constexpr std::size_t photon_vacuum = 2;

inline constexpr std::size_t max_subsystems = 8;
inline constexpr double amplitude_tol = 1e-12;
inline constexpr double unitary_tol = 1e-10;

/// Orthonormal measurement basis for one subsystem: column k of `vectors`
/// is the basis state carrying `labels[k]`.
struct MeasurementBasis {
    std::vector<std::string> labels;
    Matrix vectors;
};

MeasurementBasis atom_standard_basis();                 // 0, 1
MeasurementBasis atom_pm_basis();                       // +, -
MeasurementBasis photon_time_bin_basis();               // e, l, vac
MeasurementBasis photon_pm_basis();                     // +, -, vac

/// Dense normalized state vector over an ordered list of small subsystems.
/// Index order is row-major: the first subsystem is the most significant
/// digit. Operations return new registers; values are never mutated in
/// place, so registers can be shared freely across threads.
class Register {
public:
    Register() = default;

    static Register basis_state(std::vector<Subsystem> subsystems, const std::vector<std::size_t>& levels);
    static Register from_amplitudes(std::vector<Subsystem> subsystems, std::vector<cxd> amplitudes);

    static Register atom(std::size_t level);
    static Register atom_plus();
    static Register photon(std::size_t level);
    static Register photon_plus();

    std::size_t subsystem_count() const { return subsystems_.size(); }
    Subsystem kind(std::size_t i) const { return subsystems_.at(i); }
    const std::vector<Subsystem>& layout() const { return subsystems_; }
    std::size_t dim(std::size_t i) const { return subsystem_dim(subsystems_.at(i)); }
    std::size_t total_dim() const { return amplitudes_.size(); }

    const std::vector<cxd>& amplitudes() const { return amplitudes_; }
    cxd amplitude(const std::vector<std::size_t>& levels) const;

    double norm_sq() const;

    /// Path probability bookkeeping for heralded branches; 1 unless a
    /// branching operation scaled it. Carried through, never renormalized.
    double branch_weight = 1.0;

    std::size_t stride(std::size_t i) const;
    std::size_t level_of(std::size_t index, std::size_t i) const;
    std::size_t flat_index(const std::vector<std::size_t>& levels) const;

private:
    std::vector<Subsystem> subsystems_;
    std::vector<cxd> amplitudes_;
};

Register tensor(const Register& a, const Register& b);

/// Applies `u` to the listed subsystems (in the given order); all other
/// subsystems are untouched. `u` must be unitary within unitary_tol and
/// match the product of the target dimensions.
Register apply_unitary(const Register& reg, std::span<const std::size_t> targets, const Matrix& u);
Register apply_unitary(const Register& reg, std::size_t target, const Matrix& u);

struct MeasurementOutcome {
    std::string label;
    double probability = 0.0;
    Register post;  // renormalized; zero amplitudes when probability is 0
};

/// Complete projective measurement of one subsystem. Returns every basis
/// outcome with its Born probability; callers sample or enumerate. The
/// measured subsystem is removed from the post-state (a detected photon is
/// gone) unless `keep` is set, in which case it collapses in place.
std::vector<MeasurementOutcome> measure(const Register& reg, std::size_t target,
                                        const MeasurementBasis& basis, bool keep = false);

/// |<reference|reg>|^2; layouts must match.
double fidelity(const Register& reg, const Register& reference);

/// Reduced density matrix over the kept subsystems, in the order given.
class DensityMatrix {
public:
    DensityMatrix() = default;
    DensityMatrix(std::vector<Subsystem> subsystems, Matrix rho);

    const Matrix& matrix() const { return rho_; }
    const std::vector<Subsystem>& layout() const { return subsystems_; }

    double trace() const;
    double purity() const;  // Tr(rho^2)
    /// <psi|rho|psi> for a pure reference with the same layout.
    double fidelity_with(const Register& psi) const;
    double diagonal_entry(const std::vector<std::size_t>& levels) const;

private:
    std::vector<Subsystem> subsystems_;
    Matrix rho_;
};

DensityMatrix partial_trace(const Register& reg, std::span<const std::size_t> keep);

}  // namespace qrep
