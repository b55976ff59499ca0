#include "qrep/register.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qrep {

namespace {

std::size_t product_dim(const std::vector<Subsystem>& subs) {
    std::size_t d = 1;
    for (Subsystem s : subs) d *= subsystem_dim(s);
    return d;
}

void check_capacity(std::size_t count) {
    if (count > max_subsystems) {
        throw std::length_error("register capacity exceeded (max 8 subsystems)");
    }
}

void check_orthonormal(const Matrix& vectors) {
    if (!vectors.is_unitary(unitary_tol)) {
        throw std::invalid_argument("measurement basis is not orthonormal");
    }
}

}  // namespace

MeasurementBasis atom_standard_basis() {
    return {{"0", "1"}, Matrix::identity(2)};
}

MeasurementBasis atom_pm_basis() {
    const double s = 1.0 / std::sqrt(2.0);
    return {{"+", "-"}, Matrix(2, 2, {s, s, s, -s})};
}

MeasurementBasis photon_time_bin_basis() {
    return {{"e", "l", "vac"}, Matrix::identity(3)};
}

MeasurementBasis photon_pm_basis() {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix m(3, 3);
    m(0, 0) = s;
    m(1, 0) = s;
    m(0, 1) = s;
    m(1, 1) = -s;
    m(2, 2) = 1.0;
    return {{"+", "-", "vac"}, m};
}

Register Register::basis_state(std::vector<Subsystem> subsystems, const std::vector<std::size_t>& levels) {
    check_capacity(subsystems.size());
    if (levels.size() != subsystems.size()) {
        throw std::invalid_argument("level list does not match subsystem list");
    }
    Register reg;
    reg.subsystems_ = std::move(subsystems);
    reg.amplitudes_.assign(product_dim(reg.subsystems_), cxd(0.0, 0.0));
    reg.amplitudes_[reg.flat_index(levels)] = 1.0;
    return reg;
}

Register Register::from_amplitudes(std::vector<Subsystem> subsystems, std::vector<cxd> amplitudes) {
    check_capacity(subsystems.size());
    Register reg;
    reg.subsystems_ = std::move(subsystems);
    if (amplitudes.size() != product_dim(reg.subsystems_)) {
        throw std::invalid_argument("amplitude vector length does not match subsystem dimensions");
    }
    reg.amplitudes_ = std::move(amplitudes);
    if (std::abs(reg.norm_sq() - 1.0) > 1e-9) {
        throw std::invalid_argument("register amplitudes are not normalized");
    }
    return reg;
}

Register Register::atom(std::size_t level) {
    return basis_state({Subsystem::AtomQubit}, {level});
}

Register Register::atom_plus() {
    const double s = 1.0 / std::sqrt(2.0);
    return from_amplitudes({Subsystem::AtomQubit}, {s, s});
}

Register Register::photon(std::size_t level) {
    return basis_state({Subsystem::TimeBinPhoton}, {level});
}

Register Register::photon_plus() {
    const double s = 1.0 / std::sqrt(2.0);
    return from_amplitudes({Subsystem::TimeBinPhoton}, {s, s, 0.0});
}

cxd Register::amplitude(const std::vector<std::size_t>& levels) const {
    return amplitudes_[flat_index(levels)];
}

double Register::norm_sq() const {
    double n = 0.0;
    for (const cxd& a : amplitudes_) n += std::norm(a);
    return n;
}

std::size_t Register::stride(std::size_t i) const {
    std::size_t s = 1;
    for (std::size_t j = i + 1; j < subsystems_.size(); ++j) s *= dim(j);
    return s;
}

std::size_t Register::level_of(std::size_t index, std::size_t i) const {
    return (index / stride(i)) % dim(i);
}

std::size_t Register::flat_index(const std::vector<std::size_t>& levels) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < subsystems_.size(); ++i) {
        if (levels[i] >= dim(i)) {
            throw std::out_of_range("subsystem level out of range");
        }
        idx += levels[i] * stride(i);
    }
    return idx;
}

Register tensor(const Register& a, const Register& b) {
    check_capacity(a.subsystem_count() + b.subsystem_count());
    std::vector<Subsystem> subs = a.layout();
    subs.insert(subs.end(), b.layout().begin(), b.layout().end());

    std::vector<cxd> amps(a.total_dim() * b.total_dim());
    for (std::size_t i = 0; i < a.total_dim(); ++i) {
        for (std::size_t j = 0; j < b.total_dim(); ++j) {
            amps[i * b.total_dim() + j] = a.amplitudes()[i] * b.amplitudes()[j];
        }
    }
    Register out = Register::from_amplitudes(std::move(subs), std::move(amps));
    out.branch_weight = a.branch_weight * b.branch_weight;
    return out;
}

Register apply_unitary(const Register& reg, std::span<const std::size_t> targets, const Matrix& u) {
    if (targets.empty()) {
        throw std::invalid_argument("apply_unitary needs at least one target");
    }
    std::size_t block = 1;
    for (std::size_t t : targets) {
        if (t >= reg.subsystem_count()) {
            throw std::out_of_range("unitary target index out of range");
        }
        block *= reg.dim(t);
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = i + 1; j < targets.size(); ++j) {
            if (targets[i] == targets[j]) {
                throw std::invalid_argument("duplicate unitary target");
            }
        }
    }
    if (u.rows() != block || u.cols() != block) {
        throw std::invalid_argument("unitary dimension does not match targets");
    }
    if (!u.is_unitary(unitary_tol)) {
        throw std::invalid_argument("matrix is not unitary");
    }

    // Offset of each target-level combination, row-major in target order.
    std::vector<std::size_t> offsets(block, 0);
    for (std::size_t combo = 0; combo < block; ++combo) {
        std::size_t rest = combo;
        std::size_t off = 0;
        for (std::size_t k = targets.size(); k-- > 0;) {
            const std::size_t d = reg.dim(targets[k]);
            off += (rest % d) * reg.stride(targets[k]);
            rest /= d;
        }
        offsets[combo] = off;
    }

    const auto& in = reg.amplitudes();
    std::vector<cxd> out(in.size(), cxd(0.0, 0.0));
    std::vector<cxd> gathered(block);
    for (std::size_t base = 0; base < in.size(); ++base) {
        bool representative = true;
        for (std::size_t t : targets) {
            if (reg.level_of(base, t) != 0) {
                representative = false;
                break;
            }
        }
        if (!representative) continue;
        for (std::size_t c = 0; c < block; ++c) gathered[c] = in[base + offsets[c]];
        for (std::size_t r = 0; r < block; ++r) {
            cxd acc = 0.0;
            for (std::size_t c = 0; c < block; ++c) acc += u(r, c) * gathered[c];
            out[base + offsets[r]] = acc;
        }
    }

    Register result = Register::from_amplitudes(reg.layout(), std::move(out));
    result.branch_weight = reg.branch_weight;
    return result;
}

Register apply_unitary(const Register& reg, std::size_t target, const Matrix& u) {
    const std::size_t targets[1] = {target};
    return apply_unitary(reg, targets, u);
}

std::vector<MeasurementOutcome> measure(const Register& reg, std::size_t target,
                                        const MeasurementBasis& basis, bool keep) {
    if (target >= reg.subsystem_count()) {
        throw std::out_of_range("measurement target out of range");
    }
    const std::size_t d = reg.dim(target);
    if (basis.vectors.rows() != d || basis.vectors.cols() != d || basis.labels.size() != d) {
        throw std::invalid_argument("measurement basis does not span the target subsystem");
    }
    check_orthonormal(basis.vectors);

    std::vector<Subsystem> reduced_layout;
    for (std::size_t i = 0; i < reg.subsystem_count(); ++i) {
        if (i != target) reduced_layout.push_back(reg.kind(i));
    }

    const std::size_t stride = reg.stride(target);
    const std::size_t reduced_dim = reg.total_dim() / d;
    const auto& in = reg.amplitudes();

    std::vector<MeasurementOutcome> outcomes;
    outcomes.reserve(d);
    for (std::size_t b = 0; b < d; ++b) {
        // Contract the target against basis vector b: one amplitude per
        // assignment of the remaining subsystems.
        std::vector<cxd> reduced(reduced_dim);
        std::size_t r = 0;
        for (std::size_t idx = 0; idx < in.size(); ++idx) {
            if (reg.level_of(idx, target) != 0) continue;
            cxd acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                acc += std::conj(basis.vectors(k, b)) * in[idx + k * stride];
            }
            reduced[r++] = acc;
        }

        double prob = 0.0;
        for (const cxd& a : reduced) prob += std::norm(a);

        MeasurementOutcome outcome;
        outcome.label = basis.labels[b];
        outcome.probability = prob;
        if (prob > 1e-15) {
            const double scale = 1.0 / std::sqrt(prob);
            for (cxd& a : reduced) a *= scale;
        } else {
            std::fill(reduced.begin(), reduced.end(), cxd(0.0, 0.0));
        }

        if (keep) {
            // Re-embed the collapsed subsystem in basis state b.
            std::vector<cxd> full(in.size(), cxd(0.0, 0.0));
            std::size_t rr = 0;
            for (std::size_t idx = 0; idx < in.size(); ++idx) {
                if (reg.level_of(idx, target) != 0) continue;
                for (std::size_t k = 0; k < d; ++k) {
                    full[idx + k * stride] += basis.vectors(k, b) * reduced[rr];
                }
                ++rr;
            }
            if (prob > 1e-15) {
                outcome.post = Register::from_amplitudes(reg.layout(), std::move(full));
            }
        } else if (prob > 1e-15) {
            outcome.post = Register::from_amplitudes(reduced_layout, std::move(reduced));
        }
        outcome.post.branch_weight = reg.branch_weight * prob;
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

double fidelity(const Register& reg, const Register& reference) {
    if (reg.layout() != reference.layout()) {
        throw std::invalid_argument("fidelity requires identical subsystem layouts");
    }
    cxd overlap = 0.0;
    for (std::size_t i = 0; i < reg.total_dim(); ++i) {
        overlap += std::conj(reference.amplitudes()[i]) * reg.amplitudes()[i];
    }
    return std::norm(overlap);
}

DensityMatrix::DensityMatrix(std::vector<Subsystem> subsystems, Matrix rho)
    : subsystems_(std::move(subsystems)), rho_(std::move(rho)) {}

double DensityMatrix::trace() const {
    return rho_.trace().real();
}

double DensityMatrix::purity() const {
    return (rho_ * rho_).trace().real();
}

double DensityMatrix::fidelity_with(const Register& psi) const {
    if (psi.layout() != subsystems_) {
        throw std::invalid_argument("density-matrix fidelity requires identical layouts");
    }
    cxd acc = 0.0;
    for (std::size_t r = 0; r < rho_.rows(); ++r) {
        for (std::size_t c = 0; c < rho_.cols(); ++c) {
            acc += std::conj(psi.amplitudes()[r]) * rho_(r, c) * psi.amplitudes()[c];
        }
    }
    return acc.real();
}

double DensityMatrix::diagonal_entry(const std::vector<std::size_t>& levels) const {
    Register probe = Register::basis_state(subsystems_, levels);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < probe.total_dim(); ++i) {
        if (probe.amplitudes()[i] != cxd(0.0, 0.0)) idx = i;
    }
    return rho_(idx, idx).real();
}

DensityMatrix partial_trace(const Register& reg, std::span<const std::size_t> keep) {
    if (keep.empty()) {
        throw std::invalid_argument("partial_trace needs at least one kept subsystem");
    }
    std::vector<Subsystem> kept_layout;
    std::size_t kept_dim = 1;
    for (std::size_t k : keep) {
        if (k >= reg.subsystem_count()) {
            throw std::out_of_range("partial_trace index out of range");
        }
        kept_layout.push_back(reg.kind(k));
        kept_dim *= reg.dim(k);
    }

    std::vector<std::size_t> env;
    for (std::size_t i = 0; i < reg.subsystem_count(); ++i) {
        if (std::find(keep.begin(), keep.end(), i) == keep.end()) env.push_back(i);
    }
    std::size_t env_dim = 1;
    for (std::size_t e : env) env_dim *= reg.dim(e);

    auto flat_of = [&](std::size_t kept_combo, std::size_t env_combo) {
        std::size_t idx = 0;
        std::size_t rest = kept_combo;
        for (std::size_t k = keep.size(); k-- > 0;) {
            const std::size_t d = reg.dim(keep[k]);
            idx += (rest % d) * reg.stride(keep[k]);
            rest /= d;
        }
        rest = env_combo;
        for (std::size_t k = env.size(); k-- > 0;) {
            const std::size_t d = reg.dim(env[k]);
            idx += (rest % d) * reg.stride(env[k]);
            rest /= d;
        }
        return idx;
    };

    Matrix rho(kept_dim, kept_dim);
    const auto& amps = reg.amplitudes();
    for (std::size_t r = 0; r < kept_dim; ++r) {
        for (std::size_t c = 0; c < kept_dim; ++c) {
            cxd acc = 0.0;
            for (std::size_t e = 0; e < env_dim; ++e) {
                acc += amps[flat_of(r, e)] * std::conj(amps[flat_of(c, e)]);
            }
            rho(r, c) = acc;
        }
    }
    return DensityMatrix(std::move(kept_layout), std::move(rho));
}

}  // namespace qrep
