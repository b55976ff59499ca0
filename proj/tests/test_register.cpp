#include <doctest.h>

#include "qrep/register.hpp"
#include "qrep/gates.hpp"
#include "test_helpers.hpp"

using namespace qrep;

namespace {
const std::vector<Subsystem> kPair = {Subsystem::AtomQubit, Subsystem::AtomQubit};
}

TEST_CASE("tensor of basis states puts the amplitude on the product index") {
    const Register reg = tensor(Register::atom(0), Register::photon(photon_early));
    CHECK(reg.subsystem_count() == 2);
    CHECK(std::abs(reg.amplitude({0, photon_early}) - cxd(1.0, 0.0)) < 1e-15);
    CHECK(reg.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tensor of plus states spreads four equal amplitudes") {
    const Register reg = tensor(Register::atom_plus(), Register::photon_plus());
    for (std::size_t a : {0, 1}) {
        for (std::size_t p : {photon_early, photon_late}) {
            CHECK(std::abs(reg.amplitude({a, p}) - cxd(0.5, 0.0)) < 1e-12);
        }
        CHECK(std::abs(reg.amplitude({a, photon_vacuum})) < 1e-15);
    }
}

TEST_CASE("tensor preserves norm for random states") {
    RandomStream rng(2024);
    for (int i = 0; i < 50; ++i) {
        const Register a = test::random_state({Subsystem::AtomQubit, Subsystem::TimeBinPhoton}, rng);
        const Register b = test::random_state({Subsystem::AtomQubit}, rng);
        CHECK(tensor(a, b).norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("tensor is associative amplitude-wise") {
    RandomStream rng(7);
    for (int i = 0; i < 20; ++i) {
        const Register a = test::random_state({Subsystem::AtomQubit}, rng);
        const Register b = test::random_state({Subsystem::TimeBinPhoton}, rng);
        const Register c = test::random_state({Subsystem::AtomQubit}, rng);
        CHECK(test::max_amp_diff(tensor(tensor(a, b), c), tensor(a, tensor(b, c))) < 1e-12);
    }
}

TEST_CASE("tensor rejects oversized registers") {
    Register big = Register::atom(0);
    for (int i = 0; i < 7; ++i) big = tensor(big, Register::atom(0));
    CHECK(big.subsystem_count() == 8);
    CHECK_THROWS_AS(tensor(big, Register::atom(0)), std::length_error);
}

TEST_CASE("apply_unitary identity leaves the register unchanged") {
    RandomStream rng(11);
    const Register reg = test::random_state({Subsystem::AtomQubit, Subsystem::TimeBinPhoton}, rng);
    const std::size_t targets[2] = {0, 1};
    CHECK(test::max_amp_diff(apply_unitary(reg, targets, Matrix::identity(6)), reg) < 1e-15);
}

TEST_CASE("half-pi pulse takes |0> to |+>") {
    const Register plus = apply_unitary(Register::atom(0), 0, half_pi_pulse());
    CHECK(fidelity(plus, Register::atom_plus()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two successive half-pi rotations flip the qubit up to phase") {
    const Matrix twice = rotation_y(M_PI / 2.0) * rotation_y(M_PI / 2.0);
    const Register flipped = apply_unitary(Register::atom(0), 0, twice);
    CHECK(fidelity(flipped, Register::atom(1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("apply_unitary validates inputs") {
    const Register reg = tensor(Register::atom(0), Register::atom(0));
    Matrix not_unitary(2, 2, {1.0, 1.0, 0.0, 1.0});
    CHECK_THROWS_AS(apply_unitary(reg, 0, not_unitary), std::invalid_argument);
    CHECK_THROWS_AS(apply_unitary(reg, 5, Matrix::identity(2)), std::out_of_range);
    const std::size_t dup[2] = {0, 0};
    CHECK_THROWS_AS(apply_unitary(reg, dup, Matrix::identity(4)), std::invalid_argument);
}

TEST_CASE("unitaries preserve the norm on random registers") {
    RandomStream rng(99);
    for (int i = 0; i < 100; ++i) {
        const Register reg =
            test::random_state({Subsystem::AtomQubit, Subsystem::TimeBinPhoton,
                                Subsystem::AtomQubit}, rng);
        const Matrix u = test::random_unitary(6, rng);
        const std::size_t targets[2] = {0, 1};
        CHECK(apply_unitary(reg, targets, u).norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("apply_unitary acts on arbitrary target order") {
    // Swap-like check: applying X to atom 1 via targets {1} only.
    const Register reg = tensor(Register::atom(0), Register::atom(0));
    const Register flipped = apply_unitary(reg, 1, pauli_x());
    CHECK(std::abs(flipped.amplitude({0, 1}) - cxd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("measuring |+> photon in the +/- basis is deterministic") {
    auto outcomes = measure(Register::photon_plus(), 0, photon_pm_basis());
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].label == "+");
    CHECK(outcomes[0].probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(outcomes[1].probability == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(outcomes[2].probability == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("measuring a vacuum photon reads vac and leaves atoms alone") {
    const Register reg = tensor(tensor(Register::atom_plus(), Register::atom_plus()),
                                Register::photon(photon_vacuum));
    auto outcomes = measure(reg, 2, photon_pm_basis());
    CHECK(outcomes[2].label == "vac");
    CHECK(outcomes[2].probability == doctest::Approx(1.0).epsilon(1e-12));
    const Register atoms = tensor(Register::atom_plus(), Register::atom_plus());
    CHECK(fidelity(outcomes[2].post, atoms) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("measurement outcome probabilities always sum to one") {
    RandomStream rng(31337);
    for (int i = 0; i < 50; ++i) {
        const Register reg =
            test::random_state({Subsystem::TimeBinPhoton, Subsystem::AtomQubit}, rng);
        for (auto [target, basis] :
             {std::pair<std::size_t, MeasurementBasis>{0, photon_pm_basis()},
              {0, photon_time_bin_basis()},
              {1, atom_standard_basis()},
              {1, atom_pm_basis()}}) {
            auto outcomes = measure(reg, target, basis);
            double total = 0.0;
            for (const auto& o : outcomes) total += o.probability;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("measure rejects a non-orthonormal basis") {
    MeasurementBasis bad{{"a", "b"}, Matrix(2, 2, {1.0, 1.0, 0.0, 0.0})};
    CHECK_THROWS_AS(measure(Register::atom(0), 0, bad), std::invalid_argument);
}

TEST_CASE("fidelity basics") {
    RandomStream rng(5);
    const Register psi = test::random_state(kPair, rng);
    CHECK(fidelity(psi, psi) == doctest::Approx(1.0).epsilon(1e-12));

    const Register phi_plus = Register::from_amplitudes(
        kPair, {cxd(M_SQRT1_2, 0), 0, 0, cxd(M_SQRT1_2, 0)});
    const Register psi_plus = Register::from_amplitudes(
        kPair, {0, cxd(M_SQRT1_2, 0), cxd(M_SQRT1_2, 0), 0});
    CHECK(fidelity(phi_plus, psi_plus) == doctest::Approx(0.0).epsilon(1e-12));

    // A bit flip on the second atom carries psi+ onto phi+.
    const Register flipped = apply_unitary(psi_plus, 1, pauli_x());
    CHECK(fidelity(phi_plus, flipped) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(fidelity(phi_plus, Register::atom(0)), std::invalid_argument);
}

TEST_CASE("partial trace of a product state is pure") {
    RandomStream rng(17);
    for (int i = 0; i < 20; ++i) {
        const Register a = test::random_state({Subsystem::AtomQubit}, rng);
        const Register b = test::random_state({Subsystem::TimeBinPhoton}, rng);
        const std::size_t keep[1] = {0};
        const DensityMatrix rho = partial_trace(tensor(a, b), keep);
        CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(rho.fidelity_with(a) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("partial trace validates indices") {
    const Register reg = tensor(Register::atom(0), Register::atom(0));
    const std::size_t bad[1] = {4};
    CHECK_THROWS_AS(partial_trace(reg, bad), std::out_of_range);
    CHECK_THROWS_AS(partial_trace(reg, std::span<const std::size_t>{}), std::invalid_argument);
}
