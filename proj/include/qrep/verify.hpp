#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrep/matrix.hpp"

namespace qrep {

struct SuiteResult {
    std::string name;
    std::string detail;
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

struct VerifyOptions {
    /// Test hook: run the truth-table suite against this matrix instead of
    /// the real reflection gate.
    std::optional<Matrix> gate_override;
};

/// Noiseless enumeration suites over the protocol layer: gate truth tables,
/// generation branches, swap branches with outcome decoding, the mediated
/// CNOT, the complete Bell measurement and the two-sided-cavity state.
std::vector<SuiteResult> run_verification(const VerifyOptions& options = {});

}  // namespace qrep
