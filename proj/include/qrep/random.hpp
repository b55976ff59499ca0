#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qrep {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256** seeded via splitmix64. Deterministic across platforms;
/// all distribution sampling in this project is built on uniform doubles
/// from this stream so results do not depend on the standard library.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) {
            word = splitmix64(sm);
        }
    }

    /// Stream for trial `index`, independent of draws taken from this one.
    static RandomStream for_trial(std::uint64_t master_seed, std::uint64_t index) {
        std::uint64_t sm = master_seed + index * 0x9E3779B97F4A7C15ULL;
        return RandomStream(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4] = {};
};

/// Selection point for probabilistic branches (measurement outcomes, noise).
/// Protocols ask the chooser instead of sampling directly, so the same code
/// runs under Born-rule sampling and under exhaustive enumeration.
class OutcomeChooser {
public:
    virtual ~OutcomeChooser() = default;
    virtual std::size_t pick(std::span<const double> probabilities) = 0;
};

class SamplingChooser final : public OutcomeChooser {
public:
    explicit SamplingChooser(RandomStream& rng) : rng_(rng) {}

    std::size_t pick(std::span<const double> probabilities) override {
        const double u = rng_.uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            acc += probabilities[i];
            if (u < acc) return i;
        }
        // Guard against accumulated rounding at u ~ 1.
        for (std::size_t i = probabilities.size(); i-- > 0;) {
            if (probabilities[i] > 0.0) return i;
        }
        return 0;
    }

private:
    RandomStream& rng_;
};

/// Follows a fixed script of picks, recording option counts and branch
/// probabilities as it goes. Picks option 0 past the end of the script.
/// enumerate_branches() uses the recorded trace to walk every branch.
class ScriptedChooser final : public OutcomeChooser {
public:
    ScriptedChooser() = default;
    explicit ScriptedChooser(std::vector<std::size_t> script) : script_(std::move(script)) {}

    std::size_t pick(std::span<const double> probabilities) override {
        const std::size_t depth = trace_picks_.size();
        std::size_t choice = depth < script_.size() ? script_[depth] : first_live(probabilities);
        if (choice >= probabilities.size()) {
            throw std::out_of_range("scripted choice out of range");
        }
        trace_picks_.push_back(choice);
        trace_counts_.push_back(probabilities.size());
        trace_probs_.push_back(std::vector<double>(probabilities.begin(), probabilities.end()));
        path_probability_ *= probabilities[choice];
        return choice;
    }

    const std::vector<std::size_t>& picks() const { return trace_picks_; }
    const std::vector<std::size_t>& option_counts() const { return trace_counts_; }
    const std::vector<std::vector<double>>& option_probs() const { return trace_probs_; }
    double path_probability() const { return path_probability_; }
    std::size_t scripted_depth() const { return script_.size(); }

private:
    static std::size_t first_live(std::span<const double> probabilities) {
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            if (probabilities[i] > 1e-15) return i;
        }
        return 0;
    }

    std::vector<std::size_t> script_;
    std::vector<std::size_t> trace_picks_;
    std::vector<std::size_t> trace_counts_;
    std::vector<std::vector<double>> trace_probs_;
    double path_probability_ = 1.0;
};

template <typename Result>
struct BranchPath {
    std::vector<std::size_t> picks;
    double probability = 1.0;
    Result result;
};

/// Exhaustively enumerates every probabilistic branch of `run`, which must be
/// a deterministic function of the chooser's picks. Branches of probability
/// below `min_probability` are pruned.
template <typename Fn>
auto enumerate_branches(Fn&& run, double min_probability = 1e-12)
    -> std::vector<BranchPath<decltype(run(std::declval<OutcomeChooser&>()))>> {
    using Result = decltype(run(std::declval<OutcomeChooser&>()));
    std::vector<BranchPath<Result>> paths;
    std::vector<std::vector<std::size_t>> pending;
    pending.push_back({});

    while (!pending.empty()) {
        std::vector<std::size_t> script = std::move(pending.back());
        pending.pop_back();

        ScriptedChooser chooser(script);
        Result result = run(chooser);
        paths.push_back({chooser.picks(), chooser.path_probability(), std::move(result)});

        // Queue unexplored siblings at depths beyond the forced prefix.
        const auto& picks = chooser.picks();
        const auto& counts = chooser.option_counts();
        const auto& probs = chooser.option_probs();
        for (std::size_t depth = chooser.scripted_depth(); depth < picks.size(); ++depth) {
            for (std::size_t alt = 0; alt < counts[depth]; ++alt) {
                if (alt == picks[depth]) continue;
                if (probs[depth][alt] < min_probability) continue;
                std::vector<std::size_t> next(picks.begin(), picks.begin() + depth);
                next.push_back(alt);
                pending.push_back(std::move(next));
            }
        }
    }
    return paths;
}

}  // namespace qrep
