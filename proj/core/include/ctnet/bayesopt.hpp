#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>

#include "ctnet/gp.hpp"
#include "ctnet/optim.hpp"
#include "ctnet/rng.hpp"

namespace ctnet {

// Search bounds: learning rate and L2 are log10-uniform, momentum is uniform.
struct SearchSpace {
    double lr_lo = 1e-4, lr_hi = 1e-1;
    double mom_lo = 0.5, mom_hi = 0.99;
    double l2_lo = 1e-13, l2_hi = 1e-2;
};

// Maps hyperparameters into the unit cube (log10 on lr and l2).
std::array<double, 3> normalize_point(const Hyperparams& hp, const SearchSpace& space);
Hyperparams denormalize_point(const std::array<double, 3>& u, const SearchSpace& space);

// EI for maximization: (mu - best)*Phi(z) + sigma*phi(z), z = (mu-best)/sigma;
// max(mu - best, 0) when sigma is zero.
double expected_improvement(double mean, double stddev, double best_so_far);

// Radical-inverse (Halton) low-discrepancy value for 1-based index.
double halton(std::uint64_t index, std::uint32_t base);

// Maximizes EI over 2048 quasi-random candidates (first scanned wins ties).
Hyperparams propose_next(const Surrogate& s, const SearchSpace& space, Rng& rng);

struct TrialRecord {
    int trial = 0;  // 1-based
    Hyperparams point;
    double objective = 0.0;
    bool ok = false;
    double seconds = 0.0;
};

struct HpoResult {
    std::vector<TrialRecord> history;
    TrialRecord best;
    // GP posterior mean at the best point under the final surrogate.
    std::optional<double> estimated_objective;
};

// objective(hp, trial_index) -> validation accuracy. A throwing objective
// marks the trial failed and the run continues.
using HpoObjective = std::function<double(const Hyperparams&, int)>;

inline constexpr int kInitialDesign = 5;

// 5 seeded quasi-random trials, then EI-guided proposals up to the budget.
// History is appended to history_file (when set) after every trial so an
// interrupted run resumes with --resume without repeating trials.
HpoResult run_hpo(const SearchSpace& space, int budget, const HpoObjective& objective,
                  std::uint64_t seed, const std::filesystem::path& history_file = {},
                  bool resume = false);

// History file I/O: `trial,lr,momentum,l2,val_accuracy,status,seconds` rows.
void append_history_line(const std::filesystem::path& file, const TrialRecord& r);
std::vector<TrialRecord> load_history(const std::filesystem::path& file);

}  // namespace ctnet
