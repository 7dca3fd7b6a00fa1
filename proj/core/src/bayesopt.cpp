#include "ctnet/bayesopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ctnet/error.hpp"

namespace ctnet {

namespace {

double to_unit(double v, double lo, double hi) {
    return (v - lo) / (hi - lo);
}

double check_bounds(double v, double lo, double hi, const char* what) {
    if (v < lo || v > hi)
        throw UsageError(std::string("normalize_point: ") + what + "=" + std::to_string(v) +
                         " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

std::array<double, 3> halton_point(std::uint64_t index, const std::array<double, 3>& shift) {
    static const std::uint32_t bases[3] = {2, 3, 5};
    std::array<double, 3> u;
    for (int d = 0; d < 3; ++d) {
        const double h = halton(index, bases[d]) + shift[d];
        u[d] = h - std::floor(h);
    }
    return u;
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::array<double, 3> normalize_point(const Hyperparams& hp, const SearchSpace& space) {
    check_bounds(hp.learning_rate, space.lr_lo, space.lr_hi, "learning_rate");
    check_bounds(hp.momentum, space.mom_lo, space.mom_hi, "momentum");
    check_bounds(hp.l2, space.l2_lo, space.l2_hi, "l2");
    return {
        to_unit(std::log10(hp.learning_rate), std::log10(space.lr_lo), std::log10(space.lr_hi)),
        to_unit(hp.momentum, space.mom_lo, space.mom_hi),
        to_unit(std::log10(hp.l2), std::log10(space.l2_lo), std::log10(space.l2_hi)),
    };
}

Hyperparams denormalize_point(const std::array<double, 3>& u, const SearchSpace& space) {
    Hyperparams hp;
    const double lr_e = std::log10(space.lr_lo) + u[0] * (std::log10(space.lr_hi) - std::log10(space.lr_lo));
    const double l2_e = std::log10(space.l2_lo) + u[2] * (std::log10(space.l2_hi) - std::log10(space.l2_lo));
    hp.learning_rate = std::pow(10.0, lr_e);
    hp.momentum = space.mom_lo + u[1] * (space.mom_hi - space.mom_lo);
    hp.l2 = std::pow(10.0, l2_e);
    // Clamp round-trip float drift back inside the box.
    hp.learning_rate = std::clamp(hp.learning_rate, space.lr_lo, space.lr_hi);
    hp.momentum = std::clamp(hp.momentum, space.mom_lo, space.mom_hi);
    hp.l2 = std::clamp(hp.l2, space.l2_lo, space.l2_hi);
    return hp;
}

double expected_improvement(double mean, double stddev, double best_so_far) {
    if (stddev < 0.0) throw UsageError("expected_improvement: negative stddev");
    const double delta = mean - best_so_far;
    if (stddev == 0.0) return std::max(delta, 0.0);
    const double z = delta / stddev;
    return delta * norm_cdf(z) + stddev * norm_pdf(z);
}

double halton(std::uint64_t index, std::uint32_t base) {
    double f = 1.0;
    double r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

Hyperparams propose_next(const Surrogate& s, const SearchSpace& space, Rng& rng) {
    constexpr int kCandidates = 2048;
    const std::array<double, 3> shift = {rng.uniform(), rng.uniform(), rng.uniform()};
    const double best = s.best_observed();

    std::array<double, 3> winner{0.5, 0.5, 0.5};
    double winner_ei = -1.0;
    std::vector<double> q(3);
    for (int i = 1; i <= kCandidates; ++i) {
        const std::array<double, 3> u = halton_point(static_cast<std::uint64_t>(i), shift);
        q.assign(u.begin(), u.end());
        const Surrogate::Posterior p = s.posterior(q);
        const double ei = expected_improvement(p.mean, p.stddev, best);
        if (ei > winner_ei) {  // strict: first scanned candidate wins ties
            winner_ei = ei;
            winner = u;
        }
    }
    return denormalize_point(winner, space);
}

void append_history_line(const std::filesystem::path& file, const TrialRecord& r) {
    std::ofstream out(file, std::ios::app);
    if (!out) throw IoError("cannot append to history file: " + file.string());
    out << r.trial << "," << format_g17(r.point.learning_rate) << ","
        << format_g17(r.point.momentum) << "," << format_g17(r.point.l2) << ","
        << format_g17(r.objective) << "," << (r.ok ? "ok" : "failed") << ","
        << format_g17(r.seconds) << "\n";
    out.flush();
    if (!out) throw IoError("failed writing history file: " + file.string());
}

std::vector<TrialRecord> load_history(const std::filesystem::path& file) {
    std::vector<TrialRecord> records;
    std::ifstream in(file);
    if (!in) return records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string fields[7];
        for (int i = 0; i < 7; ++i)
            if (!std::getline(ss, fields[i], ','))
                throw IoError("malformed history line: " + line);
        TrialRecord r;
        r.trial = std::stoi(fields[0]);
        r.point.learning_rate = std::stod(fields[1]);
        r.point.momentum = std::stod(fields[2]);
        r.point.l2 = std::stod(fields[3]);
        r.objective = std::stod(fields[4]);
        r.ok = fields[5] == "ok";
        r.seconds = std::stod(fields[6]);
        records.push_back(r);
    }
    return records;
}

HpoResult run_hpo(const SearchSpace& space, int budget, const HpoObjective& objective,
                  std::uint64_t seed, const std::filesystem::path& history_file, bool resume) {
    if (budget < kInitialDesign)
        throw UsageError("run_hpo: budget must be >= the initial design size (" +
                         std::to_string(kInitialDesign) + ")");

    HpoResult result;
    if (resume && !history_file.empty()) result.history = load_history(history_file);
    if (!resume && !history_file.empty()) {
        std::ofstream trunc(history_file, std::ios::trunc);
        if (!trunc) throw IoError("cannot create history file: " + history_file.string());
    }

    // The initial design shift and all proposal rotations flow from the seed.
    Rng master(derive_seed(seed, 0xB0));
    const std::array<double, 3> init_shift = {master.uniform(), master.uniform(),
                                              master.uniform()};

    auto fit_surrogate = [&]() -> std::optional<Surrogate> {
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (const TrialRecord& r : result.history) {
            if (!r.ok) continue;
            const std::array<double, 3> u = normalize_point(r.point, space);
            xs.push_back({u[0], u[1], u[2]});
            ys.push_back(r.objective);
        }
        if (xs.size() < 2) return std::nullopt;
        return Surrogate::fit(xs, ys);
    };

    int next_trial = 1;
    for (const TrialRecord& r : result.history) next_trial = std::max(next_trial, r.trial + 1);

    for (int trial = next_trial; trial <= budget; ++trial) {
        Hyperparams hp;
        if (trial <= kInitialDesign) {
            hp = denormalize_point(halton_point(static_cast<std::uint64_t>(trial), init_shift),
                                   space);
        } else {
            const std::optional<Surrogate> s = fit_surrogate();
            if (s) {
                Rng prop(derive_seed(seed, 0xE1, static_cast<std::uint64_t>(trial)));
                hp = propose_next(*s, space, prop);
            } else {
                // Not enough successful trials to model; keep sampling the design.
                hp = denormalize_point(
                    halton_point(static_cast<std::uint64_t>(trial), init_shift), space);
            }
        }

        TrialRecord r;
        r.trial = trial;
        r.point = hp;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            r.objective = objective(hp, trial);
            r.ok = std::isfinite(r.objective);
        } catch (const std::exception&) {
            r.ok = false;
            r.objective = std::numeric_limits<double>::quiet_NaN();
        }
        if (!r.ok) r.objective = std::numeric_limits<double>::quiet_NaN();
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        result.history.push_back(r);
        if (!history_file.empty()) append_history_line(history_file, r);
    }

    bool have_best = false;
    for (const TrialRecord& r : result.history) {
        if (!r.ok) continue;
        if (!have_best || r.objective > result.best.objective) {
            result.best = r;
            have_best = true;
        }
    }
    if (!have_best) throw NumericError("run_hpo: every trial failed");

    if (const std::optional<Surrogate> s = fit_surrogate()) {
        const std::array<double, 3> u = normalize_point(result.best.point, space);
        result.estimated_objective = s->posterior({u[0], u[1], u[2]}).mean;
    }
    return result;
}

}  // namespace ctnet
