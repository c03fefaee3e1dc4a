#include "osdrl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "osdrl/output.hpp"

namespace osdrl {

namespace fs = std::filesystem;
using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

namespace {

/// Typed access to a config object; unknown keys are rejected up front.
class Fields {
public:
    Fields(const json& doc, std::initializer_list<const char*> allowed) : doc_(doc) {
        if (doc.is_null()) return;
        if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
        std::set<std::string> known{"experiment", "seed", "out"};
        known.insert(allowed.begin(), allowed.end());
        for (const auto& item : doc.items()) {
            if (!known.count(item.key())) throw ConfigError(item.key(), "unknown key");
        }
    }

    bool has(const char* key) const { return doc_.is_object() && doc_.contains(key); }

    template <class T>
    void read(const char* key, T& target) const {
        if (!has(key)) return;
        try {
            target = doc_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(key, e.what());
        }
    }

    const json& at(const char* key) const { return doc_.at(key); }

private:
    const json& doc_;
};

void read_common(const Fields& f, const Overrides& o, std::uint64_t& seed, fs::path& out) {
    f.read("seed", seed);
    std::string out_text = out.string();
    f.read("out", out_text);
    out = out_text;
    if (o.seed) seed = *o.seed;
    if (o.out) out = *o.out;
}

Grid make_grid(const std::vector<double>& points, const char* field) {
    try {
        return Grid(points);
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

ToyRewards read_rewards(const Fields& f) {
    ToyRewards r;
    if (!f.has("rewards")) return r;
    const json& doc = f.at("rewards");
    Fields inner(doc, {"to_absorbing", "to_self"});
    inner.read("to_absorbing", r.to_absorbing);
    inner.read("to_self", r.to_self);
    if (!std::isfinite(r.to_absorbing) || !std::isfinite(r.to_self)) throw ConfigError("rewards", "must be finite");
    return r;
}

fs::path experiment_dir(const fs::path& out, const char* name) {
    const fs::path dir = out / name;
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
    file << doc.dump(2) << '\n';
}

std::string pair_name(StateId x, ActionId a) { return "x" + std::to_string(x + 1) + "_a" + std::to_string(a + 1); }

json report_json(const OscillationReport& r) {
    return {{"converged", r.converged},
            {"non_convergent", r.non_convergent},
            {"period", r.period},
            {"tail_step", r.tail_step},
            {"tail_lag_distance", r.tail_lag_distance}};
}

bool has_optimal_tie(const TabularMdp& mdp) {
    const QFunction q = solve_q_star(mdp, 1e-12);
    return std::abs(q.at(0, 0) - q.at(0, 1)) <= 1e-9;
}

CategoricalCollection lowest_atoms(const Grid& grid, std::size_t n_states, std::size_t n_actions) {
    return CategoricalCollection::filled(n_states, n_actions, CategoricalDistribution::unit(grid, 0));
}

IterationTrace<CategoricalDistribution> run_projected_control(const TabularMdp& mdp, const Grid& grid, TieBreak rule,
                                                              std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    const auto op = projected(
        make_operator(OperatorKind::full_opt, mdp, Policy::uniform(mdp.n_states(), mdp.n_actions()), rule, &rng), grid);
    return iterate<CategoricalDistribution>(op, lowest_atoms(grid, mdp.n_states(), mdp.n_actions()), n);
}

/// Probability and Q panels for one method.
void write_panels(const fs::path& dir, const std::string& prefix, const std::string& title,
                  const IterationTrace<CategoricalDistribution>& trace) {
    write_trace_entries(dir / (prefix + "_probs.csv"), trace);
    write_trace_distances(dir / (prefix + "_distances.csv"), trace);

    const auto& first = trace.iterates.front();
    std::vector<std::string> header{"iteration"};
    for (StateId x = 0; x < first.n_states(); ++x) {
        for (ActionId a = 0; a < first.n_actions(); ++a) header.push_back("q_" + pair_name(x, a));
    }
    CsvWriter csv(dir / (prefix + "_q.csv"), header);
    std::vector<Series> q_series(first.size());
    for (std::size_t e = 0; e < first.size(); ++e) {
        q_series[e].label = "Q(" + pair_name(e / first.n_actions(), e % first.n_actions()) + ")";
    }
    for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
        csv.cell(static_cast<std::uint64_t>(n));
        for (std::size_t e = 0; e < first.size(); ++e) {
            const double q = trace.iterates[n][e].mean();
            csv.cell(q);
            q_series[e].x.push_back(static_cast<double>(n));
            q_series[e].y.push_back(q);
        }
        csv.end_row();
    }
    write_line_chart(dir / (prefix + "_q.svg"), title + ": Q", "iteration", q_series);

    const Grid& grid = first[0].grid();
    for (ActionId a = 0; a < first.n_actions(); ++a) {
        std::vector<Series> series(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) series[k].label = "z=" + format_number(grid[k]);
        for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
            const auto& entry = trace.iterates[n].at(0, a);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                series[k].x.push_back(static_cast<double>(n));
                series[k].y.push_back(entry.prob(k));
            }
        }
        write_line_chart(dir / (prefix + "_probs_" + pair_name(0, a) + ".svg"), title + ": " + pair_name(0, a),
                         "iteration", series);
    }
}

}  // namespace

// ---------------------------------------------------------------- instability

InstabilityConfig InstabilityConfig::from_json(const json& j, const Overrides& o) {
    Fields f(j, {"grid", "rewards", "iterations", "burn_in", "one_step_horizon", "one_step_tolerance", "tie_break",
                 "search_budget", "search_range", "search_lattice"});
    InstabilityConfig c;
    read_common(f, o, c.seed, c.out);
    f.read("grid", c.grid);
    c.rewards = read_rewards(f);
    f.read("iterations", c.iterations);
    f.read("burn_in", c.burn_in);
    f.read("one_step_horizon", c.one_step_horizon);
    f.read("one_step_tolerance", c.one_step_tolerance);
    if (f.has("tie_break")) {
        std::string name;
        f.read("tie_break", name);
        try {
            c.tie_break = tie_break_from_string(name);
        } catch (const std::exception& e) {
            throw ConfigError("tie_break", e.what());
        }
    }
    f.read("search_budget", c.search_budget);
    f.read("search_range", c.search_range);
    f.read("search_lattice", c.search_lattice);
    if (o.steps) c.iterations = *o.steps;

    make_grid(c.grid, "grid");
    if (c.iterations < c.burn_in + kMaxOscillationPeriod + 2) {
        throw ConfigError("iterations", "must be at least burn_in + " + std::to_string(kMaxOscillationPeriod + 2));
    }
    if (c.one_step_horizon == 0 || c.one_step_horizon > c.iterations) {
        throw ConfigError("one_step_horizon", "must be in [1, iterations]");
    }
    if (!(c.one_step_tolerance > 0.0)) throw ConfigError("one_step_tolerance", "must be positive");
    if (c.search_budget > 1000) throw ConfigError("search_budget", "at most 1000 perturbations");
    if (!(c.search_range.first <= c.search_range.second) || !std::isfinite(c.search_range.first) ||
        !std::isfinite(c.search_range.second)) {
        throw ConfigError("search_range", "must be a finite [lo, hi] pair");
    }
    if (c.search_lattice == 0) throw ConfigError("search_lattice", "must be positive");
    return c;
}

InstabilityResult cmd_instability(const InstabilityConfig& config, std::ostream& log) {
    const Grid grid = make_grid(config.grid, "grid");
    const TabularMdp mdp = make_toy_mdp(config.rewards);
    if (!has_optimal_tie(mdp)) throw ConfigError("rewards", "toy MDP must keep Q*(x1, a1) = Q*(x1, a2)");
    const fs::path dir = experiment_dir(config.out, "instability");
    InstabilityResult result;

    // One-step branch on the configured MDP.
    const auto reference = cramer_project(one_step_fixed_point_opt(mdp, 1e-14), grid);
    const auto one_step_op =
        projected(make_operator(OperatorKind::one_step_opt, mdp, Policy::uniform(2, 2)), grid);
    const auto one_step = iterate<CategoricalDistribution>(one_step_op, lowest_atoms(grid, 2, 2), config.iterations,
                                                           reference);
    result.one_step_residual = one_step.dist_to_reference[config.one_step_horizon];
    result.one_step_converged = result.one_step_residual < config.one_step_tolerance;
    for (std::size_t n = 0; n < one_step.dist_to_reference.size(); ++n) {
        if (one_step.dist_to_reference[n] < config.one_step_tolerance) {
            result.one_step_hit = n;
            break;
        }
    }
    const auto& limit = one_step.iterates.back().at(0, 0).probs();
    result.one_step_x1a1.assign(limit.begin(), limit.end());
    result.one_step_report = detect_oscillation(one_step, config.burn_in);
    write_panels(dir, "one_step", "one-step", one_step);

    // CDRL branch: configured MDP first, then the seeded search.
    auto trace = run_projected_control(mdp, grid, config.tie_break, config.seed, config.iterations);
    result.attempts.push_back({0, config.rewards, detect_oscillation(trace, config.burn_in)});
    if (result.attempts.back().report.non_convergent) result.trigger = result.attempts.back();

    Rng search_rng(config.seed);
    std::uniform_int_distribution<std::size_t> lattice(0, config.search_lattice);
    const double total = config.rewards.to_absorbing + config.rewards.to_self;
    const auto [lo, hi] = config.search_range;
    for (std::size_t attempt = 1; !result.trigger && attempt <= config.search_budget; ++attempt) {
        const double r_a = lo + (hi - lo) * static_cast<double>(lattice(search_rng)) /
                                    static_cast<double>(config.search_lattice);
        const ToyRewards rewards{r_a, total - r_a};
        const TabularMdp candidate = make_toy_mdp(rewards);
        auto candidate_trace =
            run_projected_control(candidate, grid, config.tie_break, config.seed + attempt, config.iterations);
        result.attempts.push_back({attempt, rewards, detect_oscillation(candidate_trace, config.burn_in)});
        if (result.attempts.back().report.non_convergent) {
            result.trigger = result.attempts.back();
            trace = std::move(candidate_trace);
        }
    }
    write_panels(dir, "cdrl", "CDRL", trace);

    CsvWriter search(dir / "search.csv", {"attempt", "r_to_absorbing", "r_to_self", "non_convergent", "period",
                                          "tail_step"});
    for (const auto& a : result.attempts) {
        search.cell(static_cast<std::uint64_t>(a.attempt)).cell(a.rewards.to_absorbing).cell(a.rewards.to_self);
        search.cell(static_cast<std::uint64_t>(a.report.non_convergent ? 1 : 0));
        search.cell(static_cast<std::uint64_t>(a.report.period)).cell(a.report.tail_step);
        search.end_row();
    }

    if (!result.one_step_converged) {
        result.exit_code = kExitFailure;
    } else if (!result.trigger) {
        result.exit_code = kExitInconclusive;
    }

    json summary = {
        {"grid", config.grid},
        {"tie_break", to_string(config.tie_break)},
        {"one_step",
         {{"converged", result.one_step_converged},
          {"residual", result.one_step_residual},
          {"horizon", config.one_step_horizon},
          {"first_within_tolerance", result.one_step_hit ? json(*result.one_step_hit) : json(nullptr)},
          {"limit_x1_a1", result.one_step_x1a1},
          {"detector", report_json(result.one_step_report)}}},
        {"cdrl_default", report_json(result.attempts.front().report)},
        {"search_attempts", result.attempts.size() - 1},
        {"exit_code", result.exit_code},
    };
    if (result.trigger) {
        summary["cdrl_trigger"] = {{"attempt", result.trigger->attempt},
                                   {"r_to_absorbing", result.trigger->rewards.to_absorbing},
                                   {"r_to_self", result.trigger->rewards.to_self},
                                   {"detector", report_json(result.trigger->report)}};
    } else {
        summary["cdrl_trigger"] = nullptr;
    }
    write_json(dir / "summary.json", summary);

    log << "one-step: residual " << format_number(result.one_step_residual) << " at iteration "
        << config.one_step_horizon << (result.one_step_converged ? " (converged)" : " (NOT converged)") << '\n';
    log << "cdrl default MDP: " << (result.attempts.front().report.non_convergent ? "non-convergent" : "converged")
        << '\n';
    if (result.trigger) {
        log << "cdrl instability: attempt " << result.trigger->attempt << ", r = ("
            << format_number(result.trigger->rewards.to_absorbing) << ", "
            << format_number(result.trigger->rewards.to_self) << "), period " << result.trigger->report.period
            << ", tail step " << format_number(result.trigger->report.tail_step) << '\n';
    } else {
        log << "cdrl instability: no trigger in " << config.search_budget << " perturbations (inconclusive)\n";
    }
    return result;
}

// ----------------------------------------------------------------- histograms

HistogramsConfig HistogramsConfig::from_json(const json& j, const Overrides& o) {
    Fields f(j, {"rewards", "iterations", "bins", "atom_cap"});
    HistogramsConfig c;
    read_common(f, o, c.seed, c.out);
    c.rewards = read_rewards(f);
    f.read("iterations", c.iterations);
    f.read("bins", c.bins);
    f.read("atom_cap", c.atom_cap);
    if (o.steps) c.iterations = {0, static_cast<std::size_t>(*o.steps / 2), static_cast<std::size_t>(*o.steps)};
    if (c.iterations.empty()) throw ConfigError("iterations", "must not be empty");
    std::sort(c.iterations.begin(), c.iterations.end());
    c.iterations.erase(std::unique(c.iterations.begin(), c.iterations.end()), c.iterations.end());
    if (c.bins == 0) throw ConfigError("bins", "must be positive");
    if (c.atom_cap == 0) throw ConfigError("atom_cap", "must be positive");
    return c;
}

HistogramsResult cmd_histograms(const HistogramsConfig& config, std::ostream& log) {
    const TabularMdp mdp = make_toy_mdp(config.rewards);
    const Policy pi = Policy::uniform(2, 2);
    const std::size_t j_max = config.iterations.back();
    const fs::path dir = experiment_dir(config.out, "histograms");
    HistogramsResult result;

    const auto start = AtomicCollection::filled(2, 2, dirac(0.0));
    IterationTrace<AtomicDistribution> full;
    try {
        full = iterate<AtomicDistribution>(make_operator(OperatorKind::full_eval, mdp, pi), start, j_max, std::nullopt,
                                           config.atom_cap);
    } catch (const AtomCapExceeded& e) {
        result.cap_exceeded_at = e.iteration();
        result.exit_code = kExitFailure;
        log << "atom cap exceeded at iteration " << e.iteration() << ": " << e.atoms() << " atoms\n";
        return result;
    }
    const auto one_step =
        iterate<AtomicDistribution>(make_operator(OperatorKind::one_step_eval, mdp, pi), start, j_max);

    CsvWriter counts(dir / "counts.csv", {"j", "full_total_atoms", "full_max_atoms", "one_step_total_atoms",
                                          "one_step_max_atoms"});
    for (std::size_t j = 0; j <= j_max; ++j) {
        const AtomCounts c{j, total_atoms(full.iterates[j]), max_atoms(full.iterates[j]),
                           total_atoms(one_step.iterates[j]), max_atoms(one_step.iterates[j])};
        result.counts.push_back(c);
        counts.cell(static_cast<std::uint64_t>(j)).cell(static_cast<std::uint64_t>(c.full_total));
        counts.cell(static_cast<std::uint64_t>(c.full_max)).cell(static_cast<std::uint64_t>(c.one_step_total));
        counts.cell(static_cast<std::uint64_t>(c.one_step_max));
        counts.end_row();
    }
    result.one_step_bounded = std::all_of(result.counts.begin(), result.counts.end(),
                                          [](const AtomCounts& c) { return c.one_step_max <= 2; });
    result.full_non_decreasing = true;
    for (std::size_t j = 1; j < result.counts.size(); ++j) {
        result.full_non_decreasing =
            result.full_non_decreasing && result.counts[j].full_total >= result.counts[j - 1].full_total;
    }

    const std::pair<const char*, const IterationTrace<AtomicDistribution>*> traces[] = {{"full", &full},
                                                                                        {"one_step", &one_step}};
    // Common support range so the panels share an axis.
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& [name, trace] : traces) {
        for (std::size_t j : config.iterations) {
            for (const auto& e : trace->iterates[j]) {
                lo = std::min(lo, e.atoms().front());
                hi = std::max(hi, e.atoms().back());
            }
        }
    }

    CsvWriter atoms(dir / "atoms.csv", {"operator", "j", "state", "action", "atom", "weight"});
    CsvWriter hist(dir / "histograms.csv", {"operator", "j", "state", "action", "bin_lo", "bin_hi", "mass"});
    for (const auto& [name, trace] : traces) {
        for (StateId x = 0; x < 2; ++x) {
            for (ActionId a = 0; a < 2; ++a) {
                std::vector<Histogram> panels;
                for (std::size_t j : config.iterations) {
                    const auto& nu = trace->iterates[j].at(x, a);
                    for (std::size_t i = 0; i < nu.size(); ++i) {
                        atoms.cell(std::string(name)).cell(static_cast<std::uint64_t>(j));
                        atoms.cell(static_cast<std::uint64_t>(x + 1)).cell(static_cast<std::uint64_t>(a + 1));
                        atoms.cell(nu.atoms()[i]).cell(nu.weights()[i]);
                        atoms.end_row();
                    }
                    Histogram h = histogram(nu, lo, hi, config.bins);
                    h.label = "j=" + std::to_string(j);
                    for (std::size_t b = 0; b < h.mass.size(); ++b) {
                        hist.cell(std::string(name)).cell(static_cast<std::uint64_t>(j));
                        hist.cell(static_cast<std::uint64_t>(x + 1)).cell(static_cast<std::uint64_t>(a + 1));
                        hist.cell(h.edges[b]).cell(h.edges[b + 1]).cell(h.mass[b]);
                        hist.end_row();
                    }
                    panels.push_back(std::move(h));
                }
                write_histogram_chart(dir / (std::string(name) + "_" + pair_name(x, a) + ".svg"),
                                      std::string(name) + " " + pair_name(x, a), panels);
            }
        }
    }

    for (const auto& c : result.counts) {
        log << "j=" << c.j << ": full max " << c.full_max << " (total " << c.full_total << "), one-step max "
            << c.one_step_max << " (total " << c.one_step_total << ")\n";
    }
    return result;
}

// ----------------------------------------------------------------- frozenlake

FrozenLakeConfig FrozenLakeConfig::from_json(const json& j, const Overrides& o) {
    Fields f(j, {"slippery", "goal_reward", "discount", "grid", "alpha", "epsilon", "seeds", "steps", "stride",
                 "smoothing_window", "early_step", "tracked"});
    FrozenLakeConfig c;
    read_common(f, o, c.seed, c.out);
    f.read("slippery", c.slippery);
    f.read("goal_reward", c.goal_reward);
    f.read("discount", c.discount);
    f.read("grid", c.grid);
    f.read("alpha", c.alpha);
    if (f.has("epsilon")) {
        Fields eps(f.at("epsilon"), {"start", "end", "rate"});
        double start = 1.0;
        double end = 0.25;
        eps.read("start", start);
        eps.read("end", end);
        try {
            c.exploration = ExplorationSchedule::reaching(start, end, 0.01, 50'000.0);
            eps.read("rate", c.exploration.rate);
            c.exploration.validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("epsilon", e.what());
        }
    }
    f.read("seeds", c.seeds);
    f.read("steps", c.steps);
    f.read("stride", c.stride);
    f.read("smoothing_window", c.smoothing_window);
    f.read("early_step", c.early_step);
    f.read("tracked", c.tracked);
    if (o.steps) c.steps = *o.steps;

    make_grid(c.grid, "grid");
    try {
        StepSizeSchedule::constant(c.alpha);
    } catch (const std::exception& e) {
        throw ConfigError("alpha", e.what());
    }
    if (!(c.discount >= 0.0 && c.discount < 1.0)) throw ConfigError("discount", "must lie in [0, 1)");
    if (!std::isfinite(c.goal_reward)) throw ConfigError("goal_reward", "must be finite");
    if (c.seeds == 0) throw ConfigError("seeds", "must be positive");
    if (c.steps == 0) throw ConfigError("steps", "must be positive");
    if (c.stride == 0) throw ConfigError("stride", "must be positive");
    if (c.smoothing_window == 0) throw ConfigError("smoothing_window", "must be positive");
    for (const auto& [x, a] : c.tracked) {
        if (x >= 16 || a >= 4) throw ConfigError("tracked", "pairs must be 0-based (state < 16, action < 4)");
    }
    return c;
}

FrozenLakeResult cmd_frozenlake(const FrozenLakeConfig& config, std::ostream& log) {
    const EpisodicEnv env = make_frozen_lake(config.slippery, config.goal_reward, config.discount);
    const Grid grid = make_grid(config.grid, "grid");
    const fs::path dir = experiment_dir(config.out, "frozenlake");

    LearningConfig lc{.grid = grid};
    lc.schedule = StepSizeSchedule::constant(config.alpha);
    lc.exploration = config.exploration;
    lc.n_steps = config.steps;
    lc.stride = config.stride;
    lc.q_reference = solve_q_star(env.mdp, 1e-12);
    lc.reference = cramer_project(one_step_fixed_point_opt(env.mdp, 1e-12), grid);
    lc.tracked = config.tracked;
    lc.record_q = true;
    const auto violations = range_violations(env.mdp, state_values(*lc.q_reference, Mode::control()), grid);
    if (!violations.empty()) {
        log << "warning: " << violations.size() << " one-step targets of the fixed point lie outside the grid\n";
    }

    std::vector<std::uint64_t> seeds(config.seeds);
    std::iota(seeds.begin(), seeds.end(), config.seed);
    const auto records = run_learning_seeds(env, lc, seeds);

    FrozenLakeResult result;
    const std::size_t n_rows = records.front().rows.size();
    result.rows_per_pair = n_rows * records.size();
    for (const auto& row : records.front().rows) result.steps.push_back(row.step);
    result.mean_q_error.assign(n_rows, 0.0);
    result.mean_q_distance.assign(n_rows, 0.0);
    const auto q_star = lc.q_reference->values();
    std::vector<double> q_bar(q_star.size());
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::fill(q_bar.begin(), q_bar.end(), 0.0);
        for (const auto& record : records) {
            for (std::size_t e = 0; e < q_bar.size(); ++e) {
                q_bar[e] += record.rows[r].q_values[e] / static_cast<double>(records.size());
            }
        }
        for (std::size_t e = 0; e < q_bar.size(); ++e) {
            result.mean_q_distance[r] += (q_bar[e] - q_star[e]) * (q_bar[e] - q_star[e]);
        }
    }

    CsvWriter learning(dir / "learning.csv", {"step", "seed", "w1_to_reference", "q_error_sup", "q_error_sq",
                                              "range_violations", "epsilon", "mean_alpha"});
    for (const auto& record : records) {
        for (std::size_t r = 0; r < n_rows; ++r) {
            const auto& row = record.rows[r];
            learning.cell(row.step).cell(record.seed).cell(row.w1_to_reference).cell(row.q_error_sup);
            learning.cell(row.q_error_sq).cell(row.range_violations).cell(row.epsilon).cell(row.mean_alpha);
            learning.end_row();
            result.mean_q_error[r] += row.q_error_sq / static_cast<double>(records.size());
        }
    }

    std::vector<std::string> prob_header{"step", "seed"};
    for (std::size_t k = 0; k < grid.size(); ++k) prob_header.push_back("p" + std::to_string(k + 1));
    prob_header.push_back("sum");
    for (std::size_t t = 0; t < config.tracked.size(); ++t) {
        const auto [x, a] = config.tracked[t];
        const std::string name = "probs_" + pair_name(x, a);
        CsvWriter csv(dir / (name + ".csv"), prob_header);
        std::vector<Series> mean_series(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            mean_series[k].label = "z=" + format_number(grid[k]);
            mean_series[k].y.assign(n_rows, 0.0);
        }
        for (const auto& record : records) {
            for (std::size_t r = 0; r < n_rows; ++r) {
                const auto& p = record.rows[r].tracked_probs[t];
                csv.cell(record.rows[r].step).cell(record.seed);
                double sum = 0.0;
                for (std::size_t k = 0; k < p.size(); ++k) {
                    csv.cell(p[k]);
                    sum += p[k];
                    mean_series[k].y[r] += p[k] / static_cast<double>(records.size());
                }
                csv.cell(sum).end_row();
                result.max_normalization_error = std::max(result.max_normalization_error, std::abs(sum - 1.0));
            }
        }
        for (auto& s : mean_series) s.x.assign(result.steps.begin(), result.steps.end());
        write_line_chart(dir / (name + ".svg"), "seed-averaged p_k(" + pair_name(x, a) + ")", "step", mean_series);
    }

    // Trailing moving average over `smoothing_window` steps.
    const std::size_t window = std::max<std::size_t>(1, config.smoothing_window / config.stride);
    result.smoothed_q_error.resize(n_rows);
    double running = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        running += result.mean_q_error[r];
        if (r >= window) running -= result.mean_q_error[r - window];
        result.smoothed_q_error[r] = running / static_cast<double>(std::min(r + 1, window));
    }
    const std::size_t tail_start = (n_rows - 1) - (n_rows - 1) / 10;
    result.trend_ok = result.smoothed_q_error.back() <= 1.05 * result.smoothed_q_error[tail_start];
    const auto early = std::lower_bound(result.steps.begin(), result.steps.end(), config.early_step);
    const std::size_t early_row = std::min<std::size_t>(early - result.steps.begin(), n_rows - 1);
    result.early_q_error = result.mean_q_error[early_row];
    result.final_q_error = result.mean_q_error.back();
    result.early_mean_q_distance = result.mean_q_distance[early_row];
    result.final_mean_q_distance = result.mean_q_distance.back();

    CsvWriter q_error(dir / "q_error.csv",
                      {"step", "mean_q_error_sq", "smoothed_q_error_sq", "mean_q_distance_sq"});
    for (std::size_t r = 0; r < n_rows; ++r) {
        q_error.cell(result.steps[r]).cell(result.mean_q_error[r]).cell(result.smoothed_q_error[r]);
        q_error.cell(result.mean_q_distance[r]).end_row();
    }
    Series curve{"mean of ||Q_t - Q*||^2", {}, result.mean_q_error};
    Series smooth{"smoothed", {}, result.smoothed_q_error};
    Series averaged{"||mean Q_t - Q*||^2", {}, result.mean_q_distance};
    for (auto s : result.steps) {
        curve.x.push_back(static_cast<double>(s));
        smooth.x.push_back(static_cast<double>(s));
        averaged.x.push_back(static_cast<double>(s));
    }
    write_line_chart(dir / "q_error.svg", "Frozen Lake: Q error", "step", {curve, smooth, averaged});

    if (result.max_normalization_error > 1e-9) result.exit_code = kExitFailure;
    const double ratio = result.final_q_error / result.early_q_error;
    write_json(dir / "summary.json", {{"seeds", config.seeds},
                                      {"steps", config.steps},
                                      {"stride", config.stride},
                                      {"q_error_early", result.early_q_error},
                                      {"early_step", config.early_step},
                                      {"q_error_final", result.final_q_error},
                                      {"final_over_early", ratio},
                                      {"mean_q_distance_early", result.early_mean_q_distance},
                                      {"mean_q_distance_final", result.final_mean_q_distance},
                                      {"smoothed_trend_ok", result.trend_ok},
                                      {"max_normalization_error", result.max_normalization_error},
                                      {"rows_per_pair", result.rows_per_pair},
                                      {"exit_code", result.exit_code}});
    log << "seed-averaged ||Q-Q*||^2: " << format_number(result.early_q_error) << " at step " << config.early_step
        << ", " << format_number(result.final_q_error) << " at step " << config.steps << " (ratio "
        << format_number(ratio) << ")\n";
    log << "||seed-mean Q - Q*||^2: " << format_number(result.early_mean_q_distance) << " at step "
        << config.early_step << ", " << format_number(result.final_mean_q_distance) << " at step " << config.steps
        << '\n';
    log << "smoothed trend over the last 10%: " << (result.trend_ok ? "ok" : "rising") << "; max |sum p - 1| "
        << format_number(result.max_normalization_error) << '\n';
    return result;
}

// --------------------------------------------------------------------- verify

VerifyConfig VerifyConfig::from_json(const json& j, const Overrides& o) {
    Fields f(j, {"contraction_cases", "lemma_cases", "mean_cases", "tracking_steps", "fixed_point_mdps",
                 "fixed_point_policies", "bench_reps", "benchmark", "extra_mdps"});
    VerifyConfig c;
    auto& opt = c.options;
    read_common(f, o, opt.seed, c.out);
    f.read("contraction_cases", opt.contraction_cases);
    f.read("lemma_cases", opt.lemma_cases);
    f.read("mean_cases", opt.mean_cases);
    f.read("tracking_steps", opt.tracking_steps);
    f.read("fixed_point_mdps", opt.fixed_point_mdps);
    f.read("fixed_point_policies", opt.fixed_point_policies);
    f.read("bench_reps", opt.bench_reps);
    f.read("benchmark", opt.run_benchmark);
    if (f.has("extra_mdps")) {
        const json& list = f.at("extra_mdps");
        if (!list.is_array()) throw ConfigError("extra_mdps", "must be an array of MDPs");
        for (std::size_t i = 0; i < list.size(); ++i) {
            try {
                opt.extra_mdps.push_back(TabularMdp::from_json(list[i]));
            } catch (const std::exception& e) {
                throw ConfigError("extra_mdps[" + std::to_string(i) + "]", e.what());
            }
        }
    }
    if (o.steps) opt.tracking_steps = *o.steps;
    if (opt.bench_reps == 0) throw ConfigError("bench_reps", "must be positive");
    return c;
}

VerifyResult cmd_verify(const VerifyConfig& config, std::ostream& log) {
    const fs::path dir = experiment_dir(config.out, "verify");
    VerifyResult result;
    result.properties = run_property_suite(config.options);
    json entries = json::array();
    bool all = true;
    for (const auto& p : result.properties) {
        entries.push_back(to_json(p));
        all = all && p.passed;
        log << (p.passed ? "PASS " : "FAIL ") << p.name << "  cases=" << p.cases
            << "  max_violation=" << format_number(p.max_violation);
        if (!p.note.empty()) log << "  (" << p.note << ')';
        log << '\n';
    }
    result.exit_code = all ? kExitOk : kExitFailure;
    write_json(dir / "report.json", {{"seed", config.options.seed}, {"passed", all}, {"properties", entries}});
    return result;
}

int run_experiment(const std::string& experiment, const json& config, const Overrides& overrides,
                   std::ostream& log) {
    try {
        if (config.is_object() && config.contains("experiment") && config.at("experiment") != experiment) {
            throw ConfigError("experiment", "config is for '" + config.at("experiment").dump() + "', not '" +
                                                experiment + "'");
        }
        if (experiment == "instability") {
            return cmd_instability(InstabilityConfig::from_json(config, overrides), log).exit_code;
        }
        if (experiment == "histograms") {
            return cmd_histograms(HistogramsConfig::from_json(config, overrides), log).exit_code;
        }
        if (experiment == "frozenlake") {
            return cmd_frozenlake(FrozenLakeConfig::from_json(config, overrides), log).exit_code;
        }
        if (experiment == "verify") {
            return cmd_verify(VerifyConfig::from_json(config, overrides), log).exit_code;
        }
        throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace osdrl
