// Non-Markovianity quantification: trace distance, Wootters concurrence,
// positive-increment integration of sampled trajectories, revival-interval
// detection, and the pair/state-optimized BLP and entanglement measures.
#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <utility>

#include "memchan/channels.hpp"

namespace memchan {

struct NegativeSpectrum : std::runtime_error {
    explicit NegativeSpectrum(const std::string& what) : std::runtime_error(what) {}
};

// Sampled trajectory: strictly increasing scaled times with one value each.
struct TimeSeries {
    std::vector<double> nus;
    std::vector<double> values;

    TimeSeries(std::vector<double> nus_, std::vector<double> values_)
        : nus(std::move(nus_)), values(std::move(values_)) {
        if (nus.size() != values.size()) throw DomainError("TimeSeries: length mismatch");
        for (std::size_t k = 0; k + 1 < nus.size(); ++k)
            if (!(nus[k] < nus[k + 1])) throw DomainError("TimeSeries: nus must be strictly increasing");
        for (double v : values)
            if (!std::isfinite(v)) throw DomainError("TimeSeries: values must be finite");
        for (double x : nus)
            if (!std::isfinite(x)) throw DomainError("TimeSeries: nus must be finite");
    }

    std::size_t size() const { return nus.size(); }
};

// Uniform evaluation grid nu in [0, nu_max].
struct GridSpec {
    double nu_max = 40.0;
    int steps = 20000;
};

inline std::vector<double> make_grid(const GridSpec& grid) {
    if (grid.steps < 2) throw DomainError("GridSpec: steps must be >= 2");
    if (!(grid.nu_max > 0.0)) throw DomainError("GridSpec: nu_max must be > 0");
    std::vector<double> nus(static_cast<std::size_t>(grid.steps));
    for (int i = 0; i < grid.steps; ++i)
        nus[static_cast<std::size_t>(i)] = grid.nu_max * static_cast<double>(i) / (grid.steps - 1);
    return nus;
}

struct MeasureResult {
    double value = 0.0;
    std::string argmax_descriptor;
    GridSpec grid;
};

// Half the trace norm of the difference; in [0, 1] for density matrices.
inline double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
    if (rho1.dim() != rho2.dim()) throw DimensionMismatch("trace_distance: dimensions differ");
    return 0.5 * trace_norm(rho1.matrix() - rho2.matrix());
}

namespace detail {

// Spin-flipped conjugate (sy x sy) rho^* (sy x sy), written out entrywise:
// entry (i,j) is y_i y_j conj(rho_{3-i,3-j}) with y = (-1, 1, 1, -1).
inline ComplexMatrix spin_flipped_conjugate(const ComplexMatrix& rho) {
    static constexpr double y[4] = {-1.0, 1.0, 1.0, -1.0};
    ComplexMatrix out(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out(i, j) = y[i] * y[j] * std::conj(rho(3 - i, 3 - j));
    return out;
}

inline ComplexMatrix hermitian_sqrt(const ComplexMatrix& a) {
    const auto eig = jacobi_eigen(a, /*want_vectors=*/true);
    const int n = a.rows();
    ComplexMatrix out(n, n);
    for (int j = 0; j < n; ++j) {
        const double s = eig.values[static_cast<std::size_t>(j)] > 0.0
                             ? std::sqrt(eig.values[static_cast<std::size_t>(j)])
                             : 0.0;
        if (s == 0.0) continue;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                out(i, k) += s * eig.vectors(i, j) * std::conj(eig.vectors(k, j));
    }
    return out;
}

// Eigenvalues of R = rho (sy x sy) rho^* (sy x sy) computed as the spectrum
// of the Hermitian matrix sqrt(rho) flip(rho) sqrt(rho), descending. Values
// below the clip threshold are set to 0 so that the square roots of pure
// round-off do not pollute the concurrence at the 1e-8 level.
constexpr double kConcurrenceEigClip = 1e-13;

inline std::array<double, 4> concurrence_spectrum(const DensityMatrix& rho) {
    const ComplexMatrix sq = hermitian_sqrt(rho.matrix());
    const ComplexMatrix flipped = spin_flipped_conjugate(rho.matrix());
    ComplexMatrix h = sq * flipped * sq;
    // symmetrize away round-off before the eigensolver
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const cdouble m = 0.5 * (h(i, j) + std::conj(h(j, i)));
            h(i, j) = m;
            h(j, i) = std::conj(m);
        }
    const auto eig = jacobi_eigen(std::move(h), /*want_vectors=*/false);
    if (eig.values.back() < -1e-8)
        throw NegativeSpectrum("concurrence: spectrum of R has eigenvalue " +
                               std::to_string(eig.values.back()));
    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) {
        const double v = eig.values[static_cast<std::size_t>(i)];
        lam[static_cast<std::size_t>(i)] = v < kConcurrenceEigClip ? 0.0 : v;
    }
    return lam;
}

}  // namespace detail

// Wootters concurrence C = max(0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)).
inline double concurrence(const DensityMatrix& rho) {
    if (rho.dim() != 4) throw DimensionMismatch("concurrence: state must be dim 4");
    const auto lam = detail::concurrence_spectrum(rho);
    const double c = std::sqrt(lam[0]) - std::sqrt(lam[1]) - std::sqrt(lam[2]) - std::sqrt(lam[3]);
    return c > 0.0 ? c : 0.0;
}

// Sum of positive first differences, sum_k max(0, v[k+1] - v[k]).
inline double positive_increment_sum(const TimeSeries& series) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < series.values.size(); ++k) {
        const double d = series.values[k + 1] - series.values[k];
        if (d > 0.0) total += d;
    }
    return total;
}

// Increment sum with interior extrema sharpened by secant-line intersection:
// the lines through the two samples on either side of a detected extremum
// are intersected and the crossing height replaces the sampled value. Exact
// for piecewise-linear kinks (the |Phi| zeros), O(step^2) for smooth
// extrema; plain sampled values are kept near the boundary or when the
// secants do not bracket. This is what the measure optimizers integrate:
// the first-difference sum alone loses O(step) mass at every kink of a
// trace-distance trajectory.
inline double positive_increment_sum_refined(const TimeSeries& series) {
    const std::vector<double>& v = series.values;
    const std::vector<double>& x = series.nus;
    const std::size_t n = v.size();
    if (n < 2) return 0.0;

    std::vector<double> extrema;
    extrema.reserve(16);
    extrema.push_back(v[0]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d_prev = v[i] - v[i - 1];
        const double d_next = v[i + 1] - v[i];
        const bool is_max = d_prev > 0.0 && d_next <= 0.0;
        const bool is_min = d_prev <= 0.0 && d_next > 0.0;
        if (!is_max && !is_min) continue;

        double val = v[i];
        if (i >= 2 && i + 2 < n) {
            const double sl = (v[i - 1] - v[i - 2]) / (x[i - 1] - x[i - 2]);
            const double sr = (v[i + 2] - v[i + 1]) / (x[i + 2] - x[i + 1]);
            if (sl != sr) {
                const double xi = ((v[i + 1] - sr * x[i + 1]) - (v[i - 1] - sl * x[i - 1])) / (sl - sr);
                if (xi >= x[i - 1] && xi <= x[i + 1]) {
                    const double cand = v[i - 1] + sl * (xi - x[i - 1]);
                    if ((is_min && cand <= val) || (is_max && cand >= val)) val = cand;
                }
            }
        }
        extrema.push_back(val);
    }
    extrema.push_back(v[n - 1]);

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < extrema.size(); ++k) {
        const double d = extrema[k + 1] - extrema[k];
        if (d > 0.0) total += d;
    }
    return total;
}

// Maximal runs of consecutive increments exceeding eps, as (nu_start, nu_end).
inline std::vector<std::pair<double, double>> revival_intervals(const TimeSeries& series, double eps) {
    if (!(eps > 0.0)) throw DomainError("revival_intervals: eps must be > 0");
    std::vector<std::pair<double, double>> intervals;
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t k = 0; k + 1 < series.values.size(); ++k) {
        const bool rising = series.values[k + 1] - series.values[k] > eps;
        if (rising && !in_run) {
            run_start = k;
            in_run = true;
        } else if (!rising && in_run) {
            intervals.emplace_back(series.nus[run_start], series.nus[k]);
            in_run = false;
        }
    }
    if (in_run) intervals.emplace_back(series.nus[run_start], series.nus.back());
    return intervals;
}

struct LabeledState {
    DensityMatrix state;
    std::string label;
    std::uint64_t order = 0;  // deterministic tie-break, lowest wins
};

struct LabeledPair {
    DensityMatrix a;
    DensityMatrix b;
    std::string label;
    std::uint64_t order = 0;
};

namespace detail {

inline unsigned thread_budget(std::size_t jobs) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("MEMCHAN_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned long>(cap) < n) n = static_cast<unsigned>(cap);
    }
    if (static_cast<std::size_t>(n) > jobs) n = static_cast<unsigned>(jobs);
    return n == 0 ? 1 : n;
}

// Runs fn(i) for i in [0, jobs); results must be written by index so the
// outcome is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
    const unsigned threads = thread_budget(jobs);
    if (threads <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct EvolutionTable {
    std::vector<double> nus;
    std::vector<double> phis;
    std::vector<double> gammas;
};

inline EvolutionTable tabulate_evolution(const GridSpec& grid, const DephasingParams& params, double mu) {
    EvolutionTable t;
    t.nus = make_grid(grid);
    t.phis.resize(t.nus.size());
    t.gammas.resize(t.nus.size());
    for (std::size_t k = 0; k < t.nus.size(); ++k) {
        t.phis[k] = phi(t.nus[k], params);
        t.gammas[k] = (1.0 - mu) * t.phis[k] * t.phis[k] + mu;
    }
    return t;
}

template <typename Item, typename Trajectory>
MeasureResult maximize_over(const std::vector<Item>& items, const GridSpec& grid,
                            const EvolutionTable& table, Trajectory&& trajectory) {
    std::vector<double> values(items.size());
    parallel_for(items.size(), [&](std::size_t i) {
        std::vector<double> traj(table.nus.size());
        for (std::size_t k = 0; k < table.nus.size(); ++k)
            traj[k] = trajectory(items[i], table.phis[k], table.gammas[k]);
        values[i] = positive_increment_sum_refined(TimeSeries(table.nus, std::move(traj)));
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (values[i] > values[best] ||
            (values[i] == values[best] && items[i].order < items[best].order))
            best = i;
    }
    return MeasureResult{values[best], items[best].label, grid};
}

}  // namespace detail

// BLP measure over a list of candidate initial-state pairs: each pair is
// evolved over the grid, the positive part of its trace-distance trajectory
// is summed, and the maximum is returned with its pair descriptor. Ties are
// broken toward the lowest order value.
inline MeasureResult blp_measure(const std::vector<LabeledPair>& pairs, const DephasingParams& params,
                                 double mu, const GridSpec& grid) {
    if (pairs.empty()) throw DomainError("blp_measure: pair list is empty");
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("blp_measure: mu must be in [0,1]");
    const auto table = detail::tabulate_evolution(grid, params, mu);
    return detail::maximize_over(pairs, grid, table, [](const LabeledPair& p, double f, double g) {
        const ComplexMatrix a = detail::evolve_entries(p.a.matrix(), f, g);
        const ComplexMatrix b = detail::evolve_entries(p.b.matrix(), f, g);
        return 0.5 * trace_norm(a - b);
    });
}

// Entanglement-based measure over a list of candidate initial states, using
// the concurrence trajectory of each evolved state.
inline MeasureResult entanglement_measure(const std::vector<LabeledState>& states,
                                          const DephasingParams& params, double mu,
                                          const GridSpec& grid) {
    if (states.empty()) throw DomainError("entanglement_measure: state list is empty");
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("entanglement_measure: mu must be in [0,1]");
    const auto table = detail::tabulate_evolution(grid, params, mu);
    return detail::maximize_over(states, grid, table, [](const LabeledState& s, double f, double g) {
        return concurrence(DensityMatrix(detail::evolve_entries(s.state.matrix(), f, g)));
    });
}

enum class MeasureKind { blp, entanglement };

// Candidate ensemble for a sweep; pairs feed the BLP measure, states the
// entanglement measure. Built once per sweep so every mu sees the same
// seed-fixed ensemble.
struct MeasureSource {
    std::vector<LabeledPair> pairs;
    std::vector<LabeledState> states;
};

inline std::vector<std::pair<double, MeasureResult>> measure_sweep(
    MeasureKind kind, const std::vector<double>& mu_grid, const MeasureSource& source,
    const DephasingParams& params, const GridSpec& grid) {
    if (mu_grid.empty()) throw DomainError("measure_sweep: mu_grid is empty");
    std::vector<std::pair<double, MeasureResult>> out;
    out.reserve(mu_grid.size());
    for (double mu : mu_grid) {
        if (kind == MeasureKind::blp)
            out.emplace_back(mu, blp_measure(source.pairs, params, mu, grid));
        else
            out.emplace_back(mu, entanglement_measure(source.states, params, mu, grid));
    }
    return out;
}

}  // namespace memchan
