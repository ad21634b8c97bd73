// Command-layer plumbing shared by the memchan tool and the test suites:
// run configuration, candidate-ensemble construction, CSV/JSON emission and
// the dynamics / sweep / verify commands.
#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "memchan/measures.hpp"

namespace memchan {

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_, const std::string& what)
        : std::runtime_error("config error [" + field_ + "]: " + what), field(std::move(field_)) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum class Command { dynamics, sweep, verify };

struct RunConfig {
    Command command = Command::dynamics;
    double tau = 1.0;
    double mu = 0.0;                // dynamics
    std::vector<double> mu_grid;    // sweep
    double nu_max = 40.0;
    int steps = 20000;
    std::uint64_t seed = 42;
    int samples = 500;
    std::string measure;            // sweep: "blp" or "ent"
    std::string family = "all";
    std::string out_path;
};

inline const std::vector<std::string>& blp_families() {
    static const std::vector<std::string> f{"structured", "pure", "mixed", "product", "lu", "mixed_pure"};
    return f;
}

inline const std::vector<std::string>& ent_families() {
    static const std::vector<std::string> f{"bell", "lu", "pure", "mixed", "product"};
    return f;
}

inline void validate_run_config(const RunConfig& cfg) {
    if (!(cfg.tau > 0.0)) throw ConfigError("tau", "must be > 0");
    if (cfg.steps < 2) throw ConfigError("steps", "must be >= 2");
    if (!(cfg.nu_max > 0.0)) throw ConfigError("nu_max", "must be > 0");
    if (cfg.samples < 1) throw ConfigError("samples", "must be >= 1");
    if (cfg.out_path.empty()) throw ConfigError("out", "output path is required");
    if (cfg.command == Command::dynamics) {
        if (!(cfg.mu >= 0.0 && cfg.mu <= 1.0)) throw ConfigError("mu", "must be in [0,1]");
    }
    if (cfg.command == Command::sweep) {
        if (cfg.measure != "blp" && cfg.measure != "ent")
            throw ConfigError("measure", "must be 'blp' or 'ent'");
        if (cfg.mu_grid.empty()) throw ConfigError("mu_grid", "at least one mu value is required");
        for (double mu : cfg.mu_grid)
            if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mu_grid", "values must be in [0,1]");
        const auto& known = cfg.measure == "blp" ? blp_families() : ent_families();
        if (cfg.family != "all" &&
            std::find(known.begin(), known.end(), cfg.family) == known.end() &&
            !(cfg.measure == "blp" && cfg.family == "pm"))
            throw ConfigError("family", "unknown family '" + cfg.family + "'");
    }
}

// "a:b:step" -> {a, a+step, ..., <= b} (b included within half a step).
inline std::vector<double> parse_mu_grid(const std::string& text) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError("mu_grid", "expected a:b:step, got '" + text + "'");
    double a = 0.0, b = 0.0, step = 0.0;
    try {
        a = std::stod(text.substr(0, c1));
        b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        step = std::stod(text.substr(c2 + 1));
    } catch (const std::exception&) {
        throw ConfigError("mu_grid", "non-numeric entry in '" + text + "'");
    }
    if (!(step > 0.0) || b < a) throw ConfigError("mu_grid", "need step > 0 and b >= a");
    std::vector<double> grid;
    for (double v = a; v <= b + 0.5 * step; v += step) grid.push_back(std::min(v, b));
    return grid;
}

// 17 significant digits, locale-independent.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace detail {

struct StreamCounter {
    std::uint64_t seed;
    std::uint64_t next = 0;
    RngStream take() { return RngStream(seed, next++); }
    std::uint64_t last() const { return next - 1; }
};

inline ComplexMatrix qubit_perp(const ComplexMatrix& ket) {
    ComplexMatrix perp(2, 1);
    perp(0, 0) = -std::conj(ket(1, 0));
    perp(1, 0) = std::conj(ket(0, 0));
    return perp;
}

}  // namespace detail

// Candidate pairs for the BLP optimization. The structured library holds the
// |++>/|--> pair, its |+->/|-+> partner, the six orthogonal Bell pairs and
// seeded antipodal product pairs; the sampled families draw both members
// independently. Stream indices are allocated in a fixed order so a family
// subset is reproducible regardless of which other families run.
inline std::vector<LabeledPair> make_blp_pairs(const std::string& family, int samples,
                                               std::uint64_t seed) {
    std::vector<LabeledPair> pairs;
    detail::StreamCounter streams{seed};
    std::uint64_t order = 0;
    const bool all = family == "all";

    if (all || family == "structured" || family == "pm") {
        pairs.push_back({plus_minus_state(Sign::plus, Sign::plus),
                         plus_minus_state(Sign::minus, Sign::minus), "pm(++|--)", order++});
        if (family != "pm") {
            pairs.push_back({plus_minus_state(Sign::plus, Sign::minus),
                             plus_minus_state(Sign::minus, Sign::plus), "pm(+-|-+)", order++});
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j)
                    pairs.push_back({bell_state(i), bell_state(j),
                                     "bell(" + std::to_string(i) + "|" + std::to_string(j) + ")",
                                     order++});
        }
    }
    if (all || family == "structured") {
        for (int k = 0; k < samples; ++k) {
            RngStream rng = streams.take();
            const ComplexMatrix a = detail::random_pure_ket(2, rng);
            const ComplexMatrix b = detail::random_pure_ket(2, rng);
            const ComplexMatrix ap = detail::qubit_perp(a);
            const ComplexMatrix bp = detail::qubit_perp(b);
            pairs.push_back({DensityMatrix(detail::projector(kron(a, b))),
                             DensityMatrix(detail::projector(kron(ap, bp))),
                             "antipodal(s=" + std::to_string(streams.last()) + ")", order++});
        }
    } else {
        streams.next += static_cast<std::uint64_t>(samples);  // keep stream layout fixed
    }

    const auto sampled_family = [&](const std::string& name, StateKind kind_a, StateKind kind_b) {
        if (!(all || family == name)) {
            streams.next += static_cast<std::uint64_t>(2 * samples);  // keep stream layout fixed
            return;
        }
        for (int k = 0; k < samples; ++k) {
            RngStream ra = streams.take();
            const std::uint64_t sa = streams.last();
            RngStream rb = streams.take();
            pairs.push_back({sample_state(kind_a, ra), sample_state(kind_b, rb),
                             name + "(s=" + std::to_string(sa) + ")", order++});
        }
    };
    sampled_family("pure", StateKind::pure, StateKind::pure);
    sampled_family("mixed", StateKind::mixed_ginibre, StateKind::mixed_ginibre);
    sampled_family("product", StateKind::product, StateKind::product);
    sampled_family("lu", StateKind::max_entangled_lu, StateKind::max_entangled_lu);
    sampled_family("mixed_pure", StateKind::mixed_ginibre, StateKind::pure);

    if (pairs.empty()) throw ConfigError("family", "unknown pair family '" + family + "'");
    return pairs;
}

// Candidate states for the entanglement measure. "bell" is the four Bell
// projectors; the sampled families are seeded.
inline std::vector<LabeledState> make_ent_states(const std::string& family, int samples,
                                                 std::uint64_t seed) {
    std::vector<LabeledState> states;
    detail::StreamCounter streams{seed};
    std::uint64_t order = 0;
    const bool all = family == "all";

    if (all || family == "bell")
        for (int k = 0; k < 4; ++k)
            states.push_back({bell_state(k), "bell(" + std::to_string(k) + ")", order++});

    const auto sampled_family = [&](const std::string& name, StateKind kind) {
        if (!(all || family == name)) {
            streams.next += static_cast<std::uint64_t>(samples);
            return;
        }
        for (int k = 0; k < samples; ++k) {
            RngStream rng = streams.take();
            states.push_back({sample_state(kind, rng),
                              name + "(s=" + std::to_string(streams.last()) + ")", order++});
        }
    };
    sampled_family("lu", StateKind::max_entangled_lu);
    sampled_family("pure", StateKind::pure);
    sampled_family("mixed", StateKind::mixed_ginibre);
    sampled_family("product", StateKind::product);

    if (states.empty()) throw ConfigError("family", "unknown state family '" + family + "'");
    return states;
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline std::string family_of(const std::string& label) {
    return label.substr(0, label.find('('));
}

}  // namespace detail

// Writes `nu,phi,gamma,trace_distance_optpair,concurrence_bell` rows over the
// configured grid: the coherence factor, the anti-diagonal multiplier, the
// trace distance of the evolved |++>/|--> pair and the concurrence of the
// evolved Phi+ Bell state.
inline void run_dynamics(const RunConfig& cfg) {
    validate_run_config(cfg);
    const DephasingParams params(cfg.tau);
    const auto nus = make_grid(GridSpec{cfg.nu_max, cfg.steps});
    const DensityMatrix pp = plus_minus_state(Sign::plus, Sign::plus);
    const DensityMatrix mm = plus_minus_state(Sign::minus, Sign::minus);
    const DensityMatrix bell = bell_state(0);

    auto out = detail::open_output(cfg.out_path);
    out << "nu,phi,gamma,trace_distance_optpair,concurrence_bell\n";
    for (double nu : nus) {
        const double f = phi(nu, params);
        const double g = gamma_factor(nu, params, cfg.mu);
        const double d = trace_distance(evolve_closed_form(pp, nu, params, cfg.mu),
                                        evolve_closed_form(mm, nu, params, cfg.mu));
        const double c = concurrence(evolve_closed_form(bell, nu, params, cfg.mu));
        out << format_number(nu) << ',' << format_number(f) << ',' << format_number(g) << ','
            << format_number(d) << ',' << format_number(c) << '\n';
    }
    if (!out) throw IoError("write failed for '" + cfg.out_path + "'");
}

struct SweepRow {
    double mu;
    MeasureResult result;
    std::map<std::string, double> family_maxima;
};

// Runs the configured measure over the mu grid with a seed-fixed ensemble.
// Returns one row per mu; also emits the CSV and a JSON summary next to it
// (out path + ".json").
inline std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
    validate_run_config(cfg);
    const DephasingParams params(cfg.tau);
    const GridSpec grid{cfg.nu_max, cfg.steps};
    const MeasureKind kind = cfg.measure == "blp" ? MeasureKind::blp : MeasureKind::entanglement;

    MeasureSource source;
    if (kind == MeasureKind::blp)
        source.pairs = make_blp_pairs(cfg.family, cfg.samples, cfg.seed);
    else
        source.states = make_ent_states(cfg.family, cfg.samples, cfg.seed);

    const auto sweep = measure_sweep(kind, cfg.mu_grid, source, params, grid);

    // family maxima per mu, recomputed per family over the same ensemble split
    std::vector<SweepRow> rows;
    rows.reserve(sweep.size());
    std::map<std::string, MeasureSource> by_family;
    if (kind == MeasureKind::blp)
        for (const auto& p : source.pairs) by_family[detail::family_of(p.label)].pairs.push_back(p);
    else
        for (const auto& s : source.states) by_family[detail::family_of(s.label)].states.push_back(s);

    for (std::size_t i = 0; i < sweep.size(); ++i) {
        SweepRow row{sweep[i].first, sweep[i].second, {}};
        for (const auto& [name, sub] : by_family) {
            const MeasureResult r = kind == MeasureKind::blp
                                        ? blp_measure(sub.pairs, params, row.mu, grid)
                                        : entanglement_measure(sub.states, params, row.mu, grid);
            row.family_maxima[name] = r.value;
        }
        rows.push_back(std::move(row));
    }

    auto out = detail::open_output(cfg.out_path);
    out << "mu,measure,value,argmax_descriptor\n";
    for (const auto& row : rows)
        out << format_number(row.mu) << ',' << cfg.measure << ',' << format_number(row.result.value)
            << ',' << row.result.argmax_descriptor << '\n';
    if (!out) throw IoError("write failed for '" + cfg.out_path + "'");

    nlohmann::ordered_json summary;
    summary["command"] = "sweep";
    summary["measure"] = cfg.measure;
    summary["tau"] = cfg.tau;
    summary["nu_max"] = cfg.nu_max;
    summary["steps"] = cfg.steps;
    summary["seed"] = cfg.seed;
    summary["samples"] = cfg.samples;
    summary["family"] = cfg.family;
    summary["mu_grid"] = cfg.mu_grid;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json r;
        r["mu"] = row.mu;
        r["value"] = row.result.value;
        r["argmax_descriptor"] = row.result.argmax_descriptor;
        r["family_maxima"] = row.family_maxima;
        results.push_back(std::move(r));
    }
    summary["results"] = std::move(results);
    auto jout = detail::open_output(cfg.out_path + ".json");
    jout << summary.dump(2) << '\n';
    if (!jout) throw IoError("write failed for '" + cfg.out_path + ".json'");
    return rows;
}

struct VerifyCheck {
    std::string name;
    double tolerance;
    double max_violation;
    bool pass;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;

    void add(const std::string& name, double tolerance, double violation) {
        checks.push_back({name, tolerance, violation, violation <= tolerance});
        all_pass = all_pass && checks.back().pass;
    }
};

// User-facing self-test: re-runs the numerical invariant families (coherence
// bound, closed form vs Kraus sum, Choi positivity and trace preservation,
// multiplier identities, contractivity, sampler validity) on seeded inputs
// and reports the worst observed violation of each.
inline VerifyReport run_verify(const RunConfig& cfg) {
    validate_run_config(cfg);
    VerifyReport report;

    {  // |Phi| <= 1 on a dense grid across both branches
        double worst = 0.0;
        for (double tau : {0.05, 0.25, 0.3, 1.0, 5.0}) {
            const DephasingParams p(tau);
            for (int k = 0; k <= 2000; ++k)
                worst = std::max(worst, std::abs(phi(50.0 * k / 2000.0, p)) - 1.0);
        }
        report.add("phi_bound", 1e-15, std::max(0.0, worst));
    }
    {  // continuity across tau = 1/4
        double worst = 0.0;
        for (double tau : {0.25 - 1e-6, 0.25 + 1e-6}) {
            const DephasingParams p(tau);
            for (int k = 0; k <= 500; ++k) {
                const double nu = 5.0 * k / 500.0;
                worst = std::max(worst, std::abs(phi(nu, p) - std::exp(-nu) * (1.0 + nu)));
            }
        }
        report.add("phi_continuity_tau_quarter", 1e-4, worst);
    }
    const DephasingParams params(cfg.tau);
    {  // closed-form Hadamard evolution vs the general Kraus sum
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            RngStream rng(cfg.seed, 1000 + static_cast<std::uint64_t>(s));
            const DensityMatrix rho = sample_state(StateKind::mixed_ginibre, rng);
            for (int k = 0; k < 20; ++k) {
                const double nu = 2.0 * rng.uniform();
                const double mu = rng.uniform();
                const auto spec = joint_probs(pauli_probs(nu, params), mu);
                const DensityMatrix via_kraus = apply_two_qubit(rho, spec);
                const DensityMatrix via_closed = evolve_closed_form(rho, nu, params, mu);
                worst = std::max(worst, (via_kraus.matrix() - via_closed.matrix()).max_abs());
            }
        }
        report.add("kraus_vs_closed_form", 1e-12, worst);
    }
    {  // Choi positivity and trace preservation over seeded (nu, mu)
        double worst_psd = 0.0, worst_tp = 0.0;
        RngStream rng(cfg.seed, 2000);
        for (int k = 0; k < 100; ++k) {
            const double nu = 3.0 * rng.uniform();
            const double mu = rng.uniform();
            const auto spec = joint_probs(pauli_probs(nu, params), mu);
            const ComplexMatrix choi = choi_matrix(spec);
            const auto ev = hermitian_eigenvalues(choi);
            worst_psd = std::max(worst_psd, std::max(0.0, -ev.back()));
            ComplexMatrix reduced = partial_trace(choi, 4, 4, /*keep_first=*/true);
            reduced -= 0.25 * ComplexMatrix::identity(4);
            worst_tp = std::max(worst_tp, reduced.max_abs());
        }
        report.add("choi_psd", 1e-10, worst_psd);
        report.add("choi_trace_preserving", 1e-12, worst_tp);
    }
    {  // channel outputs stay Hermitian with unit trace
        double worst = 0.0;
        RngStream rng(cfg.seed, 3000);
        for (int k = 0; k < 50; ++k) {
            const DensityMatrix rho = sample_state(StateKind::mixed_ginibre, rng);
            const double nu = 2.0 * rng.uniform();
            const double mu = rng.uniform();
            const DensityMatrix out = apply_two_qubit(rho, joint_probs(pauli_probs(nu, params), mu));
            worst = std::max(worst, std::abs(out.matrix().trace() - cdouble{1.0, 0.0}));
            worst = std::max(worst, out.matrix().hermiticity_defect());
        }
        report.add("channel_trace_hermiticity", 1e-13, worst);
    }
    {  // Gamma and Phi as signed sums of the joint kernel
        double worst = 0.0;
        RngStream rng(cfg.seed, 4000);
        for (int k = 0; k < 200; ++k) {
            const double nu = 4.0 * rng.uniform();
            const double mu = rng.uniform();
            const auto spec = joint_probs(pauli_probs(nu, params), mu);
            const double g = spec(0, 0) - spec(0, 3) - spec(3, 0) + spec(3, 3);
            const double f = spec(0, 0) + spec(3, 0) - spec(0, 3) - spec(3, 3);
            worst = std::max(worst, std::abs(g - gamma_factor(nu, params, mu)));
            worst = std::max(worst, std::abs(f - phi(nu, params)));
        }
        report.add("multiplier_identities", 1e-12, worst);
    }
    {  // contractivity of the full map from t = 0
        double worst = 0.0;
        RngStream rng(cfg.seed, 5000);
        for (int k = 0; k < 30; ++k) {
            const DensityMatrix r1 = sample_state(StateKind::mixed_ginibre, rng);
            const DensityMatrix r2 = sample_state(StateKind::pure, rng);
            const double d0 = trace_distance(r1, r2);
            for (int j = 0; j < 5; ++j) {
                const double nu = 5.0 * rng.uniform();
                const double mu = rng.uniform();
                const double dt = trace_distance(evolve_closed_form(r1, nu, params, mu),
                                                 evolve_closed_form(r2, nu, params, mu));
                worst = std::max(worst, dt - d0);
            }
        }
        report.add("contractivity_from_zero", 1e-10, worst);
    }
    {  // every sampler output passes validate
        double worst = 0.0;
        const StateKind kinds[] = {StateKind::pure, StateKind::mixed_ginibre, StateKind::product,
                                   StateKind::max_entangled_lu, StateKind::bell};
        std::uint64_t stream = 6000;
        for (StateKind kind : kinds)
            for (int k = 0; k < 200; ++k) {
                RngStream rng(cfg.seed, stream++);
                const auto rep = validate(sample_state(kind, rng));
                if (!rep.ok) worst = std::max(worst, rep.magnitude);
            }
        report.add("sampler_validity", 0.0, worst);
    }

    nlohmann::ordered_json j;
    j["command"] = "verify";
    j["seed"] = cfg.seed;
    j["tau"] = cfg.tau;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["tolerance"] = c.tolerance;
        e["max_violation"] = c.max_violation;
        e["pass"] = c.pass;
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    j["all_pass"] = report.all_pass;
    auto out = detail::open_output(cfg.out_path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + cfg.out_path + "'");
    return report;
}

}  // namespace memchan
