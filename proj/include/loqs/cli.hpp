#pragma once
// Command-line front end: synthesize / simulate / verify / prep-state /
// ordering-check with JSON input and canonical JSON output.
//
// Exit codes: 0 success, 2 malformed input, 3 infeasible request,
// 4 numerical residual above tolerance.

#include "loqs/applications.hpp"
#include "loqs/json_io.hpp"
#include "loqs/network.hpp"
#include "loqs/ordering.hpp"
#include "loqs/resource.hpp"
#include "loqs/synthesis.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace loqs::cli {

struct CliResult {
    int exit_code = 0;
    std::string output;
    std::optional<std::string> output_path;
};

namespace detail {

struct CommonOptions {
    double tolerance = 1e-9;
    std::vector<int> cutoffs;
    std::uint64_t seed = 0;
    std::string output_path;
    std::string input_path;
};

inline void add_common(CLI::App* sub, CommonOptions& opts) {
    sub->add_option("--tolerance", opts.tolerance, "residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--cutoff", opts.cutoffs, "per-mode photon cutoff (repeatable)")
        ->check(CLI::Range(1, 64));
    sub->add_option("--seed", opts.seed, "seed for randomized checks");
    sub->add_option("--output,-o", opts.output_path, "write JSON here instead of stdout");
    sub->add_option("input", opts.input_path, "input JSON file ('-' or absent reads stdin)");
}

inline Json load_input(const CommonOptions& opts, const std::function<std::string()>& read_stdin) {
    std::string text;
    if (opts.input_path.empty() || opts.input_path == "-") {
        text = read_stdin();
    } else {
        std::ifstream in(opts.input_path);
        if (!in) throw std::invalid_argument("cannot open input file: " + opts.input_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    if (text.empty()) text = "{}";
    return Json::parse(text);  // throws Json::parse_error on malformed input
}

struct Failure {
    int code;
    std::string reason;
};

inline Json error_body(int code, const std::string& reason) {
    return Json{{"ok", false}, {"error", Json{{"code", code}, {"reason", reason}}}};
}

// ---------------------------------------------------------------------------
// synthesize
// ---------------------------------------------------------------------------

inline Json cmd_synthesize(const Json& in, const CommonOptions&) {
    if (!in.contains("target") || !in.at("target").is_object() ||
        !in.at("target").contains("kind")) {
        throw std::domain_error("target.kind is required");
    }
    const Json& target = in.at("target");
    const std::string kind = target.at("kind").get<std::string>();
    const Complex t1 =
        in.contains("T1") ? complex_from_json(in.at("T1"), "T1") : Complex(1.0);

    SynthesisSchedule schedule;
    Json diagnostics;
    if (kind == "function_of_n") {
        if (!target.contains("values")) throw std::domain_error("function_of_n needs values");
        std::vector<Complex> values;
        for (const auto& v : target.at("values")) values.push_back(complex_from_json(v, "value"));
        const int degree = target.contains("N") ? target.at("N").get<int>()
                                                : static_cast<int>(values.size()) - 1;
        const int mode = target.value("mode", 0);
        schedule = photon_number_schedule(values, degree, t1, mode);
    } else if (kind == "exponential_zn") {
        if (!target.contains("z") || !in.contains("N")) {
            throw std::domain_error("exponential_zn needs target.z and N");
        }
        schedule = exponential_zn_schedule(complex_from_json(target.at("z"), "z"),
                                           in.at("N").get<int>(), t1);
    } else if (kind == "ladder") {
        if (!target.contains("terms") || !in.contains("N")) {
            throw std::domain_error("ladder needs target.terms and N");
        }
        std::vector<LadderTerm> terms;
        for (const auto& t : target.at("terms")) {
            terms.push_back({complex_from_json(t.at("c"), "term.c"),
                             monomial_from_json(t.at("monomial"))});
        }
        schedule = general_ladder(terms, in.at("N").get<int>(), t1);
    } else if (kind == "custom_poly") {
        if (!target.contains("coefficients") || !in.contains("monomial")) {
            throw std::domain_error("custom_poly needs target.coefficients and monomial");
        }
        std::vector<Complex> coeffs;
        for (const auto& c : target.at("coefficients")) {
            coeffs.push_back(complex_from_json(c, "coefficient"));
        }
        const MonomialSpec monomial = monomial_from_json(in.at("monomial"));
        std::optional<GeneralDeviceParams> base;
        if (in.contains("device")) {
            const Json& d = in.at("device");
            base = GeneralDeviceParams{complex_from_json(d.at("T1"), "device.T1"),
                                       complex_from_json(d.at("R1"), "device.R1"),
                                       complex_from_json(d.at("T2"), "device.T2"),
                                       complex_from_json(d.at("R2"), "device.R2"), Complex(1.0)};
            if (std::abs(base->T1 - t1) > 1e-12) {
                throw std::domain_error("device.T1 must match the schedule T1");
            }
        }
        schedule = roots_to_schedule(coeffs, gamma_factor(monomial, t1), monomial, t1, base);
    } else {
        throw std::domain_error("unknown target.kind: " + kind);
    }

    Json out;
    out["ok"] = true;
    out["schedule"] = schedule_to_json(schedule);
    out["diagnostics"] = diagnostics.is_null() ? Json::object() : diagnostics;
    return out;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline Json cmd_simulate(const Json& in, const CommonOptions& opts, double tolerance) {
    std::vector<int> cutoffs = opts.cutoffs;
    if (in.contains("cutoffs")) cutoffs = in.at("cutoffs").get<std::vector<int>>();
    if (cutoffs.empty()) throw std::domain_error("cutoffs are required (flag or input field)");
    for (int c : cutoffs) {
        if (c < 1) throw std::domain_error("cutoffs must be >= 1");
    }
    FockSpace space(cutoffs);

    Circuit circuit;
    double bs_invariant = 0.0;
    for (const auto& el : in.value("elements", Json::array())) {
        if (el.contains("bs")) {
            const Json& bs = el.at("bs");
            const auto modes = bs.at("modes").get<std::vector<int>>();
            if (modes.size() != 2) throw std::domain_error("bs.modes must list two modes");
            const BeamSplitterParams p = params_from_json(bs.at("params"));
            bs_invariant = std::max(bs_invariant, std::abs(std::norm(p.T) + std::norm(p.R) - 1.0));
            bs_invariant = std::max(bs_invariant, std::abs(std::norm(p.P) - 1.0));
            p.validate();
            circuit.elements.push_back(BsElement{modes[0], modes[1], p});
        } else if (el.contains("phase")) {
            const Json& ph = el.at("phase");
            circuit.elements.push_back(
                PhaseElement{ph.at("mode").get<int>(), ph.at("phi").get<double>()});
        } else {
            throw std::domain_error("unknown element (expected bs or phase)");
        }
    }

    std::vector<PrepAssignment> preps;
    double prep_tail = 0.0;
    const Json prep_map = in.value("prep", Json::object());
    for (const auto& [key, value] : prep_map.items()) {
        const int mode = std::stoi(key);
        if (mode < 0 || mode >= space.num_modes()) throw std::domain_error("prep mode out of range");
        FockSpace one({space.cutoff(mode)});
        StateVector state = fock_state(one, {0});
        if (value.contains("fock")) {
            state = fock_state(one, {value.at("fock").get<int>()});
        } else if (value.contains("coherent")) {
            state = coherent_state(one, 0, complex_from_json(value.at("coherent"), "coherent"));
        } else if (value.contains("amplitudes")) {
            Vector amps = Vector::Zero(static_cast<Eigen::Index>(one.dim()));
            const Json& arr = value.at("amplitudes");
            if (arr.size() != one.dim()) {
                throw std::domain_error("prep amplitudes must match the mode dimension");
            }
            for (std::size_t i = 0; i < arr.size(); ++i) {
                amps(static_cast<Eigen::Index>(i)) = complex_from_json(arr.at(i), "amplitude");
            }
            state = StateVector(one, std::move(amps));
        } else {
            throw std::domain_error("prep entries need fock, coherent or amplitudes");
        }
        prep_tail += state.tail_weight;
        preps.push_back({{mode}, std::move(state)});
    }

    std::map<int, int> pattern;
    const Json pattern_map = in.value("pattern", Json::object());
    for (const auto& [key, value] : pattern_map.items()) {
        pattern[std::stoi(key)] = value.get<int>();
    }

    const auto signal_modes = in.value("signal_modes", std::vector<int>{});
    {
        std::vector<bool> prepped(static_cast<std::size_t>(space.num_modes()), false);
        for (const auto& p : preps) prepped[static_cast<std::size_t>(p.modes[0])] = true;
        std::size_t expected = 0;
        for (bool b : prepped) expected += b ? 0 : 1;
        if (signal_modes.size() != expected) {
            throw std::domain_error("signal_modes must list exactly the unprepared inputs");
        }
        for (int m : signal_modes) {
            if (m < 0 || m >= space.num_modes() || prepped[static_cast<std::size_t>(m)]) {
                throw std::domain_error("signal mode overlaps a preparation");
            }
        }
    }

    const OperatorMatrix y = conditional_from_circuit(circuit, space, preps, pattern);

    Json out;
    out["ok"] = prep_tail < tolerance;
    out["Y"] = matrix_to_json(y.m);
    out["in_cutoffs"] = y.in_space.cutoffs();
    out["out_cutoffs"] = y.out_space.cutoffs();
    out["residuals"] = Json{{"prep_tail", prep_tail}, {"bs_invariant", bs_invariant}};
    if (in.contains("input_state")) {
        const Json& arr = in.at("input_state").at("amplitudes");
        if (arr.size() != y.in_space.dim()) {
            throw std::domain_error("input_state must match the signal dimension");
        }
        Vector amps(static_cast<Eigen::Index>(arr.size()));
        for (std::size_t i = 0; i < arr.size(); ++i) {
            amps(static_cast<Eigen::Index>(i)) = complex_from_json(arr.at(i), "input amplitude");
        }
        out["probability"] = (y.m * amps).squaredNorm();
    }
    return out;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

inline Json verify_cross_kerr(const Json& params, std::uint64_t seed) {
    const double phi = params.value("phi", M_PI);
    const int m = params.value("M", 1);
    const int k = params.value("k", 1);
    const auto synth = synthesize_cross_kerr({phi, m, k});

    FockSpace sig({std::max(m, 1), std::max(m, 1)});
    Matrix target = Matrix::Zero(static_cast<Eigen::Index>(sig.dim()),
                                 static_cast<Eigen::Index>(sig.dim()));
    for (std::size_t r = 0; r < sig.dim(); ++r) {
        const MultiIndex idx = sig.unrank(r);
        target(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) =
            std::polar(1.0, phi * idx[0] * idx[1]);
    }
    const double fidelity = unitary_fidelity(target, synth.composed.m);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double p_min = 1e300, p_max = 0.0, p_mean = 0.0;
    const int trials = 10;
    for (int i = 0; i < trials; ++i) {
        Vector v(static_cast<Eigen::Index>(sig.dim()));
        for (Eigen::Index n = 0; n < v.size(); ++n) v(n) = Complex(dist(rng), dist(rng));
        v /= v.norm();
        const double p = (synth.composed.m * v).squaredNorm();
        p_min = std::min(p_min, p);
        p_max = std::max(p_max, p);
        p_mean += p / trials;
    }
    Json out;
    out["residuals"] = Json{{"fidelity_deficit", 1.0 - fidelity},
                            {"probability_spread", p_max - p_min}};
    out["probability"] = p_mean;
    out["stage_count"] = static_cast<int>(synth.schedule.stages.size());
    return out;
}

inline Json verify_mirror(const Json& params) {
    const int cutoff = params.value("cutoff", 2);
    FockSpace space({cutoff, cutoff, cutoff});
    double heisenberg = 0.0, unitarity = 0.0;
    std::vector<int> perm{0, 1, 2};
    std::sort(perm.begin(), perm.end());
    do {
        const OperatorMatrix u = n_mode_mirror(space, {perm, {}});
        unitarity = std::max(
            unitarity, ((u.m.adjoint() * u.m) -
                        Matrix::Identity(static_cast<Eigen::Index>(space.dim()),
                                         static_cast<Eigen::Index>(space.dim())))
                           .cwiseAbs()
                           .maxCoeff());
        for (int j = 0; j < 3; ++j) {
            const Matrix lhs = u.m.adjoint() * annihilation_op(space, j).m * u.m;
            heisenberg = std::max(
                heisenberg,
                (lhs - annihilation_op(space, perm[static_cast<std::size_t>(j)]).m)
                    .cwiseAbs()
                    .maxCoeff());
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    Json out;
    out["residuals"] = Json{{"heisenberg", heisenberg}, {"unitarity", unitarity}};
    return out;
}

inline Json verify_teleport(const Json& params) {
    const int cutoff = params.value("cutoff", 4);
    FockSpace space({cutoff, cutoff});
    const OperatorMatrix exact = teleport_identity(space, 0, 1);
    const OperatorMatrix mirror = teleport_identity_via_mirror(space, 0, 1);
    const double construction = (exact.m - mirror.m).cwiseAbs().maxCoeff();
    const OperatorMatrix round = compose(teleport_identity(space, 1, 0), exact);
    const double round_trip =
        (round.m - Matrix::Identity(round.m.rows(), round.m.cols())).cwiseAbs().maxCoeff();
    Json out;
    out["residuals"] = Json{{"mirror_construction", construction}, {"round_trip", round_trip}};
    return out;
}

inline Json verify_multiphoton(const Json& params) {
    const Complex z = params.contains("z") ? complex_from_json(params.at("z"), "z") : Complex(1.0);
    const int degree = params.value("N", 2);
    const int k = params.value("k", 2);
    const auto res = prep_multiphoton(z, degree, k);

    // expected amplitudes: z^n on |n,...,n>, normalized, up to a global phase
    const FockSpace& space = res.state.space;
    double norm2 = 0.0;
    for (int n = 0; n <= degree; ++n) norm2 += std::pow(std::norm(z), n);
    double residual = 0.0;
    Complex phase(1.0);
    {
        MultiIndex zero(static_cast<std::size_t>(k), 0);
        const Complex a0 = res.state.amps(static_cast<Eigen::Index>(space.rank(zero)));
        if (std::abs(a0) > 0.0) phase = a0 / std::abs(a0);
    }
    for (std::size_t r = 0; r < space.dim(); ++r) {
        const MultiIndex idx = space.unrank(r);
        bool equal = true;
        for (int m = 1; m < k; ++m) equal = equal && idx[static_cast<std::size_t>(m)] == idx[0];
        Complex expect(0.0);
        if (equal && idx[0] <= degree) expect = phase * cpow_int(z, idx[0]) / std::sqrt(norm2);
        residual = std::max(residual,
                            std::abs(res.state.amps(static_cast<Eigen::Index>(r)) - expect));
    }
    Json out;
    out["residuals"] = Json{{"amplitude", residual}};
    out["probability"] = res.p;
    return out;
}

inline Json cmd_verify(const Json& in, const CommonOptions& opts, double tolerance) {
    const std::string scenario = in.value("scenario", std::string("all"));
    const Json params = in.value("params", Json::object());

    Json scenarios;
    if (scenario == "cross-kerr" || scenario == "all") {
        scenarios["cross-kerr"] = verify_cross_kerr(params, opts.seed);
    }
    if (scenario == "mirror" || scenario == "all") {
        scenarios["mirror"] = verify_mirror(params);
    }
    if (scenario == "teleport" || scenario == "all") {
        scenarios["teleport"] = verify_teleport(params);
    }
    if (scenario == "multiphoton" || scenario == "all") {
        scenarios["multiphoton"] = verify_multiphoton(params);
    }
    if (scenarios.empty()) throw std::domain_error("unknown scenario: " + scenario);

    bool ok = true;
    Json residuals;
    for (const auto& [name, body] : scenarios.items()) {
        for (const auto& [key, value] : body.at("residuals").items()) {
            residuals[name + "." + key] = value;
            ok = ok && value.get<double>() < tolerance;
        }
    }
    Json out;
    out["ok"] = ok;
    out["residuals"] = residuals;
    out["scenarios"] = scenarios;
    return out;
}

// ---------------------------------------------------------------------------
// prep-state
// ---------------------------------------------------------------------------

inline Json cmd_prep_state(const Json& in, const CommonOptions&) {
    ResourceSpec spec;
    spec.k = in.value("k", 1);
    spec.bits = in.value("bits", std::vector<int>(static_cast<std::size_t>(std::max(spec.k, 1)), 0));
    spec.z = in.contains("z") ? complex_from_json(in.at("z"), "z") : Complex(0.0);

    ClonerKind cloner = ClonerKind::Ideal;
    const std::string cloner_name = in.value("cloner", std::string("ideal"));
    if (cloner_name == "ideal") {
        cloner = ClonerKind::Ideal;
    } else if (cloner_name == "kerr_mzi") {
        cloner = ClonerKind::KerrMzi;
    } else if (cloner_name == "three_wave") {
        cloner = ClonerKind::ThreeWave;
    } else if (cloner_name == "linear") {
        cloner = ClonerKind::Linear;
    } else {
        throw std::domain_error("unknown cloner: " + cloner_name);
    }

    Complex alpha, t, r;
    const bool optimal = !in.contains("alpha") || in.at("alpha") == Json("optimal");
    if (optimal) {
        const auto opt = optimal_alpha(spec.z);
        alpha = Complex(std::sqrt(opt.alpha_sq));
        if (std::abs(alpha) == 0.0 && std::abs(spec.z) == 0.0) alpha = Complex(0.0);
        const double ratio = std::abs(alpha) > 0.0 ? std::abs(spec.z) / std::abs(alpha) : 0.0;
        t = Complex(1.0 / std::sqrt(1.0 + ratio * ratio));
        r = std::abs(alpha) > 0.0 ? Complex(t * spec.z / alpha)
                                  : Complex(std::sqrt(1.0 - std::norm(t)));
    } else {
        alpha = complex_from_json(in.at("alpha"), "alpha");
        if (!in.contains("T") || !in.contains("R")) {
            throw std::domain_error("explicit alpha needs explicit T and R");
        }
        t = complex_from_json(in.at("T"), "T");
        r = complex_from_json(in.at("R"), "R");
    }

    const int designated = in.value("designated_zero", -1);
    const ResourceResult res = build_resource(spec, cloner, t, r, alpha, designated);

    Json out;
    out["ok"] = true;
    out["amplitudes"] = vector_to_json(res.state.amps);
    out["p"] = res.p;
    out["global_phase"] = res.global_phase;
    out["spec"] = Json{{"k", spec.k}, {"bits", spec.bits}, {"z", complex_to_json(spec.z)}};
    return out;
}

// ---------------------------------------------------------------------------
// ordering-check
// ---------------------------------------------------------------------------

inline Json cmd_ordering_check(const Json& in, const CommonOptions&, double tolerance) {
    const int max_power = in.value("max_power", 5);
    const int cutoff = in.value("cutoff", 12);
    const int bridge_max = in.value("bridge_max", 6);
    FockSpace space({cutoff});
    const std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};

    double b2_scalar = 0.0;
    double b2_b3 = 0.0;
    for (int k = 0; k <= max_power; ++k) {
        for (double s : grid) {
            const auto power = s_ordered_power_of_n(space, k, s);
            double kfact = 1.0;
            for (int i = 2; i <= k; ++i) kfact *= i;
            for (int n = 0; n <= cutoff; ++n) {
                double scalar = 0.0;
                for (int l = 0; l <= k; ++l) {
                    scalar += kfact * std::pow((1.0 - s) / 2.0, k - l) * binomial(k, l) *
                              generalized_binomial(n, l);
                }
                const double denom = 1.0 + std::abs(scalar);
                b2_scalar = std::max(b2_scalar, std::abs(power.op.m(n, n).real() - scalar) / denom);
            }

            const auto c = power_of_n_from_s_ordered(k, s);
            Matrix acc = Matrix::Zero(cutoff + 1, cutoff + 1);
            double lfact = 1.0;
            for (std::size_t l = 0; l < c.size(); ++l) {
                if (l > 1) lfact *= static_cast<double>(l);
                acc += (c[l] / lfact) * s_ordered_power_of_n(space, static_cast<int>(l), s).op.m;
            }
            for (int n = 0; n <= cutoff; ++n) {
                const double expect = std::pow(static_cast<double>(n), k);
                b2_b3 = std::max(b2_b3, std::abs(acc(n, n) - expect) / (1.0 + std::abs(expect)));
            }
        }
    }

    double b4_b5 = 0.0;
    for (const Complex a : {Complex(2.0, 0.0), Complex(0.4, 0.3), Complex(1.5, -0.8)}) {
        for (double s : grid) {
            const auto rep = power_as_s_ordered_exponential(a, s);
            const OperatorMatrix exp_op = s_ordered_exponential(space, rep.exponent, s);
            for (int n = 0; n <= cutoff; ++n) {
                const Complex expect = cpow_int(a, n);
                b4_b5 = std::max(b4_b5, std::abs(rep.prefactor * exp_op.m(n, n) - expect) /
                                            std::abs(expect));
            }
        }
    }

    double bridge = 0.0;
    const Complex z(1.8, 0.6);
    for (int big_n = 0; big_n <= bridge_max; ++big_n) {
        Matrix acc = Matrix::Zero(cutoff + 1, cutoff + 1);
        for (int k = 0; k <= big_n; ++k) {
            acc += cpow_int(z - 1.0, k) * binomial_of_number_op(space, k).m;
        }
        for (int n = 0; n <= big_n && n <= cutoff; ++n) {
            const Complex expect = cpow_int(z, n);
            bridge = std::max(bridge, std::abs(acc(n, n) - expect) / (1.0 + std::abs(expect)));
        }
    }

    Json out;
    const bool ok =
        b2_scalar < tolerance && b2_b3 < tolerance && b4_b5 < tolerance && bridge < tolerance;
    out["ok"] = ok;
    out["residuals"] = Json{{"b2_scalar", b2_scalar},
                            {"b2_b3_roundtrip", b2_b3},
                            {"b4_b5_roundtrip", b4_b5},
                            {"bridge", bridge}};
    return out;
}

}  // namespace detail

// Run the CLI. `read_stdin` is consulted only when the input comes from
// standard input, so tests can feed fixtures without processes.
inline CliResult run(const std::vector<std::string>& args,
                     const std::function<std::string()>& read_stdin) {
    CLI::App app{"measurement-assisted linear-optics operator synthesis toolkit", "loqs"};
    app.require_subcommand(1);

    detail::CommonOptions synth_opts, sim_opts, verify_opts, prep_opts, ordering_opts;
    CLI::App* synth = app.add_subcommand("synthesize", "compile a target into a stage schedule");
    detail::add_common(synth, synth_opts);
    CLI::App* sim = app.add_subcommand("simulate", "condition a beam-splitter network");
    detail::add_common(sim, sim_opts);
    CLI::App* verify = app.add_subcommand("verify", "run named end-to-end scenarios");
    detail::add_common(verify, verify_opts);
    CLI::App* prep = app.add_subcommand("prep-state", "prepare the entangled resource state");
    detail::add_common(prep, prep_opts);
    CLI::App* ordering = app.add_subcommand("ordering-check", "run the s-ordering identity suites");
    detail::add_common(ordering, ordering_opts);

    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    storage.insert(storage.begin(), "loqs");
    argv.reserve(storage.size());
    for (auto& s : storage) argv.push_back(s.data());

    CliResult result;
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream ss;
        if (e.get_exit_code() == 0) {
            result.output = app.help();
            result.exit_code = 0;
        } else {
            result.output = dump_canonical(detail::error_body(2, e.what()));
            result.exit_code = 2;
        }
        return result;
    }

    const detail::CommonOptions* opts = nullptr;
    int which = 0;
    if (synth->parsed()) {
        opts = &synth_opts;
        which = 0;
    } else if (sim->parsed()) {
        opts = &sim_opts;
        which = 1;
    } else if (verify->parsed()) {
        opts = &verify_opts;
        which = 2;
    } else if (prep->parsed()) {
        opts = &prep_opts;
        which = 3;
    } else {
        opts = &ordering_opts;
        which = 4;
    }
    if (!opts->output_path.empty()) result.output_path = opts->output_path;

    Json body;
    try {
        Json in;
        try {
            in = detail::load_input(*opts, read_stdin);
        } catch (const Json::parse_error& e) {
            result.output = dump_canonical(detail::error_body(2, e.what()));
            result.exit_code = 2;
            return result;
        } catch (const Json::exception& e) {
            result.output = dump_canonical(detail::error_body(2, e.what()));
            result.exit_code = 2;
            return result;
        }

        try {
            switch (which) {
                case 0: body = detail::cmd_synthesize(in, *opts); break;
                case 1: body = detail::cmd_simulate(in, *opts, opts->tolerance); break;
                case 2: body = detail::cmd_verify(in, *opts, opts->tolerance); break;
                case 3: body = detail::cmd_prep_state(in, *opts); break;
                default: body = detail::cmd_ordering_check(in, *opts, opts->tolerance); break;
            }
        } catch (const Json::exception& e) {
            // missing or mistyped fields
            result.output = dump_canonical(detail::error_body(2, e.what()));
            result.exit_code = 2;
            return result;
        } catch (const std::domain_error& e) {
            // structurally invalid request
            result.output = dump_canonical(detail::error_body(2, e.what()));
            result.exit_code = 2;
            return result;
        } catch (const std::exception& e) {
            // well-formed but mathematically unreachable
            result.output = dump_canonical(detail::error_body(3, e.what()));
            result.exit_code = 3;
            return result;
        }
    } catch (...) {
        result.output = dump_canonical(detail::error_body(2, "unexpected input failure"));
        result.exit_code = 2;
        return result;
    }

    result.output = dump_canonical(body);
    result.exit_code = body.value("ok", true) ? 0 : 4;
    return result;
}

}  // namespace loqs::cli
