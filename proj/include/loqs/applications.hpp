#pragma once
// End-to-end constructions: cross-Kerr emulation via interpolation schedules,
// teleport identities and N-mode mirrors from the T = 0 beam-splitter limit,
// and multi-photon entangled-state preparation by polynomial synthesis.

#include "loqs/linear_optics.hpp"
#include "loqs/network.hpp"
#include "loqs/resource.hpp"
#include "loqs/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace loqs {

// ---------------------------------------------------------------------------
// Cross-Kerr emulation (two signal modes)
// ---------------------------------------------------------------------------

struct KerrTarget {
    double phi = M_PI;  // target phase of e^{i phi n1 n0}
    int max_photons = 1;
    int k_int = 1;  // gamma = 2 k pi / phi

    void validate() const {
        if (phi <= 0.0) throw std::invalid_argument("KerrTarget: phi must be positive");
        if (max_photons < 0) throw std::invalid_argument("KerrTarget: M >= 0 required");
        if (k_int < 1) throw std::invalid_argument("KerrTarget: k >= 1 required");
    }
};

// Smallest k with |T1|^2 = gamma/(1+gamma) >= 1/2, i.e. gamma >= 1.
inline int kerr_pick_k(double phi, bool high_transmittance) {
    if (!high_transmittance) return 1;
    int k = 1;
    while (2.0 * k * M_PI / phi < 1.0) ++k;
    return k;
}

struct KerrStageResult {
    OperatorMatrix op;
    Complex alpha;
    Complex beta;   // in the Y = alpha T1^(n1+n0) (A - beta) convention
    double gamma;   // the shift |T1/R1|^2
};

// Closed form of one two-mode stage, Y = alpha T1^(n1+n0) ((n1-g)(n0-g) - beta).
inline KerrStageResult kerr_stage(const FockSpace& space, Complex t1, Complex r1, Complex t2,
                                  Complex r2, Complex xi) {
    BeamSplitterParams{t1, r1}.validate();
    BeamSplitterParams{t2, r2}.validate();
    if (space.num_modes() != 2) throw std::invalid_argument("kerr_stage: two signal modes expected");
    if (std::abs(r1) < 1e-12) throw std::invalid_argument("kerr_stage: gamma singular at R1 = 0");
    if (std::abs(r2) < 1e-12 || std::abs(xi) < 1e-12) {
        throw std::invalid_argument("kerr_stage: beta singular at R2 = 0 or xi = 0");
    }
    const double gamma = std::norm(t1 / r1);
    const Complex beta =
        -(1.0 / xi) * cpow_int(t1 / std::norm(r1), 2) * cpow_int(t2 / r2, 2);
    const Complex alpha = -t2 * t2 / (beta * std::sqrt(1.0 + std::norm(xi)));

    const OperatorMatrix y = diagonal_op(space, [&](const MultiIndex& idx) {
        const Complex a = (Complex(static_cast<double>(idx[1])) - gamma) *
                          (Complex(static_cast<double>(idx[0])) - gamma);
        return alpha * cpow_int(t1, idx[0] + idx[1]) * (a - beta);
    });
    return {y, alpha, beta, gamma};
}

// Brute-force reference network: two local devices share the two-branch state
// on modes 2..5; detect (1,1,0,0) on modes (2,3,4,5).
inline OperatorMatrix kerr_stage_network(Complex t1, Complex r1, Complex t2, Complex r2,
                                         Complex xi, int signal_cutoff) {
    const int c = signal_cutoff;
    FockSpace space({c, c, 2, 2, c, c});
    Circuit net;
    net.elements.push_back(BsElement{1, 5, {t1, r1}});
    net.elements.push_back(BsElement{3, 5, {t2, r2}});
    net.elements.push_back(BsElement{0, 4, {t1, r1}});
    net.elements.push_back(BsElement{2, 4, {t2, r2}});

    FockSpace anc({2, 2, c, c});
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(anc.dim()));
    const double norm = std::sqrt(1.0 + std::norm(xi));
    amps(static_cast<Eigen::Index>(anc.rank({1, 1, 0, 0}))) = 1.0 / norm;
    amps(static_cast<Eigen::Index>(anc.rank({0, 0, 1, 1}))) = xi / norm;
    std::vector<PrepAssignment> preps{{{2, 3, 4, 5}, StateVector(anc, amps)}};
    return conditional_from_circuit(net, space, preps, {{2, 1}, {3, 1}, {4, 0}, {5, 0}});
}

struct CrossKerrSynthesis {
    SynthesisSchedule schedule;
    OperatorMatrix composed;  // on the (M, M) signal space
    double gamma;
    Complex t1;
    int node_count;
};

// Emulate e^{i phi n1 n0} on states with at most M photons per signal mode:
// tune gamma = 2 k pi / phi so the leftover e^{-i phi gamma (n1+n0)} phases
// are trivial, interpolate e^{i phi A} through the distinct values of
// A = (n1-gamma)(n0-gamma), and optionally append per-mode attenuation
// compensation schedules.
inline CrossKerrSynthesis synthesize_cross_kerr(const KerrTarget& target, Complex xi = Complex(1.0),
                                                bool with_compensation = true) {
    target.validate();
    const double gamma = 2.0 * target.k_int * M_PI / target.phi;
    const double t1_sq = gamma / (1.0 + gamma);
    const Complex t1(std::sqrt(t1_sq));
    const Complex r1(std::sqrt(1.0 - t1_sq));
    const int m = target.max_photons;

    // distinct node values, deduplicated at 1e-9
    std::vector<double> nodes;
    for (int n1 = 0; n1 <= m; ++n1) {
        for (int n0 = 0; n0 <= m; ++n0) {
            const double a = (n1 - gamma) * (n0 - gamma);
            bool seen = false;
            for (double b : nodes) {
                if (std::abs(a - b) < 1e-9) seen = true;
            }
            if (!seen) nodes.push_back(a);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    const int degree = static_cast<int>(nodes.size()) - 1;

    CrossKerrSynthesis out{
        SynthesisSchedule{}, identity_op(FockSpace({std::max(m, 1), std::max(m, 1)})), gamma, t1,
        static_cast<int>(nodes.size())};
    out.schedule.T1 = t1;
    out.schedule.requested_degree = degree;

    std::vector<Complex> points, values;
    for (double a : nodes) {
        points.emplace_back(a, 0.0);
        values.push_back(std::polar(1.0, target.phi * a));
    }
    std::vector<Complex> coeffs =
        degree == 0 ? values : interpolation_poly(points, values);
    const int eff = effective_degree(coeffs);
    if (eff < 0) throw std::invalid_argument("synthesize_cross_kerr: degenerate interpolant");
    coeffs.resize(static_cast<std::size_t>(eff) + 1);
    out.schedule.poly_coefficients = coeffs;

    if (eff > 0) {
        for (const Complex& root : poly_roots(coeffs)) {
            SynthesisStage stage;
            stage.a = ShiftedNumberProduct{1, 0, Complex(gamma)};
            stage.gamma = Complex(1.0);
            stage.t_powers = {{0, 1}, {1, 1}};
            stage.beta = -root;  // the device realizes alpha T (A - root)
            const Complex w_sq = -root * xi * cpow_int(std::norm(r1) / t1, 2);
            const Complex w = std::sqrt(w_sq);  // T2 / R2
            const Complex r2 = Complex(1.0) / std::sqrt(1.0 + std::norm(w));
            const Complex t2 = w * r2;
            stage.alpha = -t2 * t2 / (root * std::sqrt(1.0 + std::norm(xi)));
            stage.device = StageDevice{StageDeviceKind::CrossKerr, t1, r1, t2, r2, Complex(1.0), xi};
            out.schedule.stages.push_back(std::move(stage));
        }
    }

    const int stage_count = static_cast<int>(out.schedule.stages.size());
    if (with_compensation && stage_count > 0 && m > 0) {
        const Complex z_comp = cpow_int(t1, -stage_count);
        for (int mode = 0; mode <= 1; ++mode) {
            const SynthesisSchedule comp = [&] {
                std::vector<Complex> vals;
                for (int l = 0; l <= m; ++l) vals.push_back(cpow_int(z_comp, l));
                return photon_number_schedule(vals, m, t1, mode);
            }();
            for (const auto& stage : comp.stages) out.schedule.stages.push_back(stage);
        }
    }

    out.composed = compose_schedule(out.composed.in_space, out.schedule);
    return out;
}

// |tr(target† Y)| / (dim * scale) with the scale chosen so Y / scale has unit
// mean singular value; 1 iff Y is proportional to the target unitary.
inline double unitary_fidelity(const Matrix& target, const Matrix& y) {
    const double scale = std::sqrt((y.adjoint() * y).trace().real() / static_cast<double>(y.cols()));
    if (scale == 0.0) return 0.0;
    return std::abs((target.adjoint() * y).trace()) / (static_cast<double>(y.cols()) * scale);
}

// ---------------------------------------------------------------------------
// Teleportation identity and N-mode mirrors
// ---------------------------------------------------------------------------

// I_kj = sum_n |n>_k <n|_j: moves the content of mode j to mode k. The input
// space omits mode k (it is consumed as vacuum), the output omits mode j
// (projected onto vacuum). Exact on occupations up to min(D_j, D_k).
inline OperatorMatrix teleport_identity(const FockSpace& space, int j, int k) {
    if (j == k) throw std::invalid_argument("teleport_identity: modes must differ");
    const FockSpace in = space.without_modes({k});
    const FockSpace out = space.without_modes({j});
    const int j_in = j - (k < j ? 1 : 0);
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(out.dim()),
                            static_cast<Eigen::Index>(in.dim()));
    for (std::size_t c = 0; c < in.dim(); ++c) {
        const MultiIndex idx = in.unrank(c);
        const int n = idx[static_cast<std::size_t>(j_in)];
        if (n > space.cutoff(k)) continue;
        // remaining modes keep their occupations; the moving one lands at k
        MultiIndex tgt;
        tgt.reserve(static_cast<std::size_t>(out.num_modes()));
        for (int mode = 0, t = 0; mode < space.num_modes(); ++mode) {
            if (mode == j) {
                ++t;
                continue;
            }
            if (mode == k) {
                tgt.push_back(n);
            } else {
                tgt.push_back(idx[static_cast<std::size_t>(t++)]);
            }
        }
        m(static_cast<Eigen::Index>(out.rank(tgt)), static_cast<Eigen::Index>(c)) = 1.0;
    }
    return OperatorMatrix(in, out, std::move(m));
}

// The same operator from the quantum-mirror construction: two balanced beam
// splitters compose to U(0, -1, 1), and vacuum conditioning of exp(a_k† a_j)
// realizes the identity channel between the modes.
inline OperatorMatrix teleport_identity_via_mirror(const FockSpace& space, int j, int k) {
    const BeamSplitterParams half{Complex(1.0 / std::sqrt(2.0)), Complex(-1.0 / std::sqrt(2.0))};
    const BeamSplitterParams mirror = compose_params(half, half);  // (0, -1, 1)
    const OperatorMatrix u = bs_unitary(space, j, k, mirror);
    FockSpace one({space.cutoff(k)});
    return contract(u, std::map<int, StateVector>{{k, fock_state(one, {0})}},
                    std::map<int, int>{{j, 0}});
}

struct PermutationSpec {
    std::vector<int> perm;          // 0-based; U† a_j U = a_{perm[j]}
    std::vector<double> phases;     // optional e^{i phi_j n_j} dressing

    void validate() const {
        std::vector<bool> seen(perm.size(), false);
        for (int p : perm) {
            if (p < 0 || p >= static_cast<int>(perm.size()) || seen[static_cast<std::size_t>(p)]) {
                throw std::invalid_argument("PermutationSpec: not a permutation");
            }
            seen[static_cast<std::size_t>(p)] = true;
        }
        if (!phases.empty() && phases.size() != perm.size()) {
            throw std::invalid_argument("PermutationSpec: phase list length mismatch");
        }
    }
};

namespace detail {

// Full-space partial isometry sum_n |0_src, n_dst><n_src, 0_dst| (x) identity.
inline OperatorMatrix mode_transfer(const FockSpace& space, int src, int dst) {
    FockSpace pair({space.cutoff(src), space.cutoff(dst)});
    Matrix small = Matrix::Zero(static_cast<Eigen::Index>(pair.dim()),
                                static_cast<Eigen::Index>(pair.dim()));
    const int top = std::min(space.cutoff(src), space.cutoff(dst));
    for (int n = 0; n <= top; ++n) {
        small(static_cast<Eigen::Index>(pair.rank({0, n})),
              static_cast<Eigen::Index>(pair.rank({n, 0}))) = 1.0;
    }
    return embed_operator(space, {src, dst}, small);
}

}  // namespace detail

// N-mode mirror: teleport every signal mode into an auxiliary rail, then
// teleport rail l back into mode p^{-1}(l), so that U† a_j U = a_{p(j)}.
// Built over 2N modes and reduced by vacuum conditioning of the rails.
inline OperatorMatrix n_mode_mirror(const FockSpace& space, const PermutationSpec& spec) {
    spec.validate();
    const int n = space.num_modes();
    if (static_cast<int>(spec.perm.size()) != n) {
        throw std::invalid_argument("n_mode_mirror: permutation length != mode count");
    }
    int top = 0;
    for (int m = 0; m < n; ++m) top = std::max(top, space.cutoff(m));
    std::vector<int> cutoffs = space.cutoffs();
    for (int m = 0; m < n; ++m) cutoffs.push_back(top);
    FockSpace ext(cutoffs);

    OperatorMatrix u = identity_op(ext);
    for (int l = 0; l < n; ++l) u = detail::mode_transfer(ext, l, n + l) * u;
    std::vector<int> inverse(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) inverse[static_cast<std::size_t>(spec.perm[static_cast<std::size_t>(l)])] = l;
    for (int l = 0; l < n; ++l) u = detail::mode_transfer(ext, n + l, inverse[static_cast<std::size_t>(l)]) * u;

    FockSpace rail({top});
    std::map<int, StateVector> prep;
    std::map<int, int> bra;
    for (int l = 0; l < n; ++l) {
        prep.emplace(n + l, fock_state(rail, {0}));
        bra.emplace(n + l, 0);
    }
    OperatorMatrix reduced = contract(u, prep, bra);
    if (!spec.phases.empty()) {
        for (int m = 0; m < n; ++m) {
            reduced = phase_shifter(space, m, spec.phases[static_cast<std::size_t>(m)]) * reduced;
        }
    }
    return reduced;
}

// ---------------------------------------------------------------------------
// Multi-photon entangled states
// ---------------------------------------------------------------------------

struct MultiphotonResult {
    StateVector state;
    double p;
    SynthesisSchedule schedule;
};

// Apply the polynomial sum_n n!^{-k/2} (z A)^n with A = a_k† ... a_1† to the
// vacuum, producing amplitudes proportional to z^n on |n, ..., n>. The stage
// coefficients absorb T1^{-N k n} so any device transmittance works.
inline MultiphotonResult prep_multiphoton(Complex z, int degree, int k_modes,
                                          std::optional<GeneralDeviceParams> base = std::nullopt) {
    if (degree < 0 || k_modes < 1) {
        throw std::invalid_argument("prep_multiphoton: need N >= 0 and k >= 1");
    }
    FockSpace space(std::vector<int>(static_cast<std::size_t>(k_modes), std::max(degree, 1)));
    const StateVector vacuum = fock_state(space, MultiIndex(static_cast<std::size_t>(k_modes), 0));

    if (degree == 0 || std::abs(z) == 0.0) {
        SynthesisSchedule empty;
        return {vacuum, 1.0, empty};
    }

    GeneralDeviceParams params;
    if (base) {
        params = *base;
    } else {
        const double h = 1.0 / std::sqrt(2.0);
        params = {Complex(h), Complex(h), Complex(h), Complex(h), Complex(1.0)};
    }
    params.validate();

    MonomialSpec raising;
    for (int m = k_modes - 1; m >= 0; --m) raising.factors.push_back({m, 1});
    const Complex gamma = gamma_factor(raising, params.T1);

    std::vector<Complex> coeffs;
    double nfact = 1.0;
    for (int n = 0; n <= degree; ++n) {
        if (n > 0) nfact *= n;
        coeffs.push_back(cpow_int(z, n) / std::pow(nfact, 0.5 * k_modes) *
                         cpow_int(params.T1, -static_cast<long>(degree) * k_modes * n));
    }
    SynthesisSchedule schedule = roots_to_schedule(coeffs, gamma, raising, params.T1, params);

    const OperatorMatrix y = compose_schedule(space, schedule);
    StateVector raw = apply(y, vacuum);
    const double p = raw.norm2();
    if (p <= 0.0) throw std::runtime_error("prep_multiphoton: vanishing amplitude");
    return {raw.normalized(), p, std::move(schedule)};
}

}  // namespace loqs
