#pragma once
// Preparation of the shared two-branch entangled resource state
//
//   |Psi> = (|s_1 ... s_k> + z |1-s_1 ... 1-s_k>) / sqrt(1 + |z|^2)
//
// from a single photon: balanced splitting, repeated single-photon cloning,
// and coherent-state conditioning (detect one photon behind the mixing beam
// splitter, vacuum in the coherent port). The cloner used in the pipeline is
// pluggable; the ideal isometry Q|s> = |s>|s> is the default, and the three
// physical realizations (Kerr MZI, three-wave mixer, linear optics) are
// provided with their success probabilities.

#include "loqs/conditional.hpp"
#include "loqs/fock.hpp"
#include "loqs/matrix_exp.hpp"
#include "loqs/network.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace loqs {

enum class ClonerKind { Ideal, KerrMzi, ThreeWave, Linear };

struct ClonerResult {
    OperatorMatrix y;
    double p;
};

// Q = sum_{s=0,1} |s>_k |s>_j <s|_j as an isometry from mode j of the space
// with mode k removed into the full space. Inputs with more than one photon
// in mode j are annihilated.
inline OperatorMatrix cloner_ideal(const FockSpace& space, int k_mode, int j_mode) {
    if (k_mode == j_mode) throw std::invalid_argument("cloner_ideal: modes must differ");
    if (space.cutoff(k_mode) < 1) throw std::invalid_argument("cloner_ideal: clone mode needs cutoff >= 1");
    const FockSpace in = space.without_modes({k_mode});
    const int j_in = j_mode - (k_mode < j_mode ? 1 : 0);
    Matrix q = Matrix::Zero(static_cast<Eigen::Index>(space.dim()),
                            static_cast<Eigen::Index>(in.dim()));
    for (std::size_t c = 0; c < in.dim(); ++c) {
        const MultiIndex idx = in.unrank(c);
        const int s = idx[static_cast<std::size_t>(j_in)];
        if (s > 1) continue;
        MultiIndex full;
        full.reserve(static_cast<std::size_t>(space.num_modes()));
        for (int m = 0, t = 0; m < space.num_modes(); ++m) {
            if (m == k_mode) {
                full.push_back(s);
            } else {
                full.push_back(idx[static_cast<std::size_t>(t++)]);
            }
        }
        q(static_cast<Eigen::Index>(space.rank(full)), static_cast<Eigen::Index>(c)) = 1.0;
    }
    return OperatorMatrix(in, space, std::move(q));
}

// Exact two-branch state (|1>_{12}|0>_{34} + xi |0>_{12}|1>_{34}) / sqrt(1+|xi|^2)
// on a 4-mode space.
inline StateVector psi1234_state(Complex xi, int cutoff = 2) {
    FockSpace space({cutoff, cutoff, cutoff, cutoff});
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    const double norm = std::sqrt(1.0 + std::norm(xi));
    v(static_cast<Eigen::Index>(space.rank({1, 1, 0, 0}))) = 1.0 / norm;
    v(static_cast<Eigen::Index>(space.rank({0, 0, 1, 1}))) = xi / norm;
    return StateVector(space, std::move(v), 0.0);
}

// Mach-Zehnder interferometer with a cross-Kerr coupler, conditioned on
// detecting (0, 1) photons in the interferometer output and coherent port.
// Y P_1 = e^{i arg R} sqrt(p) Q with p = [(1 + |xi|^-2) e^{|xi|^2}]^-1.
inline ClonerResult cloner_kerr_mzi(Complex xi, int signal_cutoff = 2) {
    if (std::abs(xi) < 1e-12) throw std::invalid_argument("cloner_kerr_mzi: degenerate at xi = 0");
    const double xi2 = std::norm(xi);
    const Complex t32 = 1.0 / std::sqrt(1.0 + xi2);  // T^-1 R = xi with T real
    const Complex r32 = t32 * xi;
    FockSpace space({signal_cutoff, 2, signal_cutoff + 1, std::max(4, coherent_cutoff(xi2))});

    Circuit c;
    const BeamSplitterParams mzi{Complex(1.0 / std::sqrt(2.0)), Complex(-1.0 / std::sqrt(2.0))};
    const BeamSplitterParams mzi_dag{Complex(1.0 / std::sqrt(2.0)), Complex(1.0 / std::sqrt(2.0))};
    c.elements.push_back(BsElement{2, 1, mzi});
    c.elements.push_back(CrossKerrElement{0, 2, M_PI});
    c.elements.push_back(BsElement{2, 1, mzi_dag});
    c.elements.push_back(BsElement{3, 2, {t32, r32}});

    FockSpace one2({2}), one3({signal_cutoff + 1});
    std::vector<PrepAssignment> preps{{{1}, fock_state(one2, {0})},
                                      {{2}, fock_state(one3, {1})},
                                      {{3}, coherent_state(FockSpace({space.cutoff(3)}), 0, xi)}};
    OperatorMatrix y = conditional_from_circuit(c, space, preps, {{2, 0}, {3, 1}});
    const double p = y.m.col(0).squaredNorm();
    return {std::move(y), p};
}

// Three-wave mixer exp(i phi (a0 a1† a2† + a0† a1 a2)) preceded by a
// phase shifter exp(-i pi n0 / 2). At phi = pi/2 this clones unconditionally:
// Y P_1 = Q with p = 1.
inline OperatorMatrix cloner_three_wave(double phi = M_PI / 2.0, int signal_cutoff = 2) {
    FockSpace space({signal_cutoff, signal_cutoff, signal_cutoff});
    const Matrix lower = annihilation_op(space, 0).m * creation_op(space, 1).m *
                         creation_op(space, 2).m;
    const Matrix gen = Complex(0.0, phi) * (lower + lower.adjoint());
    const Matrix mixer = matrix_exp(gen);
    const OperatorMatrix net(space, space, mixer * phase_shifter(space, 0, -M_PI / 2.0).m);

    FockSpace one({signal_cutoff});
    return contract(net,
                    std::map<int, StateVector>{{1, fock_state(one, {0})}, {2, fock_state(one, {0})}},
                    std::map<int, int>{{0, 0}});
}

// Cloning from beam splitters alone, consuming the entangled state
// psi1234 and a coherent ancilla. Y = e^{i arg xi} sqrt(p) Q on P_1 inputs
// with p = [4 (1 + |xi|^-2) e^{|xi|^2}]^-1.
inline ClonerResult cloner_linear(Complex xi, int signal_cutoff = 2) {
    if (std::abs(xi) < 1e-12) throw std::invalid_argument("cloner_linear: degenerate at xi = 0");
    const double xi2 = std::norm(xi);
    FockSpace space({signal_cutoff, 2, 2, 2, 2, std::max(4, coherent_cutoff(xi2))});

    Circuit c;
    const BeamSplitterParams half{Complex(1.0 / std::sqrt(2.0)), Complex(1.0 / std::sqrt(2.0))};
    c.elements.push_back(BsElement{5, 3, half});
    c.elements.push_back(BsElement{0, 4, half});

    std::vector<PrepAssignment> preps{
        {{1, 2, 3, 4}, psi1234_state(xi)},
        {{5}, coherent_state(FockSpace({space.cutoff(5)}), 0, xi)}};
    OperatorMatrix y =
        conditional_from_circuit(c, space, preps, {{0, 1}, {3, 0}, {4, 0}, {5, 1}});
    const double p = y.m.col(0).squaredNorm();
    return {std::move(y), p};
}

// Beam-splitter array preparing psi1234 from four single photons, conditioned on
// one photon in each photodetector. xi = -R*^2, p = ((1-|xi|)/2)^2 (1+|xi|^2),
// and the state carries the global phase -(pi - 2 arg T).
inline std::pair<StateVector, double> prep_psi1234(Complex t, Complex r) {
    BeamSplitterParams{t, r}.validate();
    // cutoff 4 everywhere keeps every four-photon sector complete, so the
    // conditioned amplitudes are exact
    FockSpace space({4, 4, 4, 4, 4, 4});
    StateVector psi = fock_state(space, {1, 1, 1, 0, 0, 1});

    const BeamSplitterParams half{Complex(1.0 / std::sqrt(2.0)), Complex(1.0 / std::sqrt(2.0))};
    Circuit c;
    c.elements.push_back(BsElement{1, 5, half});
    c.elements.push_back(BsElement{0, 2, half});
    c.elements.push_back(BsElement{1, 2, half});
    c.elements.push_back(BsElement{3, 5, {std::conj(t), std::conj(r)}});
    c.elements.push_back(BsElement{0, 4, {t, r}});
    c.elements.push_back(BsElement{3, 4, half});
    c.elements.push_back(BsElement{5, 0, half});
    psi = apply_circuit(c, std::move(psi));

    auto [reduced, p] = condition_state(psi, {{0, 1}, {5, 1}});
    return {reduced.normalized(), p};
}

// ---------------------------------------------------------------------------
// Resource-state pipeline
// ---------------------------------------------------------------------------

struct ResourceSpec {
    int k = 1;
    std::vector<int> bits;  // s_1 ... s_k
    Complex z{0.0, 0.0};

    void validate() const {
        if (k < 1) throw std::invalid_argument("ResourceSpec: k >= 1 required");
        if (static_cast<int>(bits.size()) != k) {
            throw std::invalid_argument("ResourceSpec: need exactly k bits");
        }
        int zeros = 0;
        for (int b : bits) {
            if (b != 0 && b != 1) throw std::invalid_argument("ResourceSpec: bits must be 0 or 1");
            zeros += (b == 0);
        }
        if (zeros == 0) {
            throw std::invalid_argument(
                "ResourceSpec: one s_l must be 0; use the z <-> 1/z symmetry for the complement");
        }
    }
};

struct ResourceResult {
    StateVector state;
    double p;
    double global_phase;
};

// Exact two-branch reference state on k modes.
inline StateVector ideal_resource_state(const std::vector<int>& bits, Complex z, int cutoff = 2) {
    std::vector<int> cs(bits.size(), cutoff);
    FockSpace space(cs);
    MultiIndex a(bits.size()), b(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        a[i] = bits[i];
        b[i] = 1 - bits[i];
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    const double norm = std::sqrt(1.0 + std::norm(z));
    v(static_cast<Eigen::Index>(space.rank(a))) = 1.0 / norm;
    v(static_cast<Eigen::Index>(space.rank(b))) = z / norm;
    return StateVector(std::move(space), std::move(v), 0.0);
}

// Success probability of the coherent-state conditioning step.
inline double resource_success_probability(Complex z, double alpha_sq) {
    const double z2 = std::norm(z);
    if (alpha_sq == 0.0 && z2 == 0.0) return 0.5;
    return (1.0 + z2) * alpha_sq * std::exp(-alpha_sq) / (2.0 * (alpha_sq + z2));
}

struct OptimalAlpha {
    double alpha_sq;
    double p;
};

// |alpha|^2 maximizing the conditioning probability at given z; the resulting
// p lies in ((2e)^-1, 1/2) for every z.
inline OptimalAlpha optimal_alpha(Complex z) {
    const double z2 = std::norm(z);
    const double a2 = std::sqrt(z2 * z2 / 4.0 + z2) - z2 / 2.0;
    return {a2, resource_success_probability(z, a2)};
}

namespace detail {

// Pad a cloner (one mode -> pair) into a square pair-space matrix that
// consumes vacuum in the clone slot.
inline Matrix cloner_pad(const OperatorMatrix& y, bool swap_out_slots) {
    const FockSpace& pair = y.out_space;
    if (pair.num_modes() != 2 || y.in_space.num_modes() != 1 ||
        pair.cutoff(0) != pair.cutoff(1) || pair.cutoff(0) != y.in_space.cutoff(0)) {
        throw std::invalid_argument("cloner_pad: unexpected cloner shape");
    }
    const int d = pair.cutoff(0);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(pair.dim()),
                              static_cast<Eigen::Index>(pair.dim()));
    for (int m_src = 0; m_src <= d; ++m_src) {
        const std::size_t col = pair.rank({m_src, 0});
        for (int a = 0; a <= d; ++a) {
            for (int b = 0; b <= d; ++b) {
                const std::size_t row = pair.rank({a, b});
                const std::size_t src_row = swap_out_slots ? pair.rank({b, a}) : row;
                out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
                    y.m(static_cast<Eigen::Index>(src_row), static_cast<Eigen::Index>(m_src));
            }
        }
    }
    return out;
}

inline Matrix cloner_pair_matrix(ClonerKind kind) {
    switch (kind) {
        case ClonerKind::Ideal: {
            FockSpace pair({2, 2});
            Matrix q = Matrix::Zero(9, 9);
            for (int s = 0; s <= 1; ++s) {
                q(static_cast<Eigen::Index>(pair.rank({s, s})),
                  static_cast<Eigen::Index>(pair.rank({s, 0}))) = 1.0;
            }
            return q;
        }
        case ClonerKind::KerrMzi: {
            const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
            return cloner_pad(cloner_kerr_mzi(Complex(std::sqrt(golden))).y, false);
        }
        case ClonerKind::ThreeWave:
            return cloner_pad(cloner_three_wave(), true);
        case ClonerKind::Linear: {
            const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
            return cloner_pad(cloner_linear(Complex(std::sqrt(golden))).y, true);
        }
    }
    throw std::invalid_argument("cloner_pair_matrix: unknown kind");
}

}  // namespace detail

// Build the two-branch resource state: split a single photon at a balanced beam
// splitter, clone both arms out to k modes, then mix the photon mode with a
// coherent ancilla and detect (1, 0) photons. z = T^-1 R alpha must agree
// with the spec. The permutation realizing the requested bit pattern sends
// the always-zero slot to `designated_zero` (default: the last zero bit).
inline ResourceResult build_resource(const ResourceSpec& spec, ClonerKind cloner, Complex t,
                                     Complex r, Complex alpha, int designated_zero = -1) {
    spec.validate();
    BeamSplitterParams{t, r}.validate();
    if (std::abs(alpha) == 0.0 && std::abs(spec.z) > 0.0) {
        throw std::invalid_argument("build_resource: z != 0 unreachable with alpha = 0");
    }
    const Complex z_from_params = r * alpha / t;
    if (std::abs(z_from_params - spec.z) > 1e-9 * (1.0 + std::abs(spec.z))) {
        throw std::invalid_argument("build_resource: T^-1 R alpha does not match spec.z");
    }
    if (designated_zero < 0) {
        for (int i = spec.k - 1; i >= 0; --i) {
            if (spec.bits[static_cast<std::size_t>(i)] == 0) {
                designated_zero = i;
                break;
            }
        }
    }
    if (designated_zero < 0 || designated_zero >= spec.k ||
        spec.bits[static_cast<std::size_t>(designated_zero)] != 0) {
        throw std::invalid_argument("build_resource: designated zero position must hold bit 0");
    }

    const int k = spec.k;
    int ones = 0;
    for (int b : spec.bits) ones += b;
    const int j_split = ones + 1;  // modes 1..j-1 clone the photon arm, j..k the vacuum arm

    std::vector<int> cutoffs(static_cast<std::size_t>(k) + 2, 2);
    cutoffs.back() = std::max(4, coherent_cutoff(std::norm(alpha)));
    FockSpace space(cutoffs);
    const int coh_mode = k + 1;

    MultiIndex start(static_cast<std::size_t>(k) + 2, 0);
    start[0] = 1;
    StateVector psi = fock_state(space, start);
    {
        const StateVector coh = coherent_state(FockSpace({space.cutoff(coh_mode)}), 0, alpha);
        Vector full = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
        for (int n = 0; n <= space.cutoff(coh_mode); ++n) {
            MultiIndex idx = start;
            idx[static_cast<std::size_t>(coh_mode)] = n;
            full(static_cast<Eigen::Index>(space.rank(idx))) = coh.amps(n);
        }
        psi = StateVector(space, std::move(full), coh.tail_weight);
    }

    const BeamSplitterParams split{Complex(1.0 / std::sqrt(2.0)), Complex(-1.0 / std::sqrt(2.0))};
    apply_in_place(psi.amps, space, BsElement{0, j_split, split});

    const Matrix pair = detail::cloner_pair_matrix(cloner);
    for (int m = 1; m <= j_split - 1; ++m) {
        apply_embedded(psi.amps, space, {0, m}, pair);  // clone the photon arm
    }
    for (int m = j_split + 1; m <= k; ++m) {
        apply_embedded(psi.amps, space, {j_split, m}, pair);  // clone the vacuum arm
    }

    apply_in_place(psi.amps, space, BsElement{0, coh_mode, {t, r}});

    auto [reduced, p] = condition_state(psi, {{0, 1}, {coh_mode, 0}});
    if (p <= 0.0) throw std::runtime_error("build_resource: conditioning has zero probability");

    // canonical reduced pattern: modes 1..j-1 hold 1, modes j..k hold 0
    std::vector<int> canonical(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) canonical[static_cast<std::size_t>(i)] = (i < j_split - 1) ? 1 : 0;
    std::vector<int> perm(static_cast<std::size_t>(k), -1);
    perm[static_cast<std::size_t>(designated_zero)] = k - 1;  // the always-zero slot
    int next_one = 0, next_zero = j_split - 1;
    for (int i = 0; i < k; ++i) {
        if (i == designated_zero) continue;
        if (spec.bits[static_cast<std::size_t>(i)] == 1) {
            perm[static_cast<std::size_t>(i)] = next_one++;
        } else {
            perm[static_cast<std::size_t>(i)] = next_zero++;
        }
    }
    StateVector arranged = permute_modes(reduced, perm);

    const StateVector ideal = ideal_resource_state(spec.bits, spec.z);
    const Complex overlap = inner(ideal, arranged);
    const double phase = std::arg(overlap);
    return {arranged.normalized(), p, phase};
}

}  // namespace loqs
