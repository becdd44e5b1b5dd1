#pragma once
// The schedule compiler: monomials A of mode operators, the commutation
// factor gamma in A T = gamma T A with T = T1^(sum of n̂ over the factor
// modes), interpolation and truncated-series polynomials, root extraction,
// and composition of stage operators
//
//   Y_n = alpha_n * T * (A + beta_n)
//
// whose ordered product realizes T^N F_N(A). Photon-number targets use the
// single-device realization (its T carries each mode once); the general
// multi-device stage carries each factor's mode with multiplicity.

#include "loqs/conditional.hpp"
#include "loqs/fock.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace loqs {

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

struct MonomialFactor {
    int mode = 0;
    int dagger = 0;  // 0: annihilation, 1: creation
};

// Ordered operator product; factors are listed left to right as written, so
// the last factor acts first.
struct MonomialSpec {
    std::vector<MonomialFactor> factors;

    void validate(const FockSpace& space) const {
        for (const auto& f : factors) {
            if (f.mode < 0 || f.mode >= space.num_modes()) {
                throw std::invalid_argument("MonomialSpec: mode outside space");
            }
            if (f.dagger != 0 && f.dagger != 1) {
                throw std::invalid_argument("MonomialSpec: dagger flag must be 0 or 1");
            }
        }
    }
};

inline OperatorMatrix monomial_operator(const FockSpace& space, const MonomialSpec& spec) {
    spec.validate(space);
    OperatorMatrix op = identity_op(space);
    for (const auto& f : spec.factors) {
        op = op * (f.dagger ? creation_op(space, f.mode) : annihilation_op(space, f.mode));
    }
    return op;
}

// Mode -> number of factors on that mode.
inline std::map<int, int> monomial_mode_multiplicity(const MonomialSpec& spec) {
    std::map<int, int> mult;
    for (const auto& f : spec.factors) ++mult[f.mode];
    return mult;
}

// Mode -> worst-case creation surplus while the factors are applied, i.e. the
// headroom needed below the cutoff for the product to act without clipping.
inline std::map<int, int> monomial_headroom(const MonomialSpec& spec) {
    std::map<int, int> running, peak;
    for (auto it = spec.factors.rbegin(); it != spec.factors.rend(); ++it) {
        running[it->mode] += it->dagger ? 1 : -1;
        peak[it->mode] = std::max(peak[it->mode], running[it->mode]);
    }
    for (auto& [mode, h] : peak) h = std::max(h, 0);
    return peak;
}

// gamma with A T = gamma T A and T = T1^(sum over factors of n̂_mode):
// T1^(sum_r sum_l (1 - 2 s_l) delta_{j_r, j_l}).
inline Complex gamma_factor(const MonomialSpec& spec, Complex t1) {
    long exponent = 0;
    for (const auto& fa : spec.factors) {
        for (const auto& fb : spec.factors) {
            if (fa.mode == fb.mode) exponent += 1 - 2 * fb.dagger;
        }
    }
    return cpow_int(t1, exponent);
}

// ---------------------------------------------------------------------------
// Polynomials (ascending coefficients c[0] + c[1] x + ...)
// ---------------------------------------------------------------------------

inline Complex poly_eval(const std::vector<Complex>& coeffs, Complex x) {
    Complex acc(0.0);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

inline std::vector<Complex> poly_from_roots(const std::vector<Complex>& roots, Complex leading) {
    std::vector<Complex> coeffs{leading};
    for (const Complex& r : roots) {
        std::vector<Complex> next(coeffs.size() + 1, Complex(0.0));
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i + 1] += coeffs[i];
            next[i] -= r * coeffs[i];
        }
        coeffs = std::move(next);
    }
    return coeffs;
}

// Lagrange interpolant through pairwise-distinct points, computed via Newton
// divided differences and expanded to monomial coefficients.
inline std::vector<Complex> interpolation_poly(const std::vector<Complex>& points,
                                               const std::vector<Complex>& values) {
    const std::size_t n = points.size();
    if (n == 0 || values.size() != n) {
        throw std::invalid_argument("interpolation_poly: need matching nonempty node/value lists");
    }
    double scale = 1.0;
    for (const Complex& p : points) scale = std::max(scale, std::abs(p));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(points[i] - points[j]) < 1e-12 * scale) {
                throw std::invalid_argument("interpolation_poly: duplicate interpolation points");
            }
        }
    }
    std::vector<Complex> dd = values;
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = n - 1; i >= j; --i) {
            dd[i] = (dd[i] - dd[i - 1]) / (points[i] - points[i - j]);
        }
    }
    // expand the Newton form
    std::vector<Complex> coeffs(n, Complex(0.0));
    std::vector<Complex> basis{Complex(1.0)};  // prod_{m<i} (x - x_m)
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < basis.size(); ++t) coeffs[t] += dd[i] * basis[t];
        if (i + 1 < n) {
            std::vector<Complex> next(basis.size() + 1, Complex(0.0));
            for (std::size_t t = 0; t < basis.size(); ++t) {
                next[t + 1] += basis[t];
                next[t] -= points[i] * basis[t];
            }
            basis = std::move(next);
        }
    }
    return coeffs;
}

// Degree after discarding trailing coefficients below tol relative to the
// largest one; -1 for the zero polynomial.
inline int effective_degree(const std::vector<Complex>& coeffs, double tol = 1e-10) {
    double peak = 0.0;
    for (const Complex& c : coeffs) peak = std::max(peak, std::abs(c));
    if (peak == 0.0) return -1;
    for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i) {
        if (std::abs(coeffs[static_cast<std::size_t>(i)]) > tol * peak) return i;
    }
    return -1;
}

// Roots via companion-matrix eigenvalues with one Newton polish step, sorted
// by (magnitude, phase) so schedules are reproducible.
inline std::vector<Complex> poly_roots(const std::vector<Complex>& coeffs) {
    const int deg = static_cast<int>(coeffs.size()) - 1;
    if (deg < 0 || std::abs(coeffs.back()) == 0.0) {
        throw std::invalid_argument("poly_roots: zero leading coefficient");
    }
    if (deg == 0) return {};
    Matrix companion = Matrix::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) {
        companion(i, deg - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs.back();
    }
    Eigen::ComplexEigenSolver<Matrix> solver(companion, false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("poly_roots: eigensolver failed");

    std::vector<Complex> derivative(static_cast<std::size_t>(deg));
    for (int i = 1; i <= deg; ++i) {
        derivative[static_cast<std::size_t>(i - 1)] =
            static_cast<double>(i) * coeffs[static_cast<std::size_t>(i)];
    }
    std::vector<Complex> roots;
    roots.reserve(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) {
        Complex r = solver.eigenvalues()(i);
        const Complex dp = poly_eval(derivative, r);
        if (std::abs(dp) > 1e-12) r -= poly_eval(coeffs, r) / dp;
        roots.push_back(r);
    }
    std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (std::abs(ma - mb) > 1e-14 * (1.0 + ma + mb)) return ma < mb;
        return std::arg(a) < std::arg(b);
    });
    return roots;
}

// ---------------------------------------------------------------------------
// Stages and schedules
// ---------------------------------------------------------------------------

// (n̂_a - shift)(n̂_b - shift), the cross-Kerr stage target.
struct ShiftedNumberProduct {
    int mode_a = 0;
    int mode_b = 1;
    Complex shift{0.0, 0.0};
};

using StageTarget = std::variant<MonomialSpec, ShiftedNumberProduct>;

enum class StageDeviceKind { General, PhotonNumber, CrossKerr };

struct StageDevice {
    StageDeviceKind kind = StageDeviceKind::General;
    Complex T1, R1, T2, R2;
    Complex z{1.0, 0.0};   // resource weight (General)
    Complex xi{1.0, 0.0};  // two-branch weight (CrossKerr)
};

struct SynthesisStage {
    StageTarget a;
    Complex beta;   // stage operator is alpha * T * (A + beta)
    Complex alpha{1.0, 0.0};
    Complex gamma{1.0, 0.0};                  // commutation factor of A with this T
    std::vector<std::pair<int, int>> t_powers;  // T = T1^(sum power * n̂_mode)
    std::optional<StageDevice> device;
    bool abstract_stage = false;
};

struct SynthesisSchedule {
    Complex T1{1.0, 0.0};
    std::vector<SynthesisStage> stages;
    // diagnostics carried along for verification and JSON output
    std::vector<Complex> poly_coefficients;  // F_N in A, ascending
    int requested_degree = -1;
};

inline OperatorMatrix stage_target_operator(const FockSpace& space, const StageTarget& a) {
    if (const auto* mono = std::get_if<MonomialSpec>(&a)) {
        return monomial_operator(space, *mono);
    }
    const auto& prod = std::get<ShiftedNumberProduct>(a);
    return diagonal_op(space, [&](const MultiIndex& idx) {
        return (Complex(static_cast<double>(idx[static_cast<std::size_t>(prod.mode_a)])) - prod.shift) *
               (Complex(static_cast<double>(idx[static_cast<std::size_t>(prod.mode_b)])) - prod.shift);
    });
}

inline OperatorMatrix stage_t_operator(const FockSpace& space, Complex t1,
                                       const std::vector<std::pair<int, int>>& t_powers) {
    return diagonal_op(space, [&](const MultiIndex& idx) {
        long exponent = 0;
        for (const auto& [mode, power] : t_powers) {
            exponent += static_cast<long>(power) * idx[static_cast<std::size_t>(mode)];
        }
        return cpow_int(t1, exponent);
    });
}

inline OperatorMatrix stage_matrix(const FockSpace& space, Complex t1, const SynthesisStage& stage) {
    const OperatorMatrix a = stage_target_operator(space, stage.a);
    const OperatorMatrix t = stage_t_operator(space, t1, stage.t_powers);
    return stage.alpha * (t * (a + stage.beta * identity_op(space)));
}

// Literal ordered product of the stage operators; the stage index increases
// from right to left.
inline OperatorMatrix compose_schedule(const FockSpace& space, const SynthesisSchedule& schedule) {
    OperatorMatrix y = identity_op(space);
    for (const auto& stage : schedule.stages) y = stage_matrix(space, schedule.T1, stage) * y;
    return y;
}

// ---------------------------------------------------------------------------
// The general multi-device stage
// ---------------------------------------------------------------------------

struct GeneralDeviceParams {
    Complex T1, R1, T2, R2;
    Complex z{1.0, 0.0};

    void validate() const {
        BeamSplitterParams{T1, R1}.validate();
        BeamSplitterParams{T2, R2}.validate();
    }
};

namespace detail {

struct MonomialCounts {
    long sum_s = 0;        // number of creation factors
    long passive = 0;      // k - sum_s
    long t1_exponent = 0;  // triangular delta sum
};

inline MonomialCounts monomial_counts(const MonomialSpec& spec) {
    MonomialCounts p;
    const auto& f = spec.factors;
    const long k = static_cast<long>(f.size());
    for (const auto& factor : f) p.sum_s += factor.dagger;
    p.passive = k - p.sum_s;
    // the triangular sum counts pairs ordered by application, rightmost first
    for (std::size_t a = 0; a < f.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            if (f[a].mode == f[b].mode) p.t1_exponent += 2 * f[b].dagger - 1;
        }
    }
    return p;
}

// beta / z, i.e. the fixed-device part of the beta formula.
inline Complex stage_beta_unit(const MonomialSpec& spec, const GeneralDeviceParams& d) {
    const MonomialCounts p = monomial_counts(spec);
    if (std::abs(d.T1) < 1e-12) throw std::invalid_argument("stage formula: T1 = 0 is singular");
    if (p.sum_s > 0 && std::abs(d.R1) < 1e-12) {
        throw std::invalid_argument("stage formula: R1 = 0 is singular with creation factors");
    }
    if (p.passive > 0 && (std::abs(d.R1) < 1e-12 || std::abs(d.R2) < 1e-12)) {
        throw std::invalid_argument("stage formula: R1 = 0 or R2 = 0 is singular with annihilation factors");
    }
    const Complex ratio = -d.T1 * d.T2 / (std::conj(d.R1) * d.R2);
    return cpow_int(d.R1, -p.sum_s) * cpow_int(ratio, p.passive) * cpow_int(d.T1, p.t1_exponent);
}

}  // namespace detail

inline Complex stage_beta(const MonomialSpec& spec, const GeneralDeviceParams& d) {
    return d.z * detail::stage_beta_unit(spec, d);
}

inline Complex stage_alpha(const MonomialSpec& spec, const GeneralDeviceParams& d) {
    const Complex unit = detail::stage_beta_unit(spec, d);
    if (std::abs(unit) < 1e-300) throw std::invalid_argument("stage formula: zero denominator in alpha");
    const detail::MonomialCounts p = detail::monomial_counts(spec);
    return cpow_int(d.T2, p.passive) / (unit * std::sqrt(1.0 + std::norm(d.z)));
}

struct StageOperatorResult {
    OperatorMatrix op;
    Complex alpha;
    Complex beta;
    double closed_form_residual;  // against alpha T (A + beta), headroom columns
};

// Build the k-device stage operator as the two resource branches of products
// of single-device closed forms,
//   Y = [ prod_l Y^{(s_l)}(s_l) + z prod_l Y^{(s_l)}(1 - s_l) ] / sqrt(1+|z|^2),
// and report how far it is from the alpha T (A + beta) form of the parameter
// formulas. The formulas are verified by this comparison, not trusted.
inline StageOperatorResult stage_operator(const FockSpace& space, const MonomialSpec& spec,
                                          const GeneralDeviceParams& params) {
    spec.validate(space);
    params.validate();
    if (spec.factors.empty()) throw std::invalid_argument("stage_operator: empty monomial");

    auto branch = [&](bool flipped) {
        OperatorMatrix acc = identity_op(space);
        for (const auto& f : spec.factors) {
            DeviceSpec dev;
            dev.case_tag = f.dagger;
            dev.s = flipped ? 1 - f.dagger : f.dagger;
            dev.T1 = params.T1;
            dev.R1 = params.R1;
            dev.T2 = params.T2;
            dev.R2 = params.R2;
            const OperatorMatrix local = device_closed_form(FockSpace({space.cutoff(f.mode)}), dev);
            acc = acc * embed_operator(space, {f.mode}, local.m);
        }
        return acc;
    };

    const double norm = std::sqrt(1.0 + std::norm(params.z));
    const OperatorMatrix op =
        Complex(1.0 / norm) * (branch(false) + params.z * branch(true));

    const Complex beta = stage_beta(spec, params);
    const Complex alpha = stage_alpha(spec, params);

    SynthesisStage stage;
    stage.a = spec;
    stage.beta = beta;
    stage.alpha = alpha;
    for (const auto& [mode, mult] : monomial_mode_multiplicity(spec)) {
        stage.t_powers.emplace_back(mode, mult);
    }
    const OperatorMatrix closed = stage_matrix(space, params.T1, stage);

    const auto headroom = monomial_headroom(spec);
    double residual = 0.0;
    for (std::size_t c = 0; c < space.dim(); ++c) {
        bool safe = true;
        for (const auto& [mode, h] : headroom) {
            if (space.occupation(c, mode) + h > space.cutoff(mode)) safe = false;
        }
        if (!safe) continue;
        residual = std::max(residual, (op.m.col(static_cast<Eigen::Index>(c)) -
                                       closed.m.col(static_cast<Eigen::Index>(c)))
                                          .cwiseAbs()
                                          .maxCoeff());
    }
    return {op, alpha, beta, residual};
}

// ---------------------------------------------------------------------------
// Root schedules
// ---------------------------------------------------------------------------

// Turn polynomial coefficients in A into a stage schedule: the roots r_n give
// beta_n = -r_n gamma^{n-1} so the ordered product reproduces F_N / f_N.
// When device parameters are supplied, each stage's resource weight z_n is
// solved from the beta formula; otherwise stages stay abstract with alpha 1.
inline SynthesisSchedule roots_to_schedule(const std::vector<Complex>& coefficients, Complex gamma,
                                           const MonomialSpec& monomial, Complex t1,
                                           std::optional<GeneralDeviceParams> base = std::nullopt) {
    if (coefficients.empty() || std::abs(coefficients.back()) == 0.0 ||
        effective_degree(coefficients) != static_cast<int>(coefficients.size()) - 1) {
        throw std::invalid_argument("roots_to_schedule: leading coefficient vanishes");
    }
    const Complex check = gamma_factor(monomial, t1);
    if (std::abs(check - gamma) > 1e-9 * (1.0 + std::abs(gamma))) {
        throw std::invalid_argument("roots_to_schedule: gamma inconsistent with monomial");
    }

    SynthesisSchedule schedule;
    schedule.T1 = t1;
    schedule.poly_coefficients = coefficients;
    schedule.requested_degree = static_cast<int>(coefficients.size()) - 1;

    std::vector<std::pair<int, int>> t_powers;
    for (const auto& [mode, mult] : monomial_mode_multiplicity(monomial)) {
        t_powers.emplace_back(mode, mult);
    }

    const std::vector<Complex> roots = poly_roots(coefficients);
    int n = 1;
    for (const Complex& r : roots) {
        SynthesisStage stage;
        stage.a = monomial;
        stage.gamma = gamma;
        stage.t_powers = t_powers;
        stage.beta = -r * cpow_int(gamma, n - 1);
        if (base) {
            GeneralDeviceParams d = *base;
            const Complex unit = detail::stage_beta_unit(monomial, d);
            d.z = stage.beta / unit;
            stage.alpha = stage_alpha(monomial, d);
            stage.device = StageDevice{StageDeviceKind::General, d.T1, d.R1, d.T2, d.R2, d.z,
                                       Complex(1.0, 0.0)};
        } else {
            stage.abstract_stage = true;
        }
        schedule.stages.push_back(std::move(stage));
        ++n;
    }
    return schedule;
}

// ---------------------------------------------------------------------------
// Photon-number schedules (single-device stages, T carries the mode once)
// ---------------------------------------------------------------------------

// Schedule realizing F(n̂) on photon-number truncated states: interpolate
// T1^{-Nl} F(l) through l = 0..N, so the leftover attenuation T1^{N n̂}
// cancels on the truncated subspace. Degenerate targets shorten the schedule
// (the missing attenuation powers are then not produced; see README).
inline SynthesisSchedule photon_number_schedule(const std::vector<Complex>& values, int degree,
                                                Complex t1, int mode = 0,
                                                bool with_devices = true) {
    if (degree < 0 || values.size() != static_cast<std::size_t>(degree) + 1) {
        throw std::invalid_argument("photon_number_schedule: need N + 1 values");
    }
    if (std::abs(t1) < 1e-12) throw std::invalid_argument("photon_number_schedule: T1 = 0");
    double peak = 0.0;
    for (const Complex& v : values) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) {
        throw std::invalid_argument("photon_number_schedule: F vanishes on all nodes");
    }

    std::vector<Complex> nodes, subbed;
    for (int l = 0; l <= degree; ++l) {
        nodes.emplace_back(static_cast<double>(l), 0.0);
        subbed.push_back(cpow_int(t1, -static_cast<long>(degree) * l) *
                         values[static_cast<std::size_t>(l)]);
    }
    std::vector<Complex> coeffs = interpolation_poly(nodes, subbed);
    const int eff = effective_degree(coeffs);
    if (eff < 0) throw std::invalid_argument("photon_number_schedule: degenerate target");
    coeffs.resize(static_cast<std::size_t>(eff) + 1);

    SynthesisSchedule schedule;
    schedule.T1 = t1;
    schedule.poly_coefficients = coeffs;
    schedule.requested_degree = degree;

    const bool devices = with_devices && std::abs(t1) < 1.0 - 1e-12;
    const Complex r1 = devices ? Complex(std::sqrt(1.0 - std::norm(t1))) : Complex(0.0);

    const MonomialSpec number{{{mode, 1}, {mode, 0}}};
    for (const Complex& root : poly_roots(coeffs)) {
        SynthesisStage stage;
        stage.a = number;
        stage.gamma = Complex(1.0);
        stage.t_powers = {{mode, 1}};
        stage.beta = -root;  // the single-device stage realizes T1^n̂ (n̂ - root)
        if (devices) {
            const Complex w =
                std::conj(t1) * (root * std::norm(r1 / t1) - 1.0);  // T2 / R2
            const Complex r2 = Complex(1.0) / std::sqrt(1.0 + std::norm(w));
            const Complex t2 = w * r2;
            stage.alpha = -r2 * std::norm(r1) / (std::sqrt(2.0) * t1);
            stage.device =
                StageDevice{StageDeviceKind::PhotonNumber, t1, r1, t2, r2, Complex(1.0), Complex(1.0)};
        } else {
            stage.abstract_stage = true;
        }
        schedule.stages.push_back(std::move(stage));
    }
    return schedule;
}

// F(n̂) = z^n̂: nodes carry z^l; the truncated normal-ordered series
// sum_k (T1^-N z - 1)^k C(n̂, k) describes the same polynomial.
inline SynthesisSchedule exponential_zn_schedule(Complex z, int degree, Complex t1,
                                                 bool with_devices = true) {
    std::vector<Complex> values;
    for (int l = 0; l <= degree; ++l) values.push_back(cpow_int(z, l));
    return photon_number_schedule(values, degree, t1, 0, with_devices);
}

// ---------------------------------------------------------------------------
// General operator ladder
// ---------------------------------------------------------------------------

struct LadderTerm {
    Complex c;
    MonomialSpec monomial;
};

// N^2 stages approximating exp(sum c_n A_n): stage n uses term 1+((n-1) mod N)
// with beta_n = N c^{-1} gamma_n^{n-1}. Terms with c = 0 are dropped. The
// composed product equals (prod alpha_n beta_n) T_tot X with
// X = [prod (1 + c_n A_n / N)]^N.
inline SynthesisSchedule general_ladder(const std::vector<LadderTerm>& terms, int big_n,
                                        Complex t1 = Complex(1.0)) {
    if (big_n < 1) throw std::invalid_argument("general_ladder: N >= 1 required");
    SynthesisSchedule schedule;
    schedule.T1 = t1;
    schedule.requested_degree = big_n;
    for (int n = 1; n <= big_n * big_n; ++n) {
        const std::size_t idx = static_cast<std::size_t>((n - 1) % big_n);
        if (idx >= terms.size()) continue;
        const LadderTerm& term = terms[idx];
        if (std::abs(term.c) == 0.0) continue;
        SynthesisStage stage;
        stage.a = term.monomial;
        stage.gamma = gamma_factor(term.monomial, t1);
        for (const auto& [mode, mult] : monomial_mode_multiplicity(term.monomial)) {
            stage.t_powers.emplace_back(mode, mult);
        }
        stage.beta = (static_cast<double>(big_n) / term.c) * cpow_int(stage.gamma, n - 1);
        stage.abstract_stage = true;
        schedule.stages.push_back(std::move(stage));
    }
    return schedule;
}

// Strip the known prefactor and attenuation from a composed ladder:
// X = T_tot^{-1} Y_tot / prod(alpha_n beta_n). Expects the schedule's stage
// T operators to commute with every stage target (single-term ladders or
// number-operator terms), which is the setting the ladder is built for.
inline OperatorMatrix ladder_x_operator(const FockSpace& space, const SynthesisSchedule& schedule) {
    const OperatorMatrix y = compose_schedule(space, schedule);
    Complex prefactor(1.0);
    for (const auto& stage : schedule.stages) prefactor *= stage.alpha * stage.beta;
    if (std::abs(prefactor) < 1e-300) throw std::runtime_error("ladder_x_operator: zero prefactor");

    Vector diag = Vector::Ones(static_cast<Eigen::Index>(space.dim()));
    for (const auto& stage : schedule.stages) {
        for (std::size_t r = 0; r < space.dim(); ++r) {
            long exponent = 0;
            for (const auto& [mode, power] : stage.t_powers) {
                exponent += static_cast<long>(power) * space.occupation(r, mode);
            }
            diag(static_cast<Eigen::Index>(r)) *= cpow_int(schedule.T1, exponent);
        }
    }
    Matrix x = y.m / prefactor;
    for (std::size_t r = 0; r < space.dim(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) /= diag(static_cast<Eigen::Index>(r));
    }
    return OperatorMatrix(space, space, std::move(x));
}

}  // namespace loqs
