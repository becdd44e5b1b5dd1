#pragma once
// Truncated multimode Fock space: basis indexing, states, elementary mode
// operators, tensor embedding, and bra/ket contraction (the measurement
// primitive behind every conditional operator in this library).
//
// Conventions:
//  - Mode j is truncated at photon number D_j, i.e. local dimension D_j + 1.
//  - Basis ranks are mixed radix with mode 0 least significant:
//      rank = sum_j n_j * prod_{k<j} (D_k + 1).
//  - Creation on the truncated space drops amplitude from the top level, so
//    operator identities involving a† hold only on inputs with enough
//    headroom below the cutoff; leakage() quantifies the mass at risk.
//  - Everything is a dense complex double matrix or vector. All values are
//    immutable after construction and safe to share across threads.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace loqs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Per-mode photon occupation numbers.
using MultiIndex = std::vector<int>;

// Integer power of a complex scalar by repeated squaring. Branch-free for
// integer exponents; c = 0 with negative exponent is rejected.
inline Complex cpow_int(Complex c, long n) {
    if (n < 0) {
        if (std::abs(c) == 0.0) {
            throw std::invalid_argument("cpow_int: zero base with negative exponent");
        }
        return 1.0 / cpow_int(c, -n);
    }
    Complex acc{1.0, 0.0};
    Complex base = c;
    while (n > 0) {
        if (n & 1) acc *= base;
        base *= base;
        n >>= 1;
    }
    return acc;
}

class FockSpace {
public:
    explicit FockSpace(std::vector<int> cutoffs) : cutoffs_(std::move(cutoffs)) {
        if (cutoffs_.empty()) {
            throw std::invalid_argument("FockSpace: need at least one mode");
        }
        strides_.resize(cutoffs_.size());
        std::size_t dim = 1;
        for (std::size_t j = 0; j < cutoffs_.size(); ++j) {
            if (cutoffs_[j] < 0) {
                throw std::invalid_argument("FockSpace: negative cutoff");
            }
            strides_[j] = dim;
            const std::size_t local = static_cast<std::size_t>(cutoffs_[j]) + 1;
            if (dim > std::numeric_limits<std::size_t>::max() / local) {
                throw std::invalid_argument("FockSpace: dimension overflows index range");
            }
            dim *= local;
        }
        dim_ = dim;
    }

    int num_modes() const { return static_cast<int>(cutoffs_.size()); }
    int cutoff(int mode) const { return cutoffs_.at(static_cast<std::size_t>(mode)); }
    const std::vector<int>& cutoffs() const { return cutoffs_; }
    std::size_t dim() const { return dim_; }
    std::size_t stride(int mode) const { return strides_.at(static_cast<std::size_t>(mode)); }

    std::size_t rank(const MultiIndex& idx) const {
        if (idx.size() != cutoffs_.size()) {
            throw std::invalid_argument("rank: occupation list has wrong mode count");
        }
        std::size_t r = 0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (idx[j] < 0 || idx[j] > cutoffs_[j]) {
                throw std::invalid_argument("rank: occupation outside cutoff in mode " +
                                            std::to_string(j));
            }
            r += static_cast<std::size_t>(idx[j]) * strides_[j];
        }
        return r;
    }

    MultiIndex unrank(std::size_t r) const {
        if (r >= dim_) throw std::invalid_argument("unrank: rank out of range");
        MultiIndex idx(cutoffs_.size());
        for (std::size_t j = 0; j < cutoffs_.size(); ++j) {
            const std::size_t local = static_cast<std::size_t>(cutoffs_[j]) + 1;
            idx[j] = static_cast<int>(r % local);
            r /= local;
        }
        return idx;
    }

    // Occupation of a single mode, without materializing the full MultiIndex.
    int occupation(std::size_t r, int mode) const {
        return static_cast<int>((r / strides_[static_cast<std::size_t>(mode)]) %
                                (static_cast<std::size_t>(cutoffs_[static_cast<std::size_t>(mode)]) + 1));
    }

    // Space over a subset of modes, in the order given.
    FockSpace sub_space(const std::vector<int>& modes) const {
        std::vector<int> cs;
        cs.reserve(modes.size());
        for (int m : modes) cs.push_back(cutoff(m));
        return FockSpace(cs);
    }

    // Space with the listed modes removed; remaining modes keep ascending order.
    FockSpace without_modes(const std::vector<int>& modes) const {
        std::vector<bool> drop(cutoffs_.size(), false);
        for (int m : modes) {
            if (m < 0 || m >= num_modes()) throw std::invalid_argument("without_modes: bad mode");
            drop[static_cast<std::size_t>(m)] = true;
        }
        std::vector<int> cs;
        for (std::size_t j = 0; j < cutoffs_.size(); ++j) {
            if (!drop[j]) cs.push_back(cutoffs_[j]);
        }
        if (cs.empty()) throw std::invalid_argument("without_modes: no modes left");
        return FockSpace(cs);
    }

    bool operator==(const FockSpace& other) const { return cutoffs_ == other.cutoffs_; }
    bool operator!=(const FockSpace& other) const { return !(*this == other); }

private:
    std::vector<int> cutoffs_;
    std::vector<std::size_t> strides_;
    std::size_t dim_ = 0;
};

inline std::size_t basis_rank(const FockSpace& space, const MultiIndex& idx) {
    return space.rank(idx);
}
inline MultiIndex basis_unrank(const FockSpace& space, std::size_t r) {
    return space.unrank(r);
}

// Complex amplitude vector over a FockSpace basis. May be subnormalized
// (conditional states); tail_weight records probability mass lost to
// truncation at construction time.
struct StateVector {
    FockSpace space;
    Vector amps;
    double tail_weight = 0.0;

    StateVector(FockSpace s, Vector a, double tail = 0.0)
        : space(std::move(s)), amps(std::move(a)), tail_weight(tail) {
        if (static_cast<std::size_t>(amps.size()) != space.dim()) {
            throw std::invalid_argument("StateVector: amplitude count != space dimension");
        }
        if (!amps.allFinite()) throw std::invalid_argument("StateVector: non-finite amplitude");
        if (tail_weight < 0.0) throw std::invalid_argument("StateVector: negative tail weight");
    }

    double norm2() const { return amps.squaredNorm(); }

    StateVector normalized() const {
        const double n = std::sqrt(norm2());
        if (n == 0.0) throw std::invalid_argument("normalized: zero state");
        return StateVector(space, amps / n, tail_weight);
    }
};

inline Complex inner(const StateVector& a, const StateVector& b) {
    if (a.space != b.space) throw std::invalid_argument("inner: space mismatch");
    return a.amps.dot(b.amps);  // Eigen dot conjugates the left argument
}

// Complex matrix mapping one FockSpace to another. Contraction over measured
// or prepared modes changes spaces, so input and output spaces are tracked
// separately.
struct OperatorMatrix {
    FockSpace in_space;
    FockSpace out_space;
    Matrix m;

    OperatorMatrix(FockSpace in, FockSpace out, Matrix mat)
        : in_space(std::move(in)), out_space(std::move(out)), m(std::move(mat)) {
        if (static_cast<std::size_t>(m.rows()) != out_space.dim() ||
            static_cast<std::size_t>(m.cols()) != in_space.dim()) {
            throw std::invalid_argument("OperatorMatrix: shape does not match spaces");
        }
        if (!m.allFinite()) throw std::invalid_argument("OperatorMatrix: non-finite entry");
    }
};

inline OperatorMatrix adjoint(const OperatorMatrix& a) {
    return OperatorMatrix(a.out_space, a.in_space, a.m.adjoint());
}

// compose(a, b) applies b first: result = a * b as matrices.
inline OperatorMatrix compose(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (b.out_space != a.in_space) {
        throw std::invalid_argument("compose: intermediate space mismatch");
    }
    return OperatorMatrix(b.in_space, a.out_space, a.m * b.m);
}

inline OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    return compose(a, b);
}
inline OperatorMatrix operator*(const Complex& c, const OperatorMatrix& a) {
    return OperatorMatrix(a.in_space, a.out_space, c * a.m);
}
inline OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.in_space != b.in_space || a.out_space != b.out_space) {
        throw std::invalid_argument("operator+: space mismatch");
    }
    return OperatorMatrix(a.in_space, a.out_space, a.m + b.m);
}
inline OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.in_space != b.in_space || a.out_space != b.out_space) {
        throw std::invalid_argument("operator-: space mismatch");
    }
    return OperatorMatrix(a.in_space, a.out_space, a.m - b.m);
}

inline StateVector apply(const OperatorMatrix& op, const StateVector& psi) {
    if (psi.space != op.in_space) throw std::invalid_argument("apply: space mismatch");
    return StateVector(op.out_space, op.m * psi.amps, psi.tail_weight);
}

// ---------------------------------------------------------------------------
// Elementary operators
// ---------------------------------------------------------------------------

inline OperatorMatrix identity_op(const FockSpace& space) {
    return OperatorMatrix(space, space,
                          Matrix::Identity(static_cast<Eigen::Index>(space.dim()),
                                           static_cast<Eigen::Index>(space.dim())));
}

// <n-1| a |n> = sqrt(n) on the given mode, identity elsewhere.
inline OperatorMatrix annihilation_op(const FockSpace& space, int mode) {
    if (mode < 0 || mode >= space.num_modes()) {
        throw std::invalid_argument("annihilation_op: bad mode");
    }
    const std::size_t dim = space.dim();
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const std::size_t stride = space.stride(mode);
    for (std::size_t r = 0; r < dim; ++r) {
        const int n = space.occupation(r, mode);
        if (n > 0) {
            m(static_cast<Eigen::Index>(r - stride), static_cast<Eigen::Index>(r)) =
                std::sqrt(static_cast<double>(n));
        }
    }
    return OperatorMatrix(space, space, std::move(m));
}

// a† = adjoint(a); the top level of the mode is dropped by truncation.
inline OperatorMatrix creation_op(const FockSpace& space, int mode) {
    return adjoint(annihilation_op(space, mode));
}

template <class F>
inline OperatorMatrix diagonal_op(const FockSpace& space, F&& f) {
    const std::size_t dim = space.dim();
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) = f(space.unrank(r));
    }
    return OperatorMatrix(space, space, std::move(m));
}

inline OperatorMatrix number_op(const FockSpace& space, int mode) {
    if (mode < 0 || mode >= space.num_modes()) throw std::invalid_argument("number_op: bad mode");
    return diagonal_op(space, [&](const MultiIndex& idx) {
        return Complex(static_cast<double>(idx[static_cast<std::size_t>(mode)]), 0.0);
    });
}

// base^(n̂_mode) as a diagonal operator.
inline OperatorMatrix power_of_number_op(const FockSpace& space, int mode, Complex base) {
    if (mode < 0 || mode >= space.num_modes()) {
        throw std::invalid_argument("power_of_number_op: bad mode");
    }
    return diagonal_op(space, [&](const MultiIndex& idx) {
        return cpow_int(base, idx[static_cast<std::size_t>(mode)]);
    });
}

// Projector onto occupations <= n_max in the given mode.
inline OperatorMatrix truncation_projector(const FockSpace& space, int mode, int n_max) {
    return diagonal_op(space, [&](const MultiIndex& idx) {
        return idx[static_cast<std::size_t>(mode)] <= n_max ? Complex(1.0) : Complex(0.0);
    });
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

inline StateVector fock_state(const FockSpace& space, const MultiIndex& idx) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    v(static_cast<Eigen::Index>(space.rank(idx))) = 1.0;
    return StateVector(space, std::move(v), 0.0);
}

// Coherent |alpha> in one mode, vacuum elsewhere. Amplitudes keep the exact
// Poisson coefficients (no renormalization); the mass beyond the cutoff is
// recorded as tail_weight.
inline StateVector coherent_state(const FockSpace& space, int mode, Complex alpha) {
    if (mode < 0 || mode >= space.num_modes()) {
        throw std::invalid_argument("coherent_state: bad mode");
    }
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw std::invalid_argument("coherent_state: non-finite amplitude");
    }
    const int d = space.cutoff(mode);
    const double gauss = std::exp(-0.5 * std::norm(alpha));
    std::vector<Complex> coeff(static_cast<std::size_t>(d) + 1);
    coeff[0] = gauss;
    for (int n = 1; n <= d; ++n) {
        coeff[static_cast<std::size_t>(n)] =
            coeff[static_cast<std::size_t>(n - 1)] * alpha / std::sqrt(static_cast<double>(n));
    }
    double kept = 0.0;
    for (const Complex& c : coeff) kept += std::norm(c);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    MultiIndex idx(static_cast<std::size_t>(space.num_modes()), 0);
    for (int n = 0; n <= d; ++n) {
        idx[static_cast<std::size_t>(mode)] = n;
        v(static_cast<Eigen::Index>(space.rank(idx))) = coeff[static_cast<std::size_t>(n)];
    }
    return StateVector(space, std::move(v), std::max(0.0, 1.0 - kept));
}

// Cutoff heuristic keeping the coherent tail below ~1e-12.
inline int coherent_cutoff(double alpha_sq) {
    return static_cast<int>(std::ceil(alpha_sq + 10.0 * std::sqrt(alpha_sq + 1.0)));
}

// True when every mode keeps its top `headroom` levels essentially empty,
// the gate for asserting creation-operator identities on truncated spaces.
inline bool within_cutoff_budget(const StateVector& psi, int headroom = 2, double tol = 1e-10);

// Probability mass in the top h levels of a mode (occupations > D - h).
inline double leakage(const StateVector& psi, int mode, int headroom) {
    if (mode < 0 || mode >= psi.space.num_modes()) throw std::invalid_argument("leakage: bad mode");
    if (headroom < 0) throw std::invalid_argument("leakage: negative headroom");
    const int lo = psi.space.cutoff(mode) - headroom;
    double mass = 0.0;
    for (std::size_t r = 0; r < psi.space.dim(); ++r) {
        if (psi.space.occupation(r, mode) > lo) mass += std::norm(psi.amps(static_cast<Eigen::Index>(r)));
    }
    return mass;
}

inline bool within_cutoff_budget(const StateVector& psi, int headroom, double tol) {
    for (int mode = 0; mode < psi.space.num_modes(); ++mode) {
        if (leakage(psi, mode, headroom) >= tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Tensor embedding
// ---------------------------------------------------------------------------

// Embed an operator acting on the listed modes (small matrix over their
// sub-space, modes in the given order) into the full space, identity on the
// rest.
inline OperatorMatrix embed_operator(const FockSpace& full, const std::vector<int>& modes,
                                     const Matrix& small) {
    const FockSpace sub = full.sub_space(modes);
    if (static_cast<std::size_t>(small.rows()) != sub.dim() ||
        static_cast<std::size_t>(small.cols()) != sub.dim()) {
        throw std::invalid_argument("embed_operator: small matrix does not match sub-space");
    }
    std::vector<bool> used(static_cast<std::size_t>(full.num_modes()), false);
    for (int m : modes) {
        if (used[static_cast<std::size_t>(m)]) {
            throw std::invalid_argument("embed_operator: repeated mode");
        }
        used[static_cast<std::size_t>(m)] = true;
    }
    std::vector<int> rest;
    for (int m = 0; m < full.num_modes(); ++m) {
        if (!used[static_cast<std::size_t>(m)]) rest.push_back(m);
    }

    const std::size_t sub_dim = sub.dim();
    std::vector<std::size_t> sub_offset(sub_dim);  // full-space offset of each sub config
    for (std::size_t s = 0; s < sub_dim; ++s) {
        const MultiIndex sidx = sub.unrank(s);
        std::size_t off = 0;
        for (std::size_t t = 0; t < modes.size(); ++t) {
            off += static_cast<std::size_t>(sidx[t]) * full.stride(modes[t]);
        }
        sub_offset[s] = off;
    }

    std::size_t rest_dim = 1;
    for (int m : rest) rest_dim *= static_cast<std::size_t>(full.cutoff(m)) + 1;

    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(full.dim()),
                              static_cast<Eigen::Index>(full.dim()));
    for (std::size_t rr = 0; rr < rest_dim; ++rr) {
        std::size_t base = 0;
        std::size_t tmp = rr;
        for (int m : rest) {
            const std::size_t local = static_cast<std::size_t>(full.cutoff(m)) + 1;
            base += (tmp % local) * full.stride(m);
            tmp /= local;
        }
        for (std::size_t so = 0; so < sub_dim; ++so) {
            for (std::size_t si = 0; si < sub_dim; ++si) {
                const Complex v = small(static_cast<Eigen::Index>(so), static_cast<Eigen::Index>(si));
                if (v != Complex(0.0)) {
                    out(static_cast<Eigen::Index>(base + sub_offset[so]),
                        static_cast<Eigen::Index>(base + sub_offset[si])) = v;
                }
            }
        }
    }
    return OperatorMatrix(full, full, std::move(out));
}

// In-place action of a small operator (over the listed modes) on a state,
// block by block. Much cheaper than materializing the embedded matrix.
inline void apply_embedded(Vector& amps, const FockSpace& full, const std::vector<int>& modes,
                           const Matrix& small) {
    const FockSpace sub = full.sub_space(modes);
    const std::size_t sub_dim = sub.dim();
    if (static_cast<std::size_t>(small.rows()) != sub_dim ||
        static_cast<std::size_t>(small.cols()) != sub_dim ||
        static_cast<std::size_t>(amps.size()) != full.dim()) {
        throw std::invalid_argument("apply_embedded: shape mismatch");
    }
    std::vector<bool> used(static_cast<std::size_t>(full.num_modes()), false);
    for (int m : modes) used[static_cast<std::size_t>(m)] = true;
    std::vector<int> rest;
    for (int m = 0; m < full.num_modes(); ++m) {
        if (!used[static_cast<std::size_t>(m)]) rest.push_back(m);
    }
    std::vector<std::size_t> sub_offset(sub_dim);
    for (std::size_t s = 0; s < sub_dim; ++s) {
        const MultiIndex sidx = sub.unrank(s);
        std::size_t off = 0;
        for (std::size_t t = 0; t < modes.size(); ++t) {
            off += static_cast<std::size_t>(sidx[t]) * full.stride(modes[t]);
        }
        sub_offset[s] = off;
    }
    std::size_t rest_dim = 1;
    for (int m : rest) rest_dim *= static_cast<std::size_t>(full.cutoff(m)) + 1;

    Vector block(static_cast<Eigen::Index>(sub_dim));
    for (std::size_t rr = 0; rr < rest_dim; ++rr) {
        std::size_t base = 0;
        std::size_t tmp = rr;
        for (int m : rest) {
            const std::size_t local = static_cast<std::size_t>(full.cutoff(m)) + 1;
            base += (tmp % local) * full.stride(m);
            tmp /= local;
        }
        for (std::size_t s = 0; s < sub_dim; ++s) {
            block(static_cast<Eigen::Index>(s)) = amps(static_cast<Eigen::Index>(base + sub_offset[s]));
        }
        block = small * block;
        for (std::size_t s = 0; s < sub_dim; ++s) {
            amps(static_cast<Eigen::Index>(base + sub_offset[s])) = block(static_cast<Eigen::Index>(s));
        }
    }
}

// Relabel modes of a state: new mode j carries old mode perm[j]'s occupation.
inline StateVector permute_modes(const StateVector& psi, const std::vector<int>& perm) {
    const int n = psi.space.num_modes();
    if (static_cast<int>(perm.size()) != n) throw std::invalid_argument("permute_modes: bad size");
    std::vector<int> cs(static_cast<std::size_t>(n));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int j = 0; j < n; ++j) {
        const int src = perm[static_cast<std::size_t>(j)];
        if (src < 0 || src >= n || seen[static_cast<std::size_t>(src)]) {
            throw std::invalid_argument("permute_modes: not a permutation");
        }
        seen[static_cast<std::size_t>(src)] = true;
        cs[static_cast<std::size_t>(j)] = psi.space.cutoff(src);
    }
    FockSpace out(cs);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(out.dim()));
    for (std::size_t r = 0; r < psi.space.dim(); ++r) {
        const MultiIndex idx = psi.space.unrank(r);
        MultiIndex tgt(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) tgt[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
        v(static_cast<Eigen::Index>(out.rank(tgt))) = psi.amps(static_cast<Eigen::Index>(r));
    }
    return StateVector(std::move(out), std::move(v), psi.tail_weight);
}

// ---------------------------------------------------------------------------
// Contraction: feed kets on input modes, project bras on output modes
// ---------------------------------------------------------------------------

// A prepared input: a state over one or more modes of the network input space.
struct PrepAssignment {
    std::vector<int> modes;
    StateVector state;
};

// A projected output: a bra state over one or more modes of the output space.
// The contraction is conjugate-linear in this state.
struct BraAssignment {
    std::vector<int> modes;
    StateVector state;
};

namespace detail {

struct ModeSplit {
    std::vector<int> kept;                       // surviving modes, ascending
    FockSpace reduced;                           // space over kept modes
    std::vector<std::size_t> kept_strides;       // full-space strides of kept modes
    std::vector<int> kept_cutoffs;

    ModeSplit(const FockSpace& full, const std::vector<bool>& removed)
        : reduced(make_reduced(full, removed)) {
        for (int m = 0; m < full.num_modes(); ++m) {
            if (!removed[static_cast<std::size_t>(m)]) {
                kept.push_back(m);
                kept_strides.push_back(full.stride(m));
                kept_cutoffs.push_back(full.cutoff(m));
            }
        }
    }

    static FockSpace make_reduced(const FockSpace& full, const std::vector<bool>& removed) {
        std::vector<int> cs;
        for (int m = 0; m < full.num_modes(); ++m) {
            if (!removed[static_cast<std::size_t>(m)]) cs.push_back(full.cutoff(m));
        }
        if (cs.empty()) throw std::invalid_argument("contract: no surviving modes");
        return FockSpace(cs);
    }

    // Full-space offset of a reduced-space rank.
    std::size_t offset(std::size_t reduced_rank) const {
        std::size_t off = 0;
        for (std::size_t t = 0; t < kept.size(); ++t) {
            const std::size_t local = static_cast<std::size_t>(kept_cutoffs[t]) + 1;
            off += (reduced_rank % local) * kept_strides[t];
            reduced_rank /= local;
        }
        return off;
    }
};

struct WeightedOffset {
    std::size_t offset;
    Complex weight;
};

// Nonzero components of a joint assignment list, flattened to full-space
// offsets with their amplitude products.
inline std::vector<WeightedOffset> assignment_support(const FockSpace& full,
                                                      const std::vector<PrepAssignment>& list,
                                                      bool conjugate) {
    std::vector<WeightedOffset> support{{0, Complex(1.0)}};
    for (const auto& a : list) {
        const FockSpace sub = full.sub_space(a.modes);
        if (a.state.space != sub) {
            throw std::invalid_argument("contract: assigned state does not match mode cutoffs");
        }
        std::vector<WeightedOffset> next;
        for (std::size_t s = 0; s < sub.dim(); ++s) {
            Complex amp = a.state.amps(static_cast<Eigen::Index>(s));
            if (amp == Complex(0.0)) continue;
            if (conjugate) amp = std::conj(amp);
            const MultiIndex sidx = sub.unrank(s);
            std::size_t off = 0;
            for (std::size_t t = 0; t < a.modes.size(); ++t) {
                off += static_cast<std::size_t>(sidx[t]) * full.stride(a.modes[t]);
            }
            for (const auto& w : support) next.push_back({w.offset + off, w.weight * amp});
        }
        support = std::move(next);
    }
    return support;
}

inline std::vector<bool> removal_mask(const FockSpace& full,
                                      const std::vector<PrepAssignment>& list,
                                      const char* what) {
    std::vector<bool> removed(static_cast<std::size_t>(full.num_modes()), false);
    for (const auto& a : list) {
        for (int m : a.modes) {
            if (m < 0 || m >= full.num_modes()) {
                throw std::invalid_argument(std::string("contract: bad ") + what + " mode");
            }
            if (removed[static_cast<std::size_t>(m)]) {
                throw std::invalid_argument(std::string("contract: overlapping ") + what + " modes");
            }
            removed[static_cast<std::size_t>(m)] = true;
        }
    }
    return removed;
}

}  // namespace detail

// General contraction. Returns the operator on the surviving modes obtained
// by feeding `preps` kets on the input side and projecting `bras` on the
// output side. Surviving modes keep ascending order. Linear in net,
// conjugate-linear in the bra states.
inline OperatorMatrix contract(const OperatorMatrix& net, const std::vector<PrepAssignment>& preps,
                               const std::vector<BraAssignment>& bras) {
    std::vector<PrepAssignment> bra_list;
    bra_list.reserve(bras.size());
    for (const auto& b : bras) bra_list.push_back({b.modes, b.state});

    const std::vector<bool> in_removed = detail::removal_mask(net.in_space, preps, "prep");
    const std::vector<bool> out_removed = detail::removal_mask(net.out_space, bra_list, "bra");

    const detail::ModeSplit in_split(net.in_space, in_removed);
    const detail::ModeSplit out_split(net.out_space, out_removed);

    const auto prep_support = detail::assignment_support(net.in_space, preps, false);
    const auto bra_support = detail::assignment_support(net.out_space, bra_list, true);

    const std::size_t din = in_split.reduced.dim();
    const std::size_t dout = out_split.reduced.dim();
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(din));

    std::vector<std::size_t> in_off(din), out_off(dout);
    for (std::size_t i = 0; i < din; ++i) in_off[i] = in_split.offset(i);
    for (std::size_t o = 0; o < dout; ++o) out_off[o] = out_split.offset(o);

    for (std::size_t i = 0; i < din; ++i) {
        for (const auto& p : prep_support) {
            const std::size_t col = in_off[i] + p.offset;
            for (std::size_t o = 0; o < dout; ++o) {
                Complex acc(0.0);
                for (const auto& b : bra_support) {
                    acc += b.weight *
                           net.m(static_cast<Eigen::Index>(out_off[o] + b.offset),
                                 static_cast<Eigen::Index>(col));
                }
                y(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) += p.weight * acc;
            }
        }
    }

    return OperatorMatrix(in_split.reduced, out_split.reduced, std::move(y));
}

// Convenience form: single-mode preparations and photon-count projections.
inline OperatorMatrix contract(const OperatorMatrix& net, const std::map<int, StateVector>& prep,
                               const std::map<int, int>& bra) {
    std::vector<PrepAssignment> preps;
    for (const auto& [mode, state] : prep) preps.push_back({{mode}, state});
    std::vector<BraAssignment> bras;
    for (const auto& [mode, count] : bra) {
        if (mode < 0 || mode >= net.out_space.num_modes()) {
            throw std::invalid_argument("contract: bad bra mode");
        }
        if (count < 0 || count > net.out_space.cutoff(mode)) {
            throw std::invalid_argument("contract: bra count outside cutoff");
        }
        FockSpace one({net.out_space.cutoff(mode)});
        bras.push_back({{mode}, fock_state(one, {count})});
    }
    return contract(net, preps, bras);
}

// Project photon counts on some modes of a state. Returns the unnormalized
// reduced state and the detection probability (its squared norm).
inline std::pair<StateVector, double> condition_state(const StateVector& psi,
                                                      const std::map<int, int>& counts) {
    std::vector<bool> removed(static_cast<std::size_t>(psi.space.num_modes()), false);
    std::size_t offset = 0;
    for (const auto& [mode, count] : counts) {
        if (mode < 0 || mode >= psi.space.num_modes()) {
            throw std::invalid_argument("condition_state: bad mode");
        }
        if (count < 0 || count > psi.space.cutoff(mode)) {
            throw std::invalid_argument("condition_state: count outside cutoff");
        }
        removed[static_cast<std::size_t>(mode)] = true;
        offset += static_cast<std::size_t>(count) * psi.space.stride(mode);
    }
    const detail::ModeSplit split(psi.space, removed);
    Vector v(static_cast<Eigen::Index>(split.reduced.dim()));
    for (std::size_t r = 0; r < split.reduced.dim(); ++r) {
        v(static_cast<Eigen::Index>(r)) = psi.amps(static_cast<Eigen::Index>(split.offset(r) + offset));
    }
    StateVector out(split.reduced, std::move(v), psi.tail_weight);
    return {out, out.norm2()};
}

}  // namespace loqs
