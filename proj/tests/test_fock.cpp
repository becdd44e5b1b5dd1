#include "loqs/fock.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace loqs;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = Complex(dist(rng), dist(rng));
    }
    return m;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

// ---------- basis indexing ----------

TEST(FockSpace, RankExamples) {
    FockSpace space({3, 3});
    EXPECT_EQ(space.rank({0, 0}), 0u);
    EXPECT_EQ(space.rank({1, 0}), 1u);  // mode 0 least significant
    EXPECT_EQ(space.rank({0, 1}), 4u);
    EXPECT_EQ(space.dim(), 16u);
}

TEST(FockSpace, RankUnrankRoundTripExhaustive) {
    for (const auto& cutoffs : std::vector<std::vector<int>>{{3, 3}, {2, 4, 1}, {5, 0, 2, 3}}) {
        FockSpace space(cutoffs);
        ASSERT_LE(space.dim(), 10000u);
        for (std::size_t r = 0; r < space.dim(); ++r) {
            EXPECT_EQ(space.rank(space.unrank(r)), r);
        }
    }
}

TEST(FockSpace, RankRejectsOutOfRange) {
    FockSpace space({3, 3});
    EXPECT_THROW(space.rank({4, 0}), std::invalid_argument);
    EXPECT_THROW(space.rank({0, -1}), std::invalid_argument);
    EXPECT_THROW(space.rank({0}), std::invalid_argument);
}

TEST(FockSpace, OccupationMatchesUnrank) {
    FockSpace space({2, 3, 1});
    for (std::size_t r = 0; r < space.dim(); ++r) {
        const MultiIndex idx = space.unrank(r);
        for (int m = 0; m < space.num_modes(); ++m) {
            EXPECT_EQ(space.occupation(r, m), idx[static_cast<std::size_t>(m)]);
        }
    }
}

// ---------- ladder operators ----------

TEST(Operators, AnnihilationActions) {
    FockSpace space({4});
    const OperatorMatrix a = annihilation_op(space, 0);
    const StateVector vac = fock_state(space, {0});
    EXPECT_NEAR(apply(a, vac).norm2(), 0.0, 1e-15);

    const StateVector one = fock_state(space, {1});
    const StateVector a1 = apply(a, one);
    EXPECT_NEAR(std::abs(a1.amps(0) - Complex(1.0)), 0.0, 1e-15);

    // <1| a |2> = sqrt(2)
    EXPECT_NEAR(std::abs(a.m(1, 2) - Complex(std::sqrt(2.0))), 0.0, 1e-15);
}

TEST(Operators, NumberEigenvalue) {
    FockSpace space({4});
    const OperatorMatrix n = number_op(space, 0);
    const StateVector two = fock_state(space, {2});
    const StateVector res = apply(n, two);
    EXPECT_NEAR(std::abs(res.amps(2) - Complex(2.0)), 0.0, 1e-15);
}

TEST(Operators, AdjointIsInvolution) {
    std::mt19937_64 rng(7);
    FockSpace space({2, 2});
    OperatorMatrix a(space, space, random_matrix(space.dim(), space.dim(), rng));
    const OperatorMatrix aa = adjoint(adjoint(a));
    EXPECT_EQ(max_abs(aa.m - a.m), 0.0);
}

TEST(Operators, ComposeAssociative) {
    std::mt19937_64 rng(11);
    FockSpace space({2, 1});
    for (int trial = 0; trial < 5; ++trial) {
        OperatorMatrix a(space, space, random_matrix(space.dim(), space.dim(), rng));
        OperatorMatrix b(space, space, random_matrix(space.dim(), space.dim(), rng));
        OperatorMatrix c(space, space, random_matrix(space.dim(), space.dim(), rng));
        EXPECT_LT(max_abs((compose(compose(a, b), c) - compose(a, compose(b, c))).m), 1e-12);
    }
}

TEST(Operators, ComposeChecksSpaces) {
    FockSpace s1({2}), s2({3});
    EXPECT_THROW(compose(identity_op(s1), identity_op(s2)), std::invalid_argument);
}

TEST(Operators, CanonicalCommutatorBelowCutoff) {
    FockSpace space({5, 3});
    for (int mode = 0; mode < 2; ++mode) {
        const OperatorMatrix a = annihilation_op(space, mode);
        const OperatorMatrix ad = creation_op(space, mode);
        const Matrix comm = (a * ad - ad * a).m;
        const Matrix expect = Matrix::Identity(comm.rows(), comm.cols());
        // holds entrywise on columns with occupation below the cutoff
        for (std::size_t c = 0; c < space.dim(); ++c) {
            if (space.occupation(c, mode) >= space.cutoff(mode)) continue;
            for (std::size_t r = 0; r < space.dim(); ++r) {
                if (space.occupation(r, mode) >= space.cutoff(mode)) continue;
                EXPECT_NEAR(std::abs(comm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -
                                     expect(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))),
                            0.0, 1e-14);
            }
        }
    }
}

// ---------- states ----------

TEST(States, CoherentVacuum) {
    FockSpace space({6});
    const StateVector psi = coherent_state(space, 0, Complex(0.0));
    EXPECT_NEAR(psi.tail_weight, 0.0, 0.0);
    EXPECT_NEAR(std::abs(psi.amps(0) - Complex(1.0)), 0.0, 1e-15);
}

TEST(States, CoherentNormCompleteness) {
    FockSpace space({40});
    const StateVector psi = coherent_state(space, 0, Complex(1.3, -0.4));
    EXPECT_NEAR(psi.norm2(), 1.0, 1e-12);
    EXPECT_LT(psi.tail_weight, 1e-12);
}

TEST(States, CoherentTailMatchesPoissonTail) {
    // independent oracle: Poisson tail sum for |alpha|^2 = 1, D = 10
    const double mean = 1.0;
    double term = std::exp(-mean);
    double kept = 0.0;
    for (int n = 0; n <= 10; ++n) {
        kept += term;
        term *= mean / (n + 1);
    }
    const double tail_oracle = 1.0 - kept;
    ASSERT_LT(tail_oracle, 1e-7);

    FockSpace space({10});
    const StateVector psi = coherent_state(space, 0, Complex(1.0));
    EXPECT_NEAR(psi.tail_weight, tail_oracle, 1e-15);
    EXPECT_LT(psi.tail_weight, 1e-7);
}

TEST(States, LeakageExamples) {
    FockSpace space({10});
    EXPECT_EQ(leakage(fock_state(space, {0}), 0, 2), 0.0);
    EXPECT_EQ(leakage(fock_state(space, {10}), 0, 1), 1.0);

    const StateVector coh = coherent_state(space, 0, Complex(1.0));
    double direct = 0.0;
    for (int n = 9; n <= 10; ++n) direct += std::norm(coh.amps(n));
    EXPECT_NEAR(leakage(coh, 0, 2), direct, 1e-16);
}

// ---------- contraction ----------

TEST(Contract, IdentityNetworkVacuumConditioning) {
    FockSpace space({3, 2});
    FockSpace one({2});
    const OperatorMatrix net = identity_op(space);
    const OperatorMatrix y =
        contract(net, std::map<int, StateVector>{{1, fock_state(one, {0})}}, std::map<int, int>{{1, 0}});
    EXPECT_EQ(y.in_space, FockSpace({3}));
    EXPECT_LT(max_abs(y.m - Matrix::Identity(4, 4)), 1e-15);
}

TEST(Contract, ZeroModesIsIdentity) {
    std::mt19937_64 rng(3);
    FockSpace space({2, 2});
    OperatorMatrix net(space, space, random_matrix(space.dim(), space.dim(), rng));
    const OperatorMatrix y = contract(net, std::map<int, StateVector>{}, std::map<int, int>{});
    EXPECT_EQ(max_abs(y.m - net.m), 0.0);
}

TEST(Contract, MatchesNaiveSummationOracle) {
    // random 3-mode network, prep mode 1, detect mode 2
    std::mt19937_64 rng(19);
    FockSpace space({2, 2, 3});
    OperatorMatrix net(space, space, random_matrix(space.dim(), space.dim(), rng));
    FockSpace m1({2});
    StateVector prep(m1, Vector::Zero(3), 0.0);
    prep.amps << Complex(0.3, 0.1), Complex(-0.5, 0.2), Complex(0.0, 0.7);
    const int detect = 2;

    const OperatorMatrix y =
        contract(net, std::map<int, StateVector>{{1, prep}}, std::map<int, int>{{1, detect}});

    // naive quadruple-loop oracle over (n0_out, n2_out, n0_in, n2_in),
    // summing the prepared mode explicitly
    FockSpace red({2, 3});
    ASSERT_EQ(y.in_space, red);
    ASSERT_EQ(y.out_space, red);
    for (int n0o = 0; n0o <= 2; ++n0o) {
        for (int n2o = 0; n2o <= 3; ++n2o) {
            for (int n0i = 0; n0i <= 2; ++n0i) {
                for (int n2i = 0; n2i <= 3; ++n2i) {
                    Complex acc(0.0);
                    for (int p = 0; p <= 2; ++p) {
                        acc += prep.amps(p) *
                               net.m(static_cast<Eigen::Index>(space.rank({n0o, detect, n2o})),
                                     static_cast<Eigen::Index>(space.rank({n0i, p, n2i})));
                    }
                    EXPECT_NEAR(std::abs(y.m(static_cast<Eigen::Index>(red.rank({n0o, n2o})),
                                             static_cast<Eigen::Index>(red.rank({n0i, n2i}))) -
                                         acc),
                                0.0, 1e-13);
                }
            }
        }
    }
}

TEST(Contract, LinearInNetConjugateLinearInBra) {
    std::mt19937_64 rng(23);
    FockSpace space({2, 2});
    OperatorMatrix net1(space, space, random_matrix(space.dim(), space.dim(), rng));
    OperatorMatrix net2(space, space, random_matrix(space.dim(), space.dim(), rng));
    const Complex c(0.4, -1.1);

    FockSpace one({2});
    StateVector bra(one, Vector::Zero(3), 0.0);
    bra.amps << Complex(0.2, 0.5), Complex(0.1, -0.3), Complex(0.8, 0.0);

    auto contract_with = [&](const OperatorMatrix& net, const StateVector& b) {
        return contract(net, std::vector<PrepAssignment>{},
                        std::vector<BraAssignment>{{{1}, b}});
    };

    // linear in net
    OperatorMatrix lhs = contract_with(OperatorMatrix(space, space, net1.m + c * net2.m), bra);
    OperatorMatrix rhs = contract_with(net1, bra);
    OperatorMatrix rhs2 = contract_with(net2, bra);
    EXPECT_LT(max_abs(lhs.m - (rhs.m + c * rhs2.m)), 1e-13);

    // conjugate-linear in bra
    StateVector scaled_bra(one, (c * bra.amps).eval(), 0.0);
    OperatorMatrix scaled = contract_with(net1, scaled_bra);
    EXPECT_LT(max_abs(scaled.m - std::conj(c) * rhs.m), 1e-13);
}

TEST(Contract, OverlappingPrepModesRejected) {
    FockSpace space({2, 2});
    FockSpace one({2});
    std::vector<PrepAssignment> preps{{{0}, fock_state(one, {0})}, {{0}, fock_state(one, {1})}};
    EXPECT_THROW(contract(identity_op(space), preps, std::vector<BraAssignment>{}),
                 std::invalid_argument);
}

TEST(Contract, ConditionStateMatchesContract) {
    std::mt19937_64 rng(5);
    FockSpace space({2, 3});
    Vector amps = random_matrix(space.dim(), 1, rng).col(0);
    amps /= amps.norm();
    StateVector psi(space, amps, 0.0);
    auto [reduced, p] = condition_state(psi, {{1, 2}});
    EXPECT_EQ(reduced.space, FockSpace({2}));
    for (int n = 0; n <= 2; ++n) {
        EXPECT_NEAR(std::abs(reduced.amps(n) - psi.amps(static_cast<Eigen::Index>(space.rank({n, 2})))),
                    0.0, 1e-15);
    }
    EXPECT_NEAR(p, reduced.norm2(), 1e-15);
}

// ---------- embedding ----------

TEST(Embed, TwoModeOperatorOnThreeModeSpace) {
    std::mt19937_64 rng(29);
    FockSpace space({2, 1, 2});
    FockSpace pair({2, 2});
    Matrix small = random_matrix(pair.dim(), pair.dim(), rng);
    const OperatorMatrix big = embed_operator(space, {0, 2}, small);

    // spot check against direct index arithmetic
    for (std::size_t ro = 0; ro < space.dim(); ++ro) {
        for (std::size_t ri = 0; ri < space.dim(); ++ri) {
            const MultiIndex io = space.unrank(ro);
            const MultiIndex ii = space.unrank(ri);
            Complex expect(0.0);
            if (io[1] == ii[1]) {
                expect = small(static_cast<Eigen::Index>(pair.rank({io[0], io[2]})),
                               static_cast<Eigen::Index>(pair.rank({ii[0], ii[2]})));
            }
            EXPECT_NEAR(std::abs(big.m(static_cast<Eigen::Index>(ro), static_cast<Eigen::Index>(ri)) -
                                 expect),
                        0.0, 1e-15);
        }
    }
}

TEST(Embed, ApplyEmbeddedMatchesMatrix) {
    std::mt19937_64 rng(31);
    FockSpace space({2, 2, 1});
    FockSpace pair({2, 1});
    Matrix small = random_matrix(pair.dim(), pair.dim(), rng);
    const OperatorMatrix big = embed_operator(space, {1, 2}, small);

    Vector psi = random_matrix(space.dim(), 1, rng).col(0);
    Vector via_matrix = big.m * psi;
    Vector in_place = psi;
    apply_embedded(in_place, space, {1, 2}, small);
    EXPECT_LT((via_matrix - in_place).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Embed, PermuteModesRelabels) {
    FockSpace space({2, 3});
    StateVector psi = fock_state(space, {1, 2});
    StateVector swapped = permute_modes(psi, {1, 0});
    EXPECT_EQ(swapped.space, FockSpace({3, 2}));
    EXPECT_NEAR(std::abs(swapped.amps(static_cast<Eigen::Index>(swapped.space.rank({2, 1}))) -
                         Complex(1.0)),
                0.0, 1e-15);
}
