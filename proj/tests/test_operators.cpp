#include <random>

#include <gtest/gtest.h>

#include "coarse/scenario.hpp"
#include "oracles.hpp"

using namespace coarse;

namespace {

std::map<PointId, int> random_dims(std::mt19937_64& rng, const PointSet& pts, int max_dim)
{
    std::map<PointId, int> out;
    for (PointId x : pts)
        out[x] = static_cast<int>(rng() % (max_dim + 1));
    return out;
}

double dense_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

} // namespace

TEST(Operator, PropagationIsTheSupport)
{
    std::mt19937_64 rng(30);
    const auto space = std::make_shared<const FiniteCoarseSpace>(cycle_space(12, {1, 2}));
    const ControlledObject obj(space, random_dims(rng, space->points(), 2));
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_operator(rng, obj, obj, space->entourage("U1"));
        const auto b = random_operator(rng, obj, obj, space->entourage("U2"));
        EXPECT_TRUE(propagation(a).subset_of(space->entourage("U1")));
        EXPECT_TRUE(propagation(compose(a, b)).subset_of(compose(propagation(a), propagation(b))));
        EXPECT_TRUE(propagation(adjoint(a)) == inverse(propagation(a)));
    }
}

TEST(Operator, AlgebraMatchesDenseMatrices)
{
    std::mt19937_64 rng(31);
    const auto space = std::make_shared<const FiniteCoarseSpace>(path_space(15, {1, 2}));
    for (int trial = 0; trial < 20; ++trial) {
        const ControlledObject p(space, random_dims(rng, space->points(), 3));
        const ControlledObject q(space, random_dims(rng, space->points(), 3));
        const ControlledObject r(space, random_dims(rng, space->points(), 3));
        const auto a = random_operator(rng, q, r, space->entourage("U1"));
        const auto b = random_operator(rng, p, q, space->entourage("U2"));
        const auto c = random_operator(rng, p, q, space->entourage("U1"));
        EXPECT_LT(dense_diff(compose(a, b).dense(), a.dense() * b.dense()), 1e-12);
        EXPECT_LT(dense_diff(adjoint(a).dense(), a.dense().adjoint()), 1e-12);
        EXPECT_LT(dense_diff(add(b, c).dense(), b.dense() + c.dense()), 1e-12);
        EXPECT_LT(dense_diff(scale({0.5, -2.0}, b).dense(), Complex(0.5, -2.0) * b.dense()), 1e-12);
        // (AB)* = B*A*
        EXPECT_LT(max_abs_difference(adjoint(compose(a, b)), compose(adjoint(b), adjoint(a))), 1e-12);
        const auto d = random_operator(rng, r, p, space->entourage("U1"));
        EXPECT_LT(max_abs_difference(compose(compose(d, a), b), compose(d, compose(a, b))), 1e-12);
    }
}

TEST(Operator, ShapeErrors)
{
    const auto space = std::make_shared<const FiniteCoarseSpace>(path_space(4, {1}));
    const ControlledObject one(space, {{0, 1}, {1, 1}, {2, 1}, {3, 1}});
    const ControlledObject two(space, {{0, 2}, {1, 2}, {2, 2}, {3, 2}});
    EXPECT_THROW(ControlledOperator(one, one, {{{0, 1}, Block::Identity(2, 2)}}), CoarseError);
    EXPECT_THROW(compose(ControlledOperator::identity(one), ControlledOperator::identity(two)), CoarseError);
    EXPECT_THROW(add(ControlledOperator::identity(one), ControlledOperator::identity(two)), CoarseError);
    EXPECT_THROW(ControlledObject(space, {{9, 1}}), CoarseError);
    EXPECT_THROW(ControlledObject(space, {{0, -1}}), CoarseError);
    // zero blocks are dropped
    const ControlledOperator z(one, one, {{{0, 1}, Block::Zero(1, 1)}});
    EXPECT_TRUE(z.blocks().empty());
}

TEST(OpNorm, Examples)
{
    const Tower t = tower(2, {5, 7, 9});
    const auto obj = unit_object(t.covering.target_ptr());
    EXPECT_DOUBLE_EQ(op_norm(ControlledOperator::identity(obj)), 1.0);
    EXPECT_NEAR(op_norm(averaging_projection(t)), 1.0, 1e-12);
    EXPECT_NEAR(op_norm(shift_operator(t)), 1.0, 1e-12);
    EXPECT_EQ(op_norm(ControlledOperator::zero(obj, obj)), 0.0);
    EXPECT_NEAR(op_norm(scale(3.0, averaging_projection(t))), 3.0, 1e-12);
}

TEST(OpNorm, PowerIterationMatchesSvdOracle)
{
    std::mt19937_64 rng(32);
    const auto space = std::make_shared<const FiniteCoarseSpace>(cycle_space(25, {1, 2, 3}));
    const ControlledObject obj(space, random_dims(rng, space->points(), 2));
    NormOptions power;
    power.dense_limit = 0;
    power.tolerance = 1e-14;
    power.max_iterations = 200000;
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_operator(rng, obj, obj, space->entourage("U" + std::to_string(1 + trial % 3)));
        const double ref = oracle::spectral_norm(a.dense());
        const auto res = op_norm_detail(a, power);
        EXPECT_FALSE(res.dense_value.has_value());
        EXPECT_NEAR(res.value, ref, 1e-6 * ref) << trial;
        const auto exact = op_norm_detail(a);
        ASSERT_TRUE(exact.dense_value.has_value());
        EXPECT_NEAR(exact.value, ref, 1e-9 * ref);
    }
}

TEST(OpNorm, FiftyDimensionalRandom)
{
    std::mt19937_64 rng(33);
    const auto space = std::make_shared<const FiniteCoarseSpace>(path_space(50, {2}));
    const auto obj = unit_object(space);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_operator(rng, obj, obj, space->entourage("U2"));
        EXPECT_NEAR(op_norm(a), oracle::spectral_norm(a.dense()), 1e-9);
    }
}

TEST(OpNorm, CompressionDoesNotIncrease)
{
    std::mt19937_64 rng(34);
    const auto space = std::make_shared<const FiniteCoarseSpace>(cycle_space(20, {1, 2}));
    const ControlledObject obj(space, random_dims(rng, space->points(), 2));
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = random_operator(rng, obj, obj, space->entourage("U2"));
        PointSet s;
        for (PointId x : space->points())
            if (rng() % 3)
                s.push_back(x);
        EXPECT_LE(op_norm(restrict(a, s)), op_norm(a) * (1 + 1e-12));
        const auto b = random_operator(rng, obj, obj, space->entourage("U1"));
        EXPECT_LE(op_norm(compose(a, b)), op_norm(a) * op_norm(b) * (1 + 1e-12));
        EXPECT_NEAR(op_norm(adjoint(a)), op_norm(a), 1e-9 * op_norm(a));
    }
}

TEST(Equivariance, RandomEquivariantOperatorsPass)
{
    std::mt19937_64 rng(35);
    const Tower t = tower(3, {5, 7});
    const auto& act = *t.covering.deck();
    // fibre dimensions constant along orbits
    std::map<PointId, int> dims, orbit_dims;
    for (PointId x : t.covering.source().points()) {
        PointId rep = act.orbit(x).front();
        if (!orbit_dims.count(rep))
            orbit_dims[rep] = 1 + static_cast<int>(rng() % 2);
        dims[x] = orbit_dims[rep];
    }
    const ControlledObject obj(t.covering.source_ptr(), dims, act, random_cocycle(rng, act, dims));
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_equivariant_operator(rng, obj, obj, t.covering.source().entourage("U2"));
        EXPECT_TRUE(equivariance_check(a).ok);
        EXPECT_TRUE(equivariance_check(compose(a, adjoint(a))).ok);
        auto blocks = a.blocks();
        auto it = blocks.begin();
        std::advance(it, static_cast<long>(rng() % blocks.size()));
        it->second(0, 0) += 1.0;
        const ControlledOperator bad(obj, obj, blocks);
        const auto res = equivariance_check(bad);
        EXPECT_FALSE(res.ok);
        // a unit entry conjugated by unitaries of size <= 2 has largest entry in [1/2, 1]
        EXPECT_GE(res.deviation, 0.5 - 1e-9);
        EXPECT_LE(res.deviation, 1.0 + 1e-9);
    }
}

TEST(Equivariance, CocycleIsValidated)
{
    const Tower t = tower(2, {5});
    const auto& act = *t.covering.deck();
    std::map<PointId, int> dims;
    for (PointId x : t.covering.source().points())
        dims[x] = 1;
    std::map<CocycleKey, Block> bad{{{1, 0}, Block::Constant(1, 1, 2.0)}};
    EXPECT_THROW(ControlledObject(t.covering.source_ptr(), dims, act, bad), CoarseError);
    dims[0] = 2;
    EXPECT_THROW(ControlledObject(t.covering.source_ptr(), dims, act, {}), CoarseError);
    const auto plain = unit_object(t.covering.source_ptr());
    EXPECT_THROW(equivariance_check(ControlledOperator::identity(plain)), CoarseError);
}

TEST(GhostMeasure, AveragingOnTheTower)
{
    const Tower t = tower(2, {5, 7, 9, 11});
    const auto avg = averaging_projection(t);
    const auto& fam = t.covering.big_family();
    const auto diag = ghost_measure(avg, t.covering.target().diagonal(), fam);
    ASSERT_EQ(diag.size(), fam.size());
    for (std::size_t pos = 0; pos < fam.size(); ++pos) {
        // sup over sheets k > j of 1 / n_k
        double expect = 0.0;
        for (std::size_t k = 0; k < t.ns.size(); ++k)
            if (static_cast<int>(k) > fam[pos].index)
                expect = std::max(expect, 1.0 / static_cast<double>(t.ns[k]));
        EXPECT_EQ(diag[pos].first, fam[pos].index);
        EXPECT_NEAR(diag[pos].second, expect, 1e-12);
    }
    // with U1 balls the 3 x 3 constant block has norm 3 / n
    const auto wide = ghost_measure(avg, t.scale(1), fam);
    for (std::size_t pos = 0; pos < fam.size(); ++pos)
        EXPECT_NEAR(wide[pos].second, 3.0 / static_cast<double>(t.ns[pos]), 1e-12);
    // the measure decreases along the family
    for (std::size_t pos = 1; pos < fam.size(); ++pos)
        EXPECT_LE(wide[pos].second, wide[pos - 1].second);
}

TEST(GhostMeasure, IdentityStaysAwayFromZero)
{
    const Tower t = tower(2, {5, 7, 9, 11});
    const auto id = ControlledOperator::identity(unit_object(t.covering.target_ptr()));
    for (const auto& [index, value] : ghost_measure(id, t.scale(2), t.covering.big_family()))
        EXPECT_NEAR(value, 1.0, 1e-12) << index;
}

TEST(Truncate, KeepsOnlyTheScale)
{
    std::mt19937_64 rng(36);
    const auto space = std::make_shared<const FiniteCoarseSpace>(cycle_space(10, {1, 3}));
    const auto obj = unit_object(space);
    const auto a = random_operator(rng, obj, obj, space->entourage("U3"));
    const auto t = truncate(a, space->entourage("U1"));
    EXPECT_TRUE(propagation(t).subset_of(space->entourage("U1")));
    for (const auto& [key, b] : t.blocks())
        EXPECT_EQ(b, a.block(key.first, key.second));
    EXPECT_EQ(propagation(t).size(), space->entourage("U1").size());
}
