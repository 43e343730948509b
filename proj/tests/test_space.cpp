#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "coarse/space.hpp"
#include "oracles.hpp"

using namespace coarse;

namespace {

oracle::PairSet to_set(const Entourage& e)
{
    oracle::PairSet out;
    for (auto [a, b] : e.pairs())
        out.insert({a, b});
    return out;
}

Entourage random_relation(std::mt19937_64& rng, int n, double density)
{
    std::bernoulli_distribution keep(density);
    std::vector<Pair> pairs;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (keep(rng))
                pairs.emplace_back(a, b);
    return Entourage(std::move(pairs));
}

PointSet random_subset(std::mt19937_64& rng, int n, double density)
{
    std::bernoulli_distribution keep(density);
    PointSet out;
    for (int x = 0; x < n; ++x)
        if (keep(rng))
            out.push_back(x);
    return out;
}

std::vector<std::vector<oracle::Id>> plain(const CoverFamily& w)
{
    std::vector<std::vector<oracle::Id>> out;
    for (const auto& p : w.parts())
        out.emplace_back(p.begin(), p.end());
    return out;
}

} // namespace

TEST(Compose, DiagonalIsIdentity)
{
    const Entourage v = cycle_entourage(9, 2);
    EXPECT_EQ(compose(Entourage::diagonal(id_range(9)), v), v);
    EXPECT_EQ(compose(v, Entourage::diagonal(id_range(9))), v);
}

TEST(Compose, OneStepChain)
{
    EXPECT_EQ(compose(Entourage({{0, 1}}), Entourage({{1, 2}})), Entourage({{0, 2}}));
}

TEST(Compose, CyclicRadiiAdd)
{
    const Entourage lhs = compose(cycle_entourage(9, 1), cycle_entourage(9, 2));
    EXPECT_EQ(lhs, cycle_entourage(9, 3));
    EXPECT_EQ(to_set(lhs), oracle::compose(oracle::cycle_pairs(9, 1), oracle::cycle_pairs(9, 2)));
}

TEST(Compose, RandomRelationsAgainstOracle)
{
    std::mt19937_64 rng(0);
    for (int trial = 0; trial < 50; ++trial) {
        const Entourage u = random_relation(rng, 12, 0.15), v = random_relation(rng, 12, 0.15),
                        w = random_relation(rng, 12, 0.15);
        EXPECT_EQ(to_set(compose(u, v)), oracle::compose(to_set(u), to_set(v)));
        EXPECT_EQ(compose(compose(u, v), w), compose(u, compose(v, w)));
        const Entourage d = Entourage::diagonal(id_range(12));
        EXPECT_EQ(compose(d, u), u);
        EXPECT_EQ(compose(u, d), u);
    }
}

TEST(EntImage, Examples)
{
    const PointSet all = id_range(10);
    EXPECT_EQ(ent_image(Entourage::diagonal(all), PointSet{2, 5}), (PointSet{2, 5}));
    EXPECT_EQ(ent_image(path_entourage(10, 1), PointSet{5}), (PointSet{4, 5, 6}));
    EXPECT_EQ(ent_image(cycle_entourage(7, 2), PointSet{0, 1}), (PointSet{0, 1, 2, 3, 5, 6}));
}

TEST(EntImage, ComposesOnRandomTriples)
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const Entourage u = random_relation(rng, 12, 0.1), v = random_relation(rng, 12, 0.1);
        const PointSet a = random_subset(rng, 12, 0.3);
        EXPECT_EQ(ent_image(compose(u, v), a), ent_image(u, ent_image(v, a)));
        // oracle: {x' : (x', x) in U o V, x in A}
        std::set<oracle::Id> expect;
        for (auto [p, q] : oracle::compose(to_set(u), to_set(v)))
            if (contains(a, q))
                expect.insert(p);
        EXPECT_EQ(ent_image(compose(u, v), a), PointSet(expect.begin(), expect.end()));
    }
}

TEST(Thinning, Examples)
{
    const PointSet path = id_range(10);
    const PointSet b = {2, 3, 4, 5, 6, 7};
    EXPECT_EQ(thinning(Entourage::diagonal(path), b, path), b);
    EXPECT_EQ(thinning(path_entourage(10, 1), b, path), (PointSet{3, 4, 5, 6}));
    EXPECT_EQ(thinning(cycle_entourage(11, 2), PointSet{0, 1, 2, 3, 4, 5, 6}, id_range(11)), (PointSet{2, 3, 4}));
}

TEST(Thinning, AdjointToImage)
{
    std::mt19937_64 rng(2);
    const PointSet all = id_range(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Entourage u = unite(random_relation(rng, 12, 0.12), Entourage::diagonal(all));
        const PointSet b = random_subset(rng, 12, 0.6);
        const PointSet t = thinning(u, b, all);
        for (PointId x : all)
            EXPECT_EQ(is_subset(u.image_of(x), b), contains(t, x));
        EXPECT_TRUE(is_subset(ent_image(u, t), b));
    }
}

TEST(Bounded, Examples)
{
    EXPECT_TRUE(is_bounded(Entourage::diagonal(id_range(4)), PointSet{3}));
    EXPECT_FALSE(is_bounded(path_entourage(6, 2), PointSet{0, 3}));
}

TEST(Bounded, AllSubsetsOfShortPath)
{
    const Entourage u = path_entourage(6, 2);
    const auto ref = to_set(u);
    for (const auto& s : oracle::subsets({0, 1, 2, 3, 4, 5})) {
        PointSet ps(s.begin(), s.end());
        EXPECT_EQ(is_bounded(u, ps), oracle::bounded(ref, s));
    }
}

TEST(Lebesgue, Examples)
{
    const PointSet all = id_range(10);
    const CoverFamily w({{0, 1, 2, 3, 4}, {4, 5, 6, 7, 8, 9}});
    EXPECT_TRUE(is_lebesgue(Entourage::diagonal(all), w));
    EXPECT_TRUE(is_lebesgue(path_entourage(10, 1), w));
    auto res = check_lebesgue(path_entourage(10, 5), w);
    EXPECT_FALSE(res.ok);
    // the witness is bounded and sits in no part
    EXPECT_TRUE(is_bounded(path_entourage(10, 5), res.witness));
    for (const auto& p : w.parts())
        EXPECT_FALSE(is_subset(res.witness, p));
}

TEST(Lebesgue, CliquesMatchExhaustiveSearch)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> size(4, 14), parts(1, 5);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = size(rng);
        const Entourage u = random_relation(rng, n, 0.2);
        std::vector<PointSet> ps;
        const int k = parts(rng);
        for (int i = 0; i < k; ++i)
            ps.push_back(random_subset(rng, n, 0.5));
        const CoverFamily w(ps);
        std::vector<oracle::Id> pts(n);
        std::iota(pts.begin(), pts.end(), 0);
        EXPECT_EQ(is_lebesgue(u, w), oracle::lebesgue_exhaustive(to_set(u), pts, plain(w))) << "trial " << trial;
    }
}

TEST(Multiplicity, Examples)
{
    EXPECT_EQ(CoverFamily({{0, 1}, {2, 3}}).multiplicity(), 1u);
    EXPECT_EQ(CoverFamily({{0, 1, 2, 3, 4}, {4, 5, 6, 7, 8, 9}}).multiplicity(), 2u);
}

TEST(Multiplicity, RecountAndRestriction)
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PointSet> ps;
        for (int i = 0; i < 6; ++i)
            ps.push_back(random_subset(rng, 20, 0.3));
        const CoverFamily w(ps);
        EXPECT_EQ(w.multiplicity(), oracle::multiplicity(plain(w)));
        const PointSet s = random_subset(rng, 20, 0.5);
        EXPECT_LE(w.restricted_to(s).multiplicity(), w.multiplicity());
    }
}

TEST(Components, Examples)
{
    const FiniteCoarseSpace discrete(id_range(5), {{"d", Entourage::diagonal(id_range(5))}});
    EXPECT_EQ(coarse_components(discrete).size(), 5u);

    auto two = unite(cycle_entourage(5, 1), cycle_entourage(7, 1, 5));
    const FiniteCoarseSpace cycles(id_range(12), {{"U1", two}});
    const auto comps = coarse_components(cycles);
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_EQ(comps[0], id_range(5));
    EXPECT_EQ(comps[1], id_range(7, 5));
}

TEST(Components, TowerTargetOnePerSheet)
{
    const std::vector<std::int64_t> ns{5, 7, 9, 11};
    std::vector<Pair> pairs;
    PointId off = 0;
    for (auto n : ns) {
        auto p = cycle_entourage(n, 1, off).pairs();
        pairs.insert(pairs.end(), p.begin(), p.end());
        off += n;
    }
    const Entourage u(pairs);
    const FiniteCoarseSpace y(id_range(off), {{"U1", u}});
    const auto comps = coarse_components(y);
    std::vector<oracle::Id> pts(y.points().begin(), y.points().end());
    const auto ref = oracle::components(to_set(u), pts);
    ASSERT_EQ(comps.size(), ref.size());
    for (std::size_t i = 0; i < comps.size(); ++i)
        EXPECT_EQ(comps[i], PointSet(ref[i].begin(), ref[i].end()));
}

TEST(Restrict, Examples)
{
    const PointSet a = {1, 3};
    EXPECT_EQ(restrict_entourage(Entourage::diagonal(id_range(5)), a), Entourage::diagonal(a));
    EXPECT_TRUE(restrict_entourage(cycle_entourage(5, 1), {}).empty());
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Entourage v = random_relation(rng, 10, 0.3);
        const PointSet s = random_subset(rng, 10, 0.5);
        oracle::PairSet expect;
        for (auto [p, q] : to_set(v))
            if (contains(s, q))
                expect.insert({p, q});
        EXPECT_EQ(to_set(restrict_entourage(v, s)), expect);
    }
}

TEST(Space, RejectsDanglingPairs)
{
    EXPECT_THROW(FiniteCoarseSpace(id_range(3), {{"bad", Entourage({{0, 7}})}}), CoarseError);
    EXPECT_THROW(FiniteCoarseSpace({0, 0, 1}, {}), CoarseError);
}

TEST(Space, GeneratedDepth)
{
    const FiniteCoarseSpace c = cycle_space(20, {1});
    EXPECT_EQ(c.generated(3), cycle_entourage(20, 3));
    EXPECT_EQ(to_set(c.generated(2)), oracle::compose(oracle::cycle_pairs(20, 1), oracle::cycle_pairs(20, 1)));
}

TEST(MaximalBoundedSets, MatchPlainBronKerbosch)
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 40; ++trial) {
        const Entourage u = unite(random_relation(rng, 12, 0.3), Entourage::diagonal(random_subset(rng, 12, 0.8)));
        std::set<std::vector<oracle::Id>> got;
        for (const auto& c : maximal_bounded_sets(u))
            got.insert(std::vector<oracle::Id>(c.begin(), c.end()));
        std::vector<oracle::Id> pts(12);
        std::iota(pts.begin(), pts.end(), 0);
        const auto ref = oracle::maximal_cliques(to_set(u), pts);
        EXPECT_EQ(got, std::set<std::vector<oracle::Id>>(ref.begin(), ref.end()));
    }
}

TEST(Entourage, SymmetrizeAndInverse)
{
    const Entourage u({{0, 1}, {1, 2}});
    EXPECT_EQ(inverse(u), Entourage({{1, 0}, {2, 1}}));
    EXPECT_TRUE(is_symmetric(symmetrize(u)));
    EXPECT_FALSE(is_symmetric(u));
}
