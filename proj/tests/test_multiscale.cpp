#include <gtest/gtest.h>

#include "coarse/scenario.hpp"
#include "oracles.hpp"

using namespace coarse;

namespace {

/// Vertex sets of size <= max_dim + 1 whose elements are pairwise related.
std::set<PointSet> brute_rips(const oracle::PairSet& u, const std::vector<oracle::Id>& pts, int max_dim)
{
    std::set<PointSet> out;
    for (const auto& s : oracle::subsets(pts)) {
        if (static_cast<int>(s.size()) > max_dim + 1)
            continue;
        bool ok = true;
        for (auto a : s)
            for (auto b : s)
                ok = ok && (a == b || u.count({a, b}) || u.count({b, a}));
        if (ok)
            out.insert(PointSet(s.begin(), s.end()));
    }
    return out;
}

oracle::PairSet to_set(const Entourage& e)
{
    oracle::PairSet out;
    for (auto [a, b] : e.pairs())
        out.insert({a, b});
    return out;
}

std::vector<oracle::Id> ids(const PointSet& s) { return {s.begin(), s.end()}; }

} // namespace

TEST(Rips, Examples)
{
    const auto diag = rips_complex(id_range(4), Entourage::diagonal(id_range(4)), 3);
    EXPECT_EQ(diag.simplices.size(), 4u);
    EXPECT_EQ(diag.count(0), 4u);

    const auto path = rips_complex(id_range(4), path_entourage(4, 1), 3);
    EXPECT_EQ(path.count(0), 4u);
    EXPECT_EQ(path.count(1), 3u);
    EXPECT_EQ(path.count(2), 0u);
    EXPECT_TRUE(path.contains({1, 2}));
    EXPECT_FALSE(path.contains({0, 2}));
}

TEST(Rips, MatchesBruteForce)
{
    for (auto [n, r, d] : std::vector<std::tuple<int, int, int>>{{6, 2, 3}, {6, 1, 2}, {8, 2, 4}, {9, 3, 2}, {7, 3, 6}}) {
        const Entourage u = cycle_entourage(n, r);
        const auto cx = rips_complex(id_range(n), u, d);
        const std::set<PointSet> got(cx.simplices.begin(), cx.simplices.end());
        EXPECT_EQ(got.size(), cx.simplices.size());
        EXPECT_EQ(got, brute_rips(to_set(u), ids(id_range(n)), d)) << n << " " << r << " " << d;
    }
    // directed relations are symmetrized
    const auto one_way = rips_complex(id_range(3), Entourage({{0, 1}, {1, 2}, {2, 0}}), 2);
    EXPECT_TRUE(one_way.contains({0, 1, 2}));
}

TEST(Rips, CyclicSixAtScaleTwo)
{
    const auto cx = rips_complex(id_range(6), cycle_entourage(6, 2), 5);
    EXPECT_EQ(cx.count(0), 6u);
    EXPECT_EQ(cx.count(1), 12u);
    // triangles: 6 consecutive triples and the two of alternating points
    EXPECT_EQ(cx.count(2), 8u);
    EXPECT_EQ(cx.count(3), 0u);
}

TEST(Rips, RejectsNegativeDimension)
{
    EXPECT_THROW(rips_complex(id_range(3), path_entourage(3, 1), -1), CoarseError);
}

TEST(RipsLift, TowerMatchesDirectCount)
{
    for (auto [m, ns] : std::vector<std::pair<int, std::vector<std::int64_t>>>{
             {2, {5, 7, 9, 11}}, {3, {4, 6, 9}}, {2, {3, 6, 13}}}) {
        const Tower t = tower(m, ns);
        const oracle::TowerShape shape{m, ns};
        for (std::int64_t r : {1, 2, 3})
            for (int d : {1, 2, 3}) {
                const std::string name = "U" + std::to_string(r);
                const auto rep = rips_lift_check(t.covering, t.covering.source().entourage(name), d, name);
                const int expect = shape.rips_lift_index(r, d);
                const Check* c = rep.find("rips-lift", name);
                ASSERT_NE(c, nullptr);
                if (expect == static_cast<int>(ns.size()) - 1) {
                    EXPECT_FALSE(c->pass) << m << " r=" << r << " d=" << d;
                } else {
                    ASSERT_TRUE(c->pass) << m << " r=" << r << " d=" << d;
                    EXPECT_EQ(c->z_index, expect) << m << " r=" << r << " d=" << d;
                }
            }
    }
}

TEST(RipsLift, IndexAtLeastEdgeIndex)
{
    const Tower t = tower(2, {5, 7, 9, 11, 13});
    const auto rep = verify_branched_covering(t.covering);
    for (std::int64_t r : {1, 2, 3}) {
        const std::string name = "U" + std::to_string(r);
        const auto rips = rips_lift_check(t.covering, t.covering.source().entourage(name), 1, name);
        ASSERT_TRUE(rips.find("rips-lift")->pass);
        EXPECT_GE(*rips.find("rips-lift")->z_index, *rep.minimal_index(name)) << r;
    }
}

TEST(ConeModel, PairCountsMatchDefinition)
{
    const auto base = cycle_space(8, {1, 2});
    const std::vector<Entourage> schedule{cycle_entourage(8, 2), cycle_entourage(8, 1), cycle_entourage(8, 1),
                                          Entourage::diagonal(id_range(8))};
    const auto m = cone_model(base, schedule);
    EXPECT_EQ(m.levels, 4);
    EXPECT_EQ(m.space.size(), 32u);
    for (std::string name : {"U1", "U2"}) {
        const Entourage b = base.entourage(name);
        std::vector<std::size_t> expect(4, 0);
        for (int t = 0; t < 4; ++t)
            for (int tp = 0; tp < 4; ++tp)
                if (std::abs(t - tp) <= 1)
                    for (PointId y = 0; y < 8; ++y)
                        for (PointId yp = 0; yp < 8; ++yp)
                            if (b.contains(yp, y) && schedule[std::min(t, tp)].contains(yp, y))
                                ++expect[std::min(t, tp)];
        EXPECT_EQ(pairs_per_level(m, name), expect) << name;
    }
    // within-level structure shrinks up the cone
    const auto u2 = m.space.entourage("U2");
    std::size_t prev = SIZE_MAX;
    for (int t = 0; t < 4; ++t) {
        std::size_t here = 0;
        for (const auto& [a, b] : u2.pairs())
            here += m.level_of(a) == t && m.level_of(b) == t;
        EXPECT_LE(here, prev);
        prev = here;
    }
    EXPECT_EQ(m.family.size(), 4u);
    EXPECT_EQ(m.family[2].subset, m.levels_between(0, 1));
}

TEST(ConeModel, RejectsIncreasingSchedule)
{
    const auto base = cycle_space(8, {1, 2});
    EXPECT_THROW(cone_model(base, {cycle_entourage(8, 1), cycle_entourage(8, 2)}), CoarseError);
    EXPECT_THROW(cone_model(base, {}), CoarseError);
}

TEST(SqueezeModel, CopiesCarryTheSchedule)
{
    const auto base = path_space(10, {1, 3});
    const std::vector<Entourage> schedule{path_entourage(10, 3), path_entourage(10, 2), path_entourage(10, 1),
                                          path_entourage(10, 0)};
    const auto m = squeeze_model(base, 4, schedule);
    EXPECT_EQ(m.space.size(), 40u);
    const auto counts = pairs_per_level(m, "U3");
    for (int n = 0; n < 4; ++n)
        EXPECT_EQ(counts[n], intersect(base.entourage("U3"), schedule[n]).size());
    EXPECT_TRUE(std::is_sorted(counts.rbegin(), counts.rend()));
    EXPECT_EQ(counts[3], 10u);
    EXPECT_EQ(coarse_components(m.space).size(), 3u + 10u);
    EXPECT_THROW(squeeze_model(base, 3, schedule), CoarseError);
}

TEST(ConeCovering, FineScheduleVerifies)
{
    const Tower t = tower(2, {5, 7});
    const std::vector<Entourage> schedule{t.scale(2), t.scale(1), t.scale(1), t.scale(1)};
    const auto cc = cone_covering(t.covering, schedule);
    EXPECT_EQ(cc.covering.source().size(), 4 * t.covering.source().size());
    const auto rep = verify_branched_covering(cc.covering);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_TRUE(verify_G_covering(cc.covering).all_pass());
    const auto uni = uniform_covering_check(t.covering, schedule);
    EXPECT_TRUE(uni.all_pass());
    EXPECT_EQ(uni.measurement("weakest-level"), -1.0);
}

TEST(ConeCovering, CoarseBottomIsAbsorbedByTheFamily)
{
    const Tower t = tower(2, {4, 7});
    const std::vector<Entourage> schedule{t.scale(2), t.scale(1), t.scale(1), t.scale(1)};
    const auto uni = uniform_covering_check(t.covering, schedule);
    EXPECT_FALSE(uni.find("uniform-level", "0")->pass);
    EXPECT_TRUE(uni.find("precondition")->pass);
    EXPECT_EQ(uni.measurement("weakest-level"), 0.0);
    const auto rep = verify_branched_covering(cone_covering(t.covering, schedule).covering);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_GE(*rep.minimal_index("U2"), 0);
}

TEST(ConeCovering, CoarseTopFails)
{
    const Tower t = tower(2, {4, 7});
    const std::vector<Entourage> schedule{t.scale(2), t.scale(2), t.scale(2), t.scale(2)};
    const auto uni = uniform_covering_check(t.covering, schedule);
    EXPECT_FALSE(uni.find("precondition")->pass);
    EXPECT_EQ(uni.measurement("weakest-level"), 3.0);
    const auto rep = verify_branched_covering(cone_covering(t.covering, schedule).covering);
    EXPECT_FALSE(rep.all_pass());
    EXPECT_FALSE(rep.find("3a.i", "U2")->pass);
}
