#pragma once

// Rips complexes, level-discretized cones and squeezing spaces, and the
// induced coverings between cones.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coarse/covering.hpp"

namespace coarse {

struct SimplicialComplex {
    PointSet vertices;
    std::vector<PointSet> simplices; // nonempty, sorted by size then lexicographically
    int max_dim = 0;

    bool contains(const PointSet& s) const { return std::binary_search(simplices.begin(), simplices.end(), s, order); }

    std::size_t count(int dim) const
    {
        return static_cast<std::size_t>(std::count_if(simplices.begin(), simplices.end(), [&](const PointSet& s) {
            return static_cast<int>(s.size()) == dim + 1;
        }));
    }

    static bool order(const PointSet& a, const PointSet& b)
    {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    }

    friend bool operator==(const SimplicialComplex&, const SimplicialComplex&) = default;
};

/// Simplices are the vertex sets of size <= max_dim+1 whose 2-subsets are
/// related by the symmetrization of U.
inline SimplicialComplex rips_complex(const PointSet& vertices, const Entourage& u, int max_dim,
                                      std::size_t cap = kDefaultCliqueCap)
{
    if (max_dim < 0)
        fail(ErrorKind::Input, "max_dim must be non-negative");
    const Entourage us = symmetrize(u);
    SimplicialComplex out;
    out.vertices = vertices;
    out.max_dim = max_dim;
    std::map<PointId, PointSet> up; // neighbours with larger id
    for (PointId v : vertices) {
        PointSet n;
        for (PointId w : us.preimage_of(v))
            if (w > v && contains(vertices, w))
                n.push_back(w);
        up[v] = std::move(n);
    }
    std::vector<PointId> current;
    std::function<void(const PointSet&)> extend = [&](const PointSet& candidates) {
        if (out.simplices.size() >= cap)
            fail(ErrorKind::CapExceeded, "more than " + std::to_string(cap) + " simplices");
        out.simplices.push_back(current);
        if (static_cast<int>(current.size()) == max_dim + 1)
            return;
        for (PointId w : candidates) {
            current.push_back(w);
            extend(set_intersection(candidates, up[w]));
            current.pop_back();
        }
    };
    for (PointId v : vertices) {
        current = {v};
        extend(up[v]);
    }
    std::sort(out.simplices.begin(), out.simplices.end(), SimplicialComplex::order);
    return out;
}

inline SimplicialComplex rips_complex(const FiniteCoarseSpace& space, const Entourage& u, int max_dim,
                                      std::size_t cap = kDefaultCliqueCap)
{
    space.check_entourage(u, "Rips scale");
    return rips_complex(space.points(), u, max_dim, cap);
}

/// Minimal member over whose complement every simplex of P_{f(U)}(Z^c) has,
/// for each choice of a vertex lift, exactly one lift in P_U(f^{-1}(Z^c)).
inline VerificationReport rips_lift_check(const BranchedCovering& cov, const Entourage& u, int max_dim,
                                          const std::string& scale = "", const VerifyOptions& opts = {})
{
    VerificationReport rep;
    rep.subject = "rips-lift";
    rep.depth = opts.depth;
    const Entourage v = cov.image(u);
    const Entourage us = symmetrize(u);
    const SimplicialComplex ycx = rips_complex(cov.target().points(), v, max_dim);

    auto defect_at = [&](std::size_t pos) -> Defect {
        const PointSet zc = cov.target_complement(pos);
        for (const auto& sigma : ycx.simplices) {
            if (sigma.size() < 2 || !is_subset(sigma, zc))
                continue;
            for (PointId v0 : sigma)
                for (PointId x0 : cov.fibre(v0)) {
                    if (!detail::in_mask(opts, x0))
                        continue;
                    // Count lifts of sigma through x0, stopping at two.
                    std::vector<PointId> others;
                    for (PointId w : sigma)
                        if (w != v0)
                            others.push_back(w);
                    std::vector<PointId> chosen{x0};
                    std::size_t found = 0;
                    std::function<void(std::size_t)> go = [&](std::size_t i) {
                        if (found >= 2)
                            return;
                        if (i == others.size()) {
                            ++found;
                            return;
                        }
                        for (PointId c : cov.fibre(others[i])) {
                            bool ok = std::all_of(chosen.begin(), chosen.end(),
                                                  [&](PointId p) { return us.contains(c, p); });
                            if (!ok)
                                continue;
                            chosen.push_back(c);
                            go(i + 1);
                            chosen.pop_back();
                        }
                    };
                    go(0);
                    if (found != 1) {
                        Defect d;
                        d.witnesses.emplace_back(x0, static_cast<PointId>(found));
                        for (PointId w : sigma)
                            d.witnesses.emplace_back(w, w);
                        d.detail = "simplex with " + std::to_string(sigma.size()) + " vertices has " +
                                   (found == 0 ? "no lift" : "several lifts") + " through " + std::to_string(x0);
                        return d;
                    }
                }
        }
        return {};
    };
    auto s = first_member(cov, defect_at);
    rep.add(index_check(cov, "rips-lift", scale, s));
    rep.measure("simplices", static_cast<double>(ycx.simplices.size()));
    return rep;
}

// --- level models ------------------------------------------------------------

/// One entourage of a level model: height window and the base generator it uses.
struct ScaleSpec {
    std::string name;
    int height = 1;
    std::string base;
};

/// A space whose points are (level, base point), encoded as level*stride + base.
struct MultiscaleModel {
    FiniteCoarseSpace space;
    BigFamily family;
    int levels = 0;
    PointId stride = 1;

    int level_of(PointId x) const { return static_cast<int>(x / stride); }
    PointId base_of(PointId x) const { return x % stride; }
    PointId id(int level, PointId base) const { return level * stride + base; }

    PointSet levels_between(int lo, int hi) const
    {
        PointSet out;
        for (PointId x : space.points())
            if (level_of(x) >= lo && level_of(x) <= hi)
                out.push_back(x);
        return out;
    }
};

namespace detail {

inline PointId stride_for(const FiniteCoarseSpace& base)
{
    if (base.size() == 0)
        return 1;
    if (base.points().front() < 0)
        fail(ErrorKind::Input, "level models need non-negative base ids");
    return base.points().back() + 1;
}

inline void check_schedule(const FiniteCoarseSpace& base, const std::vector<Entourage>& schedule)
{
    if (schedule.empty())
        fail(ErrorKind::Input, "schedule needs at least one level");
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        base.check_entourage(schedule[t], "schedule level " + std::to_string(t));
        if (t > 0 && !schedule[t].subset_of(schedule[t - 1]))
            fail(ErrorKind::Input, "schedule is not non-increasing at level " + std::to_string(t));
    }
}

inline std::vector<ScaleSpec> default_scales(const FiniteCoarseSpace& base)
{
    std::vector<ScaleSpec> out;
    for (const auto& e : base.entourages())
        out.push_back({e.name, 1, e.name});
    return out;
}

inline BigFamily lower_levels_family(const MultiscaleModel& m)
{
    std::vector<BigFamilyMember> members{{-1, {}}};
    for (int n = 0; n + 1 < m.levels; ++n)
        members.push_back({n, m.levels_between(0, n)});
    return BigFamily(std::move(members));
}

} // namespace detail

/// Levels {0..T} x Y; the scale-s entourage relates (t', y') and (t, y) when
/// |t'-t| <= height, (y', y) is in the base generator and in delta(min(t, t')).
/// The family is ({t <= n} x Y) for n = -1..T-1.
inline MultiscaleModel cone_model(const FiniteCoarseSpace& base, const std::vector<Entourage>& schedule,
                                  std::vector<ScaleSpec> scales = {})
{
    detail::check_schedule(base, schedule);
    if (scales.empty())
        scales = detail::default_scales(base);
    MultiscaleModel m;
    m.levels = static_cast<int>(schedule.size());
    m.stride = detail::stride_for(base);
    std::vector<PointId> ids;
    for (int t = 0; t < m.levels; ++t)
        for (PointId y : base.points())
            ids.push_back(m.id(t, y));
    std::vector<NamedEntourage> gens;
    for (const auto& s : scales) {
        if (s.height < 0)
            fail(ErrorKind::Input, "scale heights must be non-negative");
        const Entourage b = base.entourage(s.base);
        std::vector<Pair> pairs;
        for (int t = 0; t < m.levels; ++t)
            for (int tp = std::max(0, t - s.height); tp <= std::min(m.levels - 1, t + s.height); ++tp) {
                const Entourage& d = schedule[std::min(t, tp)];
                for (const auto& [yp, y] : b.pairs())
                    if (d.contains(yp, y))
                        pairs.emplace_back(m.id(tp, yp), m.id(t, y));
            }
        gens.push_back({s.name, Entourage(std::move(pairs))});
    }
    m.space = FiniteCoarseSpace(std::move(ids), std::move(gens));
    m.family = detail::lower_levels_family(m);
    return m;
}

/// N disjoint copies of the base; on copy n the scale-s entourage is the base
/// generator intersected with delta(n). The family is the union of copies <= n.
inline MultiscaleModel squeeze_model(const FiniteCoarseSpace& base, int copies, const std::vector<Entourage>& schedule,
                                     std::vector<std::string> scale_names = {})
{
    if (copies < 1 || static_cast<int>(schedule.size()) != copies)
        fail(ErrorKind::Input, "squeeze model needs one schedule entry per copy");
    detail::check_schedule(base, schedule);
    if (scale_names.empty())
        for (const auto& e : base.entourages())
            scale_names.push_back(e.name);
    MultiscaleModel m;
    m.levels = copies;
    m.stride = detail::stride_for(base);
    std::vector<PointId> ids;
    for (int n = 0; n < copies; ++n)
        for (PointId y : base.points())
            ids.push_back(m.id(n, y));
    std::vector<NamedEntourage> gens;
    for (const auto& name : scale_names) {
        const Entourage b = base.entourage(name);
        std::vector<Pair> pairs;
        for (int n = 0; n < copies; ++n) {
            const Entourage level = intersect(b, schedule[n]);
            for (const auto& [yp, y] : level.pairs())
                pairs.emplace_back(m.id(n, yp), m.id(n, y));
        }
        gens.push_back({name, Entourage(std::move(pairs))});
    }
    m.space = FiniteCoarseSpace(std::move(ids), std::move(gens));
    m.family = detail::lower_levels_family(m);
    return m;
}

/// Number of pairs of the named entourage whose lower level is t, per t.
inline std::vector<std::size_t> pairs_per_level(const MultiscaleModel& m, const std::string& name)
{
    std::vector<std::size_t> out(m.levels, 0);
    const Entourage e = m.space.entourage(name);
    for (const auto& [a, b] : e.pairs())
        ++out[std::min(m.level_of(a), m.level_of(b))];
    return out;
}

struct ConeCovering {
    BranchedCovering covering;
    MultiscaleModel source;
    MultiscaleModel target;
};

/// The covering of cones induced by f: X -> Y with target schedule delta and
/// source schedule f^{-1}(delta(t)) cap P; the connection is all level pairs x P.
inline ConeCovering cone_covering(const BranchedCovering& cov, const std::vector<Entourage>& schedule,
                                  std::vector<ScaleSpec> scales = {})
{
    if (scales.empty())
        scales = detail::default_scales(cov.target());
    for (const auto& s : scales)
        if (!cov.source().has_entourage(s.base))
            fail(ErrorKind::Input, "source has no generator named " + s.base);
    std::vector<Entourage> xs;
    for (const auto& d : schedule)
        xs.push_back(intersect(cov.preimage(d), cov.connection()));
    ConeCovering out;
    out.target = cone_model(cov.target(), schedule, scales);
    out.source = cone_model(cov.source(), xs, scales);
    const auto& sx = out.source;
    const auto& sy = out.target;
    std::map<PointId, PointId> f;
    for (PointId x : sx.space.points())
        f.emplace(x, sy.id(sx.level_of(x), cov(sx.base_of(x))));
    std::vector<Pair> p;
    for (int t = 0; t < sx.levels; ++t)
        for (int tp = 0; tp < sx.levels; ++tp)
            for (const auto& [a, b] : cov.connection().pairs())
                p.emplace_back(sx.id(tp, a), sx.id(t, b));
    std::optional<GroupAction> deck;
    if (cov.deck()) {
        std::vector<std::map<PointId, PointId>> perms;
        for (int g = 0; g < cov.deck()->group().size(); ++g) {
            std::map<PointId, PointId> perm;
            for (PointId x : sx.space.points())
                perm.emplace(x, sx.id(sx.level_of(x), cov.deck()->act(g, sx.base_of(x))));
            perms.push_back(std::move(perm));
        }
        deck = GroupAction(cov.deck()->group(), std::move(perms), sx.space.points());
    }
    out.covering = BranchedCovering(sx.space, sy.space, std::move(f), Entourage(std::move(p)), sy.family,
                                    std::move(deck));
    return out;
}

/// Per-level unique lifting for the schedule (checked on the complement of the
/// covering's first member). Reports each level, the highest failing level as
/// "weakest-level", and passes when the levels above it leave room for
/// `max_height` steps below the top.
inline VerificationReport uniform_covering_check(const BranchedCovering& cov, const std::vector<Entourage>& schedule,
                                                 int max_height = 1, const VerifyOptions& opts = {})
{
    VerificationReport rep;
    rep.subject = "uniform-covering";
    int weakest = -1;
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        Defect d = lift_defect(cov, schedule[t], 0, opts);
        Check c{"uniform-level", std::to_string(t), std::nullopt, d.empty(), d.witnesses, d.detail};
        if (!d.empty())
            weakest = static_cast<int>(t);
        rep.add(std::move(c));
    }
    const int top = static_cast<int>(schedule.size()) - 1;
    rep.measure("weakest-level", weakest);
    // The top member leaves only level T; a failing level l spoils right
    // points up to level l + height.
    const bool room = weakest < 0 || weakest + max_height < top;
    rep.add({"precondition", "", std::nullopt, room, {}, room ? "" : "failing levels reach the top of the cone"});
    return rep;
}

} // namespace coarse
