#pragma once

// Dimension-at-scale certificates: search, verification, thinning
// partitions, lifting along coverings and hybrid assembly.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coarse/covering.hpp"
#include "coarse/multiscale.hpp"

namespace coarse {

struct DimensionCertificate {
    std::string scale_name;
    Entourage scale;
    CoverFamily cover;
    int dimension = 0; // multiplicity - 1
    int depth = 3;

    friend bool operator==(const DimensionCertificate& a, const DimensionCertificate& b)
    {
        return a.scale_name == b.scale_name && a.scale == b.scale && a.cover == b.cover &&
               a.dimension == b.dimension && a.depth == b.depth;
    }
};

enum class SearchStrategy { Greedy, Sweep, Exact };

struct SearchOptions {
    int depth = 3;
    std::size_t exact_max_points = 14;
    std::size_t exact_node_budget = std::size_t{1} << 24;
    std::function<bool(const CoverFamily&)> accept; // extra condition on candidates (per component for Sweep)
};

namespace detail {

inline Entourage closed_scale(const FiniteCoarseSpace& space, const Entourage& u)
{
    return symmetrize(unite(u, space.diagonal()));
}

/// Lowest-id-first tiling: cores are rho-hop balls that only step to larger
/// unassigned ids; each part is its core plus the U-neighbours sitting in later
/// (forward) or earlier (backward) cores.
inline CoverFamily greedy_cover(const FiniteCoarseSpace& space, const Entourage& us, int rho, bool forward)
{
    std::map<PointId, int> core_of;
    std::vector<PointSet> cores;
    for (PointId a : space.points()) {
        if (core_of.count(a))
            continue;
        const int idx = static_cast<int>(cores.size());
        PointSet core{a};
        core_of[a] = idx;
        PointSet frontier{a};
        for (int hop = 0; hop < rho; ++hop) {
            std::vector<PointId> next;
            for (PointId p : frontier)
                for (PointId q : us.preimage_of(p))
                    if (q > p && !core_of.count(q)) {
                        core_of[q] = idx;
                        next.push_back(q);
                    }
            frontier = make_point_set(std::move(next));
            core = set_union(core, frontier);
        }
        cores.push_back(std::move(core));
    }
    std::vector<PointSet> parts;
    for (std::size_t i = 0; i < cores.size(); ++i) {
        std::vector<PointId> part(cores[i].begin(), cores[i].end());
        for (PointId q : ent_image(us, cores[i])) {
            int c = core_of.at(q);
            if (forward ? c > static_cast<int>(i) : c < static_cast<int>(i))
                part.push_back(q);
        }
        parts.push_back(make_point_set(std::move(part)));
    }
    return CoverFamily(std::move(parts));
}

/// Components of the U-graph, each listed in depth-first order (lowest id
/// first, smallest unvisited neighbour first).
inline std::vector<std::vector<PointId>> dfs_orders(const FiniteCoarseSpace& space, const Entourage& us)
{
    std::vector<std::vector<PointId>> out;
    std::map<PointId, bool> seen;
    for (PointId root : space.points()) {
        if (seen[root])
            continue;
        std::vector<PointId> order;
        std::vector<PointId> stack{root};
        while (!stack.empty()) {
            PointId p = stack.back();
            stack.pop_back();
            if (seen[p])
                continue;
            seen[p] = true;
            order.push_back(p);
            const PointSet nb = set_union(us.image_of(p), us.preimage_of(p));
            for (auto it = nb.rbegin(); it != nb.rend(); ++it)
                if (!seen[*it])
                    stack.push_back(*it);
        }
        out.push_back(std::move(order));
    }
    return out;
}

/// Cuts `order` into k nearly equal consecutive blocks and widens each by the
/// next e points. Wraps around only when the order closes up under U.
inline CoverFamily sweep_cover(const std::vector<PointId>& order, const Entourage& us, std::size_t k, std::size_t e)
{
    const std::size_t n = order.size();
    const bool cyclic = n > 2 && (us.contains(order.back(), order.front()) || us.contains(order.front(), order.back()));
    std::vector<PointSet> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t len = n / k + (i < n % k ? 1 : 0);
        std::vector<PointId> part;
        const std::size_t stop = std::min(start + len + e, cyclic ? start + n : n);
        for (std::size_t j = start; j < stop; ++j)
            part.push_back(order[j % n]);
        parts.push_back(make_point_set(std::move(part)));
        start += len;
    }
    return CoverFamily(std::move(parts));
}

inline bool bound_allowed(const CoverFamily& w, const Entourage& g)
{
    for (const auto& part : w.parts())
        if (!is_bounded(g, part))
            return false;
    return true;
}

struct ExactSearch {
    std::vector<PointSet> cliques;
    const Entourage* allowed = nullptr;
    std::size_t k = 1;
    std::size_t budget = 0;
    std::size_t nodes = 0;
    std::vector<PointSet> groups;
    std::map<PointId, std::size_t> count;

    bool run(std::size_t i)
    {
        if (++nodes > budget)
            fail(ErrorKind::CapExceeded, "exact cover search exceeded its node budget");
        if (i == cliques.size())
            return true;
        const PointSet& c = cliques[i];
        for (std::size_t g = 0; g <= groups.size(); ++g) {
            const bool fresh = g == groups.size();
            PointSet base = fresh ? PointSet{} : groups[g];
            PointSet added = set_difference(c, base);
            bool ok = true;
            for (PointId x : added) {
                if (count[x] + 1 > k) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                for (PointId x : added) {
                    for (PointId y : base)
                        if (!allowed->contains(x, y) || !allowed->contains(y, x)) {
                            ok = false;
                            break;
                        }
                    if (!ok)
                        break;
                    for (PointId y : added)
                        if (!allowed->contains(x, y)) {
                            ok = false;
                            break;
                        }
                    if (!ok)
                        break;
                }
            if (!ok)
                continue;
            if (fresh)
                groups.push_back({});
            PointSet saved = groups[g];
            groups[g] = set_union(groups[g], c);
            for (PointId x : added)
                ++count[x];
            if (run(i + 1))
                return true;
            for (PointId x : added)
                --count[x];
            groups[g] = saved;
            if (fresh)
                groups.pop_back();
        }
        return false;
    }
};

} // namespace detail

/// A cover with Lebesgue entourage U, bound inside the depth-bounded
/// structure and multiplicity <= max_mult, or nothing.
inline std::optional<DimensionCertificate> dimension_at_scale(const FiniteCoarseSpace& space, const Entourage& u,
                                                              std::size_t max_mult, SearchStrategy strategy,
                                                              const SearchOptions& opts = {},
                                                              const std::string& scale_name = "")
{
    if (max_mult < 1)
        fail(ErrorKind::Input, "max_mult must be at least 1");
    space.check_entourage(u, "scale");
    const Entourage us = detail::closed_scale(space, u);
    const Entourage allowed = space.generated(opts.depth);
    auto certify = [&](CoverFamily w) {
        DimensionCertificate c;
        c.scale_name = scale_name;
        c.scale = u;
        c.dimension = static_cast<int>(w.multiplicity()) - 1;
        c.depth = opts.depth;
        c.cover = CoverFamily(w.parts(), u);
        return c;
    };
    if (strategy == SearchStrategy::Greedy) {
        const int rho_max = std::max<int>(1, static_cast<int>(space.size()));
        for (int rho = 1; rho <= rho_max; ++rho)
            for (bool forward : {true, false}) {
                CoverFamily w = detail::greedy_cover(space, us, rho, forward);
                if (w.multiplicity() <= max_mult && detail::bound_allowed(w, allowed) && is_lebesgue(us, w) &&
                    (!opts.accept || opts.accept(w)))
                    return certify(std::move(w));
            }
        return std::nullopt;
    }
    if (strategy == SearchStrategy::Sweep) {
        std::vector<PointSet> parts;
        for (const auto& order : detail::dfs_orders(space, us)) {
            const Entourage local = restrict_both(us, make_point_set(order));
            bool found = false;
            for (std::size_t k = 1; k <= order.size() && !found; ++k)
                for (std::size_t e = 0; e <= order.size() / k && !found; ++e) {
                    CoverFamily w = detail::sweep_cover(order, us, k, e);
                    if (w.multiplicity() <= max_mult && detail::bound_allowed(w, allowed) && is_lebesgue(local, w) &&
                        (!opts.accept || opts.accept(w))) {
                        parts.insert(parts.end(), w.parts().begin(), w.parts().end());
                        found = true;
                    }
                }
            if (!found)
                return std::nullopt;
        }
        return certify(CoverFamily(std::move(parts)));
    }
    if (space.size() > opts.exact_max_points)
        fail(ErrorKind::CapExceeded, "exact search is limited to " + std::to_string(opts.exact_max_points) + " points");
    detail::ExactSearch search;
    search.cliques = maximal_bounded_sets(us);
    search.allowed = &allowed;
    search.budget = opts.exact_node_budget;
    for (const auto& c : search.cliques)
        if (!is_bounded(allowed, c))
            return std::nullopt; // a bounded set that no admissible part can hold
    for (std::size_t k = 1; k <= max_mult; ++k) {
        search.k = k;
        search.groups.clear();
        search.count.clear();
        if (search.run(0))
            return certify(CoverFamily(search.groups));
    }
    return std::nullopt;
}

/// Re-checks a certificate from scratch: Lebesgue, bound, covering, multiplicity.
inline VerificationReport verify_certificate(const FiniteCoarseSpace& space, const DimensionCertificate& cert)
{
    VerificationReport rep;
    rep.subject = "dimension-certificate";
    rep.depth = cert.depth;
    {
        auto leb = check_lebesgue(symmetrize(unite(cert.scale, space.diagonal())), cert.cover);
        Check c{"lebesgue", cert.scale_name, std::nullopt, leb.ok, {}, ""};
        if (!leb.ok) {
            for (PointId x : leb.witness)
                c.witnesses.emplace_back(x, x);
            c.detail = "a bounded set of size " + std::to_string(leb.witness.size()) + " lies in no part";
        }
        rep.add(std::move(c));
    }
    {
        const Entourage allowed = space.generated(cert.depth);
        auto missing = cert.cover.bound().missing_from(allowed);
        Check c{"bound", cert.scale_name, std::nullopt, missing.empty(), {}, ""};
        if (!missing.empty()) {
            c.witnesses.push_back(missing.front());
            c.detail = "bound leaves the depth-" + std::to_string(cert.depth) + " structure";
        }
        rep.add(std::move(c));
    }
    {
        auto uncovered = set_difference(space.points(), cert.cover.union_of_parts());
        Check c{"covers", cert.scale_name, std::nullopt, uncovered.empty(), {}, ""};
        if (!uncovered.empty()) {
            c.witnesses.emplace_back(uncovered.front(), uncovered.front());
            c.detail = "point not covered";
        }
        rep.add(std::move(c));
    }
    {
        const int mult = static_cast<int>(cert.cover.multiplicity());
        rep.add({"multiplicity", cert.scale_name, std::nullopt, mult == cert.dimension + 1, {},
                 "multiplicity " + std::to_string(mult)});
    }
    return rep;
}

/// Partition with W^_i inside the U-thinning of W_i, each point going to the
/// lowest-index part whose thinning contains it. Indices stay aligned.
inline CoverFamily build_partition(const FiniteCoarseSpace& space, const CoverFamily& cover, const Entourage& u,
                                   std::optional<PointSet> region = std::nullopt)
{
    const PointSet pts = region ? *region : space.points();
    std::vector<PointSet> parts(cover.size());
    for (PointId x : pts) {
        const PointSet ball = u.image_of(x);
        bool placed = false;
        for (std::size_t i = 0; i < cover.size() && !placed; ++i)
            if (is_subset(ball, cover.parts()[i])) {
                parts[i].push_back(x);
                placed = true;
            }
        if (!placed)
            fail(ErrorKind::ThinningsDoNotCover, "point " + std::to_string(x) + " lies in no thinning");
    }
    return CoverFamily(std::move(parts));
}

// --- lifting covers along coverings ---------------------------------------------

struct LiftedCover {
    CoverFamily cover;
    int z_index = 0;
    PointSet region;                // f^{-1}(Z^c)
    std::vector<PointId> basepoints; // one per nonempty restricted part of W
    VerificationReport report;
};

/// Transports each part of W (restricted to Z^c) from its lowest-id basepoint
/// into every sheet over it. Z is the first member where transport is unique
/// at scales V, bd(W) and V o bd(W), U_{f^{-1}(Z^c)} lies in P, and the
/// transports from a basepoint are pairwise P-related along V.
inline LiftedCover lift_cover(const BranchedCovering& cov, const CoverFamily& w, const Entourage& v,
                              const Entourage& u, const VerifyOptions& opts = {})
{
    if (!cov.image(u).subset_of(v))
        fail(ErrorKind::Hypothesis, "f(U) is not contained in V");

    auto restricted = [&](std::size_t pos) { return w.restricted_to(cov.target_complement(pos)).without_empty_parts(); };

    auto flatness = [&](const CoverFamily& wr) -> Defect {
        for (const auto& part : wr.parts()) {
            const PointId b = part.front();
            for (PointId x : cov.fibre(b)) {
                std::map<PointId, PointId> t;
                for (PointId yp : part) {
                    auto l = cov.lifts(yp, x);
                    if (l.size() != 1)
                        return Defect{{{yp, b}, {x, static_cast<PointId>(l.size())}}, "transport from basepoint fails"};
                    t[yp] = l.front();
                }
                for (PointId y1 : part)
                    for (PointId y2 : part)
                        if (v.contains(y2, y1) && !cov.connection().contains(t[y2], t[y1]))
                            return Defect{{{t[y2], t[y1]}}, "transports from one basepoint are not P-related"};
            }
        }
        return {};
    };

    auto s = first_member(cov, [&](std::size_t pos) -> Defect {
        const CoverFamily wr = restricted(pos);
        const Entourage bd = wr.bound();
        for (const Entourage* e : {&v, &bd}) {
            Defect d = lift_defect(cov, *e, pos, opts);
            if (!d.empty())
                return d;
        }
        Defect d = lift_defect(cov, compose(v, bd), pos, opts);
        if (!d.empty())
            return d;
        d = connection_defect(cov, u, pos, opts);
        if (!d.empty())
            return d;
        return flatness(wr);
    });
    if (!s.position)
        fail(ErrorKind::NoAdmissibleIndex, "no member admits the cover lift: " + s.last_defect.detail);

    const std::size_t pos = *s.position;
    LiftedCover out;
    out.z_index = cov.label(pos);
    out.region = cov.source_complement(pos);
    const CoverFamily wr = restricted(pos);
    std::vector<PointSet> parts;
    for (const auto& part : wr.parts()) {
        const PointId b = part.front();
        out.basepoints.push_back(b);
        for (PointId x : cov.fibre(b)) {
            PointSet lifted;
            for (PointId yp : part)
                lifted.push_back(cov.lifts(yp, x).front());
            parts.push_back(make_point_set(std::move(lifted)));
        }
    }
    out.cover = CoverFamily(std::move(parts));

    auto& rep = out.report;
    rep.subject = "lift-cover";
    rep.depth = opts.depth;
    rep.add({"multiplicity", "", out.z_index, out.cover.multiplicity() <= wr.multiplicity(), {},
             std::to_string(out.cover.multiplicity()) + " <= " + std::to_string(wr.multiplicity())});
    {
        auto leb = check_lebesgue(restrict_both(symmetrize(u), out.region), out.cover);
        Check c{"lebesgue", "", out.z_index, leb.ok, {}, ""};
        for (PointId x : leb.witness)
            c.witnesses.emplace_back(x, x);
        rep.add(std::move(c));
    }
    {
        auto uncovered = set_difference(out.region, out.cover.union_of_parts());
        Check c{"covers", "", out.z_index, uncovered.empty(), {}, ""};
        for (PointId x : uncovered)
            c.witnesses.emplace_back(x, x);
        rep.add(std::move(c));
    }
    rep.measure("source-multiplicity", static_cast<double>(wr.multiplicity()));
    rep.measure("lifted-multiplicity", static_cast<double>(out.cover.multiplicity()));
    return out;
}

// --- hybrid covers ------------------------------------------------------------------

struct HybridResult {
    CoverFamily cover;
    std::size_t multiplicity = 0;
    std::size_t coarse_multiplicity = 0; // n'
    std::size_t fine_multiplicity = 0;   // n''
    std::size_t bound = 0;               // 3n' + 2n''
    VerificationReport report;
};

/// (W' cap Y_{n1+1}) u union over n > n1 of (levels {n, n+1}) cap W' cap W_n,
/// with W' and the level covers W_n given on the base and lifted to every level.
/// Lebesgue is checked for the model entourage named `scale`.
inline HybridResult hybrid_cover(const MultiscaleModel& model, const CoverFamily& coarse,
                                 const std::vector<CoverFamily>& per_level, int n1, const std::string& scale)
{
    if (static_cast<int>(per_level.size()) != model.levels)
        fail(ErrorKind::Input, "need one level cover per level");
    if (n1 < -1 || n1 >= model.levels)
        fail(ErrorKind::Input, "n1 out of range");
    auto lift = [&](const PointSet& base_part, int lo, int hi) {
        PointSet out;
        for (PointId x : model.space.points()) {
            const int l = model.level_of(x);
            if (l >= lo && l <= hi && contains(base_part, model.base_of(x)))
                out.push_back(x);
        }
        return out;
    };
    std::vector<PointSet> parts;
    for (const auto& a : coarse.parts()) {
        PointSet p = lift(a, 0, n1 + 1);
        if (!p.empty())
            parts.push_back(std::move(p));
    }
    for (int n = n1 + 1; n < model.levels; ++n)
        for (const auto& a : coarse.parts())
            for (const auto& b : per_level[n].parts()) {
                PointSet p = lift(set_intersection(a, b), n, n + 1);
                if (!p.empty())
                    parts.push_back(std::move(p));
            }

    HybridResult out;
    out.cover = CoverFamily(std::move(parts));
    out.multiplicity = out.cover.multiplicity();
    out.coarse_multiplicity = coarse.multiplicity();
    for (const auto& w : per_level)
        out.fine_multiplicity = std::max(out.fine_multiplicity, w.multiplicity());
    out.bound = 3 * out.coarse_multiplicity + 2 * out.fine_multiplicity;

    auto& rep = out.report;
    rep.subject = "hybrid-cover";
    rep.add({"crude-estimate", scale, std::nullopt, out.multiplicity <= out.bound, {},
             std::to_string(out.multiplicity) + " <= " + std::to_string(out.bound)});
    {
        auto leb = check_lebesgue(symmetrize(unite(model.space.entourage(scale), model.space.diagonal())), out.cover);
        Check c{"lebesgue", scale, std::nullopt, leb.ok, {}, ""};
        for (PointId x : leb.witness)
            c.witnesses.emplace_back(x, x);
        rep.add(std::move(c));
    }
    rep.measure("multiplicity", static_cast<double>(out.multiplicity));
    rep.measure("crude-bound", static_cast<double>(out.bound));
    return out;
}

} // namespace coarse
