#pragma once

// Scenario generators (covering tower, windowed annulus, cone over a tower),
// their emitted file sets, and the manifest-driven suite runner.

#include <filesystem>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "coarse/json_io.hpp"
#include "coarse/trace.hpp"

namespace coarse {

// --- tower -------------------------------------------------------------------------

/// X = disjoint union of Z/(m n_k) over Y = disjoint union of Z/n_k, reduction
/// mod n_k, P = pairs of one sheet at cyclic distance < n_k / 2, Z_{-1} = empty
/// and Z_j = sheets <= j, deck group Z/m acting by +n_k on sheet k.
struct Tower {
    BranchedCovering covering;
    int m = 1;
    std::vector<std::int64_t> ns;
    std::vector<PointId> y_offsets;
    std::vector<PointId> x_offsets;
    std::vector<std::int64_t> radii;

    PointSet y_sheet(std::size_t k) const { return id_range(ns[k], y_offsets[k]); }
    PointSet x_sheet(std::size_t k) const { return id_range(m * ns[k], x_offsets[k]); }
    Entourage scale(std::int64_t r) const { return covering.target().entourage("U" + std::to_string(r)); }
};

inline Tower tower(int m, std::vector<std::int64_t> ns, std::vector<std::int64_t> radii = {1, 2, 3})
{
    if (m < 1)
        fail(ErrorKind::Input, "deck order must be at least 1");
    if (ns.empty())
        fail(ErrorKind::Input, "tower needs at least one sheet");
    for (std::size_t k = 0; k < ns.size(); ++k)
        if (ns[k] < 1 || (k > 0 && ns[k] <= ns[k - 1]))
            fail(ErrorKind::Input, "sheet sizes must be positive and strictly increasing");
    Tower t;
    t.m = m;
    t.ns = ns;
    t.radii = radii;
    PointId oy = 0, ox = 0;
    for (auto n : ns) {
        t.y_offsets.push_back(oy);
        t.x_offsets.push_back(ox);
        oy += n;
        ox += m * n;
    }
    std::vector<NamedEntourage> ygen, xgen;
    for (auto r : radii) {
        std::vector<Pair> yp, xp;
        for (std::size_t k = 0; k < ns.size(); ++k) {
            auto a = cycle_entourage(ns[k], r, t.y_offsets[k]).pairs();
            yp.insert(yp.end(), a.begin(), a.end());
            auto b = cycle_entourage(m * ns[k], r, t.x_offsets[k]).pairs();
            xp.insert(xp.end(), b.begin(), b.end());
        }
        ygen.push_back({"U" + std::to_string(r), Entourage(std::move(yp))});
        xgen.push_back({"U" + std::to_string(r), Entourage(std::move(xp))});
    }
    std::map<PointId, PointId> f;
    std::vector<Pair> p;
    std::vector<std::map<PointId, PointId>> perms(m);
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const std::int64_t n = ns[k], big = m * n;
        for (std::int64_t a = 0; a < big; ++a) {
            f[t.x_offsets[k] + a] = t.y_offsets[k] + a % n;
            for (std::int64_t b = 0; b < big; ++b)
                if (2 * cyclic_distance(a, b, big) < n)
                    p.emplace_back(t.x_offsets[k] + a, t.x_offsets[k] + b);
            for (int g = 0; g < m; ++g)
                perms[g][t.x_offsets[k] + a] = t.x_offsets[k] + (a + g * n) % big;
        }
    }
    std::vector<BigFamilyMember> members{{-1, {}}};
    PointSet z;
    for (std::size_t j = 0; j + 1 < ns.size(); ++j) {
        z = set_union(z, t.y_sheet(j));
        members.push_back({static_cast<int>(j), z});
    }
    FiniteCoarseSpace xs(id_range(ox), std::move(xgen));
    GroupAction deck(FiniteGroup::cyclic(m), std::move(perms), xs.points());
    t.covering = BranchedCovering(std::move(xs), FiniteCoarseSpace(id_range(oy), std::move(ygen)), std::move(f),
                                  Entourage(std::move(p)), BigFamily(std::move(members)), std::move(deck));
    return t;
}

/// Fibre dimension 1 at every point.
inline ControlledObject unit_object(const SpacePtr& space)
{
    std::map<PointId, int> dims;
    for (PointId x : space->points())
        dims[x] = 1;
    return ControlledObject(space, std::move(dims));
}

/// On each sheet, the projection onto constants: every entry 1/n_k.
inline ControlledOperator averaging_projection(const Tower& t)
{
    const auto obj = unit_object(t.covering.target_ptr());
    std::map<Pair, Block> blocks;
    for (std::size_t k = 0; k < t.ns.size(); ++k)
        for (PointId a : t.y_sheet(k))
            for (PointId b : t.y_sheet(k))
                blocks.emplace(Pair{a, b}, Block::Constant(1, 1, 1.0 / static_cast<double>(t.ns[k])));
    return ControlledOperator(obj, obj, std::move(blocks));
}

/// The cyclic shift y -> y + 1 on every sheet of Y.
inline ControlledOperator shift_operator(const Tower& t)
{
    const auto obj = unit_object(t.covering.target_ptr());
    std::map<Pair, Block> blocks;
    for (std::size_t k = 0; k < t.ns.size(); ++k)
        for (std::int64_t a = 0; a < t.ns[k]; ++a)
            blocks.emplace(Pair{t.y_offsets[k] + (a + 1) % t.ns[k], t.y_offsets[k] + a}, Block::Identity(1, 1));
    return ControlledOperator(obj, obj, std::move(blocks));
}

// --- annulus --------------------------------------------------------------------------

/// Rings j = 1..R with c j points each, joined along rings and radially; X is
/// the strip of `copies` fundamental domains of the angle covering. The deck
/// translation is not modelled (the strip is a window of the infinite cover).
struct Annulus {
    BranchedCovering covering;
    PointSet mask; // the middle fundamental domains
    int rings = 0;
    int c = 0;
    int copies = 0;
};

namespace detail {

inline std::vector<std::map<PointId, int>> bfs_balls(const PointSet& pts, const std::map<PointId, PointSet>& adj,
                                                     int radius)
{
    std::vector<std::map<PointId, int>> out;
    for (PointId s : pts) {
        std::map<PointId, int> dist{{s, 0}};
        std::queue<PointId> q;
        q.push(s);
        while (!q.empty()) {
            PointId u = q.front();
            q.pop();
            if (dist[u] == radius)
                continue;
            for (PointId w : adj.at(u))
                if (!dist.count(w)) {
                    dist[w] = dist[u] + 1;
                    q.push(w);
                }
        }
        out.push_back(std::move(dist));
    }
    return out;
}

inline std::int64_t radial_image(std::int64_t a, int j) { return (2 * a * (j + 1) + j) / (2 * j); }

} // namespace detail

inline Annulus annulus(int rings, int c, int copies, int p_radius = 2, std::vector<int> radii = {1, 2})
{
    if (rings < 2 || c < 1 || copies < 3 || p_radius < 1)
        fail(ErrorKind::Input, "annulus needs rings >= 2, c >= 1, copies >= 3, P radius >= 1");
    Annulus an;
    an.rings = rings;
    an.c = c;
    an.copies = copies;
    std::vector<PointId> oy(rings + 2, 0), ox(rings + 2, 0);
    for (int j = 1; j <= rings; ++j) {
        oy[j + 1] = oy[j] + c * j;
        ox[j + 1] = ox[j] + static_cast<PointId>(copies) * c * j;
    }
    auto yid = [&](int j, std::int64_t i) { return oy[j] + ((i % (c * j)) + c * j) % (c * j); };
    auto xid = [&](int j, std::int64_t a) { return ox[j] + a; };
    const PointSet ypts = id_range(oy[rings + 1]);
    const PointSet xpts = id_range(ox[rings + 1]);
    std::map<PointId, PointSet> yadj, xadj;
    auto link = [](std::map<PointId, PointSet>& adj, PointId a, PointId b) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    };
    std::map<PointId, PointId> f;
    for (int j = 1; j <= rings; ++j) {
        const std::int64_t nj = c * j, wj = copies * nj;
        for (std::int64_t i = 0; i < nj; ++i) {
            yadj[yid(j, i)];
            if (nj > 1)
                link(yadj, yid(j, i), yid(j, i + 1));
            if (j < rings)
                link(yadj, yid(j, i), yid(j + 1, detail::radial_image(i, j)));
        }
        for (std::int64_t a = 0; a < wj; ++a) {
            xadj[xid(j, a)];
            f[xid(j, a)] = yid(j, a);
            if (a + 1 < wj)
                link(xadj, xid(j, a), xid(j, a + 1));
            if (j < rings && detail::radial_image(a, j) < copies * c * (j + 1))
                link(xadj, xid(j, a), xid(j + 1, detail::radial_image(a, j)));
            if (a >= nj && a < (copies - 1) * nj)
                an.mask.push_back(xid(j, a));
        }
    }
    for (auto* adj : {&yadj, &xadj})
        for (auto& [k, v] : *adj)
            v = make_point_set(std::move(v));
    int reach = p_radius;
    for (int r : radii)
        reach = std::max(reach, r);
    const auto ydist = detail::bfs_balls(ypts, yadj, reach);
    const auto xdist = detail::bfs_balls(xpts, xadj, reach);
    auto gens = [&](const PointSet& pts, const std::vector<std::map<PointId, int>>& dist) {
        std::vector<NamedEntourage> out;
        for (int r : radii) {
            std::vector<Pair> pairs;
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (const auto& [w, d] : dist[i])
                    if (d <= r)
                        pairs.emplace_back(w, pts[i]);
            out.push_back({"U" + std::to_string(r), Entourage(std::move(pairs))});
        }
        return out;
    };
    std::vector<Pair> p;
    for (std::size_t i = 0; i < xpts.size(); ++i) {
        const PointId x = xpts[i];
        const auto& yd = ydist[static_cast<std::size_t>(f[x])];
        for (const auto& [w, d] : xdist[i]) {
            if (d > p_radius)
                continue;
            auto it = yd.find(f[w]);
            if (it != yd.end() && it->second == d)
                p.emplace_back(w, x);
        }
    }
    std::vector<BigFamilyMember> members{{0, {}}};
    PointSet z;
    for (int j = 1; j < rings; ++j) {
        z = set_union(z, id_range(c * j, oy[j]));
        members.push_back({j, z});
    }
    an.covering = BranchedCovering(FiniteCoarseSpace(xpts, gens(xpts, xdist)),
                                   FiniteCoarseSpace(ypts, gens(ypts, ydist)), std::move(f), Entourage(std::move(p)),
                                   BigFamily(std::move(members)));
    return an;
}

// --- cone over a tower ------------------------------------------------------------------

struct ConeTower {
    Tower base;
    ConeCovering cone;
    std::vector<Entourage> schedule;
};

/// Cone over the tower with target schedule delta(t) = cyclic radius radii[t]
/// on every sheet (radius 0 is the diagonal).
inline ConeTower cone_tower(int m, std::vector<std::int64_t> ns, const std::vector<std::int64_t>& schedule_radii)
{
    ConeTower ct;
    ct.base = tower(m, std::move(ns), {1});
    for (auto r : schedule_radii) {
        std::vector<Pair> pairs;
        for (std::size_t k = 0; k < ct.base.ns.size(); ++k) {
            auto a = cycle_entourage(ct.base.ns[k], r, ct.base.y_offsets[k]).pairs();
            pairs.insert(pairs.end(), a.begin(), a.end());
        }
        ct.schedule.emplace_back(std::move(pairs));
    }
    ct.cone = cone_covering(ct.base.covering, ct.schedule);
    return ct;
}

// --- emitted file sets and the suite ------------------------------------------------------

namespace detail {

inline void require_pass(const VerificationReport& rep, const std::string& what)
{
    if (rep.all_pass())
        return;
    const auto bad = rep.failures().front();
    fail(ErrorKind::Hypothesis, what + " fails its own verification: " + bad->condition + " " + bad->detail);
}

inline json check_entry(const std::string& kind, json fields)
{
    fields["kind"] = kind;
    return fields;
}

/// Random equivariant operator on X supported on P cap f^{-1}(V), with a random cocycle.
inline ControlledOperator random_lifted_operator(std::mt19937_64& rng, const BranchedCovering& cov,
                                                 const Entourage& v, int dim = 1)
{
    std::map<PointId, int> dims;
    for (PointId x : cov.source().points())
        dims[x] = dim;
    const auto& act = *cov.deck();
    ControlledObject obj(cov.source_ptr(), dims, act, random_cocycle(rng, act, dims));
    return random_equivariant_operator(rng, obj, obj, intersect(cov.preimage(v), cov.connection()));
}

} // namespace detail

/// Writes the scenario's files and a manifest.json into `dir`; returns the manifest.
inline json scenario_generate(const std::string& name, const json& params, const std::string& dir,
                              std::uint64_t seed = 0)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto path = [&](const std::string& f) { return (fs::path(dir) / f).string(); };
    json manifest = {{"scenario", name}, {"params", params}, {"seed", seed}, {"checks", json::array()}};
    auto& checks = manifest["checks"];
    std::mt19937_64 rng(seed);

    if (name == "tower") {
        const int m = params.value("m", 3);
        const auto ns = params.value("n", std::vector<std::int64_t>{5, 7, 9, 11});
        const auto radii = params.value("radii", std::vector<std::int64_t>{1, 2, 3});
        const Tower t = tower(m, ns, radii);
        detail::require_pass(verify_branched_covering(t.covering), "tower");
        detail::require_pass(verify_G_covering(t.covering), "tower");
        write_json_file(path("covering.json"), covering_to_json(t.covering));
        write_json_file(path("shift.json"), operator_to_json(shift_operator(t)));
        write_json_file(path("averaging.json"), operator_to_json(averaging_projection(t)));
        const Entourage v = t.scale(radii.front());
        const auto b = detail::random_lifted_operator(rng, t.covering, v);
        write_json_file(path("lifted.json"), operator_to_json(b));
        const std::string s = "U" + std::to_string(radii.front());
        checks.push_back(detail::check_entry("verify-covering", {{"covering", "covering.json"}}));
        checks.push_back(detail::check_entry("verify-gcovering", {{"covering", "covering.json"}}));
        checks.push_back(detail::check_entry("monodromy", {{"covering", "covering.json"}, {"scale", s}}));
        checks.push_back(detail::check_entry(
            "roundtrip", {{"covering", "covering.json"}, {"operator", "shift.json"}, {"scale", s}}));
        checks.push_back(detail::check_entry(
            "roundtrip-equivariant", {{"covering", "covering.json"}, {"operator", "lifted.json"}, {"scale", s}}));
        checks.push_back(detail::check_entry(
            "norm-bound", {{"covering", "covering.json"}, {"operator", "shift.json"}, {"scale", s}}));
        checks.push_back(detail::check_entry(
            "inverse-norm-bound", {{"covering", "covering.json"}, {"operator", "lifted.json"}, {"scale", s}}));
        checks.push_back(detail::check_entry(
            "trace-square", {{"covering", "covering.json"}, {"operator", "shift.json"}, {"scale", s}}));
        checks.push_back(detail::check_entry(
            "ghost", {{"covering", "covering.json"}, {"operator", "averaging.json"}, {"scale", s}}));
    } else if (name == "annulus") {
        const Annulus an = annulus(params.value("rings", 5), params.value("c", 3), params.value("copies", 3),
                                   params.value("p_radius", 2), params.value("radii", std::vector<int>{1, 2}));
        VerifyOptions o;
        o.source_mask = an.mask;
        detail::require_pass(verify_branched_covering(an.covering, o), "annulus");
        write_json_file(path("covering.json"), covering_to_json(an.covering));
        write_json_file(path("mask.json"), json(an.mask));
        checks.push_back(detail::check_entry("verify-covering", {{"covering", "covering.json"}, {"mask", "mask.json"}}));
    } else if (name == "cone-tower") {
        const ConeTower ct = cone_tower(params.value("m", 3), params.value("n", std::vector<std::int64_t>{5, 7}),
                                        params.value("schedule", std::vector<std::int64_t>{2, 2, 1, 1, 0}));
        detail::require_pass(verify_branched_covering(ct.cone.covering), "cone-tower");
        detail::require_pass(uniform_covering_check(ct.base.covering, ct.schedule), "cone-tower");
        write_json_file(path("covering.json"), covering_to_json(ct.cone.covering));
        write_json_file(path("base.json"), covering_to_json(ct.base.covering));
        json sched = json::array();
        for (const auto& d : ct.schedule)
            sched.push_back(entourage_to_json(d));
        write_json_file(path("schedule.json"), sched);
        checks.push_back(detail::check_entry("verify-covering", {{"covering", "covering.json"}}));
        checks.push_back(detail::check_entry("verify-gcovering", {{"covering", "covering.json"}}));
        checks.push_back(detail::check_entry("uniform", {{"covering", "base.json"}, {"schedule", "schedule.json"}}));
    } else {
        fail(ErrorKind::Input, "unknown scenario '" + name + "'");
    }
    write_json_file(path("manifest.json"), manifest);
    return manifest;
}

/// Runs one manifest entry; file names resolve against `dir`.
inline VerificationReport run_check(const json& entry, const std::string& dir, int depth = 3)
{
    namespace fs = std::filesystem;
    auto load = [&](const char* key) { return read_json_file((fs::path(dir) / detail::get_as<std::string>(detail::field(entry, key), key)).string()); };
    const std::string kind = detail::get_as<std::string>(detail::field(entry, "kind"), "kind");
    VerifyOptions opts;
    opts.depth = depth;
    const BranchedCovering cov = covering_from_json(load("covering"));
    auto scale = [&]() { return cov.target().entourage(detail::get_as<std::string>(detail::field(entry, "scale"), "scale")); };
    auto op_on = [&](const SpacePtr& space) { return operator_from_json(load("operator"), space); };

    if (kind == "verify-covering") {
        if (entry.contains("mask"))
            opts.source_mask = point_set_from_json(load("mask"), "mask");
        return verify_branched_covering(cov, opts);
    }
    if (kind == "verify-gcovering")
        return verify_G_covering(cov);
    if (kind == "monodromy") {
        VerificationReport rep;
        rep.subject = "monodromy";
        const Entourage v = scale();
        Transport tr(cov, v, opts);
        for (const auto& comp : coarse_components(cov.target())) {
            if (!is_subset(comp, tr.region()))
                continue;
            std::vector<PointId> loop(comp.begin(), comp.end());
            loop.push_back(comp.front());
            for (PointId x : cov.fibre(comp.front())) {
                const PointId end = tr.path(loop, x);
                const auto orb = cov.deck()->orbit(x);
                rep.add({"monodromy", entry.value("scale", ""), tr.z_index(), contains(orb, end) && end != x, {{x, end}},
                         "loop at " + std::to_string(x) + " ends at " + std::to_string(end)});
            }
        }
        return rep;
    }
    if (kind == "roundtrip")
        return roundtrip_check(cov, op_on(cov.target_ptr()), scale(), opts);
    if (kind == "roundtrip-equivariant")
        return roundtrip_check_equivariant(cov, op_on(cov.source_ptr()), scale(), opts);
    if (kind == "norm-bound") {
        const Entourage v = scale();
        auto cert = find_source_certificate(cov, v, 2, opts);
        if (!cert) {
            VerificationReport rep;
            rep.subject = "norm-bound";
            rep.add({"certificate", entry.value("scale", ""), std::nullopt, false, {}, "no multiplicity-2 certificate"});
            return rep;
        }
        return norm_bound_check(cov, op_on(cov.target_ptr()), v, *cert, opts);
    }
    if (kind == "inverse-norm-bound") {
        const Entourage v = scale();
        auto cert = find_target_certificate(cov, v, 2, opts);
        if (!cert) {
            VerificationReport rep;
            rep.subject = "inverse-norm-bound";
            rep.add({"certificate", entry.value("scale", ""), std::nullopt, false, {}, "no multiplicity-2 certificate"});
            return rep;
        }
        return inverse_norm_bound_check(cov, op_on(cov.source_ptr()), v, *cert, opts);
    }
    if (kind == "trace-square") {
        const auto a = op_on(cov.target_ptr());
        return verify_trace_square(cov, a, scale(), opts);
    }
    if (kind == "ghost") {
        const auto a = op_on(cov.target_ptr());
        const Entourage v = scale();
        const Entourage v2 = compose(v, v);
        SearchOptions so;
        so.depth = depth;
        auto cert = dimension_at_scale(cov.target(), v2, 2, SearchStrategy::Greedy, so, "V2");
        if (!cert)
            cert = dimension_at_scale(cov.target(), v2, 2, SearchStrategy::Sweep, so, "V2");
        if (!cert) {
            VerificationReport rep;
            rep.subject = "ghost-bound";
            rep.add({"certificate", entry.value("scale", ""), std::nullopt, false, {}, "no multiplicity-2 certificate"});
            return rep;
        }
        auto rep = ghost_quotient_bound(a, cert->cover.bound(), cov.big_family(), *cert, v);
        for (const auto& [k, nrm] : transferred_ghost_norms(cov, a, v, opts))
            rep.measure("transferred[" + std::to_string(k) + "]", nrm);
        return rep;
    }
    if (kind == "uniform") {
        std::vector<Entourage> sched;
        for (const auto& e : load("schedule"))
            sched.push_back(entourage_from_json(e));
        return uniform_covering_check(cov, sched, entry.value("max_height", 1), opts);
    }
    fail(ErrorKind::Input, "unknown check kind '" + kind + "'");
}

struct SuiteResult {
    int exit_code = 0; // 0 all pass, 1 violation, 2 input error
    json report;
};

/// Runs every check of `dir`/manifest.json (or of the manifest file itself).
inline SuiteResult run_suite(const std::string& path, int depth = 3)
{
    namespace fs = std::filesystem;
    SuiteResult out;
    out.report = {{"manifest", path}, {"results", json::array()}};
    try {
        fs::path mp = fs::is_directory(path) ? fs::path(path) / "manifest.json" : fs::path(path);
        const json manifest = read_json_file(mp.string());
        const std::string dir = mp.parent_path().string();
        bool all = true;
        for (const auto& entry : detail::field(manifest, "checks")) {
            VerificationReport rep;
            try {
                rep = run_check(entry, dir, depth);
            } catch (const CoarseError& e) {
                // a broken input makes later checks throw; record them as failures
                if (e.kind() == ErrorKind::Input || e.kind() == ErrorKind::ShapeMismatch)
                    throw;
                rep.subject = entry.value("kind", "");
                rep.add({"error", "", std::nullopt, false, {}, e.what()});
            }
            all = all && rep.all_pass();
            out.report["results"].push_back({{"check", entry}, {"report", report_to_json(rep)}});
        }
        out.report["all_pass"] = all;
        out.exit_code = all ? 0 : 1;
    } catch (const CoarseError& e) {
        out.report["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        out.exit_code = e.kind() == ErrorKind::Input || e.kind() == ErrorKind::ShapeMismatch ? 2 : 1;
    } catch (const std::exception& e) {
        out.report["error"] = {{"kind", "io"}, {"message", e.what()}};
        out.exit_code = 2;
    }
    return out;
}

} // namespace coarse
