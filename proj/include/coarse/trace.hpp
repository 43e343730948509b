#pragma once

// Plain and equivariant traces, the trace identity for transfers, and the
// quotient-norm estimate for ghosts.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "coarse/transfer.hpp"

namespace coarse {

/// Sum of the diagonal block traces over `component`.
inline Complex trace_plain(const ControlledOperator& a, const PointSet& component)
{
    if (!a.is_endomorphism())
        fail(ErrorKind::Input, "trace needs an endomorphism");
    Complex t = 0.0;
    for (PointId x : component) {
        auto it = a.blocks().find({x, x});
        if (it != a.blocks().end())
            t += it->second.trace();
    }
    return t;
}

/// Lowest id of every orbit meeting `set`.
inline PointSet fundamental_domain(const GroupAction& act, const PointSet& set)
{
    PointSet out;
    for (const auto& orb : act.orbits(set))
        out.push_back(orb.front());
    return make_point_set(std::move(out));
}

/// One uniformly chosen point of every orbit meeting `set`.
inline PointSet random_fundamental_domain(const GroupAction& act, const PointSet& set, std::mt19937_64& rng)
{
    PointSet out;
    for (const auto& orb : act.orbits(set)) {
        std::uniform_int_distribution<std::size_t> pick(0, orb.size() - 1);
        out.push_back(orb[pick(rng)]);
    }
    return make_point_set(std::move(out));
}

/// Sum over F of tr(A_{x,x}) / |G_x|. `set` must be G-invariant and F must
/// meet each of its orbits exactly once.
inline Complex trace_equivariant(const ControlledOperator& a, const PointSet& set, const PointSet& f)
{
    if (!a.is_endomorphism())
        fail(ErrorKind::Input, "trace needs an endomorphism");
    if (!a.domain().equivariant())
        fail(ErrorKind::NotEquivariant, "equivariant trace needs an equivariant object");
    const auto& act = *a.domain().action();
    if (!is_subset(f, set))
        fail(ErrorKind::NotFundamentalDomain, "F is not contained in the orbit set");
    for (const auto& orb : act.orbits(set)) {
        if (!is_subset(orb, set))
            fail(ErrorKind::NotFundamentalDomain, "set is not invariant: orbit of " + std::to_string(orb.front()) +
                                                      " leaves it");
        const auto hits = set_intersection(orb, f).size();
        if (hits != 1)
            fail(ErrorKind::NotFundamentalDomain, "F meets the orbit of " + std::to_string(orb.front()) + " " +
                                                      std::to_string(hits) + " times");
    }
    Complex t = 0.0;
    for (PointId x : f) {
        auto it = a.blocks().find({x, x});
        if (it != a.blocks().end())
            t += it->second.trace() / static_cast<double>(act.stabilizer(x).size());
    }
    return t;
}

/// For each component Y_i of the target off the member used by the transfer
/// and the G-saturated union X_j of source components over it, compares
/// tau^G_j(transfer(A)) with tau_i(A).
inline VerificationReport verify_trace_square(const BranchedCovering& cov, const ControlledOperator& a,
                                              const Entourage& v, const VerifyOptions& opts = {}, double tol = 1e-9)
{
    VerificationReport rep;
    rep.subject = "trace-square";
    rep.depth = opts.depth;
    const std::size_t pos = inverse_position(cov, v, opts);
    const auto t = transfer_operator(cov, a, v, opts, pos);
    const PointSet zc = cov.target_complement(pos);
    const auto& act = *cov.deck();
    const auto xcomps = coarse_components(cov.source());
    std::size_t matched = 0;
    for (const auto& yi : coarse_components(cov.target())) {
        if (!is_subset(yi, zc))
            continue;
        const std::string tag = std::to_string(yi.front());
        Check img{"image-component", tag, cov.label(pos), true, {}, ""};
        PointSet over;
        for (const auto& c : xcomps) {
            const PointSet fc = cov.image(c);
            if (set_intersection(fc, yi).empty())
                continue;
            if (fc != yi && img.pass) {
                img.pass = false;
                img.witnesses.emplace_back(c.front(), cov(c.front()));
                img.detail = "component of " + std::to_string(c.front()) + " does not map onto the component of " + tag;
            }
            over = set_union(over, c);
        }
        rep.add(img);
        if (!img.pass)
            continue;
        // G-saturations of the components over Y_i, grouped by orbit
        std::vector<PointSet> groups;
        PointSet done;
        for (const auto& c : xcomps) {
            if (!is_subset(c, over) || contains(done, c.front()))
                continue;
            PointSet sat;
            for (PointId x : c)
                sat = set_union(sat, act.orbit(x));
            for (const auto& c2 : xcomps)
                if (!set_intersection(c2, sat).empty())
                    sat = set_union(sat, c2);
            done = set_union(done, sat);
            groups.push_back(sat);
        }
        const Complex ta = trace_plain(a, yi);
        rep.measure("tau[" + tag + "]", ta.real());
        for (const auto& xj : groups) {
            const Complex tb = trace_equivariant(t.op, xj, fundamental_domain(act, xj));
            const double diff = std::abs(tb - ta);
            Check c{"trace-square", tag, cov.label(pos), diff <= tol, {}, ""};
            c.detail = "tauG = " + std::to_string(tb.real()) + (tb.imag() != 0 ? "+" + std::to_string(tb.imag()) + "i" : "") +
                       ", tau = " + std::to_string(ta.real()) + (ta.imag() != 0 ? "+" + std::to_string(ta.imag()) + "i" : "");
            if (!c.pass)
                c.witnesses.emplace_back(xj.front(), yi.front());
            rep.add(std::move(c));
            rep.measure("tauG[" + std::to_string(xj.front()) + "]", tb.real());
            ++matched;
        }
    }
    rep.measure("matched-components", static_cast<double>(matched));
    return rep;
}

// --- ghosts -----------------------------------------------------------------------------

/// With A' = A truncated to V, eps_k = ||A - A'|| off Z_k and tail_k the ghost
/// measure off Z_k, checks at every member
///   ||A off Z_k|| <= eps_k + ||A' off Z_k||,
///   ||A' off Z_k|| <= sqrt(n) sup_i ||A'_i||,  A'_i = mu(W_i) A' mu(W^_i),
///   sup_i ||A'_i|| <= tail_k + eps_k,
/// hence ||A off Z_k|| <= (1 + sqrt(n)) eps_k + sqrt(n) tail_k.
/// Needs bd(W) inside U and a partition with V[W^_i] inside W_i.
inline VerificationReport ghost_quotient_bound(const ControlledOperator& a, const Entourage& u, const BigFamily& family,
                                               const DimensionCertificate& cert, const Entourage& v,
                                               double tol = 1e-8)
{
    VerificationReport rep;
    rep.subject = "ghost-bound";
    rep.depth = cert.depth;
    const auto& space = *a.space();
    // Ghost-ness is judged blockwise: sup of ||A_{x',x}|| off Z_k must decay.
    const auto blockwise = ghost_measure(a, space.diagonal(), family);
    const double first = blockwise.empty() ? 0.0 : blockwise.front().second;
    const double last = blockwise.empty() ? 0.0 : blockwise.back().second;
    const bool ghost = last == 0.0 || last < first;
    rep.add({"ghost", "", std::nullopt, ghost, {},
             ghost ? "" : "blocks do not decay along the family; bound not claimed"});
    for (const auto& [k, b] : blockwise)
        rep.measure("blockwise[" + std::to_string(k) + "]", b);
    if (!ghost)
        return rep;
    const auto tails = ghost_measure(a, u, family);
    for (const auto& [k, tail] : tails)
        rep.measure("tail[" + std::to_string(k) + "]", tail);

    {
        auto missing = cert.cover.bound().missing_from(u);
        Check c{"cover-inside-U", "", std::nullopt, missing.empty(), {}, ""};
        if (!missing.empty()) {
            c.witnesses.push_back(missing.front());
            c.detail = "bound of the cover is not inside U";
        }
        rep.add(std::move(c));
        if (!c.pass)
            return rep;
    }
    const Entourage vs = symmetrize(unite(v, space.diagonal()));
    CoverFamily part;
    try {
        part = build_partition(space, cert.cover, vs);
    } catch (const CoarseError& e) {
        rep.add({"partition", "", std::nullopt, false, {}, e.what()});
        return rep;
    }
    rep.add({"partition", "", std::nullopt, true, {}, ""});

    const double n = static_cast<double>(cert.cover.multiplicity());
    const double rn = std::sqrt(n);
    const ControlledOperator at = truncate(a, v);
    const ControlledOperator diff = add(a, scale(-1.0, at));
    double sup_lhs = 0.0;
    for (std::size_t pos = 0; pos < family.size(); ++pos) {
        const int k = family[pos].index;
        const double tail = tails[pos].second;
        const PointSet s = family.complement(pos, space.points());
        const double lhs = op_norm(restrict(a, s));
        const double eps = op_norm(restrict(diff, s));
        const double mid = op_norm(restrict(at, s));
        double sup_local = 0.0;
        for (std::size_t i = 0; i < cert.cover.size(); ++i) {
            const PointSet rows = set_intersection(cert.cover.parts()[i], s);
            const PointSet cols = set_intersection(part.parts()[i], s);
            if (cols.empty())
                continue;
            std::map<Pair, Block> blocks;
            for (const auto& [key, blk] : at.blocks())
                if (contains(rows, key.first) && contains(cols, key.second))
                    blocks.emplace(key, blk);
            sup_local = std::max(sup_local, op_norm(ControlledOperator(at.domain(), at.codomain(), std::move(blocks))));
        }
        const std::string tag = std::to_string(k);
        rep.add({"chain-truncation", "", k, lhs <= eps + mid + tol, {}, ""});
        rep.add({"chain-partition", "", k, mid <= rn * sup_local + tol, {}, ""});
        rep.add({"chain-local", "", k, sup_local <= tail + eps + tol, {}, ""});
        const double bound = (1.0 + rn) * eps + rn * tail;
        rep.add({"ghost-bound", "", k, lhs <= bound + tol, {},
                 "||A|| = " + std::to_string(lhs) + ", bound = " + std::to_string(bound)});
        rep.measure("norm[" + tag + "]", lhs);
        rep.measure("eps[" + tag + "]", eps);
        rep.measure("local[" + tag + "]", sup_local);
        sup_lhs = std::max(sup_lhs, lhs);
    }
    rep.measure("sup-norm", sup_lhs);
    rep.measure("multiplicity", n);
    return rep;
}

/// Norms of transfer(A truncated to V) off each member from the admissible one on.
inline std::vector<std::pair<int, double>> transferred_ghost_norms(const BranchedCovering& cov,
                                                                   const ControlledOperator& a, const Entourage& v,
                                                                   const VerifyOptions& opts = {})
{
    const auto t = transfer_operator(cov, truncate(a, v), v, opts);
    std::vector<std::pair<int, double>> out;
    for (std::size_t pos = t.position; pos < cov.big_family().size(); ++pos)
        out.emplace_back(cov.label(pos), op_norm(restrict(t.op, cov.source_complement(pos))));
    return out;
}

} // namespace coarse
