#pragma once

// Transfer of controlled operators along a branched covering, the inverse
// transfer for G-coverings, round trips and the sqrt(n) norm bounds.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coarse/covering.hpp"
#include "coarse/dimension.hpp"
#include "coarse/operators.hpp"

namespace coarse {

/// dims_X(x) = dims_Y(f(x)); with a deck action the result carries the
/// identity cocycle (the fibres over one point are literally the same space).
inline ControlledObject transfer_object(const BranchedCovering& cov, const ControlledObject& obj)
{
    if (!obj.space() || !(*obj.space() == cov.target()))
        fail(ErrorKind::ShapeMismatch, "object does not live over the covering's target");
    std::map<PointId, int> dims;
    for (PointId x : cov.source().points())
        dims[x] = obj.dim(cov(x));
    if (cov.deck())
        return ControlledObject(cov.source_ptr(), std::move(dims), *cov.deck(), {});
    return ControlledObject(cov.source_ptr(), std::move(dims));
}

struct TransferResult {
    ControlledOperator op;
    int z_index = 0;
    std::size_t position = 0;
    Entourage scale;
    std::optional<std::size_t> certificate_n;
    std::map<PointId, PointId> copies; // x -> f(x): the summand of the source object that x copies
};

namespace detail {

inline std::size_t require_admissible(const BranchedCovering& cov, const Entourage& v, const VerifyOptions& opts)
{
    auto pos = admissible_position(cov, v, opts);
    if (!pos)
        fail(ErrorKind::NoAdmissibleIndex, "no member of the big family is admissible for the scale");
    return *pos;
}

} // namespace detail

/// B_{x',x} = A_{f x', f x} when (f x', f x) lies in V with both ends off Z
/// and (x', x) lies in P; zero otherwise.
inline TransferResult transfer_operator(const BranchedCovering& cov, const ControlledOperator& a, const Entourage& v,
                                        const VerifyOptions& opts = {},
                                        std::optional<std::size_t> position = std::nullopt)
{
    if (!a.space() || !(*a.space() == cov.target()))
        fail(ErrorKind::ShapeMismatch, "operator does not live over the covering's target");
    if (!propagation(a).subset_of(v))
        fail(ErrorKind::Hypothesis, "propagation of the operator is not contained in the scale");
    const std::size_t least = detail::require_admissible(cov, v, opts);
    const std::size_t pos = position.value_or(least);
    if (pos < least || pos >= cov.big_family().size())
        fail(ErrorKind::NoAdmissibleIndex, "requested member is not admissible for the scale");
    const PointSet zc = cov.target_complement(pos);

    TransferResult out;
    out.position = pos;
    out.z_index = cov.label(pos);
    out.scale = v;
    for (PointId x : cov.source().points())
        out.copies[x] = cov(x);

    std::map<Pair, Block> blocks;
    for (const auto& [key, blk] : a.blocks()) {
        const auto [yp, y] = key;
        if (!contains(zc, yp) || !contains(zc, y))
            continue;
        for (PointId x : cov.fibre(y))
            for (PointId xp : cov.lifts(yp, x))
                blocks.emplace(Pair{xp, x}, blk);
    }
    out.op = ControlledOperator(transfer_object(cov, a.domain()), transfer_object(cov, a.codomain()),
                                std::move(blocks));
    return out;
}

// --- inverse transfer --------------------------------------------------------------

/// Lowest id in each fibre.
inline std::map<PointId, PointId> lowest_section(const BranchedCovering& cov)
{
    std::map<PointId, PointId> s;
    for (PointId y : cov.target().points())
        if (!cov.fibre(y).empty())
            s[y] = cov.fibre(y).front();
    return s;
}

/// Member used by the inverse: (3a.i) and (3a.ii) hold for V and G acts freely
/// and transitively on the fibres off it.
inline std::size_t inverse_position(const BranchedCovering& cov, const Entourage& v, const VerifyOptions& opts = {})
{
    if (!cov.deck())
        fail(ErrorKind::Hypothesis, "inverse transfer needs a deck action");
    const std::size_t a = detail::require_admissible(cov, v, opts);
    auto ft = free_transitive_search(cov);
    if (!ft.position)
        fail(ErrorKind::NoAdmissibleIndex, "deck group acts freely and transitively over no member");
    return std::max(a, *ft.position);
}

namespace detail {

/// For x over the region: the unique g with g s(f x) = x.
inline std::map<PointId, int> deck_coordinates(const BranchedCovering& cov, const PointSet& region,
                                               const std::map<PointId, PointId>& s)
{
    const auto& act = *cov.deck();
    std::map<PointId, int> out;
    for (PointId x : region) {
        const PointId base = s.at(cov(x));
        for (int g = 0; g < act.group().size(); ++g)
            if (act.act(g, base) == x) {
                out[x] = g;
                break;
            }
        if (!out.count(x))
            fail(ErrorKind::Hypothesis, "point " + std::to_string(x) + " is not in the orbit of its section point");
    }
    return out;
}

inline ControlledObject inverse_object(const BranchedCovering& cov, const ControlledObject& obj,
                                       const std::map<PointId, PointId>& s)
{
    std::map<PointId, int> dims;
    for (const auto& [y, x] : s)
        dims[y] = obj.dim(x);
    return ControlledObject(cov.target_ptr(), std::move(dims));
}

} // namespace detail

struct InverseTransferResult {
    ControlledOperator op;
    int z_index = 0;
    std::size_t position = 0;
    std::map<PointId, PointId> section; // y -> s(y)
};

/// A_{y',y} = rho'_{g; s(y')}^{-1} B_{g s(y'), s(y)} where g s(y') is the
/// transport of s(y) to y', for y, y' off the member.
inline InverseTransferResult inverse_transfer_detail(const BranchedCovering& cov, const ControlledOperator& b,
                                                     const Entourage& v, const VerifyOptions& opts = {},
                                                     std::optional<std::size_t> position = std::nullopt,
                                                     double tol = 1e-10)
{
    if (!b.space() || !(*b.space() == cov.source()))
        fail(ErrorKind::ShapeMismatch, "operator does not live over the covering's source");
    if (!b.domain().equivariant() || !b.codomain().equivariant())
        fail(ErrorKind::NotEquivariant, "inverse transfer needs equivariant objects");
    if (!(*b.domain().action() == *cov.deck()) || !(*b.codomain().action() == *cov.deck()))
        fail(ErrorKind::NotEquivariant, "objects carry a different action than the deck group");
    if (auto eq = equivariance_check(b, tol); !eq.ok)
        fail(ErrorKind::NotEquivariant, "operator is not equivariant at (" + std::to_string(eq.key.first) + "," +
                                            std::to_string(eq.key.second) + ")");
    const std::size_t least = inverse_position(cov, v, opts);
    const std::size_t pos = position.value_or(least);
    if (pos < least || pos >= cov.big_family().size())
        fail(ErrorKind::NoAdmissibleIndex, "requested member is not admissible for the inverse");
    const PointSet zc = cov.target_complement(pos);
    const PointSet region = cov.preimage(zc);

    for (const auto& [key, blk] : b.blocks()) {
        const auto [xp, x] = key;
        if (!contains(region, xp) || !contains(region, x))
            continue;
        if (!cov.connection().contains(xp, x) || !v.contains(cov(xp), cov(x)))
            fail(ErrorKind::Hypothesis, "block (" + std::to_string(xp) + "," + std::to_string(x) +
                                            ") lies outside P and the preimage of V");
    }

    InverseTransferResult out;
    out.position = pos;
    out.z_index = cov.label(pos);
    out.section = lowest_section(cov);
    const auto g = detail::deck_coordinates(cov, region, out.section);
    const auto& cod = b.codomain();

    std::map<Pair, Block> blocks;
    for (const auto& [yp, y] : v.pairs()) {
        if (!contains(zc, yp) || !contains(zc, y))
            continue;
        const PointId sy = out.section.at(y);
        auto l = cov.lifts(yp, sy);
        if (l.size() != 1)
            fail(l.empty() ? ErrorKind::NoLift : ErrorKind::NonUniqueLift,
                 "transport of (" + std::to_string(yp) + "," + std::to_string(y) + ") is not unique");
        const PointId xp = l.front();
        auto it = b.blocks().find({xp, sy});
        if (it == b.blocks().end())
            continue;
        const int h = g.at(xp);
        blocks.emplace(Pair{yp, y}, cod.rho({h, out.section.at(yp)}).adjoint() * it->second);
    }
    out.op = ControlledOperator(detail::inverse_object(cov, b.domain(), out.section),
                                detail::inverse_object(cov, b.codomain(), out.section), std::move(blocks));
    return out;
}

inline ControlledOperator inverse_transfer(const BranchedCovering& cov, const ControlledOperator& b,
                                           const Entourage& v, const VerifyOptions& opts = {})
{
    return inverse_transfer_detail(cov, b, v, opts).op;
}

// --- round trips ------------------------------------------------------------------

/// inverse(transfer(A)) against A restricted off the member used.
inline VerificationReport roundtrip_check(const BranchedCovering& cov, const ControlledOperator& a,
                                          const Entourage& v, const VerifyOptions& opts = {}, double tol = 1e-12)
{
    VerificationReport rep;
    rep.subject = "transfer-roundtrip";
    rep.depth = opts.depth;
    const std::size_t pos = inverse_position(cov, v, opts);
    const auto t = transfer_operator(cov, a, v, opts, pos);
    const auto inv = inverse_transfer_detail(cov, t.op, v, opts, pos);
    const ControlledOperator expected = restrict(a, cov.target_complement(pos));
    const double diff = max_abs_difference(inv.op, expected);
    Check c{"inverse-after-transfer", "", cov.label(pos), diff <= tol, {}, ""};
    if (!c.pass) {
        for (const auto& [key, blk] : expected.blocks())
            if (max_abs_difference(
                    ControlledOperator(a.domain(), a.codomain(), {{key, blk}}),
                    ControlledOperator(a.domain(), a.codomain(), {{key, inv.op.block(key.first, key.second)}})) >
                tol) {
                c.witnesses.push_back(key);
                break;
            }
        if (c.witnesses.empty())
            for (const auto& [key, blk] : inv.op.blocks())
                if (!expected.blocks().count(key)) {
                    c.witnesses.push_back(key);
                    break;
                }
    }
    c.detail = "max entry difference " + std::to_string(diff);
    rep.add(std::move(c));
    rep.measure("max-difference", diff);
    return rep;
}

/// The relabelled comparison operator: blocks rho'_{g(x');s} T_{x',x} rho_{g(x);s}^{-1}
/// with g(x) s(f x) = x, over B's objects.
inline ControlledOperator beta_relabel(const BranchedCovering& cov, const ControlledOperator& t,
                                       const ControlledOperator& b, const PointSet& region,
                                       const std::map<PointId, PointId>& section)
{
    const auto g = detail::deck_coordinates(cov, region, section);
    std::map<Pair, Block> blocks;
    for (const auto& [key, blk] : t.blocks()) {
        const auto [xp, x] = key;
        if (!contains(region, xp) || !contains(region, x))
            continue;
        blocks.emplace(key, b.codomain().rho({g.at(xp), section.at(cov(xp))}) * blk *
                                b.domain().rho({g.at(x), section.at(cov(x))}).adjoint());
    }
    return ControlledOperator(b.domain(), b.codomain(), std::move(blocks));
}

/// transfer(inverse(B)) against B off the member used, after relabelling.
inline VerificationReport roundtrip_check_equivariant(const BranchedCovering& cov, const ControlledOperator& b,
                                                      const Entourage& v, const VerifyOptions& opts = {},
                                                      double tol = 1e-12)
{
    VerificationReport rep;
    rep.subject = "transfer-roundtrip-equivariant";
    rep.depth = opts.depth;
    const auto inv = inverse_transfer_detail(cov, b, v, opts);
    const auto t = transfer_operator(cov, inv.op, v, opts, inv.position);
    const PointSet region = cov.source_complement(inv.position);
    const ControlledOperator relabelled = beta_relabel(cov, t.op, b, region, inv.section);
    const ControlledOperator expected = restrict(b, region);
    const double diff = max_abs_difference(relabelled, expected);
    Check c{"transfer-after-inverse", "", inv.z_index, diff <= tol, {}, "max entry difference " + std::to_string(diff)};
    if (!c.pass)
        for (const auto& [key, blk] : expected.blocks())
            if ((blk - relabelled.block(key.first, key.second)).cwiseAbs().maxCoeff() > tol) {
                c.witnesses.push_back(key);
                break;
            }
    rep.add(std::move(c));
    rep.measure("max-difference", diff);
    return rep;
}

// --- norm bounds ------------------------------------------------------------------

/// A cover of the region off a member together with a partition subordinate
/// to it: `partition` part i sits inside the `relation`-thinning of part i.
struct NormCertificate {
    std::size_t position = 0;
    int z_index = 0;
    PointSet region;
    Entourage relation;
    CoverFamily cover;
    CoverFamily partition;
    std::size_t n() const { return cover.multiplicity(); }
};

namespace detail {

inline bool injective_on(const BranchedCovering& cov, const PointSet& part)
{
    std::vector<PointId> ys;
    for (PointId x : part)
        ys.push_back(cov(x));
    return make_point_set(ys).size() == part.size();
}

/// f^{-1}(V) cap P with both ends in the region.
inline Entourage source_relation(const BranchedCovering& cov, const Entourage& v, const PointSet& region)
{
    std::vector<Pair> out;
    for (const auto& [xp, x] : cov.connection().pairs())
        if (contains(region, xp) && contains(region, x) && v.contains(cov(xp), cov(x)))
            out.emplace_back(xp, x);
    return Entourage(std::move(out));
}

inline std::optional<NormCertificate> certificate_on(const PointSet& region, const Entourage& rel,
                                                     std::size_t max_mult, SearchOptions opts)
{
    if (region.empty())
        return std::nullopt;
    const Entourage rs = symmetrize(unite(rel, Entourage::diagonal(region)));
    const Entourage rs2 = compose(rs, rs);
    FiniteCoarseSpace sub(region, {{"U2", rs2}});
    auto cert = dimension_at_scale(sub, rs2, max_mult, SearchStrategy::Greedy, opts, "U2");
    if (!cert)
        cert = dimension_at_scale(sub, rs2, max_mult, SearchStrategy::Sweep, opts, "U2");
    if (!cert)
        return std::nullopt;
    NormCertificate out;
    out.region = region;
    out.relation = rel;
    out.cover = CoverFamily(cert->cover.parts());
    out.partition = build_partition(sub, out.cover, rs);
    return out;
}

} // namespace detail

/// Source-side certificate for the forward bound: a cover of f^{-1}(Z^c) with
/// f injective on parts and a partition with U[W^_i] in W_i for
/// U = f^{-1}(V) cap P. Searches members upward from the admissible one.
inline std::optional<NormCertificate> find_source_certificate(const BranchedCovering& cov, const Entourage& v,
                                                              std::size_t max_mult = 2, const VerifyOptions& vopts = {})
{
    const std::size_t least = detail::require_admissible(cov, v, vopts);
    SearchOptions so;
    so.depth = vopts.depth;
    so.accept = [&](const CoverFamily& w) {
        return std::all_of(w.parts().begin(), w.parts().end(),
                           [&](const PointSet& p) { return detail::injective_on(cov, p); });
    };
    for (std::size_t pos = least; pos < cov.big_family().size(); ++pos) {
        const PointSet region = cov.source_complement(pos);
        auto c = detail::certificate_on(region, detail::source_relation(cov, v, region), max_mult, so);
        if (c) {
            c->position = pos;
            c->z_index = cov.label(pos);
            return c;
        }
    }
    return std::nullopt;
}

/// Target-side certificate for the reverse bound: a cover of Z^c with V^2 as
/// Lebesgue entourage, unique transport at the scale of its bound, and a
/// partition with V[W^_i] in W_i.
inline std::optional<NormCertificate> find_target_certificate(const BranchedCovering& cov, const Entourage& v,
                                                              std::size_t max_mult = 2, const VerifyOptions& vopts = {})
{
    const std::size_t least = inverse_position(cov, v, vopts);
    for (std::size_t pos = least; pos < cov.big_family().size(); ++pos) {
        SearchOptions so;
        so.depth = vopts.depth;
        so.accept = [&, pos](const CoverFamily& w) { return lift_defect(cov, w.bound(), pos, vopts).empty(); };
        const PointSet region = cov.target_complement(pos);
        auto c = detail::certificate_on(region, restrict_both(v, region), max_mult, so);
        if (c) {
            c->position = pos;
            c->z_index = cov.label(pos);
            return c;
        }
    }
    return std::nullopt;
}

namespace detail {

/// Structural checks shared by both certificate kinds.
inline void check_certificate(VerificationReport& rep, const NormCertificate& cert, const PointSet& expected_region)
{
    rep.add({"certificate-region", "", cert.z_index, cert.region == expected_region, {},
             cert.region == expected_region ? "" : "certificate region is not the complement of the member"});
    {
        auto uncovered = set_difference(cert.region, cert.cover.union_of_parts());
        Check c{"certificate-covers", "", cert.z_index, uncovered.empty(), {}, ""};
        if (!uncovered.empty())
            c.witnesses.emplace_back(uncovered.front(), uncovered.front());
        rep.add(std::move(c));
    }
    {
        Check c{"certificate-partition", "", cert.z_index, cert.partition.size() == cert.cover.size(), {}, ""};
        if (c.pass) {
            std::vector<PointId> all;
            for (const auto& p : cert.partition.parts())
                all.insert(all.end(), p.begin(), p.end());
            std::sort(all.begin(), all.end());
            c.pass = all == cert.region;
            if (!c.pass)
                c.detail = "parts are not a partition of the region";
        } else {
            c.detail = "partition and cover are not index-aligned";
        }
        rep.add(std::move(c));
    }
    {
        Check c{"certificate-subordinate", "", cert.z_index, true, {}, ""};
        for (std::size_t i = 0; i < cert.partition.size() && c.pass; ++i)
            for (PointId x : cert.partition.parts()[i]) {
                const PointSet img = cert.relation.image_of(x);
                if (!is_subset(img, cert.cover.parts()[i])) {
                    c.pass = false;
                    c.witnesses.emplace_back(set_difference(img, cert.cover.parts()[i]).front(), x);
                    c.detail = "relation leaves the cover part " + std::to_string(i);
                    break;
                }
            }
        rep.add(std::move(c));
    }
}

} // namespace detail

/// Forward bound ||B|| <= sqrt(n) ||A|| for B = transfer(A), A restricted off
/// the certificate's member. The ratio ||B|| / ||A|| is recorded only.
inline VerificationReport norm_bound_check(const BranchedCovering& cov, const ControlledOperator& a,
                                           const Entourage& v, const NormCertificate& cert,
                                           const VerifyOptions& opts = {}, double tol = 1e-8)
{
    VerificationReport rep;
    rep.subject = "norm-bound";
    rep.depth = opts.depth;
    const auto t = transfer_operator(cov, a, v, opts, cert.position);
    detail::check_certificate(rep, cert, cov.source_complement(cert.position));
    if (!(cert.relation == detail::source_relation(cov, v, cert.region)))
        rep.add({"certificate-scale", "", cert.z_index, false, {}, "certificate relation is not f^{-1}(V) cap P"});
    {
        Check c{"certificate-injective", "", cert.z_index, true, {}, ""};
        for (const auto& p : cert.cover.parts())
            if (!detail::injective_on(cov, p)) {
                c.pass = false;
                c.witnesses.emplace_back(p.front(), p.front());
                c.detail = "f is not injective on a cover part";
                break;
            }
        rep.add(std::move(c));
    }
    const double na = op_norm(restrict(a, cov.target_complement(cert.position)));
    const double nb = op_norm(t.op);
    const double n = static_cast<double>(cert.n());
    rep.add({"forward-bound", "", cert.z_index, nb <= std::sqrt(n) * na + tol, {},
             "||B|| = " + std::to_string(nb) + ", sqrt(n)||A|| = " + std::to_string(std::sqrt(n) * na)});
    rep.measure("norm-A", na);
    rep.measure("norm-B", nb);
    rep.measure("multiplicity", n);
    if (na > 0)
        rep.measure("ratio", nb / na);
    return rep;
}

/// Reverse bound ||A|| <= sqrt(n) ||B|| for A = inverse_transfer(B), B
/// restricted off the certificate's member. The ratio ||A|| / ||B|| is recorded only.
inline VerificationReport inverse_norm_bound_check(const BranchedCovering& cov, const ControlledOperator& b,
                                                   const Entourage& v, const NormCertificate& cert,
                                                   const VerifyOptions& opts = {}, double tol = 1e-8)
{
    VerificationReport rep;
    rep.subject = "inverse-norm-bound";
    rep.depth = opts.depth;
    const auto inv = inverse_transfer_detail(cov, b, v, opts, cert.position);
    detail::check_certificate(rep, cert, cov.target_complement(cert.position));
    if (!(cert.relation == restrict_both(v, cert.region)))
        rep.add({"certificate-scale", "", cert.z_index, false, {}, "certificate relation is not V on the region"});
    {
        auto d = lift_defect(cov, cert.cover.bound(), cert.position, opts);
        Check c{"certificate-transport", "", cert.z_index, d.empty(), d.witnesses, d.detail};
        rep.add(std::move(c));
    }
    const double na = op_norm(inv.op);
    const double nb = op_norm(restrict(b, cov.source_complement(cert.position)));
    const double n = static_cast<double>(cert.n());
    rep.add({"reverse-bound", "", cert.z_index, na <= std::sqrt(n) * nb + tol, {},
             "||A|| = " + std::to_string(na) + ", sqrt(n)||B|| = " + std::to_string(std::sqrt(n) * nb)});
    rep.measure("norm-A", na);
    rep.measure("norm-B", nb);
    rep.measure("multiplicity", n);
    if (nb > 0)
        rep.measure("ratio", na / nb);
    return rep;
}

} // namespace coarse
