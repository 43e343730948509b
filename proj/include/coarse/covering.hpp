#pragma once

// Branched coarse coverings: data, axiom verification, parallel transport,
// connection comparison, pullbacks and deck-group checks.

#include <functional>
#include <memory>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coarse/group.hpp"
#include "coarse/report.hpp"
#include "coarse/space.hpp"

namespace coarse {

struct VerifyOptions {
    int depth = 3;                        // composition depth standing in for "coarse entourage"
    std::optional<PointSet> source_mask;  // restrict checks to these source points (windowed models)
};

class BranchedCovering {
public:
    BranchedCovering() = default;

    BranchedCovering(FiniteCoarseSpace source, FiniteCoarseSpace target, std::map<PointId, PointId> f,
                     Entourage connection, BigFamily big_family, std::optional<GroupAction> deck = std::nullopt)
        : BranchedCovering(std::make_shared<const FiniteCoarseSpace>(std::move(source)),
                           std::make_shared<const FiniteCoarseSpace>(std::move(target)), std::move(f),
                           std::move(connection), std::move(big_family), std::move(deck))
    {
    }

    BranchedCovering(SpacePtr source, SpacePtr target, std::map<PointId, PointId> f, Entourage connection,
                     BigFamily big_family, std::optional<GroupAction> deck = std::nullopt)
        : source_(std::move(source)), target_(std::move(target)), f_(std::move(f)),
          connection_(std::move(connection)), big_family_(std::move(big_family)), deck_(std::move(deck))
    {
        if (!source_ || !target_)
            fail(ErrorKind::Input, "covering needs both spaces");
        if (f_.size() != source_->size())
            fail(ErrorKind::Input, "map is not total on the source");
        for (const auto& [x, y] : f_) {
            if (!source_->has_point(x))
                fail(ErrorKind::Input, "map defined at unknown source point " + std::to_string(x));
            if (!target_->has_point(y))
                fail(ErrorKind::Input, "map sends " + std::to_string(x) + " to unknown target point " +
                                           std::to_string(y));
            fibres_[y].push_back(x);
        }
        for (auto& [y, fib] : fibres_)
            fib = make_point_set(std::move(fib));
        source_->check_entourage(connection_, "connection");
        if (big_family_.empty())
            fail(ErrorKind::Input, "big family needs at least one member");
        for (const auto& m : big_family_.members())
            target_->check_subset(m.subset, "big family member " + std::to_string(m.index));
        if (deck_) {
            for (const auto& p : deck_->permutations())
                if (p.size() != source_->size())
                    fail(ErrorKind::Input, "deck action is not defined on every source point");
            for (const auto& p : deck_->permutations())
                for (const auto& [x, gx] : p)
                    if (!source_->has_point(x))
                        fail(ErrorKind::Input, "deck action references unknown point");
        }
    }

    const FiniteCoarseSpace& source() const { return *source_; }
    const FiniteCoarseSpace& target() const { return *target_; }
    const SpacePtr& source_ptr() const { return source_; }
    const SpacePtr& target_ptr() const { return target_; }
    const std::map<PointId, PointId>& map() const { return f_; }
    const Entourage& connection() const { return connection_; }
    const BigFamily& big_family() const { return big_family_; }
    const std::optional<GroupAction>& deck() const { return deck_; }

    PointId operator()(PointId x) const
    {
        auto it = f_.find(x);
        if (it == f_.end())
            fail(ErrorKind::Input, "map undefined at " + std::to_string(x));
        return it->second;
    }

    const PointSet& fibre(PointId y) const
    {
        static const PointSet empty;
        auto it = fibres_.find(y);
        return it == fibres_.end() ? empty : it->second;
    }

    PointSet preimage(const PointSet& s) const
    {
        std::vector<PointId> out;
        for (PointId y : s) {
            const auto& fib = fibre(y);
            out.insert(out.end(), fib.begin(), fib.end());
        }
        return make_point_set(std::move(out));
    }

    /// f^{-1}(V) = {(x', x) : (f x', f x) in V}.
    Entourage preimage(const Entourage& v) const
    {
        std::vector<Pair> out;
        for (const auto& [yp, y] : v.pairs())
            for (PointId xp : fibre(yp))
                for (PointId x : fibre(y))
                    out.emplace_back(xp, x);
        return Entourage(std::move(out));
    }

    Entourage image(const Entourage& u) const
    {
        std::vector<Pair> out;
        for (const auto& [a, b] : u.pairs())
            out.emplace_back((*this)(a), (*this)(b));
        return Entourage(std::move(out));
    }

    PointSet image(const PointSet& s) const
    {
        std::vector<PointId> out;
        for (PointId x : s)
            out.push_back((*this)(x));
        return make_point_set(std::move(out));
    }

    /// Z^c for the member at position `pos`.
    PointSet target_complement(std::size_t pos) const { return big_family_.complement(pos, target_->points()); }
    /// f^{-1}(Z^c) for the member at position `pos`.
    PointSet source_complement(std::size_t pos) const { return preimage(target_complement(pos)); }

    int label(std::size_t pos) const { return big_family_[pos].index; }

    /// P-lifts of the edge ending at f(x) and starting at y': fibre(y') cap P[x].
    PointSet lifts(PointId yp, PointId x) const
    {
        return set_intersection(fibre(yp), connection_.image_of(x));
    }

    friend bool operator==(const BranchedCovering& a, const BranchedCovering& b)
    {
        return *a.source_ == *b.source_ && *a.target_ == *b.target_ && a.f_ == b.f_ &&
               a.connection_ == b.connection_ && a.big_family_ == b.big_family_ && a.deck_ == b.deck_;
    }

private:
    SpacePtr source_;
    SpacePtr target_;
    std::map<PointId, PointId> f_;
    Entourage connection_;
    BigFamily big_family_;
    std::optional<GroupAction> deck_;
    std::map<PointId, PointSet> fibres_;
};

// --- single-member conditions ------------------------------------------------
//
// Each returns the witnesses of a failure at the member at position `pos`
// (empty when the condition holds). Every condition is monotone in the member.

namespace detail {

inline bool in_mask(const VerifyOptions& opts, PointId x)
{
    return !opts.source_mask || contains(*opts.source_mask, x);
}

} // namespace detail

struct Defect {
    std::vector<Pair> witnesses;
    std::string detail;
    bool empty() const { return witnesses.empty(); }
};

/// (3a.i): unique P-lift for every (y', y) in V_{Z^c} and x over y.
inline Defect lift_defect(const BranchedCovering& cov, const Entourage& v, std::size_t pos,
                          const VerifyOptions& opts = {})
{
    const PointSet zc = cov.target_complement(pos);
    for (const auto& [yp, y] : v.pairs()) {
        if (!contains(zc, y))
            continue;
        for (PointId x : cov.fibre(y)) {
            if (!detail::in_mask(opts, x))
                continue;
            auto l = cov.lifts(yp, x);
            if (l.size() != 1) {
                Defect d;
                d.witnesses = {{yp, y}, {x, static_cast<PointId>(l.size())}};
                d.detail = "edge (" + std::to_string(yp) + "," + std::to_string(y) + ") at x=" +
                           std::to_string(x) + " has " + std::to_string(l.size()) + " P-lifts";
                return d;
            }
        }
    }
    return {};
}

/// (3a.ii): P cap f^{-1}(V_{Z^c}) inside `generated_x`.
inline Defect control_defect(const BranchedCovering& cov, const Entourage& v, std::size_t pos,
                             const Entourage& generated_x, const VerifyOptions& opts = {})
{
    const PointSet zc = cov.target_complement(pos);
    for (const auto& [yp, y] : v.pairs()) {
        if (!contains(zc, y))
            continue;
        for (PointId x : cov.fibre(y)) {
            if (!detail::in_mask(opts, x))
                continue;
            for (PointId xp : cov.lifts(yp, x))
                if (!generated_x.contains(xp, x)) {
                    Defect d;
                    d.witnesses = {{xp, x}};
                    d.detail = "pair (" + std::to_string(xp) + "," + std::to_string(x) +
                               ") of P over V is not in the depth-bounded structure";
                    return d;
                }
        }
    }
    return {};
}

/// (3b): U_{f^{-1}(Z^c)} inside P.
inline Defect connection_defect(const BranchedCovering& cov, const Entourage& u, std::size_t pos,
                                const VerifyOptions& opts = {})
{
    const PointSet region = cov.source_complement(pos);
    for (const auto& [xp, x] : u.pairs()) {
        if (!contains(region, x) || !detail::in_mask(opts, x))
            continue;
        if (!cov.connection().contains(xp, x)) {
            Defect d;
            d.witnesses = {{xp, x}};
            d.detail = "pair (" + std::to_string(xp) + "," + std::to_string(x) + ") is not in P";
            return d;
        }
    }
    return {};
}

struct IndexSearch {
    std::optional<std::size_t> position; // first member where the condition holds
    Defect last_defect;                  // defect at the last member when none holds
};

inline IndexSearch first_member(const BranchedCovering& cov, const std::function<Defect(std::size_t)>& defect)
{
    IndexSearch out;
    for (std::size_t pos = 0; pos < cov.big_family().size(); ++pos) {
        Defect d = defect(pos);
        if (d.empty()) {
            out.position = pos;
            return out;
        }
        out.last_defect = std::move(d);
    }
    return out;
}

inline Check index_check(const BranchedCovering& cov, const std::string& condition, const std::string& scale,
                         const IndexSearch& s)
{
    Check c;
    c.condition = condition;
    c.scale = scale;
    if (s.position) {
        c.z_index = cov.label(*s.position);
    } else {
        c.pass = false;
        c.witnesses = s.last_defect.witnesses;
        c.detail = "no member works; at the last member: " + s.last_defect.detail;
    }
    return c;
}

/// Position of the first member where (3a.i) holds for V; falls back to the
/// last member when none does.
inline std::size_t transport_position(const BranchedCovering& cov, const Entourage& v,
                                      const VerifyOptions& opts = {})
{
    auto s = first_member(cov, [&](std::size_t pos) { return lift_defect(cov, v, pos, opts); });
    return s.position.value_or(cov.big_family().size() - 1);
}

/// Position of the first member where (3a.i) and (3a.ii) hold for V.
inline std::optional<std::size_t> admissible_position(const BranchedCovering& cov, const Entourage& v,
                                                      const VerifyOptions& opts = {})
{
    const Entourage gx = cov.source().generated(opts.depth);
    auto s = first_member(cov, [&](std::size_t pos) {
        Defect d = lift_defect(cov, v, pos, opts);
        return d.empty() ? control_defect(cov, v, pos, gx, opts) : d;
    });
    return s.position;
}

// --- the verifier --------------------------------------------------------------

inline VerificationReport verify_branched_covering(const BranchedCovering& cov, const VerifyOptions& opts = {})
{
    VerificationReport rep;
    rep.subject = "branched-covering";
    rep.depth = opts.depth;
    const Entourage gx = cov.source().generated(opts.depth);
    const Entourage gy = cov.target().generated(opts.depth);

    rep.add({"finite-fibres", "", std::nullopt, true, {}, "finite model"});
    {
        Check c{"surjective", "", std::nullopt, true, {}, ""};
        const PointSet outside = cov.big_family().complement(cov.big_family().size() - 1, cov.target().points());
        for (PointId y : outside)
            if (cov.fibre(y).empty()) {
                c.pass = false;
                c.witnesses.emplace_back(y, y);
            }
        if (!c.pass)
            c.detail = "target points off the last member with empty fibre";
        rep.add(std::move(c));
    }
    for (const auto& gen : cov.source().entourages()) {
        Check c{"controlled", gen.name, std::nullopt, true, {}, ""};
        auto missing = cov.image(gen.relation).missing_from(gy);
        if (!missing.empty()) {
            c.pass = false;
            c.witnesses.push_back(missing.front());
            c.detail = "f(" + gen.name + ") leaves the depth-bounded structure of the target";
        }
        rep.add(std::move(c));
    }

    std::set<std::string> handled;
    for (const auto& gen : cov.target().entourages()) {
        const auto& v = gen.relation;
        auto si = first_member(cov, [&](std::size_t pos) { return lift_defect(cov, v, pos, opts); });
        auto sii = first_member(cov, [&](std::size_t pos) { return control_defect(cov, v, pos, gx, opts); });
        rep.add(index_check(cov, "3a.i", gen.name, si));
        rep.add(index_check(cov, "3a.ii", gen.name, sii));
        std::vector<IndexSearch> parts{si, sii};
        if (cov.source().has_entourage(gen.name)) {
            const Entourage u = cov.source().entourage(gen.name);
            auto sb = first_member(cov, [&](std::size_t pos) { return connection_defect(cov, u, pos, opts); });
            rep.add(index_check(cov, "3b", gen.name, sb));
            parts.push_back(sb);
        }
        handled.insert(gen.name);
        Check summary{"index", gen.name, std::nullopt, true, {}, ""};
        std::size_t worst = 0;
        for (const auto& s : parts) {
            if (!s.position) {
                summary.pass = false;
                summary.witnesses = s.last_defect.witnesses;
                summary.detail = s.last_defect.detail;
                break;
            }
            worst = std::max(worst, *s.position);
        }
        if (summary.pass)
            summary.z_index = cov.label(worst);
        rep.add(std::move(summary));
    }
    for (const auto& gen : cov.source().entourages()) {
        if (handled.count(gen.name))
            continue;
        auto sb = first_member(cov, [&](std::size_t pos) { return connection_defect(cov, gen.relation, pos, opts); });
        rep.add(index_check(cov, "3b", gen.name, sb));
        Check summary = index_check(cov, "index", gen.name, sb);
        rep.add(std::move(summary));
    }
    return rep;
}

// --- parallel transport --------------------------------------------------------

/// Parallel transport at scale V on the complement of the first member where
/// unique lifting holds for V.
class Transport {
public:
    Transport(const BranchedCovering& cov, Entourage v, const VerifyOptions& opts = {})
        : cov_(&cov), v_(std::move(v)), pos_(transport_position(cov, v_, opts)), region_(cov.target_complement(pos_))
    {
    }

    int z_index() const { return cov_->label(pos_); }
    std::size_t position() const { return pos_; }
    const PointSet& region() const { return region_; }
    const Entourage& scale() const { return v_; }

    /// Phi_{y', y}(x).
    PointId step(PointId yp, PointId y, PointId x) const
    {
        if ((*cov_)(x) != y)
            fail(ErrorKind::Input, "point " + std::to_string(x) + " is not over " + std::to_string(y));
        if (!v_.contains(yp, y))
            fail(ErrorKind::Input, "edge (" + std::to_string(yp) + "," + std::to_string(y) + ") is not in V");
        if (!contains(region_, y))
            fail(ErrorKind::EdgeInBranchLocus, "edge (" + std::to_string(yp) + "," + std::to_string(y) +
                                                   ") ends inside member " + std::to_string(z_index()));
        auto l = cov_->lifts(yp, x);
        if (l.empty())
            fail(ErrorKind::NoLift, "no P-lift of (" + std::to_string(yp) + "," + std::to_string(y) + ") at " +
                                        std::to_string(x));
        if (l.size() > 1)
            fail(ErrorKind::NonUniqueLift, std::to_string(l.size()) + " P-lifts of (" + std::to_string(yp) + "," +
                                               std::to_string(y) + ") at " + std::to_string(x));
        return l.front();
    }

    /// Phi along y_0, y_1, ..., y_n starting at x over y_0.
    PointId path(const std::vector<PointId>& ys, PointId x) const
    {
        if (ys.empty())
            fail(ErrorKind::Input, "empty path");
        if ((*cov_)(x) != ys.front())
            fail(ErrorKind::Input, "start point is not over the first path vertex");
        for (std::size_t i = 1; i < ys.size(); ++i)
            x = step(ys[i], ys[i - 1], x);
        return x;
    }

private:
    const BranchedCovering* cov_;
    Entourage v_;
    std::size_t pos_;
    PointSet region_;
};

inline PointId parallel_transport_step(const BranchedCovering& cov, PointId yp, PointId y, PointId x,
                                       const Entourage& v, const VerifyOptions& opts = {})
{
    return Transport(cov, v, opts).step(yp, y, x);
}

inline PointId parallel_transport_path(const BranchedCovering& cov, const std::vector<PointId>& path, PointId x,
                                       const Entourage& v, const VerifyOptions& opts = {})
{
    return Transport(cov, v, opts).path(path, x);
}

// --- connections ---------------------------------------------------------------

struct AgreementResult {
    std::optional<int> z_index;
    std::vector<Pair> witnesses; // a pair in exactly one of the two restrictions
};

/// Minimal member with P cap f^{-1}(V_{Z^c}) = P' cap f^{-1}(V_{Z^c}).
inline AgreementResult connection_agreement(const BranchedCovering& cov, const Entourage& other,
                                            const Entourage& v)
{
    cov.source().check_entourage(other, "second connection");
    AgreementResult out;
    for (std::size_t pos = 0; pos < cov.big_family().size(); ++pos) {
        const PointSet zc = cov.target_complement(pos);
        std::optional<Pair> bad;
        for (const auto& [yp, y] : v.pairs()) {
            if (!contains(zc, y))
                continue;
            for (PointId x : cov.fibre(y)) {
                for (PointId xp : cov.fibre(yp))
                    if (cov.connection().contains(xp, x) != other.contains(xp, x)) {
                        bad = Pair{xp, x};
                        break;
                    }
                if (bad)
                    break;
            }
            if (bad)
                break;
        }
        if (!bad) {
            out.z_index = cov.label(pos);
            out.witnesses.clear();
            return out;
        }
        out.witnesses = {*bad};
    }
    return out;
}

// --- pullbacks -----------------------------------------------------------------

struct Pullback {
    BranchedCovering covering;
    std::map<PointId, Pair> coordinates; // new id -> (y', x)
};

/// Pullback along h: Y' -> Y. Points of X' are the pairs (y', x) with h(y') = f(x),
/// numbered in lexicographic order.
inline Pullback pullback_covering(const BranchedCovering& cov, const std::map<PointId, PointId>& h,
                                  const FiniteCoarseSpace& new_target, const VerifyOptions& opts = {})
{
    if (h.size() != new_target.size())
        fail(ErrorKind::Input, "h is not total on the new target");
    for (const auto& [yp, y] : h) {
        if (!new_target.has_point(yp))
            fail(ErrorKind::Input, "h defined at unknown point " + std::to_string(yp));
        if (!cov.target().has_point(y))
            fail(ErrorKind::Input, "h sends " + std::to_string(yp) + " outside the target");
    }
    const Entourage gy = cov.target().generated(opts.depth);
    for (const auto& gen : new_target.entourages())
        for (const auto& [a, b] : gen.relation.pairs())
            if (!gy.contains(h.at(a), h.at(b)))
                fail(ErrorKind::Hypothesis, "h is not controlled at " + gen.name);

    std::map<Pair, PointId> id_of;
    std::map<PointId, Pair> coords;
    std::map<PointId, std::vector<PointId>> h_fibre;
    PointId next = 0;
    for (PointId yp : new_target.points()) {
        h_fibre[h.at(yp)].push_back(yp);
        for (PointId x : cov.fibre(h.at(yp))) {
            id_of.emplace(Pair{yp, x}, next);
            coords.emplace(next, Pair{yp, x});
            ++next;
        }
    }
    std::vector<PointId> ids;
    for (const auto& [id, c] : coords)
        ids.push_back(id);

    std::vector<std::string> names;
    for (const auto& e : cov.source().entourages())
        names.push_back(e.name);
    for (const auto& e : new_target.entourages())
        if (std::find(names.begin(), names.end(), e.name) == names.end())
            names.push_back(e.name);

    std::vector<NamedEntourage> gens;
    for (const auto& name : names) {
        Entourage ey = new_target.diagonal();
        if (new_target.has_entourage(name))
            ey = unite(ey, new_target.entourage(name));
        Entourage ex = cov.source().diagonal();
        if (cov.source().has_entourage(name))
            ex = unite(ex, cov.source().entourage(name));
        std::vector<Pair> pairs;
        for (const auto& [id, c] : coords) {
            const auto& [y1, x1] = c;
            for (PointId y2 : ey.preimage_of(y1))
                for (PointId x2 : ex.preimage_of(x1)) {
                    auto it = id_of.find(Pair{y2, x2});
                    if (it != id_of.end())
                        pairs.emplace_back(id, it->second);
                }
        }
        gens.push_back({name, Entourage(std::move(pairs))});
    }

    std::vector<Pair> p;
    for (const auto& [id, c] : coords)
        for (PointId x2 : cov.connection().preimage_of(c.second))
            for (PointId y2 : h_fibre[cov(x2)])
                p.emplace_back(id, id_of.at(Pair{y2, x2}));

    std::map<PointId, PointId> fnew;
    for (const auto& [id, c] : coords)
        fnew.emplace(id, c.first);

    std::vector<BigFamilyMember> members;
    for (const auto& m : cov.big_family().members()) {
        std::vector<PointId> pre;
        for (const auto& [yp, y] : h)
            if (contains(m.subset, y))
                pre.push_back(yp);
        members.push_back({m.index, make_point_set(std::move(pre))});
    }

    std::optional<GroupAction> deck;
    if (cov.deck()) {
        std::vector<std::map<PointId, PointId>> perms;
        for (int g = 0; g < cov.deck()->group().size(); ++g) {
            std::map<PointId, PointId> perm;
            for (const auto& [id, c] : coords)
                perm.emplace(id, id_of.at(Pair{c.first, cov.deck()->act(g, c.second)}));
            perms.push_back(std::move(perm));
        }
        deck = GroupAction(cov.deck()->group(), std::move(perms), make_point_set(ids));
    }

    FiniteCoarseSpace xs(ids, std::move(gens));
    return {BranchedCovering(std::move(xs), new_target, std::move(fnew), Entourage(std::move(p)),
                             BigFamily(std::move(members)), std::move(deck)),
            std::move(coords)};
}

// --- deck groups -----------------------------------------------------------------

/// First member over whose complement G acts freely and transitively on fibres.
inline IndexSearch free_transitive_search(const BranchedCovering& cov)
{
    const auto& act = *cov.deck();
    return first_member(cov, [&](std::size_t pos) {
        for (PointId y : cov.target_complement(pos)) {
            const auto& fib = cov.fibre(y);
            for (PointId x : fib) {
                auto stab = act.stabilizer(x);
                if (stab.size() > 1) {
                    int g = stab[0] == act.group().identity() ? stab[1] : stab[0];
                    return Defect{{{g, x}}, "element " + std::to_string(g) + " fixes " + std::to_string(x)};
                }
                if (act.orbit(x) != fib) {
                    PointId other = set_difference(fib, act.orbit(x)).front();
                    return Defect{{{x, other}}, "points " + std::to_string(x) + " and " + std::to_string(other) +
                                                    " of one fibre lie in different orbits"};
                }
            }
        }
        return Defect{};
    });
}

inline VerificationReport verify_G_covering(const BranchedCovering& cov)
{
    VerificationReport rep;
    rep.subject = "G-covering";
    if (!cov.deck()) {
        rep.add({"deck-present", "", std::nullopt, false, {}, "covering has no deck action"});
        return rep;
    }
    const auto& act = *cov.deck();
    rep.add({"deck-present", "", std::nullopt, true, {}, ""});
    {
        Check c{"homomorphism", "", std::nullopt, true, {}, ""};
        if (auto d = act.homomorphism_defect()) {
            auto [g, h, x] = *d;
            c.pass = false;
            c.witnesses = {{g, h}, {x, x}};
            c.detail = "(gh)x != g(hx)";
        }
        rep.add(std::move(c));
    }
    {
        Check c{"f-invariant", "", std::nullopt, true, {}, ""};
        for (int g = 0; g < act.group().size() && c.pass; ++g)
            for (PointId x : cov.source().points())
                if (cov(act.act(g, x)) != cov(x)) {
                    c.pass = false;
                    c.witnesses = {{g, x}};
                    c.detail = "f(gx) != f(x)";
                    break;
                }
        rep.add(std::move(c));
    }
    {
        Check c{"P-invariant", "", std::nullopt, true, {}, ""};
        for (int g = 0; g < act.group().size() && c.pass; ++g)
            for (const auto& [xp, x] : cov.connection().pairs())
                if (!cov.connection().contains(act.act(g, xp), act.act(g, x))) {
                    c.pass = false;
                    c.witnesses = {{xp, x}, {g, g}};
                    c.detail = "g P is not P";
                    break;
                }
        rep.add(std::move(c));
    }
    rep.add(index_check(cov, "free-transitive", "", free_transitive_search(cov)));
    return rep;
}

/// Empty-big-family case: f restricted to each coarse component of X is an
/// isomorphism of relations onto a coarse component of Y.
inline VerificationReport is_coarse_covering(const BranchedCovering& cov)
{
    VerificationReport rep;
    rep.subject = "coarse-covering";
    {
        bool empty = std::all_of(cov.big_family().members().begin(), cov.big_family().members().end(),
                                 [](const BigFamilyMember& m) { return m.subset.empty(); });
        rep.add({"empty-big-family", "", std::nullopt, empty, {}, empty ? "" : "big family is not (emptyset)"});
    }
    const auto ycomps = coarse_components(cov.target());
    for (const auto& comp : coarse_components(cov.source())) {
        Check c{"component-isomorphism", "", std::nullopt, true, {}, ""};
        std::map<PointId, PointId> seen;
        for (PointId x : comp) {
            auto [it, fresh] = seen.emplace(cov(x), x);
            if (!fresh) {
                c.pass = false;
                c.witnesses = {{it->second, x}};
                c.detail = "f is not injective on the component of " + std::to_string(comp.front());
                break;
            }
        }
        if (c.pass) {
            const PointSet img = cov.image(comp);
            if (std::find(ycomps.begin(), ycomps.end(), img) == ycomps.end()) {
                c.pass = false;
                c.witnesses = {{comp.front(), cov(comp.front())}};
                c.detail = "image of the component of " + std::to_string(comp.front()) + " is not a component";
            }
        }
        for (const auto& gen : cov.source().entourages()) {
            if (!c.pass || !cov.target().has_entourage(gen.name))
                continue;
            const Entourage v = cov.target().entourage(gen.name);
            for (PointId a : comp) {
                for (PointId b : comp)
                    if (gen.relation.contains(a, b) != v.contains(cov(a), cov(b))) {
                        c.pass = false;
                        c.witnesses = {{a, b}};
                        c.detail = "relation " + gen.name + " is not preserved and reflected";
                        break;
                    }
                if (!c.pass)
                    break;
            }
        }
        rep.add(std::move(c));
    }
    return rep;
}

} // namespace coarse
