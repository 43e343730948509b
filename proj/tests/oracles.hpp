#pragma once

// Brute-force reference computations used by the tests. Nothing here calls
// into the library's algorithms; inputs are plain ids, pairs and matrices.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Id = std::int64_t;
using PairSet = std::set<std::pair<Id, Id>>;

inline Id cyc(Id a, Id b, Id n)
{
    Id d = ((a - b) % n + n) % n;
    return std::min(d, n - d);
}

inline PairSet cycle_pairs(Id n, Id r, Id off = 0)
{
    PairSet out;
    for (Id a = 0; a < n; ++a)
        for (Id b = 0; b < n; ++b)
            if (cyc(a, b, n) <= r)
                out.insert({off + a, off + b});
    return out;
}

inline PairSet path_pairs(Id n, Id r)
{
    PairSet out;
    for (Id a = 0; a < n; ++a)
        for (Id b = 0; b < n; ++b)
            if (std::abs(a - b) <= r)
                out.insert({a, b});
    return out;
}

inline PairSet compose(const PairSet& u, const PairSet& v)
{
    PairSet out;
    for (auto [a, b] : u)
        for (auto [c, d] : v)
            if (b == c)
                out.insert({a, d});
    return out;
}

/// B is U-bounded iff B x B lies in U.
inline bool bounded(const PairSet& u, const std::vector<Id>& s)
{
    for (Id a : s)
        for (Id b : s)
            if (!u.count({a, b}))
                return false;
    return true;
}

/// u with its inverse and the diagonal of pts added.
inline PairSet closed(const PairSet& u, const std::vector<Id>& pts)
{
    PairSet out = u;
    for (auto [a, b] : u)
        out.insert({b, a});
    for (Id x : pts)
        out.insert({x, x});
    return out;
}

/// Every nonempty subset of `pts` (at most ~20 points).
inline std::vector<std::vector<Id>> subsets(const std::vector<Id>& pts)
{
    std::vector<std::vector<Id>> out;
    const std::size_t n = pts.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<Id> s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1)
                s.push_back(pts[i]);
        out.push_back(std::move(s));
    }
    return out;
}

inline bool inside_some(const std::vector<Id>& s, const std::vector<std::vector<Id>>& parts)
{
    return std::any_of(parts.begin(), parts.end(), [&](const std::vector<Id>& p) {
        return std::all_of(s.begin(), s.end(), [&](Id x) { return std::find(p.begin(), p.end(), x) != p.end(); });
    });
}

/// Lebesgue by exhaustion over all subsets.
inline bool lebesgue_exhaustive(const PairSet& u, const std::vector<Id>& pts, const std::vector<std::vector<Id>>& parts)
{
    for (const auto& s : subsets(pts))
        if (bounded(u, s) && !inside_some(s, parts))
            return false;
    return true;
}

/// Maximal u-bounded sets: cliques among points with (x, x) in u, joined
/// when related both ways (plain Bron-Kerbosch).
inline std::vector<std::vector<Id>> maximal_cliques(const PairSet& u, const std::vector<Id>& pts)
{
    std::map<Id, std::set<Id>> adj;
    for (Id a : pts)
        if (u.count({a, a}))
            adj[a];
    for (auto [a, b] : u)
        if (a != b && adj.count(a) && adj.count(b) && u.count({b, a})) {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    std::vector<std::vector<Id>> out;
    std::function<void(std::vector<Id>, std::set<Id>, std::set<Id>)> bk = [&](std::vector<Id> r, std::set<Id> p,
                                                                              std::set<Id> x) {
        if (p.empty() && x.empty()) {
            std::sort(r.begin(), r.end());
            out.push_back(r);
            return;
        }
        for (auto it = p.begin(); it != p.end();) {
            Id v = *it;
            std::set<Id> np, nx;
            for (Id w : p)
                if (adj[v].count(w))
                    np.insert(w);
            for (Id w : x)
                if (adj[v].count(w))
                    nx.insert(w);
            auto r2 = r;
            r2.push_back(v);
            bk(r2, np, nx);
            it = p.erase(it);
            x.insert(v);
        }
    };
    std::set<Id> all;
    for (const auto& [v, n] : adj)
        all.insert(v);
    bk({}, all, {});
    return out;
}

inline bool lebesgue_by_cliques(const PairSet& u, const std::vector<Id>& pts, const std::vector<std::vector<Id>>& parts)
{
    for (const auto& c : maximal_cliques(u, pts))
        if (!inside_some(c, parts))
            return false;
    return true;
}

inline std::size_t multiplicity(const std::vector<std::vector<Id>>& parts)
{
    std::map<Id, std::size_t> count;
    std::size_t best = 0;
    for (const auto& p : parts)
        for (Id x : std::set<Id>(p.begin(), p.end()))
            best = std::max(best, ++count[x]);
    return best;
}

/// Connected components of the symmetric closure of u over pts.
inline std::vector<std::vector<Id>> components(const PairSet& u, const std::vector<Id>& pts)
{
    std::map<Id, Id> label;
    for (Id x : pts)
        label[x] = x;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto [a, b] : u) {
            Id m = std::min(label[a], label[b]);
            if (label[a] != m || label[b] != m) {
                label[a] = label[b] = m;
                changed = true;
            }
        }
    }
    std::map<Id, std::vector<Id>> groups;
    for (Id x : pts)
        groups[label[x]].push_back(x);
    std::vector<std::vector<Id>> out;
    for (auto& [k, g] : groups)
        out.push_back(g);
    return out;
}

/// A multiplicity-1 cover with Lebesgue entourage u exists iff every
/// component of u is a part, i.e. iff each component is bounded by `allowed`.
inline bool mult_one_exists(const PairSet& u, const std::vector<Id>& pts, const PairSet& allowed)
{
    for (const auto& c : components(u, pts))
        for (Id a : c)
            for (Id b : c)
                if (a != b && !allowed.count({a, b}))
                    return false;
    return true;
}

inline double spectral_norm(const Eigen::MatrixXcd& m)
{
    if (m.size() == 0)
        return 0.0;
    // largest eigenvalue of the smaller Gram matrix
    const Eigen::MatrixXcd g = m.rows() < m.cols() ? Eigen::MatrixXcd(m * m.adjoint()) : Eigen::MatrixXcd(m.adjoint() * m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Tower arithmetic: sheet sizes ns, deck order m.
struct TowerShape {
    int m;
    std::vector<Id> ns;

    Id y_offset(std::size_t k) const
    {
        Id o = 0;
        for (std::size_t i = 0; i < k; ++i)
            o += ns[i];
        return o;
    }
    Id x_offset(std::size_t k) const { return m * y_offset(k); }

    /// max{k : n_k <= 2r}, -1 when empty.
    int expected_index(Id r) const
    {
        int out = -1;
        for (std::size_t k = 0; k < ns.size(); ++k)
            if (ns[k] <= 2 * r)
                out = static_cast<int>(k);
        return out;
    }

    /// Largest sheet index at which some condition fails at radius r, found
    /// from the definitions: each edge of radius r has exactly one P-lift,
    /// that lift lies within `reach` of x, and radius-r pairs of X lie in P.
    int brute_index(Id r, Id reach) const
    {
        int worst = -1;
        for (std::size_t k = 0; k < ns.size(); ++k) {
            const Id n = ns[k], big = m * n;
            bool ok = true;
            for (Id x = 0; x < big && ok; ++x) {
                for (Id d = -r; d <= r && ok; ++d) {
                    const Id yp = ((x + d) % n + n) % n;
                    int lifts = 0;
                    for (Id xp = 0; xp < big; ++xp)
                        if (xp % n == yp && 2 * cyc(x, xp, big) < n) {
                            ++lifts;
                            ok = ok && cyc(x, xp, big) <= reach;
                        }
                    ok = ok && lifts == 1;
                }
                for (Id xp = 0; xp < big && ok; ++xp)
                    if (cyc(x, xp, big) <= r)
                        ok = 2 * cyc(x, xp, big) < n;
            }
            if (!ok)
                worst = static_cast<int>(k);
        }
        return worst;
    }

    /// Largest sheet index carrying a Rips simplex of radius r (at most
    /// max_dim + 1 vertices) with a vertex lift through which the number of
    /// lifts at radius r upstairs is not exactly one.
    int rips_lift_index(Id r, int max_dim) const
    {
        int worst = -1;
        for (std::size_t k = 0; k < ns.size(); ++k) {
            const Id n = ns[k], big = m * n;
            bool ok = true;
            std::vector<Id> pts(n);
            for (Id i = 0; i < n; ++i)
                pts[i] = i;
            for (const auto& sigma : subsets(pts)) {
                if (!ok)
                    break;
                if (sigma.size() < 2 || static_cast<int>(sigma.size()) > max_dim + 1)
                    continue;
                bool simplex = true;
                for (Id a : sigma)
                    for (Id b : sigma)
                        simplex = simplex && cyc(a, b, n) <= r;
                if (!simplex)
                    continue;
                for (std::size_t i0 = 0; i0 < sigma.size() && ok; ++i0)
                    for (Id j0 = 0; j0 < m && ok; ++j0) {
                        // every assignment of sheets to the other vertices
                        std::size_t found = 0;
                        const std::size_t others = sigma.size() - 1;
                        std::size_t total = 1;
                        for (std::size_t i = 0; i < others; ++i)
                            total *= static_cast<std::size_t>(m);
                        for (std::size_t code = 0; code < total; ++code) {
                            std::vector<Id> lift;
                            std::size_t c = code;
                            for (std::size_t i = 0; i < sigma.size(); ++i) {
                                if (i == i0) {
                                    lift.push_back(sigma[i] + j0 * n);
                                } else {
                                    lift.push_back(sigma[i] + static_cast<Id>(c % m) * n);
                                    c /= m;
                                }
                            }
                            bool close = true;
                            for (Id a : lift)
                                for (Id b : lift)
                                    close = close && cyc(a, b, big) <= r;
                            found += close;
                        }
                        ok = found == 1;
                    }
            }
            if (!ok)
                worst = static_cast<int>(k);
        }
        return worst;
    }
};

} // namespace oracle
