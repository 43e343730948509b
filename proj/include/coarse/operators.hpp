#pragma once

// Controlled objects and operators: sparse block matrices over a finite
// coarse space, their algebra, norms, equivariance and ghost measures.

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coarse/group.hpp"
#include "coarse/space.hpp"

namespace coarse {

using Complex = std::complex<double>;
using Block = Eigen::MatrixXcd;

/// (group element, point) key of a cocycle value rho_{g;x}: N(x) -> N(gx).
using CocycleKey = std::pair<int, PointId>;

class ControlledObject {
public:
    ControlledObject() = default;

    ControlledObject(SpacePtr space, std::map<PointId, int> dims) : space_(std::move(space)), dims_(std::move(dims))
    {
        if (!space_)
            fail(ErrorKind::Input, "object needs a space");
        for (const auto& [x, d] : dims_) {
            if (!space_->has_point(x))
                fail(ErrorKind::Input, "dimension given at unknown point " + std::to_string(x));
            if (d < 0)
                fail(ErrorKind::Input, "negative fibre dimension at " + std::to_string(x));
        }
        for (auto it = dims_.begin(); it != dims_.end();)
            it = it->second == 0 ? dims_.erase(it) : std::next(it);
    }

    /// Equivariant object. Missing cocycle values default to the identity.
    /// Checks measure equivariance, shapes, unitarity and the cocycle identity.
    ControlledObject(SpacePtr space, std::map<PointId, int> dims, GroupAction action,
                     std::map<CocycleKey, Block> cocycle, double tol = 1e-10)
        : ControlledObject(std::move(space), std::move(dims))
    {
        action_ = std::move(action);
        const auto& grp = action_->group();
        for (int g = 0; g < grp.size(); ++g)
            for (PointId x : space_->points()) {
                const PointId gx = action_->act(g, x);
                if (dim(gx) != dim(x))
                    fail(ErrorKind::NotEquivariant, "fibre dimension changes along the action at " + std::to_string(x));
                if (dim(x) == 0)
                    continue;
                auto it = cocycle.find({g, x});
                Block r = it == cocycle.end() ? Block::Identity(dim(x), dim(x)) : it->second;
                if (r.rows() != dim(gx) || r.cols() != dim(x))
                    fail(ErrorKind::ShapeMismatch, "cocycle block has the wrong shape");
                if ((r.adjoint() * r - Block::Identity(dim(x), dim(x))).cwiseAbs().maxCoeff() > tol)
                    fail(ErrorKind::NotEquivariant, "cocycle value is not unitary");
                rho_[{g, x}] = std::move(r);
            }
        for (int g = 0; g < grp.size(); ++g)
            for (int h = 0; h < grp.size(); ++h)
                for (const auto& [x, d] : dims_) {
                    Block lhs = rho({grp.mul(g, h), x});
                    Block rhs = rho({g, action_->act(h, x)}) * rho({h, x});
                    if ((lhs - rhs).norm() > tol)
                        fail(ErrorKind::NotEquivariant, "cocycle identity fails at point " + std::to_string(x));
                }
    }

    const SpacePtr& space() const { return space_; }
    const std::map<PointId, int>& dims() const { return dims_; }
    int dim(PointId x) const
    {
        auto it = dims_.find(x);
        return it == dims_.end() ? 0 : it->second;
    }
    int total_dim() const
    {
        int t = 0;
        for (const auto& [x, d] : dims_)
            t += d;
        return t;
    }

    bool equivariant() const { return action_.has_value(); }
    const std::optional<GroupAction>& action() const { return action_; }

    Block rho(CocycleKey key) const
    {
        auto it = rho_.find(key);
        if (it != rho_.end())
            return it->second;
        return Block::Identity(dim(key.second), dim(key.second));
    }
    const std::map<CocycleKey, Block>& cocycle() const { return rho_; }

    /// Offsets of each supported point in the dense assembly (id order).
    std::map<PointId, int> offsets() const
    {
        std::map<PointId, int> out;
        int o = 0;
        for (const auto& [x, d] : dims_) {
            out[x] = o;
            o += d;
        }
        return out;
    }

    bool same_space(const ControlledObject& other) const
    {
        return space_ == other.space_ || (space_ && other.space_ && *space_ == *other.space_);
    }

    /// Same space, dimensions and (if present) action and cocycle.
    bool matches(const ControlledObject& other, double tol = 0.0) const
    {
        if (!same_space(other) || dims_ != other.dims_ || action_.has_value() != other.action_.has_value())
            return false;
        if (!action_)
            return true;
        if (!(*action_ == *other.action_))
            return false;
        for (int g = 0; g < action_->group().size(); ++g)
            for (const auto& [x, d] : dims_)
                if ((rho({g, x}) - other.rho({g, x})).cwiseAbs().maxCoeff() > tol)
                    return false;
        return true;
    }

private:
    SpacePtr space_;
    std::map<PointId, int> dims_;
    std::optional<GroupAction> action_;
    std::map<CocycleKey, Block> rho_;
};

class ControlledOperator {
public:
    ControlledOperator() = default;

    ControlledOperator(ControlledObject domain, ControlledObject codomain, std::map<Pair, Block> blocks)
        : dom_(std::move(domain)), cod_(std::move(codomain))
    {
        if (!dom_.same_space(cod_))
            fail(ErrorKind::ShapeMismatch, "domain and codomain live over different spaces");
        for (auto& [key, b] : blocks) {
            const auto [xp, x] = key;
            if (b.rows() != cod_.dim(xp) || b.cols() != dom_.dim(x))
                fail(ErrorKind::ShapeMismatch, "block (" + std::to_string(xp) + "," + std::to_string(x) +
                                                   ") has shape " + std::to_string(b.rows()) + "x" +
                                                   std::to_string(b.cols()));
            if (b.size() > 0 && (b.array() != Complex(0.0)).any())
                blocks_.emplace(key, std::move(b));
        }
    }

    static ControlledOperator identity(const ControlledObject& obj)
    {
        std::map<Pair, Block> b;
        for (const auto& [x, d] : obj.dims())
            b.emplace(Pair{x, x}, Block::Identity(d, d));
        return ControlledOperator(obj, obj, std::move(b));
    }

    static ControlledOperator zero(const ControlledObject& dom, const ControlledObject& cod)
    {
        return ControlledOperator(dom, cod, {});
    }

    const ControlledObject& domain() const { return dom_; }
    const ControlledObject& codomain() const { return cod_; }
    const std::map<Pair, Block>& blocks() const { return blocks_; }
    const SpacePtr& space() const { return dom_.space(); }

    Block block(PointId xp, PointId x) const
    {
        auto it = blocks_.find({xp, x});
        if (it != blocks_.end())
            return it->second;
        return Block::Zero(cod_.dim(xp), dom_.dim(x));
    }

    bool is_endomorphism() const { return dom_.matches(cod_, 1e-12); }

    Eigen::MatrixXcd dense() const
    {
        const auto ro = cod_.offsets();
        const auto co = dom_.offsets();
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cod_.total_dim(), dom_.total_dim());
        for (const auto& [key, b] : blocks_)
            m.block(ro.at(key.first), co.at(key.second), b.rows(), b.cols()) = b;
        return m;
    }

private:
    ControlledObject dom_;
    ControlledObject cod_;
    std::map<Pair, Block> blocks_;
};

// --- algebra ------------------------------------------------------------------

/// Keys with a nonzero block.
inline Entourage propagation(const ControlledOperator& a)
{
    std::vector<Pair> pairs;
    for (const auto& [key, b] : a.blocks())
        pairs.push_back(key);
    return Entourage(std::move(pairs));
}

/// A o B.
inline ControlledOperator compose(const ControlledOperator& a, const ControlledOperator& b)
{
    if (!a.domain().matches(b.codomain(), 1e-12))
        fail(ErrorKind::ShapeMismatch, "composition of operators with mismatched middle object");
    std::map<PointId, std::vector<std::pair<PointId, const Block*>>> a_by_col;
    for (const auto& [key, blk] : a.blocks())
        a_by_col[key.second].emplace_back(key.first, &blk);
    std::map<Pair, Block> out;
    for (const auto& [key, bb] : b.blocks()) {
        auto it = a_by_col.find(key.first);
        if (it == a_by_col.end())
            continue;
        for (const auto& [row, ab] : it->second) {
            auto [slot, fresh] = out.try_emplace(Pair{row, key.second}, *ab * bb);
            if (!fresh)
                slot->second += *ab * bb;
        }
    }
    return ControlledOperator(b.domain(), a.codomain(), std::move(out));
}

inline ControlledOperator add(const ControlledOperator& a, const ControlledOperator& b)
{
    if (!a.domain().matches(b.domain(), 1e-12) || !a.codomain().matches(b.codomain(), 1e-12))
        fail(ErrorKind::ShapeMismatch, "sum of operators with different shapes");
    std::map<Pair, Block> out = a.blocks();
    for (const auto& [key, blk] : b.blocks()) {
        auto [slot, fresh] = out.try_emplace(key, blk);
        if (!fresh)
            slot->second += blk;
    }
    return ControlledOperator(a.domain(), a.codomain(), std::move(out));
}

inline ControlledOperator scale(Complex s, const ControlledOperator& a)
{
    std::map<Pair, Block> out;
    for (const auto& [key, blk] : a.blocks())
        out.emplace(key, s * blk);
    return ControlledOperator(a.domain(), a.codomain(), std::move(out));
}

inline ControlledOperator adjoint(const ControlledOperator& a)
{
    std::map<Pair, Block> out;
    for (const auto& [key, blk] : a.blocks())
        out.emplace(Pair{key.second, key.first}, blk.adjoint());
    return ControlledOperator(a.codomain(), a.domain(), std::move(out));
}

/// Zero every block whose row or column lies outside S.
inline ControlledOperator restrict(const ControlledOperator& a, const PointSet& s)
{
    std::map<Pair, Block> out;
    for (const auto& [key, blk] : a.blocks())
        if (contains(s, key.first) && contains(s, key.second))
            out.emplace(key, blk);
    return ControlledOperator(a.domain(), a.codomain(), std::move(out));
}

/// Keep only the blocks whose key lies in V.
inline ControlledOperator truncate(const ControlledOperator& a, const Entourage& v)
{
    std::map<Pair, Block> out;
    for (const auto& [key, blk] : a.blocks())
        if (v.contains(key.first, key.second))
            out.emplace(key, blk);
    return ControlledOperator(a.domain(), a.codomain(), std::move(out));
}

/// Largest entrywise difference; shapes must agree.
inline double max_abs_difference(const ControlledOperator& a, const ControlledOperator& b)
{
    double m = 0.0;
    for (const auto& [key, blk] : a.blocks()) {
        Block other = b.block(key.first, key.second);
        if (other.rows() != blk.rows() || other.cols() != blk.cols())
            return INFINITY;
        if (blk.size() > 0)
            m = std::max(m, (blk - other).cwiseAbs().maxCoeff());
    }
    for (const auto& [key, blk] : b.blocks())
        if (!a.blocks().count(key) && blk.size() > 0) {
            Block other = a.block(key.first, key.second);
            if (other.rows() != blk.rows() || other.cols() != blk.cols())
                return INFINITY;
            m = std::max(m, blk.cwiseAbs().maxCoeff());
        }
    return m;
}

// --- norms ---------------------------------------------------------------------

struct NormOptions {
    int cap = 2000;
    int dense_limit = 200;
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

struct NormResult {
    double value = 0.0;                // the reported norm
    double power_value = 0.0;          // power iteration estimate, when it ran
    std::optional<double> dense_value; // exact value when small enough
    int iterations = 0;
};

/// Largest singular value of a dense matrix (exact, via SVD).
inline double dense_norm(const Eigen::MatrixXcd& m)
{
    if (m.size() == 0)
        return 0.0;
    if (m.rows() == 1 && m.cols() == 1)
        return std::abs(m(0, 0));
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

/// Power iteration on A*A from a fixed start vector, cross-checked against
/// the exact dense value below `dense_limit` (which is then reported).
inline NormResult op_norm_detail(const ControlledOperator& a, const NormOptions& opts = {})
{
    const int rows = a.codomain().total_dim();
    const int cols = a.domain().total_dim();
    if (rows + cols > 2 * opts.cap)
        fail(ErrorKind::CapExceeded, "operator too large for the norm routine");
    NormResult out;
    if (a.blocks().empty() || cols == 0 || rows == 0)
        return out;
    const Eigen::MatrixXcd m = a.dense();
    if (std::max(rows, cols) <= opts.dense_limit) {
        out.dense_value = dense_norm(m);
        out.value = *out.dense_value;
        return out;
    }
    // All-ones start, tilted deterministically so it is not orthogonal to
    // symmetric top singular vectors.
    Eigen::VectorXcd v(cols);
    for (int i = 0; i < cols; ++i)
        v(i) = Complex(1.0 + 0.25 * std::sin(1.0 + i), 0.125 * std::cos(2.0 + 3.0 * i));
    v.normalize();
    double lambda = 0.0;
    bool converged = false;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        Eigen::VectorXcd w = m.adjoint() * (m * v);
        const double nw = w.norm();
        out.iterations = it;
        if (nw == 0.0) {
            lambda = 0.0;
            converged = true;
            break;
        }
        const double next = std::real(v.dot(w));
        v = w / nw;
        if (std::abs(next - lambda) <= opts.tolerance * std::max(1.0, std::abs(next))) {
            lambda = next;
            converged = true;
            break;
        }
        lambda = next;
    }
    out.power_value = std::sqrt(std::max(0.0, lambda));
    if (!converged)
        fail(ErrorKind::NotConverged, "power iteration did not converge");
    out.value = out.power_value;
    return out;
}

inline double op_norm(const ControlledOperator& a, const NormOptions& opts = {}) { return op_norm_detail(a, opts).value; }

// --- equivariance and ghosts ----------------------------------------------------------

struct EquivarianceResult {
    bool ok = true;
    int element = 0;
    Pair key{0, 0};
    double deviation = 0.0;
    explicit operator bool() const { return ok; }
};

/// A_{gx', gx} = rho'_{g;x'} A_{x',x} rho_{g;x}^{-1} for every g and key.
inline EquivarianceResult equivariance_check(const ControlledOperator& a, double tol = 1e-10)
{
    const auto& dom = a.domain();
    const auto& cod = a.codomain();
    if (!dom.equivariant() || !cod.equivariant())
        fail(ErrorKind::Input, "equivariance needs equivariant objects");
    const auto& act = *dom.action();
    EquivarianceResult out;
    std::vector<Pair> keys;
    for (const auto& [key, b] : a.blocks())
        keys.push_back(key);
    for (int g = 0; g < act.group().size(); ++g) {
        auto check = [&](PointId xp, PointId x) {
            Block expect = cod.rho({g, xp}) * a.block(xp, x) * dom.rho({g, x}).adjoint();
            Block got = a.block(act.act(g, xp), act.act(g, x));
            const double dev = expect.size() ? (expect - got).cwiseAbs().maxCoeff() : 0.0;
            if (dev > tol && out.ok) {
                out = {false, g, {xp, x}, dev};
            }
        };
        for (const auto& [xp, x] : keys)
            check(xp, x);
        // keys whose translate is nonzero but which are themselves zero
        const int ginv = act.group().inv(g);
        for (const auto& [xp, x] : keys)
            check(act.act(ginv, xp), act.act(ginv, x));
        if (!out.ok)
            return out;
    }
    return out;
}

/// For each family member: sup over x, x' off the member of the norm of the
/// (U[x'] x U[x]) submatrix.
inline std::vector<std::pair<int, double>> ghost_measure(const ControlledOperator& a, const Entourage& u,
                                                         const BigFamily& family)
{
    const auto& space = *a.space();
    std::map<PointId, PointSet> ball;
    for (PointId x : space.points())
        ball[x] = u.image_of(x);
    std::map<Pair, double> cache;
    auto sub_norm = [&](PointId xp, PointId x) {
        auto it = cache.find({xp, x});
        if (it != cache.end())
            return it->second;
        const PointSet& rows = ball[xp];
        const PointSet& cols = ball[x];
        int nr = 0, nc = 0;
        std::map<PointId, int> ro, co;
        for (PointId r : rows) {
            ro[r] = nr;
            nr += a.codomain().dim(r);
        }
        for (PointId c : cols) {
            co[c] = nc;
            nc += a.domain().dim(c);
        }
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nr, nc);
        bool any = false;
        for (PointId r : rows)
            for (PointId c : cols) {
                auto bt = a.blocks().find({r, c});
                if (bt == a.blocks().end())
                    continue;
                m.block(ro[r], co[c], bt->second.rows(), bt->second.cols()) = bt->second;
                any = true;
            }
        const double v = any ? dense_norm(m) : 0.0;
        cache.emplace(Pair{xp, x}, v);
        return v;
    };
    std::vector<std::pair<int, double>> out;
    for (std::size_t pos = 0; pos < family.size(); ++pos) {
        const PointSet zc = family.complement(pos, space.points());
        double sup = 0.0;
        for (PointId xp : zc)
            for (PointId x : zc)
                sup = std::max(sup, sub_norm(xp, x));
        out.emplace_back(family[pos].index, sup);
    }
    return out;
}

// --- random generation ------------------------------------------------------------

inline Complex random_complex(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline Block random_block(std::mt19937_64& rng, int rows, int cols)
{
    Block b(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            b(i, j) = random_complex(rng);
    return b;
}

/// Haar-ish random unitary from the QR factor of a Gaussian matrix.
inline Block random_unitary(std::mt19937_64& rng, int n)
{
    if (n == 0)
        return Block(0, 0);
    Eigen::HouseholderQR<Block> qr(random_block(rng, n, n));
    Block q = qr.householderQ() * Block::Identity(n, n);
    return q;
}

/// Operator with independent Gaussian blocks on every pair of `support`.
inline ControlledOperator random_operator(std::mt19937_64& rng, const ControlledObject& dom,
                                          const ControlledObject& cod, const Entourage& support)
{
    std::map<Pair, Block> blocks;
    for (const auto& [xp, x] : support.pairs())
        if (cod.dim(xp) > 0 && dom.dim(x) > 0)
            blocks.emplace(Pair{xp, x}, random_block(rng, cod.dim(xp), dom.dim(x)));
    return ControlledOperator(dom, cod, std::move(blocks));
}

/// Random coboundary cocycle rho_{g;x} = W_{gx} W_x^{-1} for an action.
inline std::map<CocycleKey, Block> random_cocycle(std::mt19937_64& rng, const GroupAction& act,
                                                  const std::map<PointId, int>& dims)
{
    std::map<PointId, Block> w;
    for (const auto& [x, d] : dims)
        w[x] = random_unitary(rng, d);
    std::map<CocycleKey, Block> out;
    for (int g = 0; g < act.group().size(); ++g)
        for (const auto& [x, d] : dims)
            out[{g, x}] = w.at(act.act(g, x)) * w.at(x).adjoint();
    return out;
}

/// Random equivariant operator supported on the G-saturation of `support`:
/// a random block per diagonal orbit, propagated with the cocycles. Orbits
/// with a nontrivial stabilizer are averaged over it.
inline ControlledOperator random_equivariant_operator(std::mt19937_64& rng, const ControlledObject& dom,
                                                      const ControlledObject& cod, const Entourage& support)
{
    if (!dom.equivariant() || !cod.equivariant())
        fail(ErrorKind::Input, "random equivariant operator needs equivariant objects");
    const auto& act = *dom.action();
    const auto& grp = act.group();
    std::map<Pair, Block> blocks;
    for (const auto& [xp, x] : support.pairs()) {
        if (blocks.count({xp, x}) || cod.dim(xp) == 0 || dom.dim(x) == 0)
            continue;
        Block seed = random_block(rng, cod.dim(xp), dom.dim(x));
        // average over the stabilizer of the pair to make propagation consistent
        Block avg = Block::Zero(seed.rows(), seed.cols());
        int stab = 0;
        for (int g = 0; g < grp.size(); ++g)
            if (act.act(g, xp) == xp && act.act(g, x) == x) {
                avg += cod.rho({g, xp}) * seed * dom.rho({g, x}).adjoint();
                ++stab;
            }
        avg /= static_cast<double>(stab);
        for (int g = 0; g < grp.size(); ++g) {
            Pair key{act.act(g, xp), act.act(g, x)};
            if (!blocks.count(key))
                blocks.emplace(key, cod.rho({g, xp}) * avg * dom.rho({g, x}).adjoint());
        }
    }
    return ControlledOperator(dom, cod, std::move(blocks));
}

} // namespace coarse
