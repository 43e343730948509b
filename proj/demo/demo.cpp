// Walks through the tower example: verify the covering, lift the shift and the
// averaging projection, compare traces, and bound norms and ghosts.

#include <cstdio>

#include "coarse/scenario.hpp"

using namespace coarse;

namespace {

void show(const char* what, const VerificationReport& rep)
{
    std::printf("%-28s %s\n", what, rep.all_pass() ? "pass" : "FAIL");
}

} // namespace

int main()
{
    const Tower t = tower(3, {5, 7, 9, 11});
    const auto& cov = t.covering;
    std::printf("tower: %zu source points over %zu target points, deck group of order %d\n", cov.source().size(),
                cov.target().size(), cov.deck()->group().size());

    const auto rep = verify_branched_covering(cov);
    show("branched covering", rep);
    show("G-covering", verify_G_covering(cov));
    for (std::string s : {"U1", "U2", "U3"})
        std::printf("  minimal member at %s: %d\n", s.c_str(), *rep.minimal_index(s));

    const Transport tr(cov, t.scale(1));
    std::vector<PointId> loop;
    for (PointId y = 0; y <= 5; ++y)
        loop.push_back(y % 5);
    std::printf("transport around the 5-cycle from 0 ends at %lld\n", static_cast<long long>(tr.path(loop, 0)));

    const auto lifted = transfer_operator(cov, shift_operator(t), t.scale(1));
    std::printf("shift lifts at member %d; %zu nonzero blocks\n", lifted.z_index, lifted.op.blocks().size());
    const bool back = max_abs_difference(inverse_transfer(cov, lifted.op, t.scale(1)), shift_operator(t)) == 0.0;
    std::printf("inverse transfer recovers the shift: %s\n", back ? "yes" : "no");

    std::vector<Pair> sheets;
    for (std::size_t k = 0; k < t.ns.size(); ++k)
        for (PointId a : t.y_sheet(k))
            for (PointId b : t.y_sheet(k))
                sheets.emplace_back(a, b);
    const auto sq = verify_trace_square(cov, averaging_projection(t), Entourage(sheets));
    show("trace square (averaging)", sq);
    for (std::size_t k = 0; k < t.ns.size(); ++k)
        std::printf("  sheet %zu: tau = %.12f, tauG = %.12f\n", k,
                    *sq.measurement("tau[" + std::to_string(t.y_offsets[k]) + "]"),
                    *sq.measurement("tauG[" + std::to_string(t.x_offsets[k]) + "]"));

    std::mt19937_64 rng(7);
    const auto cert = find_target_certificate(cov, t.scale(2));
    const auto b = detail::random_lifted_operator(rng, cov, t.scale(2), 2);
    const auto nb = inverse_norm_bound_check(cov, b, t.scale(2), *cert);
    show("reverse norm bound", nb);
    std::printf("  ||A|| = %.6f, ||B|| = %.6f, multiplicity %g\n", *nb.measurement("norm-A"), *nb.measurement("norm-B"),
                *nb.measurement("multiplicity"));

    const auto ghosts = ghost_measure(averaging_projection(t), cov.target().diagonal(), cov.big_family());
    std::printf("ghost measure of the averaging family:");
    for (const auto& [k, v] : ghosts)
        std::printf(" [%d] %.4f", k, v);
    std::printf("\n");
    const Entourage v = t.scale(1);
    const auto gcert = dimension_at_scale(cov.target(), compose(v, v), 2, SearchStrategy::Greedy);
    show("quotient-norm chain", ghost_quotient_bound(averaging_projection(t), gcert->cover.bound(), cov.big_family(),
                                                     *gcert, v));

    const auto space = cycle_space(30, {1, 2, 3});
    const auto dc = dimension_at_scale(space, space.entourage("U2"), 2, SearchStrategy::Greedy);
    std::printf("30-cycle at U2: %zu parts, multiplicity %zu\n", dc->cover.size(), dc->cover.multiplicity());
    return rep.all_pass() && back && sq.all_pass() && nb.all_pass() ? 0 : 1;
}
