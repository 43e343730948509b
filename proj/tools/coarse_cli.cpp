#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "coarse/coarse.hpp"

using namespace coarse;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
    int depth = 3;
};

void emit(const json& j, const std::string& out)
{
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(out, j);
}

int finish(const VerificationReport& rep, const std::string& out, json extra = json::object())
{
    json j = report_to_json(rep);
    for (auto& [k, v] : extra.items())
        j[k] = v;
    emit(j, out);
    return rep.all_pass() ? 0 : 1;
}

VerificationReport single_failure(const std::string& subject, const std::string& condition, const std::string& detail)
{
    VerificationReport rep;
    rep.subject = subject;
    rep.add({condition, "", std::nullopt, false, {}, detail});
    return rep;
}

std::vector<Entourage> read_schedule(const std::string& path)
{
    std::vector<Entourage> out;
    for (const auto& e : read_json_file(path))
        out.push_back(entourage_from_json(e));
    return out;
}

json model_to_json(const MultiscaleModel& m)
{
    return {{"space", space_to_json(m.space)},
            {"big_family", big_family_to_json(m.family)},
            {"levels", m.levels},
            {"stride", m.stride}};
}

// Runs a manifest-style check on explicit files.
VerificationReport by_entry(const std::string& kind, json fields, const Globals& g)
{
    fields["kind"] = kind;
    for (auto& [k, v] : fields.items())
        if (k != "kind" && k != "scale" && v.is_string())
            v = std::filesystem::absolute(v.get<std::string>()).string();
    return run_check(fields, "", g.depth);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"coarse: branched coarse coverings, transfers and certificates"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "seed for randomized steps")->capture_default_str();
    app.add_option("--tolerance", g.tolerance, "numerical tolerance")->capture_default_str();
    app.add_option("--depth", g.depth, "composition depth of the coarse structure")->capture_default_str();

    std::string cov_path, op_path, space_path, cover_path, scale, source_scale, out, mask, schedule, params, dir,
        strategy = "greedy";
    int max_mult = 2, max_dim = 2, random_domains = 0;
    std::string eq_cov, family_path;
    bool exact = false;

    auto covering_arg = [&](CLI::App* c) { c->add_option("covering", cov_path, "covering JSON")->required(); };
    auto operator_arg = [&](CLI::App* c) { c->add_option("operator", op_path, "operator JSON")->required(); };
    auto scale_arg = [&](CLI::App* c) { c->add_option("--scale", scale, "target entourage name")->required(); };
    auto out_arg = [&](CLI::App* c) { c->add_option("-o,--out", out, "write JSON here instead of stdout"); };

    auto* vc = app.add_subcommand("verify-covering", "check the branched covering axioms");
    covering_arg(vc);
    vc->add_option("--mask", mask, "JSON point set restricting the checked sources");
    out_arg(vc);

    auto* vg = app.add_subcommand("verify-gcovering", "check deck freeness and fibre transitivity");
    covering_arg(vg);
    out_arg(vg);

    auto* tr = app.add_subcommand("transfer", "lift an operator on the target to the source");
    covering_arg(tr);
    operator_arg(tr);
    scale_arg(tr);
    out_arg(tr);

    auto* it = app.add_subcommand("inverse-transfer", "push an equivariant operator down to the target");
    covering_arg(it);
    operator_arg(it);
    scale_arg(it);
    out_arg(it);

    auto* tc = app.add_subcommand("trace", "plain or equivariant trace per component");
    operator_arg(tc);
    tc->add_option("--equivariant", eq_cov, "use fundamental domains (of the operator's action, or of this covering's deck)")
        ->expected(0, 1);
    tc->add_option("--random-domains", random_domains, "also evaluate on this many random fundamental domains");
    out_arg(tc);

    auto* l2 = app.add_subcommand("l2check", "compare traces of an operator and its transfer");
    covering_arg(l2);
    operator_arg(l2);
    scale_arg(l2);
    out_arg(l2);

    auto* ad = app.add_subcommand("asdim", "search a dimension certificate at a scale");
    ad->add_option("space", space_path, "space JSON")->required();
    scale_arg(ad);
    ad->add_option("--max-mult", max_mult)->capture_default_str();
    ad->add_option("--strategy", strategy)->check(CLI::IsMember({"greedy", "sweep", "exact"}))->capture_default_str();
    ad->add_flag("--exact", exact, "same as --strategy exact");
    out_arg(ad);

    auto* lc = app.add_subcommand("lift-cover", "lift a cover of the target along the covering");
    covering_arg(lc);
    lc->add_option("cover", cover_path, "cover JSON on the target")->required();
    scale_arg(lc);
    lc->add_option("--source-scale", source_scale, "source entourage name (default: same name as --scale)");
    out_arg(lc);

    auto* rp = app.add_subcommand("rips", "Rips complex of a space, or simplex lifting along a covering");
    rp->add_option("file", space_path, "space JSON, or covering JSON with --lift")->required();
    rp->add_option("--scale", scale, "entourage name (source side with --lift)")->required();
    rp->add_option("--max-dim", max_dim)->capture_default_str();
    bool lift = false;
    rp->add_flag("--lift", lift, "check unique simplex lifting");
    out_arg(rp);

    auto* cn = app.add_subcommand("cone", "induced covering of cones over a schedule");
    covering_arg(cn);
    cn->add_option("--schedule", schedule, "JSON list of target entourages, one per level")->required();
    out_arg(cn);

    auto* sq = app.add_subcommand("squeeze", "squeezing model over a base space");
    sq->add_option("space", space_path, "space JSON")->required();
    sq->add_option("--schedule", schedule, "JSON list of entourages, one per copy")->required();
    out_arg(sq);

    auto* gh = app.add_subcommand("ghost", "ghost measure and quotient-norm chain");
    operator_arg(gh);
    gh->add_option("--scale", scale, "truncation entourage name on the operator's space")->required();
    gh->add_option("--bigfamily", family_path, "big family JSON (default: the covering's)");
    gh->add_option("--covering", cov_path, "covering whose target carries the operator; adds transferred norms");
    out_arg(gh);

    auto* sc = app.add_subcommand("scenario", "generate a scenario file set");
    std::string name;
    sc->add_option("name", name)->required()->check(CLI::IsMember({"tower", "annulus", "cone-tower"}));
    sc->add_option("--params", params, "JSON object of parameters");
    sc->add_option("--dir", dir, "output directory")->required();

    auto* su = app.add_subcommand("suite", "run the checks of a manifest");
    su->add_option("path", dir, "manifest file or its directory")->required();
    out_arg(su);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    VerifyOptions opts;
    opts.depth = g.depth;
    try {
        if (*vc) {
            json f = {{"covering", cov_path}};
            if (!mask.empty())
                f["mask"] = mask;
            return finish(by_entry("verify-covering", f, g), out);
        }
        if (*vg)
            return finish(by_entry("verify-gcovering", {{"covering", cov_path}}, g), out);
        if (*tr || *it) {
            const BranchedCovering cov = covering_from_json(read_json_file(cov_path));
            const Entourage v = cov.target().entourage(scale);
            json j;
            if (*tr) {
                const auto t = transfer_operator(cov, operator_from_json(read_json_file(op_path), cov.target_ptr()), v,
                                                 opts);
                j = {{"z_index", t.z_index}, {"operator", operator_to_json(t.op)}};
            } else {
                const auto t = inverse_transfer_detail(cov, operator_from_json(read_json_file(op_path), cov.source_ptr()),
                                                       v, opts);
                j = {{"z_index", t.z_index}, {"section", t.section}, {"operator", operator_to_json(t.op)}};
            }
            emit(j, out);
            return 0;
        }
        if (*tc) {
            const auto a = operator_from_json(read_json_file(op_path));
            const auto& space = *a.space();
            const bool equivariant = tc->count("--equivariant") > 0;
            std::optional<GroupAction> action;
            if (equivariant)
                action = eq_cov.empty() ? a.domain().action() : covering_from_json(read_json_file(eq_cov)).deck();
            if (equivariant && !action)
                fail(ErrorKind::NotEquivariant, "no action available for the equivariant trace");
            json rows = json::array();
            std::mt19937_64 rng(g.seed);
            for (const auto& comp : coarse_components(space)) {
                json row = {{"component", comp.front()}};
                if (!equivariant) {
                    const Complex t = trace_plain(a, comp);
                    row["trace"] = json::array({detail::round12(t.real()), detail::round12(t.imag())});
                    rows.push_back(row);
                    continue;
                }
                const auto& act = *action;
                PointSet sat;
                for (PointId x : comp)
                    sat = set_union(sat, act.orbit(x));
                if (sat.front() != comp.front())
                    continue; // reported with the orbit's lowest component
                const Complex t = trace_equivariant(a, sat, fundamental_domain(act, sat));
                row["trace"] = json::array({detail::round12(t.real()), detail::round12(t.imag())});
                double spread = 0.0;
                for (int i = 0; i < random_domains; ++i)
                    spread = std::max(spread, std::abs(trace_equivariant(a, sat, random_fundamental_domain(act, sat, rng)) - t));
                if (random_domains > 0)
                    row["max_domain_deviation"] = spread;
                rows.push_back(row);
            }
            emit({{"traces", rows}}, out);
            return 0;
        }
        if (*l2) {
            const BranchedCovering cov = covering_from_json(read_json_file(cov_path));
            const auto a = operator_from_json(read_json_file(op_path), cov.target_ptr());
            return finish(verify_trace_square(cov, a, cov.target().entourage(scale), opts, g.tolerance), out);
        }
        if (*ad) {
            const FiniteCoarseSpace space = space_from_json(read_json_file(space_path));
            SearchOptions so;
            so.depth = g.depth;
            const SearchStrategy st = strategy == "exact" || exact ? SearchStrategy::Exact
                                      : strategy == "sweep" ? SearchStrategy::Sweep
                                                            : SearchStrategy::Greedy;
            auto cert = dimension_at_scale(space, space.entourage(scale), static_cast<std::size_t>(max_mult), st, so, scale);
            if (!cert)
                return finish(single_failure("asdim", "certificate",
                                             "no cover of multiplicity <= " + std::to_string(max_mult)),
                              out);
            return finish(verify_certificate(space, *cert), out, {{"certificate", certificate_to_json(*cert)}});
        }
        if (*lc) {
            const BranchedCovering cov = covering_from_json(read_json_file(cov_path));
            const CoverFamily w = cover_from_json(read_json_file(cover_path));
            const std::string us = source_scale.empty() ? scale : source_scale;
            auto lifted = lift_cover(cov, w, cov.target().entourage(scale), cov.source().entourage(us), opts);
            return finish(lifted.report, out, {{"cover", cover_to_json(lifted.cover)}, {"z_index", lifted.z_index}});
        }
        if (*rp) {
            const json j = read_json_file(space_path);
            if (lift) {
                const BranchedCovering cov = covering_from_json(j);
                return finish(rips_lift_check(cov, cov.source().entourage(scale), max_dim, scale, opts), out);
            }
            const FiniteCoarseSpace space = space_from_json(j);
            emit(complex_to_json(rips_complex(space, space.entourage(scale), max_dim)), out);
            return 0;
        }
        if (*cn) {
            const BranchedCovering cov = covering_from_json(read_json_file(cov_path));
            const auto sched = read_schedule(schedule);
            const auto cone = cone_covering(cov, sched);
            VerificationReport rep = verify_branched_covering(cone.covering, opts);
            for (const auto& c : uniform_covering_check(cov, sched, 1, opts).checks)
                rep.add(c);
            return finish(rep, out, {{"covering", covering_to_json(cone.covering)}});
        }
        if (*sq) {
            const FiniteCoarseSpace space = space_from_json(read_json_file(space_path));
            const auto sched = read_schedule(schedule);
            emit(model_to_json(squeeze_model(space, static_cast<int>(sched.size()), sched)), out);
            return 0;
        }
        if (*gh) {
            std::optional<BranchedCovering> cov;
            if (!cov_path.empty())
                cov = covering_from_json(read_json_file(cov_path));
            const auto a = operator_from_json(read_json_file(op_path), cov ? cov->target_ptr() : nullptr);
            if (family_path.empty() && !cov)
                fail(ErrorKind::Input, "ghost needs --bigfamily or --covering");
            const BigFamily family = family_path.empty() ? cov->big_family() : big_family_from_json(read_json_file(family_path));
            const auto& space = *a.space();
            const Entourage v = space.entourage(scale);
            SearchOptions so;
            so.depth = g.depth;
            auto cert = dimension_at_scale(space, compose(v, v), 2, SearchStrategy::Greedy, so, "V2");
            if (!cert)
                cert = dimension_at_scale(space, compose(v, v), 2, SearchStrategy::Sweep, so, "V2");
            if (!cert)
                return finish(single_failure("ghost-bound", "certificate", "no multiplicity-2 certificate at V^2"), out);
            auto rep = ghost_quotient_bound(a, cert->cover.bound(), family, *cert, v, g.tolerance);
            if (cov)
                for (const auto& [k, nrm] : transferred_ghost_norms(*cov, a, v, opts))
                    rep.measure("transferred[" + std::to_string(k) + "]", nrm);
            return finish(rep, out);
        }
        if (*sc) {
            const json p = params.empty() ? json::object() : json::parse(params);
            const json manifest = scenario_generate(name, p, dir, g.seed);
            std::cout << manifest.dump(2) << "\n";
            return 0;
        }
        if (*su) {
            const auto r = run_suite(dir, g.depth);
            emit(r.report, out);
            return r.exit_code;
        }
    } catch (const CoarseError& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return e.kind() == ErrorKind::Input || e.kind() == ErrorKind::ShapeMismatch ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
