// Command-line front end: run scenarios (built-in or INI files), run the
// built-in validation suites, list scenarios, and manage the response
// cache.
//
// Exit codes: 0 success, 1 operational error, 2 validation failure.

#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "borscat/mie.hpp"
#include "borscat/scenario.hpp"

namespace {

int run_command(const std::string& scenario_arg, const std::string& backend,
                const std::string& out_dir, bool no_cache,
                const std::string& cache_dir) {
    borscat::Scenario sc = borscat::load_scenario(scenario_arg);
    borscat::RunOptions opts;
    if (backend == "fd") opts.backend_override = borscat::Backend::fd;
    else if (backend == "td") opts.backend_override = borscat::Backend::td;
    else if (backend == "both") opts.backend_override = borscat::Backend::both;
    opts.out_dir = out_dir.empty() ? ("out/" + sc.name) : out_dir;
    opts.use_cache = !no_cache;
    if (!cache_dir.empty()) opts.cache_root = cache_dir;
    opts.log = [](const std::string& m) { std::cerr << "  " << m << "\n"; };

    std::cout << "scenario " << sc.name << " (backend "
              << borscat::backend_name(opts.backend_override
                                           ? *opts.backend_override
                                           : sc.backend)
              << ")\n";
    const auto res = borscat::run_scenario(sc, opts);

    if (res.grid)
        std::cout << "  grid: N=" << res.grid->N << ", df=" << res.grid->df
                  << " Hz, f_max=" << res.grid->f_max() << " Hz\n";
    if (!res.events.empty()) {
        std::cout << "  events:\n";
        for (const auto& e : res.events)
            std::cout << "    t=" << e.t_peak << " s, amplitude="
                      << e.amplitude << ", width=" << e.width << " s\n";
    }
    if (res.incident_correlation)
        std::cout << "  incident-envelope correlation: "
                  << *res.incident_correlation << "\n";
    if (res.crossval_nrms)
        std::cout << "  backend cross-validation NRMS: " << *res.crossval_nrms
                  << "\n";
    for (const auto& f : res.files) std::cout << "  wrote " << f.string() << "\n";
    return 0;
}

int validate_mie() {
    bool ok = true;
    std::cout << "Mie validation (PEC sphere, a = 1 m, CFIE)\n";
    const auto profile = borscat::make_sphere(1.0);
    for (double ka : {0.5, 1.0, 2.0, 5.0}) {
        const double f = ka * borscat::c0 / (2.0 * borscat::pi);
        const double lambda = borscat::c0 / f;
        const double h = std::min(0.12, lambda / 10.0);
        const auto mesh = borscat::discretize(profile, h);
        borscat::BorSolver solver(mesh, {});
        const borscat::PlaneWaveDir inc{{0, 0, -1}, {1, 0, 0}};
        const auto sol = solver.solve(f, inc);
        const double rcs = borscat::rcs_from_H(solver.monostatic_H(sol, inc));
        const double mie = borscat::mie_rcs_oracle(1.0, f);
        const double err = std::abs(rcs - mie) / mie;
        std::cout << "  ka=" << ka << ": rcs=" << rcs << " m^2, oracle="
                  << mie << " m^2, error=" << err * 100.0 << "%"
                  << (err <= 0.02 ? "" : "  [FAIL]") << "\n";
        ok = ok && err <= 0.02;
    }
    return ok ? 0 : 2;
}

int validate_properties() {
    bool ok = true;
    auto check = [&](const std::string& name, bool pass) {
        std::cout << "  " << name << ": " << (pass ? "ok" : "FAIL") << "\n";
        ok = ok && pass;
    };
    std::cout << "synthesis/analysis property validation\n";
    using namespace borscat;

    // identity-response reproduction
    const Waveform w = gaussian_video(2e-9, 8e-9);
    FrequencyGrid g{1024, 1.0 / 64e-9};
    FrequencyResponse H;
    H.grid = g.positive_bins();
    H.values.assign(H.grid.size(), cplx(1.0, 0.0));
    const auto s = synthesize(g, H, w);
    double emax = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i)
        emax = std::max(emax, std::abs(s.e[i] - waveform_value(w, s.t[i])));
    check("identity response reproduces the waveform", emax < 1e-6 * w.E0);

    // delay theorem: H = exp(-j 2 pi f D), D = 16 samples
    const double D = 16.0 * g.dt_syn();
    for (std::size_t i = 0; i < H.grid.size(); ++i)
        H.values[i] = std::exp(cplx(0.0, -2.0 * pi * H.grid[i] * D));
    const auto sd = synthesize(g, H, w);
    double dmax = 0.0;
    for (std::size_t i = 16; i < sd.t.size(); ++i)
        dmax = std::max(dmax, std::abs(sd.e[i] - s.e[i - 16]));
    check("delay theorem shifts by exactly 16 samples", dmax < 1e-9 * w.E0);

    // Parseval: sum |w|^2 dt vs 2 sum |W|^2 df
    double et = 0.0, ef = 0.0;
    for (double t : s.t) et += waveform_value(w, t) * waveform_value(w, t);
    et *= g.dt_syn();
    for (double f : g.positive_bins()) ef += std::norm(waveform_spectrum(w, f));
    ef *= 2.0 * g.df;
    check("Parseval energy balance", std::abs(et - ef) / et < 1e-6);
    return ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transient scattering from bodies of revolution"};
    app.require_subcommand(1);

    std::string scenario_arg, backend, out_dir, cache_dir, suite, cache_op;
    bool no_cache = false;

    auto* run = app.add_subcommand("run", "run a scenario");
    run->add_option("--scenario", scenario_arg,
                    "built-in name or INI file path")->required();
    run->add_option("--backend", backend, "override: fd, td or both")
        ->check(CLI::IsMember({"fd", "td", "both"}));
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--no-cache", no_cache, "bypass the response cache");
    run->add_option("--cache-dir", cache_dir,
                    "cache root (default $BORSCAT_CACHE_DIR or ~/.cache)");

    auto* validate = app.add_subcommand("validate", "run a validation suite");
    validate->add_option("--suite", suite, "mie or properties")
        ->required()->check(CLI::IsMember({"mie", "properties"}));

    app.add_subcommand("list-scenarios", "list built-in scenarios");

    auto* cache = app.add_subcommand("cache", "response cache maintenance");
    cache->add_option("op", cache_op, "stats or clear")
        ->required()->check(CLI::IsMember({"stats", "clear"}));
    cache->add_option("--cache-dir", cache_dir, "cache root");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run"))
            return run_command(scenario_arg, backend, out_dir, no_cache,
                               cache_dir);
        if (app.got_subcommand("validate"))
            return suite == "mie" ? validate_mie() : validate_properties();
        if (app.got_subcommand("list-scenarios")) {
            for (const auto& n : borscat::built_in_scenario_names())
                std::cout << n << "\n";
            return 0;
        }
        if (app.got_subcommand("cache")) {
            const borscat::ResponseCache rc(
                cache_dir.empty() ? borscat::default_cache_root()
                                  : std::filesystem::path(cache_dir));
            if (cache_op == "stats") {
                const auto st = rc.stats();
                std::cout << rc.root().string() << ": " << st.entries
                          << " entries, " << st.bytes << " bytes\n";
            } else {
                std::cout << "removed " << rc.clear() << " entries from "
                          << rc.root().string() << "\n";
            }
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
