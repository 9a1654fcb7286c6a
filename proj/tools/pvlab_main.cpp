#include <exception>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "pvlab/config.hpp"

int main(int argc, char** argv)
{
    using namespace pvlab::cli;
    CLI::App app{"Poisson-Voronoi approximation laboratory"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::function<int(const CommonFlags&)> action;
    auto add = [&](const char* name, const char* help, int (*fn)(const CommonFlags&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "experiment JSON")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "master seed");
        sub->add_option("--threads", flags.threads, "worker cap, 0 = all cores");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--epsilon", flags.epsilon, "window leak budget");
        sub->callback([&action, fn] { action = fn; });
        return sub;
    };
    add("simulate", "one campaign: per-replication CSV and summary JSON", simulate);
    add("variance-sweep", "multi-intensity campaign with scaling fit and bracket report", variance_sweep);
    add("clt-test", "normality report: KS test and moments", clt_test);
    add("kernel-scan", "first kernel along a segment with envelope checks", kernel_scan);
    add("f2-probe", "second kernel at point pairs with envelope checks", f2_probe);
    add("exact2d", "exact planar cells against the Monte Carlo estimate", exact2d)
        ->add_flag("--geometry", flags.geometry, "write the cells of the first realization");
    add("small-body", "variance of PV(r K) as r shrinks at fixed intensity", small_body);
    add("selftest", "property suite; exit 3 on failure", selftest);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        return action(flags);
    } catch (const pvlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
