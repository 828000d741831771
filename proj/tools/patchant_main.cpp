#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

#include "patchant/errors.hpp"
#include "patchant/run.hpp"

namespace {

int fail(const std::string& msg, bool usage) {
    std::cerr << "patchant: " << msg << "\n";
    if (usage) std::cerr << patchant::usage_text();
    return static_cast<int>(patchant::ExitCode::Invalid);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Patch-antenna emission modelling and decay-curve fitting"};
    std::string command;
    std::string config_path;
    std::int64_t seed = -1;
    std::string out_dir;
    int workers = 0;
    bool reference = false;
    bool antenna = false;
    std::string input;
    app.add_option("command", command, "command to run")->required();
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--workers", workers, "worker threads for sweeps and multi-start fits");
    auto* ref = app.add_flag("--reference", reference, "fit-decay: fit a silica reference histogram");
    auto* ant = app.add_flag("--antenna", antenna, "fit-decay: fit an antenna histogram");
    ref->excludes(ant);
    app.add_option("--input", input, "fit-decay: histogram CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help() << patchant::usage_text();
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(e.what(), true);
    }

    const auto& known = patchant::known_commands();
    if (std::find(known.begin(), known.end(), command) == known.end()) return fail("unknown command " + command, true);

    try {
        patchant::RunOverrides ov;
        if (seed >= 0) ov.seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty()) ov.output_dir = out_dir;
        if (workers > 0) ov.workers = static_cast<unsigned>(workers);
        if (reference) ov.fit_mode = "reference";
        if (antenna) ov.fit_mode = "antenna";
        if (!input.empty()) ov.input = input;

        patchant::RunConfig cfg;
        if (config_path.empty()) {
            cfg = patchant::parse_config(nlohmann::json{{"command", command}}, ov, std::filesystem::current_path());
        } else {
            cfg = patchant::load_config(config_path, ov);
            if (cfg.command != command)
                return fail("config command " + cfg.command + " does not match " + command, false);
        }
        const patchant::RunOutcome r = patchant::run(cfg);
        if (r.code != patchant::ExitCode::Success) std::cerr << "patchant: " << r.message << "\n";
        for (const auto& a : r.artifacts) std::cout << (cfg.output_dir / a).string() << "\n";
        return static_cast<int>(r.code);
    } catch (const patchant::ValidationError& e) {
        return fail(e.what(), false);
    }
}
