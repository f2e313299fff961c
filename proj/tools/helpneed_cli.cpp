#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"
#include "helpneed/pipeline.hpp"

using namespace helpneed;

int main(int argc, char** argv) {
    CLI::App app{"helpneed: interaction networks, step classification and proactive-hint simulation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> metric;
    std::optional<double> gamma;
    app.add_option("--config", config_path, "JSON pipeline config");
    app.add_option("--seed", seed, "master seed override");
    app.add_option("--metric", metric, "GlobalAbsolute | GlobalRelative | LocalAbsolute | LocalRelative");
    app.add_option("--gamma", gamma, "discount override");

    std::string network, out;
    std::map<std::string, CLI::App*> subs;
    for (const char* name : {"gen", "ingest", "build", "solve", "classify", "correlate", "train", "cv", "predict",
                             "simulate", "report", "fixture-check"})
        subs[name] = app.add_subcommand(name);
    subs["solve"]->add_option("--network", network, "solve a single network file");
    subs["solve"]->add_option("--out", out, "CSV output for --network");
    subs["gen"]->description("simulate a historical corpus");
    subs["ingest"]->description("validate logs");
    subs["build"]->description("build interaction networks");
    subs["solve"]->description("compute LQV/GQV tables");
    subs["classify"]->description("label steps");
    subs["correlate"]->description("efficiency share vs posttest optimality");
    subs["train"]->description("train state-based and state-free predictors");
    subs["cv"]->description("grouped cross-validation and class-weight search");
    subs["predict"]->description("score logged steps");
    subs["simulate"]->description("Adaptive vs Control in silico");
    subs["report"]->description("collect stage outputs");
    subs["fixture-check"]->description("self-test on shipped fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (subs["fixture-check"]->parsed()) return fixture_check(std::cout) ? 0 : 1;

        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
        if (seed) cfg.seed = *seed;
        if (metric) cfg.metric = metric_from_string(*metric);
        if (gamma) {
            cfg.reward.gamma = *gamma;
            cfg.reward.validate();
        }

        if (subs["gen"]->parsed()) stage_gen(cfg);
        else if (subs["ingest"]->parsed()) stage_ingest(cfg);
        else if (subs["build"]->parsed()) stage_build(cfg);
        else if (subs["solve"]->parsed()) {
            if (!network.empty()) {
                if (out.empty()) throw ConfigError("solve --network needs --out");
                solve_one(cfg.reward, network, out);
            } else {
                stage_solve(cfg);
            }
        } else if (subs["classify"]->parsed()) stage_classify(cfg);
        else if (subs["correlate"]->parsed()) stage_correlate(cfg);
        else if (subs["train"]->parsed()) stage_train(cfg);
        else if (subs["cv"]->parsed()) stage_cv(cfg);
        else if (subs["predict"]->parsed()) stage_predict(cfg);
        else if (subs["simulate"]->parsed()) stage_simulate(cfg);
        else if (subs["report"]->parsed()) stage_report(cfg);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
