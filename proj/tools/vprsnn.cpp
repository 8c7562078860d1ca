// vprsnn: command-line front end for synthetic data generation, training,
// querying and evaluation of the spiking place-recognition network.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vprsnn/checkpoint.hpp"
#include "vprsnn/config.hpp"
#include "vprsnn/data.hpp"
#include "vprsnn/error.hpp"
#include "vprsnn/evaluation.hpp"
#include "vprsnn/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vprsnn;

namespace {

struct GlobalFlags
{
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool verbose = false;
};

std::string slurp(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

RunOptions run_options(const GlobalFlags& g)
{
    RunOptions opts;
    opts.threads = g.threads;
    if (g.verbose) {
        opts.log = [](std::string_view msg) { std::cerr << msg << '\n'; };
    }
    return opts;
}

void write_query_outputs(const QueryResult& result, const fs::path& out_dir)
{
    ensure_dir(out_dir);
    write_text(out_dir / "predictions.csv",
               predictions_csv({result.predictions, result.table.scores}));
    std::size_t flagged = 0;
    for (bool b : result.low_confidence) {
        flagged += b ? 1 : 0;
    }
    if (flagged > 0) {
        std::cerr << flagged << " queries produced no output spikes (low confidence)\n";
    }
}

void print_summary(const PrCurve& curve)
{
    std::cout << "AUC " << curve.auc << "  R@100P " << curve.r_at_100p << "  P@100R "
              << curve.p_at_100r << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spiking neural network visual place recognition"};
    // Global flags are accepted before or after the subcommand.
    app.fallthrough();
    app.require_subcommand(1);

    GlobalFlags global;
    app.add_option("--seed", global.seed, "Master seed (overrides config / spec)");
    app.add_option("--threads", global.threads, "Worker threads for frozen presentations")
        ->check(CLI::PositiveNumber);
    app.add_flag("--verbose", global.verbose, "Progress output on stderr");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic traverse dataset");
    fs::path synth_spec;
    fs::path synth_out;
    synth->add_option("--spec", synth_spec, "Synthetic spec JSON (defaults when omitted)");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a network on reference traverses");
    fs::path config_path;
    std::vector<fs::path> ref_manifests;
    fs::path ckpt_out;
    train_cmd->add_option("--config", config_path, "Configuration file");
    train_cmd->add_option("--ref", ref_manifests, "Reference manifest(s)")->required();
    train_cmd->add_option("--out", ckpt_out, "Checkpoint output path")->required();
    std::map<std::string, std::string> overrides;
    for (const auto& key : config_keys()) {
        train_cmd->add_option_function<std::string>(
                     "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
                     "Override config key " + key)
            ->group("Config overrides");
    }

    // query
    auto* query_cmd = app.add_subcommand("query", "Score query images against a checkpoint");
    fs::path ckpt_in;
    fs::path query_manifest;
    std::string scheme_name = "weighted_prob";
    fs::path query_out;
    query_cmd->add_option("--ckpt", ckpt_in, "Checkpoint")->required();
    query_cmd->add_option("--queries", query_manifest, "Query manifest")->required();
    query_cmd->add_option("--scheme", scheme_name, "Decoding scheme")
        ->check(CLI::IsMember({"standard", "weighted", "prob", "weighted_prob"}));
    query_cmd->add_option("--out", query_out, "Output directory")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Precision-recall evaluation of predictions");
    fs::path pred_path;
    fs::path truth_manifest;
    fs::path eval_out;
    eval_cmd->add_option("--pred", pred_path, "predictions.csv from query or sad")->required();
    eval_cmd->add_option("--truth", truth_manifest, "Query manifest with true labels")->required();
    eval_cmd->add_option("--out", eval_out, "Output directory")->required();

    // sad
    auto* sad_cmd = app.add_subcommand("sad", "Sum-of-absolute-differences baseline");
    std::vector<fs::path> sad_refs;
    fs::path sad_queries;
    fs::path sad_out;
    fs::path sad_config;
    sad_cmd->add_option("--ref", sad_refs, "Reference manifest(s)")->required();
    sad_cmd->add_option("--queries", sad_queries, "Query manifest")->required();
    sad_cmd->add_option("--out", sad_out, "Output directory")->required();
    sad_cmd->add_option("--config", sad_config, "Configuration file (image and patch size)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*synth) {
            SynthSpec spec;
            if (!synth_spec.empty()) {
                spec = SynthSpec::from_json(slurp(synth_spec));
            }
            if (global.seed) {
                spec.seed = *global.seed;
            }
            const auto data = generate_synthetic(spec);
            const auto refs = write_synthetic(data, spec, synth_out);
            std::cout << "wrote " << refs.size() << " reference traverses and 1 query traverse of "
                      << spec.places << " places to " << synth_out.string() << '\n';
        } else if (*train_cmd) {
            RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
            for (const auto& [key, value] : overrides) {
                set_config_value(cfg, key, value);
            }
            if (global.seed) {
                cfg.seed = *global.seed;
            }
            cfg.validate();
            const auto reference = load_manifests(ref_manifests, ManifestRole::reference);
            const auto ckpt = train(reference, cfg, run_options(global));
            save_checkpoint(ckpt, ckpt_out);
            std::cout << "trained on " << reference.size() << " images ("
                      << reference.n_labels() << " places); "
                      << ckpt.assignment.n_assigned() << "/" << cfg.n_exc
                      << " neurons assigned; checkpoint " << ckpt_out.string() << '\n';
        } else if (*query_cmd) {
            const auto ckpt = load_checkpoint(ckpt_in);
            const auto queries = load_manifest(query_manifest, ManifestRole::query);
            const auto result = query(ckpt, queries, parse_scheme(scheme_name), run_options(global));
            write_query_outputs(result, query_out);
            std::cout << "scored " << queries.size() << " queries with scheme " << scheme_name
                      << "; predictions in " << (query_out / "predictions.csv").string() << '\n';
        } else if (*eval_cmd) {
            const auto set = read_predictions(pred_path);
            const auto truth = load_manifest(truth_manifest, ManifestRole::query).labels();
            const auto curve = evaluate(set, truth, eval_out);
            print_summary(curve);
        } else if (*sad_cmd) {
            const RunConfig cfg = sad_config.empty() ? RunConfig{} : load_config(sad_config);
            const auto reference = load_manifests(sad_refs, ManifestRole::reference);
            const auto queries = load_manifest(sad_queries, ManifestRole::query);
            const auto result = sad_baseline(reference, queries, cfg);
            write_query_outputs(result, sad_out);
            const auto curve =
                evaluate({result.predictions, result.table.scores}, queries.labels(), sad_out);
            print_summary(curve);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
