#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "splx/commands.hpp"

namespace {

template<typename T>
std::optional<T> maybe(const CLI::Option *opt, const T &value) {
    return opt->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char **argv) {
    using namespace splx::cli;

    CLI::App app{"splx: spectral diagnostics for training runs"};
    app.require_subcommand(1);
    std::uint64_t seed = 42;
    std::size_t workers = 0;
    std::string meta;
    app.add_option("--seed", seed, "Seed for randomized witnesses")->capture_default_str();
    app.add_option("--workers", workers, "Worker threads (default: SPLX_NUM_WORKERS or all cores)");
    auto *meta_opt = app.add_option("--meta", meta, "Write run metadata JSON to this path");

    SpectrumOptions spec;
    std::string spec_dump, spec_out;
    auto *spectrum = app.add_subcommand("spectrum", "Activation covariance spectrum as CSV");
    spectrum->add_option("dump", spec_dump, "Activation dump (.splx)")->required();
    spectrum->add_flag("--normalize,!--no-normalize", spec.normalize, "Include the trace-normalized column");
    auto *spec_out_opt = spectrum->add_option("--out", spec_out, "Output CSV path (default: stdout)");

    TailfitOptions tail;
    std::string tail_in, tail_tier, tail_window, tail_out;
    auto *tailfit = app.add_subcommand("tailfit", "Band-restricted power-law exponent");
    tailfit->add_option("input", tail_in, "Activation dump or spectrum CSV")->required();
    auto *tier_opt = tailfit->add_option("--tier", tail_tier, "Scale tier: d12, d36 or d48");
    auto *window_opt = tailfit->add_option("--window", tail_window, "Rank window lo:hi (1-based, inclusive)");
    auto *tail_out_opt = tailfit->add_option("--out", tail_out, "Output JSON path (default: stdout)");

    GradsvdOptions grad;
    std::string grad_dump, grad_out;
    auto *gradsvd = app.add_subcommand("gradsvd", "Per-sample gradient singular values as CSV");
    gradsvd->add_option("dump", grad_dump, "Gradient dump (.splx)")->required();
    auto *grad_out_opt = gradsvd->add_option("--out", grad_out, "Output CSV path (default: stdout)");

    PredictOptions pred;
    std::string pred_window, pred_out;
    auto *predict = app.add_subcommand("predict", "Early-prediction Spearman tables");
    predict->add_option("manifests", pred.manifests, "Manifest paths or glob patterns");
    predict->add_option("--early-tokens", pred.early_tokens, "Early token budget N")->required();
    auto *pred_window_opt = predict->add_option("--window", pred_window, "Override the tier window lo:hi");
    auto *pred_out_opt = predict->add_option("--out", pred_out, "Directory for families.csv, runs.csv, summary.json");

    TaxonomyOptions tax;
    std::string tax_thresholds, tax_out;
    double tau_tok = 0, tau_thr = 0, rho_dom = 0;
    auto *taxonomy = app.add_subcommand("taxonomy", "Classify consecutive architectural transitions");
    taxonomy->add_option("manifests", tax.manifests, "Manifests in chain order (consecutive pairs)")->required();
    auto *thr_file_opt = taxonomy->add_option("--thresholds", tax_thresholds, "JSON with tau_tok, tau_thr, rho_dom");
    auto *tau_tok_opt = taxonomy->add_option("--tau-tok", tau_tok, "Token-gain threshold");
    auto *tau_thr_opt = taxonomy->add_option("--tau-thr", tau_thr, "Throughput-gain threshold");
    auto *rho_dom_opt = taxonomy->add_option("--rho-dom", rho_dom, "Dominance ratio");
    taxonomy->add_option("--head-hi", tax.head_hi, "Upper rank of the head window")->capture_default_str();
    auto *tax_out_opt = taxonomy->add_option("--out", tax_out, "Output CSV path (default: stdout)");

    ToyOptions toy;
    std::string toy_config, toy_out, toy_target;
    auto *toy_cmd = app.add_subcommand("toy", "Toy-model simulation and verification");
    toy_cmd->require_subcommand(1);
    auto *simulate = toy_cmd->add_subcommand("simulate", "Emit trajectory or spectrum CSVs");
    auto *sim_config_opt = simulate->add_option("--config", toy_config, "JSON config");
    auto *sim_out_opt = simulate->add_option("--out", toy_out, "Output directory");
    auto *verify = toy_cmd->add_subcommand("verify", "Run the oracle suite for one named result");
    verify->add_option("result", toy_target, "Result name")->required();
    auto *ver_config_opt = verify->add_option("--config", toy_config, "JSON config (optional seed)");
    auto *ver_out_opt = verify->add_option("--out", toy_out, "Write the report to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInternal;
    }

    const auto meta_path = maybe<std::filesystem::path>(meta_opt, meta);
    if (*spectrum) {
        spec.dump = spec_dump;
        spec.out = maybe<std::filesystem::path>(spec_out_opt, spec_out);
        spec.meta = meta_path;
        return cmd_spectrum(spec, std::cout, std::cerr);
    }
    if (*tailfit) {
        tail.input = tail_in;
        tail.tier = maybe(tier_opt, tail_tier);
        tail.window = maybe(window_opt, tail_window);
        tail.out = maybe<std::filesystem::path>(tail_out_opt, tail_out);
        tail.meta = meta_path;
        return cmd_tailfit(tail, std::cout, std::cerr);
    }
    if (*gradsvd) {
        grad.dump = grad_dump;
        grad.out = maybe<std::filesystem::path>(grad_out_opt, grad_out);
        grad.meta = meta_path;
        return cmd_gradsvd(grad, std::cout, std::cerr);
    }
    if (*predict) {
        pred.window = maybe(pred_window_opt, pred_window);
        pred.out = maybe<std::filesystem::path>(pred_out_opt, pred_out);
        pred.meta = meta_path;
        pred.workers = workers;
        return cmd_predict(pred, std::cout, std::cerr);
    }
    if (*taxonomy) {
        tax.thresholds = maybe<std::filesystem::path>(thr_file_opt, tax_thresholds);
        tax.tau_tok = maybe(tau_tok_opt, tau_tok);
        tax.tau_thr = maybe(tau_thr_opt, tau_thr);
        tax.rho_dom = maybe(rho_dom_opt, rho_dom);
        tax.out = maybe<std::filesystem::path>(tax_out_opt, tax_out);
        tax.meta = meta_path;
        tax.workers = workers;
        return cmd_taxonomy(tax, std::cout, std::cerr);
    }
    toy.seed = seed;
    toy.meta = meta_path;
    if (*simulate) {
        toy.subcommand = "simulate";
        toy.config = maybe<std::filesystem::path>(sim_config_opt, toy_config);
        toy.out = maybe<std::filesystem::path>(sim_out_opt, toy_out);
    } else {
        toy.subcommand = "verify";
        toy.target = toy_target;
        toy.config = maybe<std::filesystem::path>(ver_config_opt, toy_config);
        toy.out = maybe<std::filesystem::path>(ver_out_opt, toy_out);
    }
    return cmd_toy(toy, std::cout, std::cerr);
}
