#pragma once

// Command implementations behind the splx CLI. Each command writes its primary
// output to `out`, diagnostics to `err`, and returns a process exit code:
// 0 success, 1 internal/format error, 2 missing input, 3 bad window,
// 4 kind mismatch, 5 nothing analyzable, 6 unknown verify target.

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynamics.hpp"
#include "efficiency.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "spectra.hpp"
#include "verify.hpp"

namespace splx::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kMissingInput = 2,
    kBadWindow = 3,
    kKindMismatch = 4,
    kNothingAnalyzable = 5,
    kUnknownTarget = 6,
};

/// Raised inside commands to leave with a specific exit code.
class Exit : public std::runtime_error {
public:
    Exit(int code, const std::string &what) : std::runtime_error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

namespace detail {

inline int guarded(std::ostream &err, const std::function<int()> &body) {
    try {
        return body();
    } catch (const Exit &e) {
        err << "splx: " << e.what() << "\n";
        return e.code();
    } catch (const Error &e) {
        err << "splx: " << e.what() << "\n";
        return kInternal;
    } catch (const std::exception &e) {
        err << "splx: internal error: " << e.what() << "\n";
        return kInternal;
    }
}

inline void require_file(const fs::path &p) {
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) { throw Exit(kMissingInput, "input not found: " + p.string()); }
}

inline ingest::Dump load_dump(const fs::path &p, ingest::DumpKind expected) {
    require_file(p);
    auto dump = ingest::read_dump_with_header(p);
    if (dump.header.kind != expected) {
        throw Exit(kKindMismatch, p.string() + " is a " + ingest::to_string(dump.header.kind) + " dump, expected " +
                                      ingest::to_string(expected));
    }
    return dump;
}

inline void emit(std::ostream &out, const std::optional<fs::path> &path, const std::string &text) {
    if (path) {
        report::write_text(*path, text);
    } else {
        out << text;
    }
}

inline std::string spectrum_csv(const Spectrum &spec, const std::string &value_column, bool normalize) {
    std::vector<std::string> header{"rank", value_column};
    if (normalize) { header.push_back("normalized"); }
    report::CsvWriter csv(header);
    const auto &v = spec.values();
    const std::vector<double> *norm = normalize ? &spec.normalized() : nullptr;
    for (std::size_t k = 0; k < v.size(); ++k) {
        std::vector<std::string> row{std::to_string(k + 1), report::format_double(v[k])};
        if (norm) { row.push_back(report::format_double((*norm)[k])); }
        csv.row(row);
    }
    return csv.str();
}

inline std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) { s.pop_back(); }
    while (!s.empty() && s.front() == ' ') { s.erase(s.begin()); }
    return s;
}

/// Spectrum from a CSV with a header row containing an `eigenvalue` (or
/// `sigma`) column.
inline Spectrum read_spectrum_csv(const fs::path &p) {
    std::ifstream in(p);
    if (!in) { throw IoError("cannot open " + p.string()); }
    std::string line;
    if (!std::getline(in, line)) { throw FormatError("empty spectrum CSV"); }
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) { header.push_back(trim(cell)); }
    }
    auto col = std::find(header.begin(), header.end(), "eigenvalue");
    if (col == header.end()) { col = std::find(header.begin(), header.end(), "sigma"); }
    if (col == header.end()) { throw FormatError("spectrum CSV needs an 'eigenvalue' or 'sigma' column"); }
    const auto idx = static_cast<std::size_t>(col - header.begin());
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) { continue; }
        std::stringstream ss(line);
        std::string cell;
        std::size_t k = 0;
        std::optional<double> v;
        while (std::getline(ss, cell, ',')) {
            if (k++ == idx) {
                try {
                    std::size_t used = 0;
                    const std::string t = trim(cell);
                    v = std::stod(t, &used);
                    if (used != t.size()) { v.reset(); }
                } catch (const std::exception &) {
                    v.reset();
                }
            }
        }
        if (!v) { throw FormatError("bad value on line " + std::to_string(line_no) + " of " + p.string()); }
        values.push_back(*v);
    }
    return Spectrum(std::move(values));
}

inline bool has_splx_magic(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    char m[4] = {};
    in.read(m, 4);
    return in.gcount() == 4 && std::equal(m, m + 4, ingest::kMagic.begin());
}

inline RankWindow parse_window(const std::string &text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) { throw Exit(kBadWindow, "window must look like lo:hi, got '" + text + "'"); }
    try {
        std::size_t a = 0, b = 0;
        const std::string lo = text.substr(0, colon), hi = text.substr(colon + 1);
        const long long l = std::stoll(lo, &a);
        const long long h = std::stoll(hi, &b);
        if (a != lo.size() || b != hi.size() || l < 1 || h < 1) { throw std::invalid_argument("range"); }
        return {static_cast<std::size_t>(l), static_cast<std::size_t>(h)};
    } catch (const std::exception &) {
        throw Exit(kBadWindow, "window must look like lo:hi with positive integers, got '" + text + "'");
    }
}

/// Fits on the window, mapping window problems to exit 3.
inline TailFit fit_window(const Spectrum &spec, RankWindow w) {
    if (w.lo < 1 || w.hi <= w.lo || w.hi > spec.size()) {
        throw Exit(kBadWindow, "window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) +
                                   "] is invalid for a spectrum of length " + std::to_string(spec.size()));
    }
    return band_alpha(spec, w);
}

/// Expands shell-style patterns; literal paths pass through untouched.
inline std::vector<fs::path> expand_patterns(const std::vector<std::string> &patterns) {
    std::vector<fs::path> out;
    for (const auto &pat : patterns) {
        if (pat.find_first_of("*?[") == std::string::npos) {
            out.emplace_back(pat);
            continue;
        }
        glob_t g{};
        if (::glob(pat.c_str(), 0, nullptr, &g) == 0) {
            for (std::size_t k = 0; k < g.gl_pathc; ++k) { out.emplace_back(g.gl_pathv[k]); }
        }
        ::globfree(&g);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline json optional_number(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

inline std::string optional_cell(const std::optional<double> &v) { return v ? report::format_double(*v) : ""; }

inline void write_meta(const std::optional<fs::path> &meta, const std::string &command, json config) {
    if (meta) { report::write_text(*meta, report::metadata(command, std::move(config)).dump(2) + "\n"); }
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct SpectrumOptions {
    fs::path dump;
    bool normalize = true;
    std::optional<fs::path> out;
    std::optional<fs::path> meta;
};

inline int cmd_spectrum(const SpectrumOptions &o, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        const auto dump = detail::load_dump(o.dump, ingest::DumpKind::Activation);
        const Spectrum spec = covariance_spectrum(dump.matrix);
        detail::emit(out, o.out, detail::spectrum_csv(spec, "eigenvalue", o.normalize));
        detail::write_meta(o.meta, "spectrum", {{"dump", o.dump.string()}, {"normalize", o.normalize}});
        return kOk;
    });
}

struct TailfitOptions {
    fs::path input;
    std::optional<std::string> tier;
    std::optional<std::string> window;
    std::optional<fs::path> out;
    std::optional<fs::path> meta;
};

inline int cmd_tailfit(const TailfitOptions &o, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        if (o.tier.has_value() == o.window.has_value()) { throw Exit(kBadWindow, "give exactly one of --tier or --window"); }
        RankWindow w{};
        if (o.tier) {
            try {
                w = select_window(*o.tier);
            } catch (const ConfigError &e) {
                throw Exit(kBadWindow, e.what());
            }
        } else {
            w = detail::parse_window(*o.window);
        }
        detail::require_file(o.input);
        const Spectrum spec = detail::has_splx_magic(o.input)
                                  ? covariance_spectrum(detail::load_dump(o.input, ingest::DumpKind::Activation).matrix)
                                  : detail::read_spectrum_csv(o.input);
        const TailFit fit = detail::fit_window(spec, w);
        json j;
        j["window"] = {fit.window.lo, fit.window.hi};
        j["alpha"] = fit.alpha;
        j["residual"] = fit.residual;
        detail::emit(out, o.out, j.dump() + "\n");
        json cfg{{"input", o.input.string()}};
        cfg["tier"] = o.tier ? json(*o.tier) : json(nullptr);
        cfg["window"] = o.window ? json(*o.window) : json(nullptr);
        detail::write_meta(o.meta, "tailfit", cfg);
        return kOk;
    });
}

struct GradsvdOptions {
    fs::path dump;
    std::optional<fs::path> out;
    std::optional<fs::path> meta;
};

inline int cmd_gradsvd(const GradsvdOptions &o, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        const auto dump = detail::load_dump(o.dump, ingest::DumpKind::Gradient);
        const Spectrum spec = gradient_spectrum(dump.matrix);
        detail::emit(out, o.out, detail::spectrum_csv(spec, "sigma", true));
        detail::write_meta(o.meta, "gradsvd", {{"dump", o.dump.string()}});
        return kOk;
    });
}

// ---------------------------------------------------------------------------

struct PredictOptions {
    std::vector<std::string> manifests;  // paths or glob patterns
    double early_tokens = 0.0;
    std::optional<std::string> window;   // overrides the tier window
    std::optional<fs::path> out;         // directory for CSV tables
    std::optional<fs::path> meta;
    std::size_t workers = 0;
};

namespace detail {

struct PredictRun {
    efficiency::RunRecord record;
    std::vector<std::string> notes;
    std::optional<double> early_checkpoint_tokens;
};

inline PredictRun predict_one(const fs::path &path, double early_tokens, const std::optional<RankWindow> &window) {
    const auto m = ingest::read_manifest(path);
    PredictRun run;
    run.record.family = m.family;
    run.record.tier = m.tier;
    run.record.tokens_to_target = m.tokens_to_target();
    run.record.throughput = m.throughput;
    run.record.layer = m.layer;
    for (const auto &w : m.warnings) { run.notes.push_back(path.string() + ": " + w); }
    if (!run.record.tokens_to_target) { run.notes.push_back(path.string() + ": run never reaches the target loss"); }
    const auto *cp = m.early_activation(early_tokens);
    if (cp == nullptr) {
        run.notes.push_back(path.string() + ": no activation dump at or before the early token budget");
        return run;
    }
    run.early_checkpoint_tokens = cp->tokens;
    const auto dump = load_dump(*cp->activation_dump, ingest::DumpKind::Activation);
    const Spectrum spec = covariance_spectrum(dump.matrix);
    const RankWindow w = window ? *window : select_window(m.scale);
    if (w.hi > spec.size()) {
        run.notes.push_back(path.string() + ": spectrum length " + std::to_string(spec.size()) + " is shorter than window");
        return run;
    }
    run.record.early_alpha = band_alpha(spec, w).alpha;
    return run;
}

}  // namespace detail

inline int cmd_predict(const PredictOptions &o, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        if (!(o.early_tokens > 0.0)) { throw Exit(kInternal, "--early-tokens must be positive"); }
        std::optional<RankWindow> window;
        if (o.window) { window = detail::parse_window(*o.window); }
        const auto paths = detail::expand_patterns(o.manifests);
        if (paths.empty()) { throw Exit(kNothingAnalyzable, "no manifests matched"); }
        for (const auto &p : paths) { detail::require_file(p); }

        auto runs = parallel_map(
            paths, [&](const fs::path &p) { return detail::predict_one(p, o.early_tokens, window); },
            worker_count(o.workers));
        std::stable_sort(runs.begin(), runs.end(), [](const auto &a, const auto &b) {
            return std::tie(a.record.family, a.record.tier) < std::tie(b.record.family, b.record.tier);
        });
        std::vector<efficiency::RunRecord> records;
        for (const auto &r : runs) {
            for (const auto &n : r.notes) { err << "splx: warning: " << n << "\n"; }
            records.push_back(r.record);
        }
        const auto table = efficiency::early_prediction_table(records);

        report::CsvWriter fam_csv({"family", "tiers", "rho", "status", "reason"});
        report::CsvWriter run_csv({"family", "tier", "early_alpha", "tokens_to_target", "token_ratio"});
        json summary;
        summary["early_tokens"] = o.early_tokens;
        summary["families"] = json::array();
        for (const auto &f : table.families) {
            fam_csv.row({f.family, std::to_string(f.tiers), detail::optional_cell(f.rho), f.skipped ? "skipped" : "ok",
                         f.reason});
            json jf{{"family", f.family}, {"tiers", f.tiers}, {"rho", detail::optional_number(f.rho)},
                    {"skipped", f.skipped}, {"reason", f.reason}};
            jf["runs"] = json::array();
            for (std::size_t k = 0; k < f.tier_ids.size(); ++k) {
                jf["runs"].push_back(
                    {{"tier", f.tier_ids[k]}, {"early_alpha", f.early_alpha[k]}, {"token_ratio", f.token_ratio[k]}});
            }
            summary["families"].push_back(std::move(jf));
        }
        for (const auto &r : records) {
            std::optional<double> ratio;
            for (const auto &f : table.families) {
                for (std::size_t k = 0; k < f.tier_ids.size(); ++k) {
                    if (f.family == r.family && f.tier_ids[k] == r.tier) { ratio = f.token_ratio[k]; }
                }
            }
            run_csv.row({r.family, std::to_string(r.tier), detail::optional_cell(r.early_alpha),
                         detail::optional_cell(r.tokens_to_target), detail::optional_cell(ratio)});
        }
        summary["mean_within"] = detail::optional_number(table.mean_within);
        summary["pooled"] = detail::optional_number(table.pooled);

        if (o.out) {
            report::write_text(*o.out / "families.csv", fam_csv.str());
            report::write_text(*o.out / "runs.csv", run_csv.str());
            report::write_text(*o.out / "summary.json", summary.dump(2) + "\n");
        }
        out << summary.dump(2) << "\n";
        json cfg{{"manifests", o.manifests}, {"early_tokens", o.early_tokens}};
        cfg["window"] = o.window ? json(*o.window) : json(nullptr);
        detail::write_meta(o.meta, "predict", cfg);
        if (!table.mean_within) { throw Exit(kNothingAnalyzable, "no family has 2 or more complete tiers"); }
        return kOk;
    });
}

// ---------------------------------------------------------------------------

struct TaxonomyOptions {
    std::vector<std::string> manifests;  // consecutive variants, in chain order
    std::optional<fs::path> thresholds;
    std::optional<double> tau_tok, tau_thr, rho_dom;
    std::size_t head_hi = 30;
    std::optional<fs::path> out;
    std::optional<fs::path> meta;
    std::size_t workers = 0;
};

namespace detail {

struct VariantSummary {
    std::string name;
    std::optional<double> tokens;
    std::optional<double> throughput;
    std::optional<double> head_alpha;
    std::optional<double> top_share;
};

inline VariantSummary summarize_variant(const fs::path &path, std::size_t head_hi) {
    const auto m = ingest::read_manifest(path);
    VariantSummary v;
    v.name = path.stem().string();
    v.tokens = m.tokens_to_target();
    v.throughput = m.throughput;
    if (const auto *cp = m.final_with(ingest::DumpKind::Activation)) {
        const Spectrum spec = covariance_spectrum(load_dump(*cp->activation_dump, ingest::DumpKind::Activation).matrix);
        const std::size_t hi = std::min(head_hi, spec.size());
        if (hi >= 2) { v.head_alpha = band_alpha(spec, {1, hi}).alpha; }
    }
    if (const auto *cp = m.final_with(ingest::DumpKind::Gradient)) {
        const Spectrum spec = gradient_spectrum(load_dump(*cp->gradient_dump, ingest::DumpKind::Gradient).matrix);
        if (spec.has_normalized()) { v.top_share = spec.normalized().front(); }
    }
    return v;
}

inline efficiency::TaxonomyThresholds load_thresholds(const TaxonomyOptions &o) {
    efficiency::TaxonomyThresholds th;
    if (o.thresholds) {
        require_file(*o.thresholds);
        std::ifstream in(*o.thresholds);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error &e) {
            throw SchemaError("$", std::string("invalid thresholds JSON: ") + e.what());
        }
        auto take = [&](const char *key, double &slot) {
            if (auto it = j.find(key); it != j.end()) {
                if (!it->is_number()) { throw SchemaError(key, "expected a number"); }
                slot = it->get<double>();
            }
        };
        take("tau_tok", th.tau_tok);
        take("tau_thr", th.tau_thr);
        take("rho_dom", th.rho_dom);
    }
    if (o.tau_tok) { th.tau_tok = *o.tau_tok; }
    if (o.tau_thr) { th.tau_thr = *o.tau_thr; }
    if (o.rho_dom) { th.rho_dom = *o.rho_dom; }
    return th;
}

}  // namespace detail

inline int cmd_taxonomy(const TaxonomyOptions &o, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        const auto th = detail::load_thresholds(o);
        if (o.manifests.size() < 2) { throw Exit(kNothingAnalyzable, "taxonomy needs at least two manifests"); }
        std::vector<fs::path> paths(o.manifests.begin(), o.manifests.end());
        for (const auto &p : paths) { detail::require_file(p); }
        const auto variants = parallel_map(
            paths, [&](const fs::path &p) { return detail::summarize_variant(p, o.head_hi); }, worker_count(o.workers));

        report::CsvWriter csv({"from", "to", "tok_gain", "thr_gain", "g_tok", "g_thr", "activation_delta",
                               "gradient_delta", "label"});
        for (std::size_t k = 0; k + 1 < variants.size(); ++k) {
            const auto &a = variants[k];
            const auto &b = variants[k + 1];
            efficiency::TransitionRecord rec;
            rec.from_variant = a.name;
            rec.to_variant = b.name;
            std::vector<std::string> row{a.name, b.name};
            if (!a.tokens || !b.tokens || !a.throughput || !b.throughput) {
                err << "splx: warning: " << a.name << " -> " << b.name << " lacks tokens-to-target or throughput\n";
                row.insert(row.end(), {"", "", "", "", "", "", "incomplete"});
                csv.row(row);
                continue;
            }
            rec.gains = efficiency::transition_gains(*a.tokens, *b.tokens, *a.throughput, *b.throughput);
            if (a.head_alpha && b.head_alpha) { rec.activation_delta = std::abs(*b.head_alpha - *a.head_alpha); }
            if (a.top_share && b.top_share) { rec.gradient_delta = std::abs(*b.top_share - *a.top_share); }
            std::string label;
            try {
                label = efficiency::to_string(efficiency::classify_transition(rec, th));
            } catch (const IncompleteRecord &e) {
                err << "splx: warning: " << e.what() << "\n";
                label = "incomplete";
            }
            row.insert(row.end(), {report::format_double(rec.gains.tok_gain), report::format_double(rec.gains.thr_gain),
                                   report::format_double(rec.gains.g_tok), report::format_double(rec.gains.g_thr),
                                   detail::optional_cell(rec.activation_delta),
                                   detail::optional_cell(rec.gradient_delta), label});
            csv.row(row);
        }
        detail::emit(out, o.out, csv.str());
        detail::write_meta(o.meta, "taxonomy",
                           {{"manifests", o.manifests},
                            {"tau_tok", th.tau_tok},
                            {"tau_thr", th.tau_thr},
                            {"rho_dom", th.rho_dom},
                            {"head_hi", o.head_hi}});
        return kOk;
    });
}

// ---------------------------------------------------------------------------

struct ToyOptions {
    std::string subcommand;            // simulate | verify
    std::optional<std::string> target;  // verify: result name
    std::optional<fs::path> config;
    std::optional<fs::path> out;
    std::optional<fs::path> meta;
    std::uint64_t seed = 42;
};

namespace detail {

inline json load_config(const std::optional<fs::path> &p) {
    if (!p) { return json::object(); }
    require_file(*p);
    std::ifstream in(*p);
    try {
        json j = json::parse(in);
        if (!j.is_object()) { throw SchemaError("$", "config must be a JSON object"); }
        return j;
    } catch (const json::parse_error &e) {
        throw SchemaError("$", std::string("invalid config JSON: ") + e.what());
    }
}

template<typename T>
T config_value(const json &cfg, const char *key, T fallback) {
    auto it = cfg.find(key);
    if (it == cfg.end()) { return fallback; }
    try {
        return it->get<T>();
    } catch (const json::exception &) {
        throw SchemaError(key, "has the wrong type");
    }
}

struct SimOutput {
    std::string primary_name;
    std::string primary;
    json summary;
};

inline SimOutput simulate_three_zone(const json &cfg) {
    dynamics::SmoothSpectrumConfig s;
    s.scale = config_value(cfg, "C", 1.0);
    s.teacher_exp = config_value(cfg, "p", 1.0);
    s.rate_exp = config_value(cfg, "q", 0.5);
    s.rate = config_value(cfg, "eta", 1.0);
    const double r_star = config_value(cfg, "crossover_rank", 100.0);
    const double multiple = config_value(cfg, "rank_multiple", 400.0);
    if (!(r_star >= 1.0) || !(multiple >= 2.0)) { throw SchemaError("crossover_rank", "need r_* >= 1 and multiple >= 2"); }
    if (!(s.rate_exp > 0.0)) { throw SchemaError("q", "must be positive"); }
    s.ranks = static_cast<std::size_t>(std::llround(multiple * r_star));
    const double t = std::pow(r_star, s.rate_exp) / s.rate;
    const Spectrum spec = dynamics::smooth_act_spectrum(s, t);
    const std::size_t head_hi = std::max<std::size_t>(2, static_cast<std::size_t>(r_star / 1000.0));
    const std::size_t tail_lo = static_cast<std::size_t>(multiple * r_star / 2.0);
    const auto head = band_alpha(spec, {1, head_hi});
    const auto tail = band_alpha(spec, {tail_lo, s.ranks});
    SimOutput o;
    o.primary_name = "spectrum.csv";
    o.primary = spectrum_csv(spec, "eigenvalue", true);
    o.summary = {{"model", "three-zone"},
                 {"p", s.teacher_exp},
                 {"q", s.rate_exp},
                 {"eta", s.rate},
                 {"t", t},
                 {"crossover_rank", dynamics::crossover_rank(s, t)},
                 {"ranks", s.ranks},
                 {"head_window", {1, head_hi}},
                 {"head_alpha", head.alpha},
                 {"tail_window", {tail_lo, s.ranks}},
                 {"tail_alpha", tail.alpha},
                 {"predicted_tail_alpha", dynamics::tail_alpha(s)}};
    return o;
}

inline std::vector<double> time_grid(const json &cfg, double default_end) {
    const double t_end = config_value(cfg, "t_max", default_end);
    const auto points = config_value<std::size_t>(cfg, "points", 101);
    if (!(t_end > 0.0) || points < 2) { throw SchemaError("t_max", "need t_max > 0 and points >= 2"); }
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k) { g[k] = t_end * static_cast<double>(k) / static_cast<double>(points - 1); }
    return g;
}

inline SimOutput simulate_one_layer(const json &cfg) {
    dynamics::OneLayerConfig c;
    if (!cfg.contains("modes")) { throw SchemaError("modes", "missing required field"); }
    for (const auto &m : cfg.at("modes")) {
        c.modes.push_back({config_value(m, "beta", 1.0), config_value(m, "kappa", 1.0), config_value(m, "a0", 0.0)});
    }
    c.validate();
    const double kmin = c.min_rate();
    const auto grid = time_grid(cfg, kmin > 0.0 ? 10.0 / kmin : 10.0);
    std::vector<std::string> header{"t", "loss", "leading_share"};
    for (std::size_t r = 0; r < c.modes.size(); ++r) { header.push_back("a" + std::to_string(r + 1)); }
    report::CsvWriter csv(header);
    for (double t : grid) {
        const auto a = dynamics::one_layer_state(c, t);
        std::string share;
        try {
            share = report::format_double(dynamics::leading_mode_share(c, t));
        } catch (const DegenerateInput &) {
            share = "";
        }
        std::vector<std::string> row{report::format_double(t), report::format_double(dynamics::loss(c, t)), share};
        for (double v : a) { row.push_back(report::format_double(v)); }
        csv.row(row);
    }
    return {"trajectory.csv", csv.str(), {{"model", "one-layer"}, {"modes", c.modes.size()}, {"points", grid.size()}}};
}

inline SimOutput simulate_two_layer(const json &cfg) {
    dynamics::TwoLayerConfig c;
    if (!cfg.contains("modes")) { throw SchemaError("modes", "missing required field"); }
    for (const auto &m : cfg.at("modes")) { c.modes.push_back({config_value(m, "beta", 1.0), config_value(m, "m0", 0.1)}); }
    c.validate();
    std::vector<std::size_t> band = config_value(cfg, "band", std::vector<std::size_t>{});
    double bmin = 0.0;
    for (const auto &m : c.modes) {
        if (m.beta > 0.0) { bmin = bmin == 0.0 ? m.beta : std::min(bmin, m.beta); }
    }
    const auto grid = time_grid(cfg, bmin > 0.0 ? 10.0 / bmin : 10.0);
    std::vector<std::string> header{"t"};
    if (!band.empty()) { header.push_back("H_S"); }
    for (std::size_t r = 0; r < c.modes.size(); ++r) { header.push_back("m" + std::to_string(r + 1)); }
    report::CsvWriter csv(header);
    for (double t : grid) {
        const auto m = dynamics::two_layer_state(c, t);
        std::vector<std::string> row{report::format_double(t)};
        if (!band.empty()) { row.push_back(report::format_double(dynamics::band_statistic(m, band))); }
        for (double v : m) { row.push_back(report::format_double(v)); }
        csv.row(row);
    }
    return {"trajectory.csv", csv.str(), {{"model", "two-layer"}, {"modes", c.modes.size()}, {"points", grid.size()}}};
}

inline std::string verify_text(const verify::Report &rep) {
    std::string s;
    for (const auto &c : rep.checks) {
        s += std::string(c.passed ? "PASS" : "FAIL") + "  " + c.name;
        if (!c.detail.empty()) { s += "  (" + c.detail + ")"; }
        s += "\n";
    }
    s += std::string(rep.passed() ? "PASS" : "FAIL") + "  " + rep.result + "\n";
    return s;
}

}  // namespace detail

inline int cmd_toy(const ToyOptions &o, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        const json cfg = detail::load_config(o.config);
        if (o.subcommand == "simulate") {
            const std::string model = detail::config_value<std::string>(cfg, "model", "three-zone");
            detail::SimOutput sim;
            if (model == "three-zone") {
                sim = detail::simulate_three_zone(cfg);
            } else if (model == "one-layer") {
                sim = detail::simulate_one_layer(cfg);
            } else if (model == "two-layer") {
                sim = detail::simulate_two_layer(cfg);
            } else {
                throw SchemaError("model", "unknown model '" + model + "' (three-zone, one-layer, two-layer)");
            }
            if (o.out) {
                report::write_text(*o.out / sim.primary_name, sim.primary);
                report::write_text(*o.out / "summary.json", sim.summary.dump(2) + "\n");
                out << sim.summary.dump(2) << "\n";
            } else {
                out << sim.primary;
            }
            detail::write_meta(o.meta, "toy simulate", {{"config", cfg}, {"seed", o.seed}});
            return kOk;
        }
        if (o.subcommand == "verify") {
            const auto names = verify::names();
            const std::string target = o.target.value_or("");
            if (std::find(names.begin(), names.end(), target) == names.end()) {
                std::string list;
                for (const auto &n : names) { list += (list.empty() ? "" : ", ") + n; }
                throw Exit(kUnknownTarget, "unknown verification target '" + target + "'; valid names: " + list);
            }
            const auto seed = detail::config_value<std::uint64_t>(cfg, "seed", o.seed);
            const auto rep = verify::run(target, {seed});
            const std::string text = detail::verify_text(rep);
            out << text;
            if (o.out) { report::write_text(*o.out, text); }
            detail::write_meta(o.meta, "toy verify", {{"target", target}, {"seed", seed}});
            return rep.passed() ? kOk : kInternal;
        }
        throw Exit(kInternal, "toy subcommand must be simulate or verify");
    });
}

}  // namespace splx::cli
