// tristat — tricluster statistical significance toolkit
//
// Subcommands:
//   assess      score triclusters against a tensor under a null-model profile
//   generate    synthesize a tensor with planted triclusters
//   mintable    minimum-observation grid under the theoretical uniform null
//   preprocess  PAA and/or discretization of a real-valued tensor

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tristat/tristat.hpp"

namespace fs = std::filesystem;
using namespace tristat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitRecords = 3;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

bool has_extension(const fs::path& p, const char* ext) {
    std::string e = p.extension().string();
    for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e == ext;
}

// CSV tensors carry their domains/temporal flag in a sidecar next to the file
fs::path sidecar_path(const fs::path& tensor_path) {
    fs::path p = tensor_path;
    p += ".meta.json";
    return p;
}

Tensor3 load_tensor(const fs::path& path) {
    if (has_extension(path, ".json")) return tensor_from_json(json::parse(slurp(path)));
    CsvReadOptions opts;
    const fs::path meta = sidecar_path(path);
    if (fs::exists(meta)) {
        const json m = json::parse(slurp(meta));
        opts.temporal = m.value("temporal", false);
        if (m.contains("domains")) {
            const auto labels = m.at("labels").get<std::vector<std::string>>();
            const auto& doms = m.at("domains");
            for (std::size_t j = 0; j < labels.size(); ++j)
                opts.declared_domains.emplace_back(labels[j], domain_from_json(doms.at(j)));
        }
    }
    std::istringstream ss(slurp(path));
    return read_tensor_csv(ss, opts);
}

void store_tensor(const Tensor3& t, const fs::path& path) {
    if (has_extension(path, ".json")) {
        spill(path, tensor_to_json(t).dump(2) + "\n");
        return;
    }
    std::ostringstream ss;
    write_tensor_csv(t, ss);
    spill(path, ss.str());
    json meta;
    meta["temporal"] = t.ctx_is_temporal();
    meta["labels"] = t.var_labels();
    meta["domains"] = json::array();
    for (const auto& d : t.domains()) meta["domains"].push_back(domain_to_json(d));
    spill(sidecar_path(path), meta.dump(2) + "\n");
}

std::vector<std::size_t> parse_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(static_cast<std::size_t>(std::stoull(tok)));
    if (out.empty()) throw InvalidArgument("empty list '" + csv + "'");
    return out;
}

// --------------------------------------------------------------------------
int run_assess(const fs::path& tensor_path, const fs::path& tric_path, const std::string& var_dep,
               const std::string& ctx, double alpha, double fdr, const std::string& span_mode,
               double smoothing, const fs::path& out_path, const std::string& format,
               const std::string& dump_tables) {
    const Tensor3 t = load_tensor(tensor_path);
    const std::vector<Tricluster> tcs = triclusters_from_json(json::parse(slurp(tric_path)), t);

    AssumptionProfile profile;
    profile.var_dep = var_dep == "md" ? VarDep::MD : VarDep::MI;
    profile.ctx_model = ctx == "md" ? CtxModel::MD : ctx == "tc" ? CtxModel::TC : CtxModel::MI;
    profile.smoothing = smoothing;
    profile.validate_for(t);

    std::string gate_verdict = span_mode;
    if (span_mode == "on") {
        profile.identically_distributed = true;
    } else if (span_mode == "off") {
        profile.identically_distributed = false;
    } else {
        const GofReport gof = identically_distributed(t, alpha);
        profile.identically_distributed = gof.identically_distributed;
        std::size_t rejected = 0;
        for (const auto& p : gof.pairs) rejected += p.rejected;
        gate_verdict = std::string("auto -> ") + (gof.identically_distributed ? "on" : "off") +
                       " (" + std::to_string(rejected) + "/" + std::to_string(gof.pairs.size()) +
                       " pairs rejected at alpha=" + fmt6(alpha) + ")";
    }

    if (!dump_tables.empty()) {
        json dump;
        const auto pooled = estimate_marginals(t, Scope::Pooled, smoothing);
        dump["pooled_counts"] = pooled.counts;
        dump["pooled_support"] = pooled.support;
        if (t.ctx_is_temporal() && t.n_ctx() >= 2) {
            const auto tr = estimate_transitions(t, smoothing);
            dump["pair_counts"] = tr.pair_counts;
            dump["pair_total"] = tr.pair_total;
        }
        spill(dump_tables, dump.dump(2) + "\n");
    }

    const std::vector<SignificanceResult> results = assess(t, tcs, profile);

    // BH runs on the span-corrected p-values when the gate is on, else raw;
    // failed triclusters enter as p = 1 so record count stays aligned
    std::vector<double> pvals(results.size(), 1.0);
    for (std::size_t ix = 0; ix < results.size(); ++ix)
        if (!results[ix].failed())
            pvals[ix] = profile.identically_distributed ? results[ix].pvalue_span()
                                                        : results[ix].pvalue_raw();
    AdjustedReport adjusted;
    if (!results.empty()) adjusted = benjamini_hochberg(pvals, fdr);

    std::vector<ReportRecord> records(results.size());
    bool any_failed = false;
    for (std::size_t ix = 0; ix < results.size(); ++ix) {
        ReportRecord& rec = records[ix];
        const SignificanceResult& r = results[ix];
        rec.id = ix;
        rec.n_obs = tcs[ix].obs_idx.size();
        rec.n_vars = tcs[ix].var_idx.size();
        rec.n_ctx = tcs[ix].ctx_idx.size();
        if (r.failed()) {
            rec.error = r.error;
            any_failed = true;
            continue;
        }
        rec.log10_p_pattern = r.log_p_pattern / std::log(10.0);
        rec.p_value = r.pvalue_raw();
        rec.p_value_span = r.pvalue_span();
        rec.q_value = adjusted.entries[ix].q_value;
        rec.tier = adjusted.entries[ix].tier;
        rec.assessable = r.assessable;
    }

    std::vector<std::pair<std::string, std::string>> meta = {
        {"tensor", tensor_path.filename().string()},
        {"profile", std::string("vars=") + (profile.var_dep == VarDep::MD ? "md" : "mi") +
                        " ctx=" + ctx},
        {"span_correction", gate_verdict},
        {"fdr", fmt6(fdr)},
        {"alpha", fmt6(alpha)}};
    std::ostringstream ss;
    if (format == "json")
        ss << report_to_json(records, meta).dump(2) << "\n";
    else
        write_report_csv(ss, records, meta);
    if (out_path.empty())
        std::cout << ss.str();
    else
        spill(out_path, ss.str());
    return any_failed ? kExitRecords : kExitOk;
}

// --------------------------------------------------------------------------
int run_generate(const GenSpec& spec, const fs::path& out_tensor, const fs::path& out_manifest) {
    const auto [tensor, manifest] = generate(spec);
    store_tensor(tensor, out_tensor);
    json m = manifest_to_json(manifest, tensor);
    m["seed"] = spec.seed;
    spill(out_manifest, m.dump(2) + "\n");
    return kExitOk;
}

// --------------------------------------------------------------------------
int run_mintable(std::size_t obs, std::size_t vars, std::size_t ctxs, const std::string& Ls,
                 const std::string& Js, const std::string& Ks, double alpha,
                 const fs::path& out_path) {
    const auto cells =
        min_obs_grid(obs, vars, ctxs, parse_list(Ls), parse_list(Js), parse_list(Ks), alpha);
    std::ostringstream ss;
    write_grid_csv(ss, cells);
    if (out_path.empty())
        std::cout << ss.str();
    else
        spill(out_path, ss.str());
    return kExitOk;
}

// --------------------------------------------------------------------------
int run_preprocess(const fs::path& tensor_path, std::size_t paa_target, std::size_t bins,
                   const std::string& strategy, const fs::path& out_path) {
    Tensor3 t = load_tensor(tensor_path);
    if (paa_target > 0) t = paa(t, paa_target);
    if (bins > 0)
        t = discretize(t, bins,
                       strategy == "equal-frequency" ? BinStrategy::EqualFrequency
                                                     : BinStrategy::EqualWidth);
    store_tensor(t, out_path);
    // bin-edge sidecar for the discretization step
    if (bins > 0) {
        json edges;
        edges["labels"] = t.var_labels();
        edges["domains"] = json::array();
        for (const auto& d : t.domains()) edges["domains"].push_back(domain_to_json(d));
        fs::path p = out_path;
        p += ".domains.json";
        spill(p, edges.dump(2) + "\n");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tricluster statistical significance toolkit"};
    app.require_subcommand(1);

    // assess
    auto* assess_cmd = app.add_subcommand("assess", "score triclusters against a tensor");
    fs::path a_tensor, a_trics, a_out;
    std::string a_vardep = "mi", a_ctx = "mi", a_span = "auto", a_format = "csv", a_dump;
    double a_alpha = 0.05, a_fdr = 0.05, a_smoothing = 0.0;
    assess_cmd->add_option("--tensor", a_tensor, "tensor file (.json or .csv)")->required();
    assess_cmd->add_option("--triclusters", a_trics, "tricluster JSON file")->required();
    assess_cmd->add_option("--var-dep", a_vardep, "variable dependency (default mi)")
        ->check(CLI::IsMember({"mi", "md"}));
    assess_cmd->add_option("--ctx", a_ctx, "context model (default mi)")
        ->check(CLI::IsMember({"mi", "md", "tc"}));
    assess_cmd->add_option("--alpha", a_alpha, "significance level (default 0.05)");
    assess_cmd->add_option("--fdr", a_fdr, "Benjamini-Hochberg FDR level (default 0.05)");
    assess_cmd->add_option("--span-correction", a_span,
                           "variable-span correction: auto runs the identically-distributed gate "
                           "(default auto)")
        ->check(CLI::IsMember({"auto", "on", "off"}));
    assess_cmd->add_option("--smoothing", a_smoothing, "additive pseudo-count (default 0)");
    assess_cmd->add_option("--out", a_out, "output path (default stdout)");
    assess_cmd->add_option("--format", a_format, "output format (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    assess_cmd->add_option("--dump-tables", a_dump, "write estimation tables to this JSON file");

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "synthesize a tensor with planted triclusters");
    fs::path g_spec, g_tensor, g_manifest;
    GenSpec spec;
    std::string g_background = "uniform";
    std::vector<std::size_t> g_obs_range, g_var_range, g_ctx_range;
    gen_cmd->add_option("--spec", g_spec, "GenSpec JSON file (flags override it)");
    auto* g_obs = gen_cmd->add_option("--obs", spec.n_obs, "observations (default 1000)");
    auto* g_vars = gen_cmd->add_option("--vars", spec.n_vars, "variables (default 50)");
    auto* g_ctxs = gen_cmd->add_option("--ctxs", spec.n_ctx, "contexts (default 50)");
    auto* g_bg = gen_cmd->add_option("--background", g_background, "uniform|gaussian")
                     ->check(CLI::IsMember({"uniform", "gaussian"}));
    auto* g_mu = gen_cmd->add_option("--mu", spec.mu, "gaussian mean (default 0)");
    auto* g_sigma = gen_cmd->add_option("--sigma", spec.sigma, "gaussian sd (default 30)");
    auto* g_card = gen_cmd->add_option("--cardinality", spec.cardinality, "|L| (default 3)");
    auto* g_planted = gen_cmd->add_option("--planted", spec.n_planted, "plantings (default 5)");
    auto* g_or = gen_cmd->add_option("--obs-range", g_obs_range, "planted |I| range lo hi")
                     ->expected(2);
    auto* g_vr = gen_cmd->add_option("--var-range", g_var_range, "planted |J| range lo hi")
                     ->expected(2);
    auto* g_cr = gen_cmd->add_option("--ctx-range", g_ctx_range, "planted |K| range lo hi")
                     ->expected(2);
    auto* g_contig =
        gen_cmd->add_flag("--contiguous,!--non-contiguous", spec.contiguous,
                          "plant contiguous context runs (default on)");
    auto* g_seed = gen_cmd->add_option("--seed", spec.seed, "RNG seed (default 0)");
    gen_cmd->add_option("--out-tensor", g_tensor, "tensor output path")->required();
    gen_cmd->add_option("--out-manifest", g_manifest, "manifest output path")->required();

    // mintable
    auto* min_cmd = app.add_subcommand("mintable", "minimum-observation grid (uniform null)");
    std::size_t m_obs = 1000, m_vars = 50, m_ctxs = 50;
    std::string m_L = "3,5", m_J = "2,3,4,5", m_K = "2,3,4,5";
    double m_alpha = 0.01;
    fs::path m_out;
    min_cmd->add_option("--obs", m_obs, "|X| (default 1000)");
    min_cmd->add_option("--vars", m_vars, "|Y| (default 50)");
    min_cmd->add_option("--ctxs", m_ctxs, "|Z| (default 50)");
    min_cmd->add_option("--L", m_L, "cardinality list (default 3,5)");
    min_cmd->add_option("--J", m_J, "pattern variable counts (default 2,3,4,5)");
    min_cmd->add_option("--K", m_K, "pattern context counts (default 2,3,4,5)");
    min_cmd->add_option("--alpha", m_alpha, "significance level (default 0.01)");
    min_cmd->add_option("--out", m_out, "output path (default stdout)");

    // preprocess
    auto* pre_cmd = app.add_subcommand("preprocess", "PAA and/or discretization");
    fs::path p_tensor, p_out;
    std::size_t p_paa = 0, p_bins = 0;
    std::string p_strategy = "equal-width";
    pre_cmd->add_option("--tensor", p_tensor, "input tensor")->required();
    pre_cmd->add_option("--paa", p_paa, "PAA target context count (0 = skip)");
    pre_cmd->add_option("--discretize", p_bins, "discretization bins (0 = skip)");
    pre_cmd->add_option("--strategy", p_strategy, "binning strategy (default equal-width)")
        ->check(CLI::IsMember({"equal-width", "equal-frequency"}));
    pre_cmd->add_option("--out", p_out, "output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (assess_cmd->parsed())
            return run_assess(a_tensor, a_trics, a_vardep, a_ctx, a_alpha, a_fdr, a_span,
                              a_smoothing, a_out, a_format, a_dump);
        if (gen_cmd->parsed()) {
            if (!g_spec.empty()) {
                const json js = json::parse(slurp(g_spec));
                if (!g_obs->count() && js.contains("obs")) spec.n_obs = js["obs"];
                if (!g_vars->count() && js.contains("vars")) spec.n_vars = js["vars"];
                if (!g_ctxs->count() && js.contains("ctxs")) spec.n_ctx = js["ctxs"];
                if (!g_bg->count() && js.contains("background"))
                    g_background = js["background"].get<std::string>();
                if (!g_mu->count() && js.contains("mu")) spec.mu = js["mu"];
                if (!g_sigma->count() && js.contains("sigma")) spec.sigma = js["sigma"];
                if (!g_card->count() && js.contains("cardinality"))
                    spec.cardinality = js["cardinality"];
                if (!g_planted->count() && js.contains("planted")) spec.n_planted = js["planted"];
                if (!g_seed->count() && js.contains("seed")) spec.seed = js["seed"];
                if (!g_contig->count() && js.contains("contiguous"))
                    spec.contiguous = js["contiguous"];
                auto load_range = [&](const char* key, CLI::Option* opt, SizeRange& r) {
                    if (!opt->count() && js.contains(key)) {
                        r.lo = js[key].at(0);
                        r.hi = js[key].at(1);
                    }
                };
                load_range("obs_range", g_or, spec.obs_range);
                load_range("var_range", g_vr, spec.var_range);
                load_range("ctx_range", g_cr, spec.ctx_range);
            }
            if (g_or->count()) spec.obs_range = {g_obs_range[0], g_obs_range[1]};
            if (g_vr->count()) spec.var_range = {g_var_range[0], g_var_range[1]};
            if (g_cr->count()) spec.ctx_range = {g_ctx_range[0], g_ctx_range[1]};
            spec.background =
                g_background == "gaussian" ? Background::Gaussian : Background::Uniform;
            // ranges left at their paper-scale defaults shrink to fit the axes
            auto fit = [](CLI::Option* opt, bool from_spec, SizeRange& r, std::size_t axis) {
                if (!opt->count() && !from_spec) {
                    r.lo = std::min(r.lo, axis);
                    r.hi = std::min(r.hi, axis);
                }
            };
            const json js = g_spec.empty() ? json::object() : json::parse(slurp(g_spec));
            fit(g_or, js.contains("obs_range"), spec.obs_range, spec.n_obs);
            fit(g_vr, js.contains("var_range"), spec.var_range, spec.n_vars);
            fit(g_cr, js.contains("ctx_range"), spec.ctx_range, spec.n_ctx);
            return run_generate(spec, g_tensor, g_manifest);
        }
        if (min_cmd->parsed())
            return run_mintable(m_obs, m_vars, m_ctxs, m_L, m_J, m_K, m_alpha, m_out);
        if (pre_cmd->parsed()) return run_preprocess(p_tensor, p_paa, p_bins, p_strategy, p_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
