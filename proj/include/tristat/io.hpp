#pragma once

#include <charconv>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tristat/format.hpp"
#include "tristat/harness.hpp"
#include "tristat/multiplicity.hpp"
#include "tristat/synthgen.hpp"
#include "tristat/tensor.hpp"

namespace tristat {

using nlohmann::json;

// ============================================================================
// Long-form CSV: header `obs,var,ctx,value`, one row per non-missing cell,
// labels mapped to indices in first-appearance order. The format carries no
// domain or temporal metadata; readers may declare domains up front (the CLI
// does this through a sidecar file).
// ============================================================================
struct CsvReadOptions {
    bool temporal = false;
    // declared domain per variable label; undeclared variables are inferred
    // (all-numeric values -> real, otherwise ordinal in first-appearance order)
    std::vector<std::pair<std::string, VariableDomain>> declared_domains;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
    if (line.find('"') != std::string::npos)
        throw ParseError("quoted CSV fields are not supported", lineno);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size()) return std::nullopt;
    return v;
}

}  // namespace detail

inline void write_tensor_csv(const Tensor3& t, std::ostream& os) {
    os << "obs,var,ctx,value\n";
    for (std::size_t i = 0; i < t.n_obs(); ++i)
        for (std::size_t j = 0; j < t.n_vars(); ++j)
            for (std::size_t k = 0; k < t.n_ctx(); ++k) {
                if (t.missing(i, j, k)) continue;
                os << t.obs_labels()[i] << ',' << t.var_labels()[j] << ',' << t.ctx_labels()[k]
                   << ',';
                if (t.domain(j).kind == DomainKind::Ordinal)
                    os << t.domain(j).categories[static_cast<std::size_t>(t.category(i, j, k))];
                else
                    os << fmt_exact(t.value(i, j, k));
                os << '\n';
            }
}

inline Tensor3 read_tensor_csv(std::istream& is, const CsvReadOptions& opts = {}) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) throw ParseError("empty CSV input", 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "obs,var,ctx,value")
        throw ParseError("expected header 'obs,var,ctx,value'", lineno);

    struct Record {
        std::size_t i, j, k;
        std::string value;
        std::size_t lineno;
    };
    std::vector<Record> records;
    std::vector<std::string> obs_labels, var_labels, ctx_labels;
    std::map<std::string, std::size_t> obs_ix, var_ix, ctx_ix;
    auto intern = [](const std::string& label, std::vector<std::string>& labels,
                     std::map<std::string, std::size_t>& index) {
        const auto it = index.find(label);
        if (it != index.end()) return it->second;
        const std::size_t ix = labels.size();
        labels.push_back(label);
        index.emplace(label, ix);
        return ix;
    };

    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line, lineno);
        if (fields.size() != 4) throw ParseError("expected 4 fields", lineno);
        records.push_back({intern(fields[0], obs_labels, obs_ix),
                           intern(fields[1], var_labels, var_ix),
                           intern(fields[2], ctx_labels, ctx_ix), fields[3], lineno});
    }
    if (records.empty()) throw ParseError("CSV has no data rows", lineno);

    // resolve domains: declared by label, otherwise inferred
    std::vector<VariableDomain> domains(var_labels.size());
    std::vector<bool> declared(var_labels.size(), false);
    for (const auto& [label, dom] : opts.declared_domains) {
        const auto it = var_ix.find(label);
        if (it == var_ix.end()) continue;
        domains[it->second] = dom;
        declared[it->second] = true;
    }
    for (std::size_t j = 0; j < var_labels.size(); ++j) {
        if (declared[j]) continue;
        bool numeric = true;
        std::vector<std::string> cats;
        for (const auto& r : records) {
            if (r.j != j) continue;
            if (!detail::parse_double(r.value)) numeric = false;
            if (std::find(cats.begin(), cats.end(), r.value) == cats.end())
                cats.push_back(r.value);
        }
        domains[j] = numeric ? VariableDomain::real() : VariableDomain::ordinal(std::move(cats));
    }

    Tensor3 t(obs_labels.size(), var_labels.size(), ctx_labels.size(), domains, opts.temporal);
    t.set_labels(obs_labels, var_labels, ctx_labels);
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, bool> seen;
    for (const auto& r : records) {
        if (!seen.emplace(std::tuple{r.i, r.j, r.k}, true).second)
            throw ParseError("duplicate cell (" + obs_labels[r.i] + "," + var_labels[r.j] + "," +
                                 ctx_labels[r.k] + ")",
                             r.lineno);
        if (domains[r.j].kind == DomainKind::Real) {
            const auto v = detail::parse_double(r.value);
            if (!v)
                throw DomainMismatch("value '" + r.value + "' on line " +
                                     std::to_string(r.lineno) + " is not numeric for variable '" +
                                     var_labels[r.j] + "'");
            t.set_real(r.i, r.j, r.k, *v);
        } else {
            const auto c = domains[r.j].category_index(r.value);
            if (!c)
                throw DomainMismatch("value '" + r.value + "' on line " +
                                     std::to_string(r.lineno) + " outside domain of variable '" +
                                     var_labels[r.j] + "'");
            t.set_category(r.i, r.j, r.k, *c);
        }
    }
    return t;
}

// ============================================================================
// Tensor JSON: self-describing, lossless
// ============================================================================
inline json domain_to_json(const VariableDomain& d) {
    json out;
    out["kind"] = d.kind == DomainKind::Ordinal ? "ordinal" : "real";
    if (d.kind == DomainKind::Ordinal) out["categories"] = d.categories;
    if (!d.bin_edges.empty()) out["bin_edges"] = d.bin_edges;
    if (d.degenerate) out["degenerate"] = true;
    return out;
}

inline VariableDomain domain_from_json(const json& in) {
    VariableDomain d;
    const std::string kind = in.at("kind").get<std::string>();
    if (kind == "ordinal") {
        d = VariableDomain::ordinal(in.at("categories").get<std::vector<std::string>>());
    } else if (kind != "real") {
        throw DomainMismatch("unknown domain kind '" + kind + "'");
    }
    if (in.contains("bin_edges")) d.bin_edges = in["bin_edges"].get<std::vector<double>>();
    if (in.contains("degenerate")) d.degenerate = in["degenerate"].get<bool>();
    return d;
}

inline json tensor_to_json(const Tensor3& t) {
    json out;
    out["obs"] = t.obs_labels();
    out["vars"] = t.var_labels();
    out["ctxs"] = t.ctx_labels();
    out["temporal"] = t.ctx_is_temporal();
    out["domains"] = json::array();
    for (const auto& d : t.domains()) out["domains"].push_back(domain_to_json(d));
    json cells = json::array();
    for (std::size_t i = 0; i < t.n_obs(); ++i)
        for (std::size_t j = 0; j < t.n_vars(); ++j)
            for (std::size_t k = 0; k < t.n_ctx(); ++k) {
                if (t.missing(i, j, k)) continue;
                json cell = json::array({i, j, k});
                if (t.domain(j).kind == DomainKind::Ordinal)
                    cell.push_back(
                        t.domain(j).categories[static_cast<std::size_t>(t.category(i, j, k))]);
                else
                    cell.push_back(t.value(i, j, k));
                cells.push_back(std::move(cell));
            }
    out["cells"] = std::move(cells);
    return out;
}

inline Tensor3 tensor_from_json(const json& in) {
    const auto obs = in.at("obs").get<std::vector<std::string>>();
    const auto vars = in.at("vars").get<std::vector<std::string>>();
    const auto ctxs = in.at("ctxs").get<std::vector<std::string>>();
    std::vector<VariableDomain> domains;
    for (const auto& d : in.at("domains")) domains.push_back(domain_from_json(d));
    if (domains.size() != vars.size())
        throw ParseError("domain count does not match variable count", 0);
    Tensor3 t(obs.size(), vars.size(), ctxs.size(), domains, in.at("temporal").get<bool>());
    t.set_labels(obs, vars, ctxs);
    for (const auto& cell : in.at("cells")) {
        if (!cell.is_array() || cell.size() != 4) throw ParseError("malformed cell record", 0);
        const auto i = cell[0].get<std::size_t>();
        const auto j = cell[1].get<std::size_t>();
        const auto k = cell[2].get<std::size_t>();
        if (i >= t.n_obs() || j >= t.n_vars() || k >= t.n_ctx())
            throw ParseError("cell index out of range", 0);
        if (t.domain(j).kind == DomainKind::Ordinal) {
            const auto label = cell[3].get<std::string>();
            const auto c = t.domain(j).category_index(label);
            if (!c)
                throw DomainMismatch("category '" + label + "' outside domain of variable '" +
                                     vars[j] + "'");
            t.set_category(i, j, k, *c);
        } else {
            t.set_real(i, j, k, cell[3].get<double>());
        }
    }
    return t;
}

// ============================================================================
// Tricluster JSON (indices or labels, resolved against the tensor)
// ============================================================================
namespace detail {

inline std::vector<std::size_t> resolve_axis(const json& arr,
                                             const std::vector<std::string>& labels,
                                             const char* axis) {
    std::vector<std::size_t> out;
    for (const auto& e : arr) {
        if (e.is_number_unsigned() || e.is_number_integer()) {
            const auto ix = e.get<long long>();
            if (ix < 0 || static_cast<std::size_t>(ix) >= labels.size())
                throw InvalidArgument(std::string(axis) + " index out of range");
            out.push_back(static_cast<std::size_t>(ix));
        } else if (e.is_string()) {
            const auto it = std::find(labels.begin(), labels.end(), e.get<std::string>());
            if (it == labels.end())
                throw InvalidArgument(std::string(axis) + " label '" + e.get<std::string>() +
                                      "' not found");
            out.push_back(static_cast<std::size_t>(it - labels.begin()));
        } else {
            throw InvalidArgument(std::string(axis) + " entries must be indices or labels");
        }
    }
    std::sort(out.begin(), out.end());
    for (std::size_t n = 1; n < out.size(); ++n)
        if (out[n] == out[n - 1]) throw InvalidArgument(std::string(axis) + " has duplicates");
    return out;
}

}  // namespace detail

inline std::vector<Tricluster> triclusters_from_json(const json& in, const Tensor3& t) {
    std::vector<Tricluster> out;
    for (const auto& rec : in.at("triclusters")) {
        Tricluster tc;
        tc.obs_idx = detail::resolve_axis(rec.at("I"), t.obs_labels(), "I");
        tc.var_idx = detail::resolve_axis(rec.at("J"), t.var_labels(), "J");
        tc.ctx_idx = detail::resolve_axis(rec.at("K"), t.ctx_labels(), "K");
        tc.contiguous_ctx = rec.value("contiguous", false);
        tc.validate(t);
        out.push_back(std::move(tc));
    }
    return out;
}

inline json triclusters_to_json(const std::vector<Tricluster>& tcs) {
    json arr = json::array();
    for (const auto& tc : tcs) {
        json rec;
        rec["I"] = tc.obs_idx;
        rec["J"] = tc.var_idx;
        rec["K"] = tc.ctx_idx;
        rec["contiguous"] = tc.contiguous_ctx;
        arr.push_back(std::move(rec));
    }
    return json{{"triclusters", std::move(arr)}};
}

// Planting manifest: tricluster schema plus the planted pattern, category
// labels row-major over J x K.
inline json manifest_to_json(const PlantingManifest& m, const Tensor3& t) {
    json arr = json::array();
    for (const auto& p : m.planted) {
        json rec;
        rec["I"] = p.tc.obs_idx;
        rec["J"] = p.tc.var_idx;
        rec["K"] = p.tc.ctx_idx;
        rec["contiguous"] = p.tc.contiguous_ctx;
        json pattern = json::array();
        for (std::size_t jp = 0; jp < p.pattern.var_idx.size(); ++jp) {
            json row = json::array();
            for (std::size_t kp = 0; kp < p.pattern.ctx_idx.size(); ++kp)
                row.push_back(t.domain(p.pattern.var_idx[jp])
                                  .categories[static_cast<std::size_t>(p.pattern.at(jp, kp))]);
            pattern.push_back(std::move(row));
        }
        rec["pattern"] = std::move(pattern);
        arr.push_back(std::move(rec));
    }
    return json{{"triclusters", std::move(arr)}};
}

// ============================================================================
// Assessment report
// ============================================================================
struct ReportRecord {
    std::size_t id = 0;
    std::size_t n_obs = 0, n_vars = 0, n_ctx = 0;
    double log10_p_pattern = 0.0;
    double p_value = 1.0, p_value_span = 1.0, q_value = 1.0;
    Tier tier = Tier::NotSignificant;
    bool assessable = true;
    std::string error;
};

inline void write_report_csv(std::ostream& os, const std::vector<ReportRecord>& records,
                             const std::vector<std::pair<std::string, std::string>>& header_meta) {
    for (const auto& [key, value] : header_meta) os << "# " << key << ": " << value << '\n';
    os << "id,nI,nJ,nK,log10_p_pattern,p_value,p_value_span,q_value,tier,assessable,error\n";
    for (const auto& r : records) {
        os << r.id << ',' << r.n_obs << ',' << r.n_vars << ',' << r.n_ctx << ',';
        if (r.error.empty())
            os << fmt6(r.log10_p_pattern) << ',' << fmt6(r.p_value) << ',' << fmt6(r.p_value_span)
               << ',' << fmt6(r.q_value) << ',' << tier_name(r.tier) << ','
               << (r.assessable ? "true" : "false") << ',';
        else
            os << ",,,,," << ',';  // empty numeric columns on failure
        os << r.error << '\n';
    }
}

inline json report_to_json(const std::vector<ReportRecord>& records,
                           const std::vector<std::pair<std::string, std::string>>& header_meta) {
    json out;
    for (const auto& [key, value] : header_meta) out["header"][key] = value;
    json arr = json::array();
    for (const auto& r : records) {
        json rec;
        rec["id"] = r.id;
        rec["nI"] = r.n_obs;
        rec["nJ"] = r.n_vars;
        rec["nK"] = r.n_ctx;
        if (r.error.empty()) {
            rec["log10_p_pattern"] = fmt6(r.log10_p_pattern);
            rec["p_value"] = fmt6(r.p_value);
            rec["p_value_span"] = fmt6(r.p_value_span);
            rec["q_value"] = fmt6(r.q_value);
            rec["tier"] = tier_name(r.tier);
            rec["assessable"] = r.assessable;
        } else {
            rec["error"] = r.error;
        }
        arr.push_back(std::move(rec));
    }
    out["records"] = std::move(arr);
    return out;
}

// Grid CSV mirroring the reference-table layout (long form, one cell per row)
inline void write_grid_csv(std::ostream& os, const std::vector<GridCell>& cells) {
    os << "cardinality,n_vars_pattern,n_ctx_pattern,ctx_model,p_pattern,n_min,n_min_corrected\n";
    for (const auto& c : cells) {
        os << c.cardinality << ',' << c.n_vars_pattern << ',' << c.n_ctx_pattern << ','
           << (c.ctx_model == CtxModel::MD ? "md" : "tc") << ',' << fmt6(c.p_pattern) << ',';
        if (c.n_min.assessable)
            os << c.n_min.n_min;
        else
            os << '-';
        os << ',';
        if (c.n_min_corrected.assessable)
            os << c.n_min_corrected.n_min;
        else
            os << '-';
        os << '\n';
    }
}

}  // namespace tristat
