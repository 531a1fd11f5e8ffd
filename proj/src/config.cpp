#include "pmelab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

extern char** environ;

namespace pmelab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

RawConfig parse_ini(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.resize(cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
            section = lower(trim(line.substr(1, line.size() - 2)));
            raw[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
        raw[section][lower(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
    }
    return raw;
}

const std::vector<std::string>& known_sections() {
    static const std::vector<std::string> s{"grid", "model",  "data",        "h",
                                            "time", "pme",    "fit",         "verify",
                                            "run",  "gamma_recon", "eps_recon"};
    return s;
}

void apply_env(RawConfig& raw) {
    for (char** e = environ; *e; ++e) {
        std::string entry(*e);
        if (entry.rfind("PMELAB_", 0) != 0) continue;
        std::size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string name = lower(entry.substr(7, eq - 7));
        std::string value = entry.substr(eq + 1);
        // Longest known section prefix wins (section names contain '_').
        std::string best;
        for (const std::string& s : known_sections())
            if (name.rfind(s + "_", 0) == 0 && s.size() > best.size()) best = s;
        if (best.empty())
            throw ConfigError("environment override " + entry.substr(0, eq) +
                              " does not match any config section");
        raw[best][name.substr(best.size() + 1)] = value;
    }
}

struct Reader {
    const RawConfig& raw;
    std::set<std::string> seen;

    std::string field(const std::string& sec, const std::string& key) { return sec + "." + key; }

    const std::string* find(const std::string& sec, const std::string& key) {
        seen.insert(field(sec, key));
        auto s = raw.find(sec);
        if (s == raw.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }

    void get(const std::string& sec, const std::string& key, std::string& out) {
        if (const std::string* v = find(sec, key)) out = *v;
    }
    void get(const std::string& sec, const std::string& key, bool& out) {
        if (const std::string* v = find(sec, key)) {
            std::string t = lower(*v);
            if (t == "true" || t == "1" || t == "yes") out = true;
            else if (t == "false" || t == "0" || t == "no") out = false;
            else throw ConfigError(field(sec, key) + ": expected a boolean, got '" + *v + "'");
        }
    }
    void get(const std::string& sec, const std::string& key, double& out) {
        if (const std::string* v = find(sec, key)) {
            try {
                std::size_t pos = 0;
                out = std::stod(*v, &pos);
                if (pos != v->size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ConfigError(field(sec, key) + ": expected a number, got '" + *v + "'");
            }
        }
    }
    void get(const std::string& sec, const std::string& key, int& out) {
        double d = out;
        bool present = find(sec, key) != nullptr;
        get(sec, key, d);
        if (present) {
            out = static_cast<int>(d);
            if (static_cast<double>(out) != d)
                throw ConfigError(field(sec, key) + ": expected an integer");
        }
    }
    void get(const std::string& sec, const std::string& key, std::uint64_t& out) {
        double d = static_cast<double>(out);
        bool present = find(sec, key) != nullptr;
        get(sec, key, d);
        if (present) {
            if (d < 0.0 || d != std::floor(d))
                throw ConfigError(field(sec, key) + ": expected a nonnegative integer");
            out = static_cast<std::uint64_t>(d);
        }
    }
    template <class T>
    void get_list(const std::string& sec, const std::string& key, std::vector<T>& out) {
        if (const std::string* v = find(sec, key)) {
            std::vector<T> vals;
            std::string tmp = *v;  // commas count as separators, as in word lists
            std::replace(tmp.begin(), tmp.end(), ',', ' ');
            std::istringstream in(tmp);
            std::string tok;
            while (in >> tok) {
                try {
                    std::size_t pos = 0;
                    double d = std::stod(tok, &pos);
                    if (pos != tok.size()) throw std::invalid_argument("");
                    T t = static_cast<T>(d);
                    if (static_cast<double>(t) != d) throw std::invalid_argument("");
                    vals.push_back(t);
                } catch (const std::exception&) {
                    throw ConfigError(field(sec, key) + ": expected numbers, got '" + tok + "'");
                }
            }
            if (vals.empty()) throw ConfigError(field(sec, key) + ": empty list");
            out = std::move(vals);
        }
    }
    void get_words(const std::string& sec, const std::string& key, std::vector<std::string>& out) {
        if (const std::string* v = find(sec, key)) {
            std::vector<std::string> vals;
            std::string tmp = *v;
            std::replace(tmp.begin(), tmp.end(), ',', ' ');
            std::istringstream in(tmp);
            std::string tok;
            while (in >> tok) vals.push_back(lower(tok));
            out = std::move(vals);
        }
    }

    void check_unknown() const {
        for (const auto& [sec, kv] : raw) {
            if (std::find(known_sections().begin(), known_sections().end(), sec) ==
                known_sections().end())
                throw ConfigError("unknown config section [" + sec + "]");
            for (const auto& [key, value] : kv)
                if (!seen.count(sec + "." + key))
                    throw ConfigError("unknown config key " + sec + "." + key);
        }
    }
};

ExperimentConfig from_raw(const RawConfig& raw) {
    ExperimentConfig c;
    Reader r{raw, {}};

    r.get("grid", "dim", c.dim);
    r.get_list("grid", "counts", c.counts);
    r.get_list("grid", "extents", c.extents);

    r.get("model", "m", c.m);
    r.get("model", "mode", c.mode);
    r.get("model", "eps", c.eps_expr);
    r.get("model", "eps_lower", c.eps_lower);
    r.get("model", "eps_upper", c.eps_upper);
    r.get("model", "gamma", c.gamma_expr);
    r.get("model", "gamma_lower", c.gamma_lower);
    r.get("model", "gamma_upper", c.gamma_upper);

    r.get("data", "g", c.g_expr);

    r.get("h", "min", c.h_min);
    r.get("h", "max", c.h_max);
    r.get("h", "count", c.h_count);

    std::string kind = "stretched";
    r.get("time", "kind", kind);
    kind = lower(kind);
    if (kind == "automatic") c.tgrid.kind = TimeGridSpec::Kind::automatic;
    else if (kind == "uniform") c.tgrid.kind = TimeGridSpec::Kind::uniform;
    else if (kind == "stretched") c.tgrid.kind = TimeGridSpec::Kind::stretched;
    else throw ConfigError("time.kind: expected automatic|uniform|stretched, got '" + kind + "'");
    int steps = static_cast<int>(c.tgrid.steps);
    r.get("time", "steps", steps);
    c.tgrid.steps = static_cast<std::size_t>(std::max(steps, 0));
    r.get("time", "dt0", c.tgrid.dt0);
    r.get("time", "uniform_until", c.tgrid.uniform_until);
    r.get("time", "growth", c.tgrid.growth);

    r.get("pme", "k0", c.k0);
    r.get("pme", "k_tol", c.k_tol);
    r.get("pme", "level_k", c.level_k);
    r.get("pme", "newton_tol", c.newton.tol);
    r.get("pme", "horizon_factor", c.horizon_factor);

    r.get("fit", "rule", c.fit_rule);
    c.fit_rule = lower(c.fit_rule);
    r.get("fit", "peeling", c.fit_peeling);

    r.get("verify", "k", c.verify_k);
    r.get("verify", "dt0", c.verify_dt0);
    r.get("verify", "growth", c.verify_growth);
    r.get("verify", "slack", c.verify_slack);
    r.get("verify", "fine", c.verify_fine);
    r.get_list("verify", "hs", c.verify_hs);

    r.get("gamma_recon", "basis", c.grec_basis);
    r.get("gamma_recon", "alpha", c.grec_alpha);
    r.get("gamma_recon", "lower", c.grec_lower);
    r.get("gamma_recon", "upper", c.grec_upper);
    r.get("gamma_recon", "max_iter", c.grec_max_iter);

    r.get("eps_recon", "degree", c.erec_degree);
    r.get("eps_recon", "alpha", c.erec_alpha);
    r.get("eps_recon", "lower", c.erec_lower);
    r.get("eps_recon", "upper", c.erec_upper);
    r.get("eps_recon", "s_scale", c.erec_s_scale);

    r.get_words("run", "stages", c.stages);
    r.get("run", "out_dir", c.out_dir);
    r.get("run", "seed", c.seed);
    r.get("run", "noise", c.noise);
    r.get("run", "jobs", c.jobs);
    r.get("run", "strict", c.strict);

    r.check_unknown();
    validate_config(c);
    return c;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) { return from_raw(parse_ini(text)); }

ExperimentConfig load_config(const std::string& path, bool env) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    RawConfig raw = parse_ini(buf.str());
    if (env) apply_env(raw);
    return from_raw(raw);
}

void validate_config(const ExperimentConfig& c) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError(field + ": " + why);
    };
    if (c.dim < 1 || c.dim > 3) fail("grid.dim", "must be 1, 2 or 3");
    if (static_cast<int>(c.counts.size()) != c.dim) fail("grid.counts", "needs one count per axis");
    for (int n : c.counts)
        if (n < 3) fail("grid.counts", "needs at least 3 nodes per axis");
    if (static_cast<int>(c.extents.size()) != c.dim) fail("grid.extents", "needs one extent per axis");
    for (double e : c.extents)
        if (!(e > 0.0)) fail("grid.extents", "must be positive");

    if (c.mode != "pme" && c.mode != "heat-validation") fail("model.mode", "must be pme or heat-validation");
    if (c.mode == "pme" && !(c.m > 1.0))
        fail("model.m", "must exceed 1 (heat-validation mode admits m = 1)");
    if (c.mode == "heat-validation" && c.m != 1.0) fail("model.m", "heat-validation runs at m = 1");
    if (!(c.eps_lower > 0.0) || !(c.eps_upper > c.eps_lower))
        fail("model.eps_lower", "bounds must be positive and ordered");
    if (!(c.gamma_lower > 0.0) || !(c.gamma_upper > c.gamma_lower))
        fail("model.gamma_lower", "bounds must be positive and ordered");

    if (!(c.h_min > 0.0)) fail("h.min", "must be positive");
    if (!(c.h_max >= c.h_min)) fail("h.max", "must be at least h.min");
    if (c.h_count < 1) fail("h.count", "must be at least 1");

    if (c.tgrid.kind == TimeGridSpec::Kind::uniform && c.tgrid.steps < 1)
        fail("time.steps", "uniform grids need at least 1 step");
    if (!(c.tgrid.dt0 > 0.0)) fail("time.dt0", "must be positive");
    if (!(c.tgrid.growth > 1.0)) fail("time.growth", "must exceed 1");
    if (!(c.tgrid.uniform_until >= 0.0)) fail("time.uniform_until", "must be nonnegative");

    if (!(c.k0 >= 1.0)) fail("pme.k0", "must be at least 1");
    if (!(c.k_tol > 0.0)) fail("pme.k_tol", "must be positive");
    if (!(c.level_k >= 1.0)) fail("pme.level_k", "must be at least 1");
    if (!(c.newton.tol > 0.0)) fail("pme.newton_tol", "must be positive");
    if (!(c.horizon_factor >= 10.0)) fail("pme.horizon_factor", "must be at least 10");

    if (c.fit_rule != "product-exact" && c.fit_rule != "trapezoid")
        fail("fit.rule", "must be product-exact or trapezoid");

    if (!(c.verify_k >= 1.0)) fail("verify.k", "must be at least 1");
    if (!(c.verify_dt0 > 0.0)) fail("verify.dt0", "must be positive");
    if (!(c.verify_growth > 1.0)) fail("verify.growth", "must exceed 1");
    if (!(c.verify_slack > 0.0)) fail("verify.slack", "must be positive");
    if (c.verify_hs.empty()) fail("verify.hs", "must list at least one h");
    for (double h : c.verify_hs)
        if (!(h > 0.0)) fail("verify.hs", "entries must be positive");

    if (c.grec_basis < 1) fail("gamma_recon.basis", "must be at least 1");
    if (!(c.grec_alpha >= 0.0)) fail("gamma_recon.alpha", "must be nonnegative");
    if (!(c.grec_lower > 0.0) || !(c.grec_upper > c.grec_lower))
        fail("gamma_recon.lower", "bounds must be positive and ordered");
    if (c.grec_max_iter < 1) fail("gamma_recon.max_iter", "must be at least 1");

    if (c.erec_degree < 0) fail("eps_recon.degree", "must be nonnegative");
    if (!(c.erec_lower > 0.0) || !(c.erec_upper > c.erec_lower))
        fail("eps_recon.lower", "bounds must be positive and ordered");
    if (!(c.erec_s_scale > 0.0) || c.erec_s_scale >= 0.95)
        fail("eps_recon.s_scale", "must lie in (0, 0.95)");

    static const std::set<std::string> known_stages{"forward",     "transform", "fit",
                                                    "recon-gamma", "recon-eps", "verify",
                                                    "all"};
    if (c.stages.empty()) fail("run.stages", "must list at least one stage");
    for (const std::string& s : c.stages)
        if (!known_stages.count(s)) fail("run.stages", "unknown stage '" + s + "'");
    if (c.out_dir.empty()) fail("run.out_dir", "must not be empty");
    if (!(c.noise >= 0.0)) fail("run.noise", "must be nonnegative");
    if (c.jobs < 0) fail("run.jobs", "must be nonnegative");
}

std::string resolved_ini(const ExperimentConfig& c) {
    std::ostringstream o;
    o.precision(17);
    auto words = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& w : v) s += (s.empty() ? "" : " ") + w;
        return s;
    };
    o << "[grid]\n";
    o << "dim = " << c.dim << "\n";
    o << "counts =";
    for (int n : c.counts) o << " " << n;
    o << "\nextents =";
    for (double e : c.extents) o << " " << e;
    o << "\n\n[model]\n";
    o << "m = " << c.m << "\n";
    o << "mode = " << c.mode << "\n";
    o << "eps = " << c.eps_expr << "\n";
    o << "eps_lower = " << c.eps_lower << "\n";
    o << "eps_upper = " << c.eps_upper << "\n";
    o << "gamma = " << c.gamma_expr << "\n";
    o << "gamma_lower = " << c.gamma_lower << "\n";
    o << "gamma_upper = " << c.gamma_upper << "\n";
    o << "\n[data]\n";
    o << "g = " << c.g_expr << "\n";
    o << "\n[h]\n";
    o << "min = " << c.h_min << "\n";
    o << "max = " << c.h_max << "\n";
    o << "count = " << c.h_count << "\n";
    o << "\n[time]\n";
    const char* kind = c.tgrid.kind == TimeGridSpec::Kind::automatic  ? "automatic"
                       : c.tgrid.kind == TimeGridSpec::Kind::uniform ? "uniform"
                                                                      : "stretched";
    o << "kind = " << kind << "\n";
    o << "steps = " << c.tgrid.steps << "\n";
    o << "dt0 = " << c.tgrid.dt0 << "\n";
    o << "uniform_until = " << c.tgrid.uniform_until << "\n";
    o << "growth = " << c.tgrid.growth << "\n";
    o << "\n[pme]\n";
    o << "k0 = " << c.k0 << "\n";
    o << "k_tol = " << c.k_tol << "\n";
    o << "level_k = " << c.level_k << "\n";
    o << "newton_tol = " << c.newton.tol << "\n";
    o << "horizon_factor = " << c.horizon_factor << "\n";
    o << "\n[fit]\n";
    o << "rule = " << c.fit_rule << "\n";
    o << "peeling = " << (c.fit_peeling ? "true" : "false") << "\n";
    o << "\n[verify]\n";
    o << "k = " << c.verify_k << "\n";
    o << "dt0 = " << c.verify_dt0 << "\n";
    o << "growth = " << c.verify_growth << "\n";
    o << "slack = " << c.verify_slack << "\n";
    o << "fine = " << (c.verify_fine ? "true" : "false") << "\n";
    o << "hs =";
    for (double h : c.verify_hs) o << " " << h;
    o << "\n\n[gamma_recon]\n";
    o << "basis = " << c.grec_basis << "\n";
    o << "alpha = " << c.grec_alpha << "\n";
    o << "lower = " << c.grec_lower << "\n";
    o << "upper = " << c.grec_upper << "\n";
    o << "max_iter = " << c.grec_max_iter << "\n";
    o << "\n[eps_recon]\n";
    o << "degree = " << c.erec_degree << "\n";
    o << "alpha = " << c.erec_alpha << "\n";
    o << "lower = " << c.erec_lower << "\n";
    o << "upper = " << c.erec_upper << "\n";
    o << "s_scale = " << c.erec_s_scale << "\n";
    o << "\n[run]\n";
    o << "stages = " << words(c.stages) << "\n";
    o << "out_dir = " << c.out_dir << "\n";
    o << "seed = " << c.seed << "\n";
    o << "noise = " << c.noise << "\n";
    o << "jobs = " << c.jobs << "\n";
    o << "strict = " << (c.strict ? "true" : "false") << "\n";
    return o.str();
}

}  // namespace pmelab
