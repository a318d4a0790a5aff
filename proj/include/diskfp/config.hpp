#ifndef DISKFP_CONFIG_HPP
#define DISKFP_CONFIG_HPP

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "diskfp/certify.hpp"
#include "diskfp/expr.hpp"
#include "diskfp/hammerstein.hpp"

namespace diskfp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Run configuration, loaded from a flat INI-style file:
//
//   [problem]
//   f = "0.2*(1+x1^2)*exp(u)*(2+cos(v))"
//   g = "0.75*(1+x1^2)*(1-v^2)*(2+sin(u))"
//   dimension = 2
//
//   [bounds]            # optional; required by `certify`
//   f_upper = "6*sqrt(e)/5"
//   ...
//
//   [localization]
//   r1 = "1/21"         # radii are constant expressions
//   ...
//
//   [solver] / [output] # optional keys with defaults
//
// Values may be quoted; '#' starts a comment.
struct RunConfig {
    Expr f = Expr::parse("0");
    Expr g = Expr::parse("0");
    int dimension = 2;
    std::optional<BoundSet> bounds;
    double r1 = 0.0, R1 = 0.0, r2 = 0.0, R2 = 0.0;
    int grid_nr = 64;
    int grid_ntheta = 128;
    double tol = 1e-10;
    int max_iter = 100;
    std::string initial_guess = "zero";
    std::string out_dir = "out";
    std::string format = "csv";

    LocalizationBox box() const { return LocalizationBox(r1, R1, r2, R2); }
    ProblemSpec problem() const { return ProblemSpec{f, g, grid_nr, grid_ntheta}; }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

struct RawConfig {
    // section -> key -> (value, line number)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sections;

    bool hasSection(const std::string& s) const { return sections.count(s) != 0; }

    std::optional<std::string> take(const std::string& section, const std::string& key) {
        auto s = sections.find(section);
        if (s == sections.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        std::string value = k->second.first;
        s->second.erase(k);
        return value;
    }

    void rejectLeftovers() const {
        for (const auto& [section, keys] : sections)
            for (const auto& [key, value] : keys)
                throw ConfigError("line " + std::to_string(value.second) + ": unknown key '" +
                                  key + "' in section [" + section + "]");
    }
};

inline RawConfig parseIni(std::istream& in) {
    RawConfig raw;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            raw.sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        if (!raw.sections[section].emplace(key, std::make_pair(value, lineno)).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return raw;
}

inline Expr parseExprField(const std::string& field, const std::string& text) {
    try {
        return Expr::parse(text);
    } catch (const ParseError& e) {
        throw ConfigError("field '" + field + "': " + e.what());
    }
}

inline double constantField(const std::string& field, const std::string& text) {
    const Expr e = parseExprField(field, text);
    if (!e.isConstant())
        throw ConfigError("field '" + field + "' must be a constant expression");
    try {
        return e.eval(0.0, 0.0);
    } catch (const EvalError& err) {
        throw ConfigError("field '" + field + "': " + err.what());
    }
}

inline int intField(const std::string& field, const std::string& text) {
    try {
        std::size_t used = 0;
        const int value = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw ConfigError("field '" + field + "' must be an integer, got '" + text + "'");
    }
}

inline double doubleField(const std::string& field, const std::string& text) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw ConfigError("field '" + field + "' must be a number, got '" + text + "'");
    }
}

}  // namespace config_detail

inline RunConfig load_config(std::istream& in) {
    using namespace config_detail;
    RawConfig raw = parseIni(in);
    RunConfig cfg;

    auto require = [&](const char* section, const char* key) {
        auto v = raw.take(section, key);
        if (!v)
            throw ConfigError(std::string("missing required field '") + key + "' in section [" +
                              section + "]");
        return *v;
    };

    if (!raw.hasSection("problem")) throw ConfigError("missing [problem] section");
    cfg.f = parseExprField("f", require("problem", "f"));
    cfg.g = parseExprField("g", require("problem", "g"));
    if (auto dim = raw.take("problem", "dimension")) {
        cfg.dimension = intField("dimension", *dim);
        if (cfg.dimension != 2)
            throw ConfigError("field 'dimension' must equal 2; only the planar disk is supported");
    }

    if (raw.hasSection("bounds")) {
        try {
            cfg.bounds.emplace(parseExprField("f_upper", require("bounds", "f_upper")),
                               parseExprField("f_lower", require("bounds", "f_lower")),
                               parseExprField("g_upper", require("bounds", "g_upper")),
                               parseExprField("g_lower", require("bounds", "g_lower")));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("section [bounds]: ") + e.what());
        }
    }

    if (!raw.hasSection("localization")) throw ConfigError("missing [localization] section");
    cfg.r1 = constantField("r1", require("localization", "r1"));
    cfg.R1 = constantField("R1", require("localization", "R1"));
    cfg.r2 = constantField("r2", require("localization", "r2"));
    cfg.R2 = constantField("R2", require("localization", "R2"));
    if (!(cfg.r1 > 0.0 && cfg.r2 > 0.0))
        throw ConfigError("fields 'r1' and 'r2' must be positive");
    if (!(cfg.r1 < cfg.R1)) throw ConfigError("r1 < R1 required");
    if (!(cfg.r2 < cfg.R2)) throw ConfigError("r2 < R2 required");

    if (auto v = raw.take("solver", "grid_nr")) cfg.grid_nr = intField("grid_nr", *v);
    if (auto v = raw.take("solver", "grid_ntheta")) cfg.grid_ntheta = intField("grid_ntheta", *v);
    if (auto v = raw.take("solver", "tol")) cfg.tol = doubleField("tol", *v);
    if (auto v = raw.take("solver", "max_iter")) cfg.max_iter = intField("max_iter", *v);
    if (auto v = raw.take("solver", "initial_guess")) cfg.initial_guess = *v;
    if (auto v = raw.take("output", "out_dir")) cfg.out_dir = *v;
    if (auto v = raw.take("output", "format")) cfg.format = *v;

    if (!(cfg.tol > 0.0)) throw ConfigError("field 'tol' must be positive");
    if (cfg.max_iter < 1) throw ConfigError("field 'max_iter' must be at least 1");
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("field 'format' must be \"csv\" or \"json\"");
    try {
        Grid probe(cfg.grid_nr, cfg.grid_ntheta);
    } catch (const GridError& e) {
        throw ConfigError(e.what());
    }

    raw.rejectLeftovers();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return load_config(in);
}

}  // namespace diskfp

#endif  // DISKFP_CONFIG_HPP
