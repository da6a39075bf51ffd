#pragma once

/**
 * @file report.hpp
 * @brief Run configuration and the versioned JSON report written by the CLI.
 *
 * Complex numbers are [re, im] pairs and root-of-unity coordinates are exact
 * "a/m" strings. Keys are emitted in sorted order so that identical inputs
 * give byte-identical reports.
 */

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "errors.hpp"
#include "polymap.hpp"
#include "powerlattice.hpp"
#include "tolerances.hpp"

namespace multispec {

using json = nlohmann::json;

inline constexpr const char* report_schema = "multispec-report/1";

struct RunConfig {
    std::uint64_t seed = 20240521;
    Tolerances tol;
    int max_period = 64;
    u64 max_dp = max_power_value;
    std::string output;  ///< empty: stdout
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::string command;
    json arguments = json::object();
    json config = json::object();
    json results = json::object();
    std::vector<Check> checks;

    void check(std::string name, bool pass, std::string detail = {}) {
        checks.push_back({std::move(name), pass, std::move(detail)});
    }

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    int exit_code() const { return all_pass() ? 0 : 1; }
};

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const CVec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v[i]));
    return a;
}

inline json to_json(const std::vector<cplx>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back(to_json(z));
    return a;
}

inline json to_json(const CMat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(CVec(m.row(r).transpose())));
    return rows;
}

inline json to_json(const RootPoint& w) {
    json a = json::array();
    for (const auto& c : w.coords) a.push_back(c.str());
    return a;
}

inline json to_json(const MultiIndex& I) { return I.entries; }

inline json to_json(const Tolerances& t) {
    return {{"newton", t.newton}, {"parab", t.parab},     {"parab_abort", t.parab_abort}, {"det", t.det},
            {"rank", t.rank},     {"fd_step", t.fd_step}, {"eval", t.eval}};
}

inline json to_json(const RunConfig& c) {
    return {{"seed", c.seed},
            {"tolerances", to_json(c.tol)},
            {"caps", {{"max_period", c.max_period}, {"max_dp", c.max_dp}}}};
}

inline json to_json(const Report& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return {{"schema", report_schema},  {"command", r.command}, {"arguments", r.arguments}, {"config", r.config},
            {"results", r.results},     {"checks", checks},     {"status", r.all_pass() ? "pass" : "fail"}};
}

/// A complex number from a JSON number or an [re, im] pair.
inline cplx complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw precondition_error("expected a number or an [re, im] pair, got " + j.dump());
}

inline CVec cvec_from_json(const json& j) {
    if (!j.is_array()) throw precondition_error("expected an array of complex values, got " + j.dump());
    CVec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
    return v;
}

/// Overlay a JSON config object ({"seed", "tolerances", "caps", "output"}) onto `cfg`.
inline void apply_config(RunConfig& cfg, const json& j) {
    if (!j.is_object()) throw precondition_error("config must be a JSON object");
    for (const auto& [key, val] : j.items()) {
        if (key == "seed") {
            cfg.seed = val.get<std::uint64_t>();
        } else if (key == "output") {
            cfg.output = val.get<std::string>();
        } else if (key == "tolerances") {
            for (const auto& [t, v] : val.items()) {
                double* slot = t == "newton"        ? &cfg.tol.newton
                               : t == "parab"       ? &cfg.tol.parab
                               : t == "parab_abort" ? &cfg.tol.parab_abort
                               : t == "det"         ? &cfg.tol.det
                               : t == "rank"        ? &cfg.tol.rank
                               : t == "fd_step"     ? &cfg.tol.fd_step
                               : t == "eval"        ? &cfg.tol.eval
                                                    : nullptr;
                if (!slot) throw precondition_error("unknown tolerance '" + t + "' in config");
                const double x = v.get<double>();
                if (!(x > 0.0)) throw precondition_error("tolerance '" + t + "' must be positive");
                *slot = x;
            }
        } else if (key == "caps") {
            for (const auto& [c, v] : val.items()) {
                if (c == "max_period") cfg.max_period = v.get<int>();
                else if (c == "max_dp") cfg.max_dp = v.get<u64>();
                else throw precondition_error("unknown cap '" + c + "' in config");
            }
            if (cfg.max_period < 1 || cfg.max_dp < 2 || cfg.max_dp > max_power_value)
                throw precondition_error("caps out of range (max_period >= 1, 2 <= max_dp <= 2^62)");
        } else {
            throw precondition_error("unknown config key '" + key + "'");
        }
    }
}

} // namespace multispec
