#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "estimator.hpp"
#include "symmetry.hpp"

namespace spherefield {

// Effective settings of one CLI run. Every field has a default; parse_config
// fills the rest from `key = value` lines and validates the whole before any
// computation starts.
struct RunConfig {
    int D = 1;
    int l_max = 32;
    int k = 1;
    long samples = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out = "out";
    int n = 2;
    std::vector<int> sweep_n = {2, 4, 8, 16};

    double schedule_R_coeff = 1.0;
    double schedule_R_exponent = 1.0;
    double schedule_Lambda_coeff = 1.0;
    double schedule_Lambda_exponent = 0.0;  // 0 means "use the default D + 2"
    double schedule_M_coeff = 1.0;
    double schedule_M_exponent = 1.0;
    double schedule_alpha = 4.0;

    double mollifier_support = 1.0;

    std::string lagrangian_family = "zero";  // zero | phi4
    std::string functional_ftilde = "clamped-identity";  // constant | clamped-identity | cosine
    double functional_constant = 1.0;
    double functional_bound = 1.0;
    std::vector<double> functional_center = {};  // empty: default center (0, ..., 0, 0.8)
    double functional_radius = 0.5;
    double functional_amplitude = 1.0;

    double translation_t = 1.0;
    double translation_bump_radius = 8.0;  // wide enough to resolve at the largest sweep radius
    std::vector<double> translation_radii = {10.0, 20.0, 40.0, 80.0};

    bool rp_valid = false;  // computed during validation

    CutoffSchedule schedule() const {
        CutoffSchedule s;
        s.D = D;
        s.R = {schedule_R_coeff, schedule_R_exponent};
        s.Lambda = {schedule_Lambda_coeff,
                    schedule_Lambda_exponent > 0.0 ? schedule_Lambda_exponent : static_cast<double>(D + 2)};
        s.M = {schedule_M_coeff, schedule_M_exponent};
        s.alpha = schedule_alpha;
        return s;
    }

    LagrangianTerm lagrangian(int index) const {
        if (lagrangian_family == "phi4") return phi4_evaluator(Phi4Family{}, index);
        return LagrangianTerm::zero();
    }

    CylindricalFunctional functional() const {
        if (functional_ftilde == "constant") return ftilde::constant(functional_constant);
        CylindricalFunctional F;
        BumpFunction b;
        b.center = Eigen::VectorXd::Zero(D);
        for (std::size_t j = 0; j < functional_center.size() && j < static_cast<std::size_t>(D); ++j)
            b.center(static_cast<int>(j)) = functional_center[j];
        if (functional_center.empty()) b.center(D - 1) = 0.8;
        b.radius = functional_radius;
        b.amplitude = functional_amplitude;
        F.test_functions = {b};
        if (functional_ftilde == "cosine") {
            F.ftilde = ftilde::cosine(1);
            F.sup_bound = 1.0;
        } else {
            F.ftilde = ftilde::clamped_identity(functional_bound);
            F.sup_bound = functional_bound;
        }
        return F;
    }
};

struct ParseResult {
    RunConfig config;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

template <typename T>
inline bool parse_number(const std::string& text, T& out) {
    std::istringstream iss(text);
    T value{};
    iss >> value;
    if (!iss || !iss.eof()) return false;
    out = value;
    return true;
}

inline std::vector<std::string> key_tokens(const std::string& key) {
    std::vector<std::string> toks{""};
    for (char ch : key) {
        if (ch == '.' || ch == '_') {
            if (!toks.back().empty()) toks.emplace_back();
        } else {
            toks.back() += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
    }
    if (toks.back().empty()) toks.pop_back();
    return toks;
}

template <typename T>
inline bool parse_list(const std::string& text, std::vector<T>& out) {
    out.clear();
    std::istringstream iss(text);
    std::string item;
    while (std::getline(iss, item, ',')) {
        T v;
        if (!parse_number(trim(item), v)) return false;
        out.push_back(v);
    }
    return !out.empty();
}

}  // namespace detail

/// Parses the line-based `key = value` configuration format ('#' comments,
/// blank lines ignored, lists comma-separated). All errors are collected;
/// nothing is computed when any are present.
inline ParseResult parse_config(const std::string& text) {
    ParseResult res;
    RunConfig& c = res.config;

    using Setter = std::function<bool(const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"D", [&](const std::string& v) { return detail::parse_number(v, c.D); }},
        {"l_max", [&](const std::string& v) { return detail::parse_number(v, c.l_max); }},
        {"k", [&](const std::string& v) { return detail::parse_number(v, c.k); }},
        {"samples", [&](const std::string& v) { return detail::parse_number(v, c.samples); }},
        {"seed", [&](const std::string& v) { return detail::parse_number(v, c.seed); }},
        {"workers", [&](const std::string& v) { return detail::parse_number(v, c.workers); }},
        {"out", [&](const std::string& v) { c.out = v; return !v.empty(); }},
        {"n", [&](const std::string& v) { return detail::parse_number(v, c.n); }},
        {"sweep_n", [&](const std::string& v) { return detail::parse_list(v, c.sweep_n); }},
        {"schedule.R_coeff", [&](const std::string& v) { return detail::parse_number(v, c.schedule_R_coeff); }},
        {"schedule.R_exponent", [&](const std::string& v) { return detail::parse_number(v, c.schedule_R_exponent); }},
        {"schedule.Lambda_coeff",
         [&](const std::string& v) { return detail::parse_number(v, c.schedule_Lambda_coeff); }},
        {"schedule.Lambda_exponent",
         [&](const std::string& v) { return detail::parse_number(v, c.schedule_Lambda_exponent); }},
        {"schedule.M_coeff", [&](const std::string& v) { return detail::parse_number(v, c.schedule_M_coeff); }},
        {"schedule.M_exponent", [&](const std::string& v) { return detail::parse_number(v, c.schedule_M_exponent); }},
        {"schedule.alpha", [&](const std::string& v) { return detail::parse_number(v, c.schedule_alpha); }},
        {"mollifier.support", [&](const std::string& v) { return detail::parse_number(v, c.mollifier_support); }},
        {"lagrangian.family", [&](const std::string& v) { c.lagrangian_family = v; return v == "zero" || v == "phi4"; }},
        {"functional.ftilde",
         [&](const std::string& v) {
             c.functional_ftilde = v;
             return v == "constant" || v == "clamped-identity" || v == "cosine";
         }},
        {"functional.constant", [&](const std::string& v) { return detail::parse_number(v, c.functional_constant); }},
        {"functional.bound", [&](const std::string& v) { return detail::parse_number(v, c.functional_bound); }},
        {"functional.center", [&](const std::string& v) { return detail::parse_list(v, c.functional_center); }},
        {"functional.radius", [&](const std::string& v) { return detail::parse_number(v, c.functional_radius); }},
        {"functional.amplitude",
         [&](const std::string& v) { return detail::parse_number(v, c.functional_amplitude); }},
        {"translation.t", [&](const std::string& v) { return detail::parse_number(v, c.translation_t); }},
        {"translation.bump_radius",
         [&](const std::string& v) { return detail::parse_number(v, c.translation_bump_radius); }},
        {"translation.radii", [&](const std::string& v) { return detail::parse_list(v, c.translation_radii); }},
    };

    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            res.errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            // Suggest the known key sharing a name token (or a near-miss of
            // one) with the unknown key, e.g. lambda_n -> schedule.Lambda_*.
            std::string best;
            int best_d = 1 << 20;
            const auto ktoks = detail::key_tokens(key);
            for (const auto& [name, setter] : setters) {
                int d = 1 << 20;
                for (const auto& kt : ktoks)
                    for (const auto& nt : detail::key_tokens(name))
                        if (kt.size() >= 3 || nt.size() >= 3) d = std::min(d, detail::edit_distance(kt, nt));
                if (d < best_d) {
                    best_d = d;
                    best = name;
                }
            }
            std::string msg = "line " + std::to_string(lineno) + ": unknown key '" + key + "'";
            if (best_d <= 1) msg += " (did you mean '" + best + "'?)";
            res.errors.push_back(msg);
            continue;
        }
        if (!it->second(value))
            res.errors.push_back("line " + std::to_string(lineno) + ": invalid value '" + value + "' for key '" +
                                 key + "'");
    }

    // Range validation, all collected before returning.
    if (c.D != 1 && c.D != 2) res.errors.push_back("D: must be 1 or 2");
    if (c.l_max < 4) res.errors.push_back("l_max: must be >= 4");
    if (c.samples < 2) res.errors.push_back("samples: must be >= 2");
    if (c.k < 0) res.errors.push_back("k: must be >= 0");
    if (c.workers < 1) res.errors.push_back("workers: must be >= 1");
    if (c.n < 1) res.errors.push_back("n: must be >= 1");
    if (c.schedule_alpha <= 0.0) res.errors.push_back("schedule.alpha: must be > 0");
    if (c.mollifier_support <= 0.0) res.errors.push_back("mollifier.support: must be > 0");
    if (c.functional_radius <= 0.0) res.errors.push_back("functional.radius: must be > 0");
    if (c.functional_bound <= 0.0) res.errors.push_back("functional.bound: must be > 0");
    if (c.translation_bump_radius <= 0.0) res.errors.push_back("translation.bump_radius: must be > 0");
    for (int m : c.sweep_n)
        if (m < 1) {
            res.errors.push_back("sweep_n: entries must be >= 1");
            break;
        }
    for (double r : c.translation_radii)
        if (r <= 0.0) {
            res.errors.push_back("translation.radii: entries must be > 0");
            break;
        }
    if (!c.functional_center.empty() && c.functional_center.size() != static_cast<std::size_t>(c.D))
        res.errors.push_back("functional.center: expected " + std::to_string(c.D) + " components");
    if (res.ok()) c.rp_valid = c.schedule().rp_valid();
    return res;
}

/// Echo of the effective configuration, one `key = value` line per field, in
/// the same format parse_config reads. Re-parsing the echo is the identity.
inline std::string echo_config(const RunConfig& c) {
    std::ostringstream os;
    os.precision(17);
    auto list_int = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    auto list_dbl = [](const std::vector<double>& v) {
        std::ostringstream ls;
        ls.precision(17);
        for (std::size_t i = 0; i < v.size(); ++i) ls << (i ? "," : "") << v[i];
        return ls.str();
    };
    os << "D = " << c.D << "\n";
    os << "l_max = " << c.l_max << "\n";
    os << "k = " << c.k << "\n";
    os << "samples = " << c.samples << "\n";
    os << "seed = " << c.seed << "\n";
    os << "workers = " << c.workers << "\n";
    os << "out = " << c.out << "\n";
    os << "n = " << c.n << "\n";
    os << "sweep_n = " << list_int(c.sweep_n) << "\n";
    os << "schedule.R_coeff = " << c.schedule_R_coeff << "\n";
    os << "schedule.R_exponent = " << c.schedule_R_exponent << "\n";
    os << "schedule.Lambda_coeff = " << c.schedule_Lambda_coeff << "\n";
    os << "schedule.Lambda_exponent = " << c.schedule().Lambda.exponent << "\n";
    os << "schedule.M_coeff = " << c.schedule_M_coeff << "\n";
    os << "schedule.M_exponent = " << c.schedule_M_exponent << "\n";
    os << "schedule.alpha = " << c.schedule_alpha << "\n";
    os << "mollifier.support = " << c.mollifier_support << "\n";
    os << "lagrangian.family = " << c.lagrangian_family << "\n";
    os << "functional.ftilde = " << c.functional_ftilde << "\n";
    os << "functional.constant = " << c.functional_constant << "\n";
    os << "functional.bound = " << c.functional_bound << "\n";
    if (!c.functional_center.empty()) os << "functional.center = " << list_dbl(c.functional_center) << "\n";
    os << "functional.radius = " << c.functional_radius << "\n";
    os << "functional.amplitude = " << c.functional_amplitude << "\n";
    os << "translation.t = " << c.translation_t << "\n";
    os << "translation.bump_radius = " << c.translation_bump_radius << "\n";
    os << "translation.radii = " << list_dbl(c.translation_radii) << "\n";
    return os.str();
}

}  // namespace spherefield
