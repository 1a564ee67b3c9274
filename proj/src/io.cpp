#include "gapspec/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gapspec/error.hpp"

namespace gapspec::io {

namespace {

double to_double(const std::string& s, const char* what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ValidationError(std::string("cannot parse ") + what + ": '" + s + "'");
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw ValidationError(std::string("trailing characters in ") + what + ": '" + s + "'");
    return v;
}

std::size_t to_count(const std::string& s, const char* what) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ValidationError(std::string("cannot parse ") + what + ": '" + s + "'");
    return v;
}

long to_long(const std::string& s, const char* what) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ValidationError(std::string("cannot parse ") + what + ": '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

// Rows of a CSV file with a header line; blank lines are skipped.
std::vector<std::vector<std::string>> csv_rows(std::istream& in, std::size_t columns) {
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool header = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto cells = split(line, ',');
        if (cells.size() != columns) throw ValidationError("expected " + std::to_string(columns) + " columns: '" + line + "'");
        for (auto& c : cells) c = trim(c);
        rows.push_back(std::move(cells));
    }
    return rows;
}

Interval interval_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ValidationError("interval must be [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
}

void check_schema(const json& j) {
    if (!j.is_object()) throw ValidationError("descriptor must be a JSON object");
    if (j.contains("schema") && j["schema"] != kSchema) throw ValidationError("unsupported schema " + j["schema"].dump());
}

}  // namespace

std::vector<double> parse_eps(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.empty()) throw ValidationError("empty epsilon schedule");
    std::vector<double> eps;
    if (parts[0] == "geometric" && parts.size() == 3) {
        const double r = to_double(parts[1], "ratio");
        const std::size_t k = to_count(parts[2], "level count");
        double e = 1.0;
        for (std::size_t i = 0; i < k; ++i) eps.push_back(e *= r);
    } else if (parts[0] == "harmonic" && parts.size() == 2) {
        const std::size_t k = to_count(parts[1], "level count");
        for (std::size_t i = 1; i <= k; ++i) eps.push_back(1.0 / static_cast<double>(i + 1));
    } else if (parts[0] == "list" && parts.size() == 2) {
        if (!parts[1].empty())
            for (const auto& v : split(parts[1], ',')) eps.push_back(to_double(v, "epsilon"));
    } else {
        throw ValidationError("epsilon schedule must be geometric:r:K, harmonic:K or list:v1,...: '" + text + "'");
    }
    return eps;
}

json to_json(const GapSet& set) {
    json j;
    j["schema"] = kSchema;
    j["kind"] = to_string(set.kind());
    if (set.kind() == SetKind::finite) {
        j["bands"] = json::array();
        for (const auto& b : set.bands()) j["bands"].push_back({b.lo, b.hi});
    } else {
        j["outer"] = {set.lo(), set.hi()};
        j["epsilons"] = std::vector<double>(set.epsilons().begin(), set.epsilons().end());
    }
    j["band_count"] = set.band_count();
    j["gap_count"] = set.gap_count();
    j["gaps"] = json::array();
    for (const auto& g : set.gaps()) j["gaps"].push_back({g.lo, g.hi, g.level});
    return j;
}

GapSet gapset_from_json(const json& j) {
    check_schema(j);
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "finite") {
            std::vector<Interval> bands;
            for (const auto& b : j.at("bands")) bands.push_back(interval_from(b));
            return GapSet::finite(std::move(bands));
        }
        const Interval outer = interval_from(j.at("outer"));
        const json& e = j.at("epsilons");
        const std::vector<double> eps = e.is_string() ? parse_eps(e.get<std::string>()) : e.get<std::vector<double>>();
        if (kind == "infinite_band") return GapSet::infinite_band(eps, outer);
        if (kind == "cantor") return GapSet::cantor(eps, outer);
        throw ValidationError("unknown set kind '" + kind + "'");
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed set descriptor: ") + ex.what());
    }
}

json to_json(const ReflectionlessMeasure& mu) {
    json j;
    j["schema"] = kSchema;
    j["set"] = to_json(mu.set());
    j["gamma"] = std::vector<double>(mu.gamma().begin(), mu.gamma().end());
    return j;
}

ReflectionlessMeasure measure_from_json(const json& j) {
    check_schema(j);
    try {
        GapSet set = gapset_from_json(j.at("set"));
        const json& g = j.contains("gamma") ? j["gamma"] : json("midpoint");
        if (g.is_string()) {
            const std::string s = g.get<std::string>();
            if (s == "alpha") return {std::move(set), GammaRule::alpha};
            if (s == "beta") return {std::move(set), GammaRule::beta};
            if (s == "midpoint") return {std::move(set), GammaRule::midpoint};
            throw ValidationError("gamma must be alpha, beta, midpoint or an array");
        }
        return {std::move(set), g.get<std::vector<double>>()};
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed measure descriptor: ") + ex.what());
    }
}

json to_json(const BoundReport& r) {
    json j;
    j["name"] = r.name;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["constant"] = r.constant;
    j["ratio"] = std::isfinite(r.ratio) ? json(r.ratio) : json("inf");
    j["pass"] = r.pass;
    j["slack"] = r.slack;
    j["inputs"] = {{"set", r.set_kind}, {"p", r.p}, {"N", r.n}, {"seed", r.seed}};
    j["truncation"] = {{"lhs_2N", r.lhs_2n}, {"eigenvalues", r.eigenvalues}};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string reports_csv(std::span<const BoundReport> reports) {
    std::string out = "name,lhs,rhs,ratio,pass,N,p,seed\n";
    for (const auto& r : reports) {
        out += r.name + ',' + format_double(r.lhs) + ',' + format_double(r.rhs) + ',' + format_double(r.ratio) + ',' +
               (r.pass ? "true" : "false") + ',' + std::to_string(r.n) + ',' + format_double(r.p) + ',' +
               std::to_string(r.seed) + '\n';
    }
    return out;
}

std::string coeffs_csv(const JacobiCoeffs& j) {
    std::string out = "n,a,b\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
        out += std::to_string(j.index_origin + static_cast<long>(i)) + ',';
        if (i < j.a.size()) out += format_double(j.a[i]);
        out += ',' + format_double(j.b[i]) + '\n';
    }
    return out;
}

JacobiCoeffs read_coeffs_csv(std::istream& in) {
    JacobiCoeffs j;
    const auto rows = csv_rows(in, 3);
    if (rows.empty()) throw ValidationError("coefficient file has no rows");
    j.index_origin = to_long(rows.front()[0], "site");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (to_long(rows[i][0], "site") != j.index_origin + static_cast<long>(i)) throw ValidationError("site indices must be consecutive");
        if (i + 1 < rows.size()) j.a.push_back(to_double(rows[i][1], "a"));
        else if (!rows[i][1].empty()) throw ValidationError("the last row has no off-diagonal entry");
        j.b.push_back(to_double(rows[i][2], "b"));
    }
    j.validate();
    return j;
}

std::string perturbation_csv(const Perturbation& d) {
    std::string out = "n,delta_a,delta_b\n";
    const std::size_t n = std::max(d.delta_a.size(), d.delta_b.size());
    for (std::size_t i = 0; i < n; ++i) {
        out += std::to_string(i + 1) + ',';
        if (i < d.delta_a.size()) out += format_double(d.delta_a[i]);
        out += ',';
        if (i < d.delta_b.size()) out += format_double(d.delta_b[i]);
        out += '\n';
    }
    return out;
}

Perturbation read_perturbation_csv(std::istream& in) {
    Perturbation d;
    const auto rows = csv_rows(in, 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (to_count(rows[i][0], "site") != i + 1) throw ValidationError("perturbation sites must be 1, 2, ...");
        if (!rows[i][1].empty()) {
            d.delta_a.resize(i + 1, 0.0);
            d.delta_a[i] = to_double(rows[i][1], "delta_a");
        }
        if (!rows[i][2].empty()) {
            d.delta_b.resize(i + 1, 0.0);
            d.delta_b[i] = to_double(rows[i][2], "delta_b");
        }
    }
    return d;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace gapspec::io
