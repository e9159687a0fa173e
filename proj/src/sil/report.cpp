#include "sil/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sil/errors.hpp"

namespace sil {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path);
    require(os.good(), "IoError", "cannot open " + path);
    for (size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << "\n";
    }
    require(os.good(), "IoError", "write failed for " + path);
}

bool read_csv(const std::string& path, std::vector<std::string>& columns,
              std::vector<std::vector<double>>& rows) {
    std::ifstream is(path);
    if (!is.good()) return false;
    std::string line;
    if (!std::getline(is, line)) return false;
    columns.clear();
    rows.clear();
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) columns.push_back(tok);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> row;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        rows.push_back(std::move(row));
    }
    return true;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    require(os.good(), "IoError", "cannot open " + path);
    os << content;
    require(os.good(), "IoError", "write failed for " + path);
}

Config Config::load(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "IoError", "cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config c;
    std::stringstream ss(text);
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) c.kv[key] = val;
    }
    return c;
}

std::string Config::str(const std::string& key, const std::string& dflt) const {
    auto it = kv.find(key);
    return it == kv.end() ? dflt : it->second;
}

double Config::num(const std::string& key, double dflt) const {
    auto it = kv.find(key);
    return it == kv.end() ? dflt : std::stod(it->second);
}

int Config::integer(const std::string& key, int dflt) const {
    auto it = kv.find(key);
    return it == kv.end() ? dflt : (int)std::llround(std::stod(it->second));
}

bool Config::flag(const std::string& key, bool dflt) const {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    return it->second == "1" || it->second == "true" || it->second == "yes";
}

std::vector<double> Config::list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv.find(key);
    if (it == kv.end()) return out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::string Config::run_id() const {
    // FNV-1a over the normalized key=value listing
    unsigned long long h = 1469598103934665603ull;
    for (const auto& [k, v] : kv) {
        for (char c : k + "=" + v + ";") {
            h ^= (unsigned char)c;
            h *= 1099511628211ull;
        }
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

OrderFit fit_order_report(const std::vector<double>& eps, const std::vector<double>& val) {
    require(eps.size() >= 3, "BadFit", "order fit needs >= 3 eps values");
    const auto f = fit_order(eps, val);
    return OrderFit{f.slope, f.residual};
}

} // namespace sil
