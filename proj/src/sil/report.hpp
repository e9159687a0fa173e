#pragma once
#include <map>
#include <string>
#include <vector>

#include "sil/grid.hpp"

namespace sil {

// Deterministic CSV writer ("%.17g" doubles, fixed column order).
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);
std::string format_double(double v);

// Read back a CSV written by write_csv (for report merging).
bool read_csv(const std::string& path, std::vector<std::string>& columns,
              std::vector<std::vector<double>>& rows);

void write_text(const std::string& path, const std::string& content);

// Flat key=value config with '#' comments.
struct Config {
    std::map<std::string, std::string> kv;

    static Config load(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string str(const std::string& key, const std::string& dflt = "") const;
    double num(const std::string& key, double dflt) const;
    int integer(const std::string& key, int dflt) const;
    bool flag(const std::string& key, bool dflt) const;
    std::vector<double> list(const std::string& key) const;

    // deterministic run id (FNV-1a over the normalized content)
    std::string run_id() const;
};

// Order fit across an eps sweep; refit-on-union is the merge operation.
struct OrderFit {
    double order = 0, residual = 0;
};
OrderFit fit_order_report(const std::vector<double>& eps, const std::vector<double>& val);

} // namespace sil
