#pragma once

#include <string>
#include <utility>
#include <vector>

#include "common/errors.hpp"

namespace lvc {

// Minimal INI-style structured text: [section] headers, key = value lines,
// '#'/';' full-line comments. Order preserved; serialization is canonical so
// parse -> serialize -> parse is a fixed point.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& what = "<config>");
    static ConfigFile load(const std::string& path);

    std::string serialize() const;
    void save(const std::string& path) const;

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    int64_t get_int(const std::string& section, const std::string& key, int64_t fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    std::vector<std::string> section_names() const;
    std::vector<std::string> keys(const std::string& section) const;

    bool operator==(const ConfigFile& other) const { return sections_ == other.sections_; }

private:
    using Entries = std::vector<std::pair<std::string, std::string>>;
    std::vector<std::pair<std::string, Entries>> sections_;

    Entries* find_section(const std::string& name);
    const Entries* find_section(const std::string& name) const;
};

}  // namespace lvc
