#include "cli/config_file.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lvc {

namespace {
std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& what) {
    ConfigFile cf;
    std::istringstream is(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(what + ":" + std::to_string(lineno) + ": unterminated section");
            current = trim(t.substr(1, t.size() - 2));
            if (current.empty())
                throw ConfigError(what + ":" + std::to_string(lineno) + ": empty section name");
            if (cf.find_section(current))
                throw ConfigError(what + ":" + std::to_string(lineno) + ": duplicate section [" +
                                  current + "]");
            cf.sections_.emplace_back(current, Entries{});
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(what + ":" + std::to_string(lineno) + ": expected key = value");
        if (current.empty())
            throw ConfigError(what + ":" + std::to_string(lineno) + ": key before any [section]");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(what + ":" + std::to_string(lineno) + ": empty key");
        Entries* sec = cf.find_section(current);
        for (const auto& [k, v] : *sec)
            if (k == key)
                throw ConfigError(what + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                                  "' in [" + current + "]");
        sec->emplace_back(key, value);
    }
    return cf;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

std::string ConfigFile::serialize() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [name, entries] : sections_) {
        if (!first) os << "\n";
        first = false;
        os << "[" << name << "]\n";
        for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
    }
    return os.str();
}

void ConfigFile::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write config: " + path);
    f << serialize();
    if (!f) throw IoError("failed writing config: " + path);
}

ConfigFile::Entries* ConfigFile::find_section(const std::string& name) {
    for (auto& [n, e] : sections_)
        if (n == name) return &e;
    return nullptr;
}

const ConfigFile::Entries* ConfigFile::find_section(const std::string& name) const {
    for (const auto& [n, e] : sections_)
        if (n == name) return &e;
    return nullptr;
}

bool ConfigFile::has_section(const std::string& section) const {
    return find_section(section) != nullptr;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const Entries* sec = find_section(section);
    if (!sec) return false;
    return std::any_of(sec->begin(), sec->end(), [&](const auto& kv) { return kv.first == key; });
}

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
    const Entries* sec = find_section(section);
    if (sec)
        for (const auto& [k, v] : *sec)
            if (k == key) return v;
    throw ConfigError("missing config key [" + section + "] " + key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    Entries* sec = find_section(section);
    if (!sec) {
        sections_.emplace_back(section, Entries{});
        sec = &sections_.back().second;
    }
    for (auto& [k, v] : *sec)
        if (k == key) {
            v = value;
            return;
        }
    sec->emplace_back(key, value);
}

int64_t ConfigFile::get_int(const std::string& section, const std::string& key,
                            int64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& s = get(section, key);
    try {
        size_t pos = 0;
        int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": not an integer: '" + s + "'");
    }
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& s = get(section, key);
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": not a number: '" + s + "'");
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& s = get(section, key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("[" + section + "] " + key + ": not a boolean: '" + s + "'");
}

std::vector<std::string> ConfigFile::section_names() const {
    std::vector<std::string> out;
    for (const auto& [n, e] : sections_) out.push_back(n);
    return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    if (const Entries* sec = find_section(section))
        for (const auto& [k, v] : *sec) out.push_back(k);
    return out;
}

}  // namespace lvc
