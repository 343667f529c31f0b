#ifndef XBAR_CONFIG_HPP
#define XBAR_CONFIG_HPP

#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xbar {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat "key = value" document. Blank lines and lines starting with '#' are
// skipped; a key may appear once.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream &in) {
    auto trim = [](std::string s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            return std::string{};
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    };

    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        line = trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        for (const auto &kv : out)
            if (kv.first == key)
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

} // namespace xbar

#endif // XBAR_CONFIG_HPP
