#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dnscov/errors.hpp"

namespace dnscov {

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Public-suffix catalogue used to split hostnames into registered domain
/// and subdomain. Entries are matched literally on label boundaries;
/// wildcard and exception rules of the full public-suffix-list format are
/// ignored at load time.
class SuffixList {
public:
    SuffixList() = default;

    explicit SuffixList(const std::vector<std::string>& suffixes) {
        for (const auto& s : suffixes) add(s);
    }

    void add(std::string_view suffix) {
        std::string s = to_lower(suffix);
        if (s.empty()) return;
        entries_.insert(s);
        std::size_t labels = 1 + static_cast<std::size_t>(std::count(s.begin(), s.end(), '.'));
        max_labels_ = std::max(max_labels_, labels);
    }

    static SuffixList load(std::istream& in) {
        SuffixList sl;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            // trim
            auto b = line.find_first_not_of(" \t");
            auto e = line.find_last_not_of(" \t");
            if (b == std::string::npos) continue;
            line = line.substr(b, e - b + 1);
            if (line.empty() || line.find('*') != std::string::npos || line[0] == '!') continue;
            sl.add(line);
        }
        return sl;
    }

    static SuffixList load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open suffix list: " + path);
        return load(in);
    }

    bool contains(std::string_view suffix_lower) const {
        return entries_.count(std::string(suffix_lower)) > 0;
    }

    std::size_t size() const { return entries_.size(); }
    std::size_t max_labels() const { return max_labels_; }

private:
    std::unordered_set<std::string> entries_;
    std::size_t max_labels_ = 0;
};

}  // namespace dnscov
