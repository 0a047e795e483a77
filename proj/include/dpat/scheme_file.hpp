#pragma once

// Text format for overriding pattern schemes without rebuilding.
//
//   # comment
//   [D]
//   block     = 2x1              # width (space) x height (time)
//   stride    = 2x1              # anchor stride, defaults to the block size
//   active    = 10 01            # active block patterns, character k = cell k
//   adjacency = nearest          # nearest | next-nearest | list "ds,dt ..."
//
// Cell k of a block sits at space offset k % width, time offset k / width.
// Sections may appear in any order; patterns that are not mentioned keep
// their built-in scheme.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpat/patterns.hpp"

namespace dpat {

class SchemeFileError : public std::runtime_error {
public:
    SchemeFileError(int line, const std::string& what)
        : std::runtime_error("scheme file line " + std::to_string(line) + ": " + what), line_{line} {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in{s};
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline std::pair<std::uint32_t, std::uint32_t> parse_dims(const std::string& v, int line) {
    const auto x = v.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument("missing x");
        const auto a = std::stoul(v.substr(0, x));
        const auto b = std::stoul(v.substr(x + 1));
        if (a == 0 || b == 0) throw std::invalid_argument("zero");
        return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    } catch (const std::exception&) {
        throw SchemeFileError(line, "expected WIDTHxHEIGHT, got '" + v + "'");
    }
}

inline std::vector<Offset> parse_adjacency(const std::string& v, int line) {
    if (v == "nearest") return nearest_offsets();
    if (v == "next-nearest") return next_nearest_offsets();
    std::vector<Offset> out;
    for (const auto& tok : split_ws(v)) {
        const auto comma = tok.find(',');
        try {
            if (comma == std::string::npos) throw std::invalid_argument("missing comma");
            out.push_back({std::stoi(tok.substr(0, comma)), std::stoi(tok.substr(comma + 1))});
        } catch (const std::exception&) {
            throw SchemeFileError(line, "bad adjacency offset '" + tok + "'");
        }
    }
    return out;
}

}  // namespace detail

/// Applies the overrides in `text` on top of `base`.
inline PatternSchemes parse_scheme_text(const std::string& text,
                                        PatternSchemes base = PatternSchemes::builtin()) {
    struct Pending {
        PatternKind kind;
        int line;
        std::optional<std::pair<std::uint32_t, std::uint32_t>> block, stride;
        std::optional<std::vector<std::string>> active;
        std::optional<std::vector<Offset>> adjacency;
    };
    std::vector<Pending> sections;

    std::istringstream in{text};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw SchemeFileError(line_no, "unterminated section header");
            const auto name = detail::trim(line.substr(1, line.size() - 2));
            const auto kind = parse_pattern(name);
            if (!kind) throw SchemeFileError(line_no, "unknown pattern '" + name + "'");
            if (*kind == PatternKind::A) throw SchemeFileError(line_no, "A has no renormalization scheme");
            sections.push_back({*kind, line_no, {}, {}, {}, {}});
            continue;
        }
        if (sections.empty()) throw SchemeFileError(line_no, "key outside of a [pattern] section");
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw SchemeFileError(line_no, "expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        auto& sec = sections.back();
        if (key == "block") sec.block = detail::parse_dims(value, line_no);
        else if (key == "stride") sec.stride = detail::parse_dims(value, line_no);
        else if (key == "active") sec.active = detail::split_ws(value);
        else if (key == "adjacency") sec.adjacency = detail::parse_adjacency(value, line_no);
        else throw SchemeFileError(line_no, "unknown key '" + key + "'");
    }

    for (const auto& sec : sections) {
        RenormScheme s = base[sec.kind];
        const bool reshaped = sec.block && (sec.block->first != s.block_width || sec.block->second != s.block_height);
        if (sec.block) {
            s.block_width = sec.block->first;
            s.block_height = sec.block->second;
            if (!sec.stride) {
                s.stride_space = s.block_width;
                s.stride_time = s.block_height;
            }
        }
        if (sec.stride) {
            s.stride_space = sec.stride->first;
            s.stride_time = sec.stride->second;
        }
        if (s.block_cells() > 16) throw SchemeFileError(sec.line, "block larger than 16 cells");
        if (reshaped && !sec.active) throw SchemeFileError(sec.line, "changing the block shape requires 'active'");
        if (sec.active) {
            s.active.assign(std::size_t{1} << s.block_cells(), false);
            for (const auto& bits : *sec.active) {
                try {
                    s.active[RenormScheme::code_from_string(bits, s.block_cells())] = true;
                } catch (const std::invalid_argument& e) {
                    throw SchemeFileError(sec.line, "active pattern '" + bits + "': " + e.what());
                }
            }
        }
        if (sec.adjacency) s.adjacency = *sec.adjacency;
        try {
            s.validate();
        } catch (const std::invalid_argument& e) {
            throw SchemeFileError(sec.line, e.what());
        }
        base[sec.kind] = std::move(s);
    }
    return base;
}

inline PatternSchemes load_scheme_file(const std::string& path) {
    std::ifstream f{path};
    if (!f) throw std::runtime_error("cannot open scheme file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_scheme_text(buf.str());
}

/// Serializes every renormalized pattern; parse_scheme_text(format(s)) == s.
inline std::string format_schemes(const PatternSchemes& schemes) {
    std::ostringstream out;
    for (auto k : kCanonicalOrder) {
        if (k == PatternKind::A) continue;
        const auto& s = schemes[k];
        out << '[' << pattern_name(k) << "]\n";
        out << "block = " << s.block_width << 'x' << s.block_height << '\n';
        out << "stride = " << s.stride_space << 'x' << s.stride_time << '\n';
        out << "active =";
        for (std::uint32_t code = 0; code < s.active.size(); ++code) {
            if (s.active[code]) out << ' ' << RenormScheme::code_to_string(code, s.block_cells());
        }
        out << "\nadjacency =";
        for (const auto& o : s.adjacency) out << ' ' << o.ds << ',' << o.dt;
        out << "\n\n";
    }
    return out.str();
}

}  // namespace dpat
