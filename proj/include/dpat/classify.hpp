#pragma once

// Phase class from per-pattern probabilities: scan the canonical order and
// keep the last pattern above its threshold.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "dpat/patterns.hpp"

namespace dpat {

enum class PhaseClass : std::uint8_t { A = 0, PL, Qplus, Dplus, Q, D, PercolatingOnly };

using PatternProbs = std::array<double, kPatternCount>;

inline constexpr PatternProbs kDefaultThresholds{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};

constexpr std::string_view class_name(PhaseClass c) noexcept {
    if (c == PhaseClass::PercolatingOnly) return "Percolating";
    return pattern_name(static_cast<PatternKind>(c));
}

inline std::optional<PhaseClass> parse_class(std::string_view s) noexcept {
    if (s == "Percolating") return PhaseClass::PercolatingOnly;
    if (const auto k = parse_pattern(s)) return static_cast<PhaseClass>(*k);
    return std::nullopt;
}

constexpr PhaseClass assign_class(const PatternProbs& probs, const PatternProbs& thresholds) noexcept {
    PhaseClass out = PhaseClass::PercolatingOnly;
    for (std::size_t k = 0; k < kPatternCount; ++k) {
        if (probs[k] > thresholds[k]) out = static_cast<PhaseClass>(k);
    }
    return out;
}

/// Class of a single labeled realization.
inline PhaseClass class_of(const MultiHotTarget& t) noexcept {
    PatternProbs probs{};
    for (std::size_t k = 0; k < kPatternCount; ++k) probs[k] = t.flags[k] ? 1.0 : 0.0;
    return assign_class(probs, kDefaultThresholds);
}

}  // namespace dpat
