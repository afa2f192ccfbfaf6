#pragma once

#include <string_view>

namespace driveframe {

// Prompt templates are versioned artifacts; bump these when the wording
// changes so downstream evaluations can tell outputs apart.
inline constexpr std::string_view kTipPromptVersion = "tip-prompt/v1";
inline constexpr std::string_view kDraftPromptVersion = "report-draft/v1";
inline constexpr std::string_view kRefinePromptVersion = "report-refine/v1";

// Block delimiters the deterministic stub backend keys on.
inline constexpr std::string_view kStatsBegin = "<<STATS>>";
inline constexpr std::string_view kStatsEnd = "<<END STATS>>";
inline constexpr std::string_view kPlanBegin = "<<PLAN>>";
inline constexpr std::string_view kPlanEnd = "<<END PLAN>>";
inline constexpr std::string_view kDraftBegin = "<<DRAFT>>";
inline constexpr std::string_view kDraftEnd = "<<END DRAFT>>";
inline constexpr std::string_view kMarkerLinePrefix = "Citation marker: ";

} // namespace driveframe
