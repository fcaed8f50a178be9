#pragma once

// Report artifacts: text reports, per-wing CSV samples and static SVG 1.1
// log-log plots of the sampled ratio against t.

#include "strat/gallery.hpp"
#include "strat/stratify.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace strat {

/// wing,label,t,g,log_t,log_g with one row per sample of every wing.
std::string wings_csv(const ConditionReport& r);

/// Log-log plot of g against t, one polyline per wing, witness wings drawn
/// in red. Samples with g <= 0 are dropped.
std::string wings_svg(const ConditionReport& r, const std::string& title);

struct ReportFiles {
    std::filesystem::path text;
    std::filesystem::path csv;
    std::filesystem::path svg;
};

/// Writes <stem>.txt, <stem>.csv and <stem>.svg into dir (created if needed).
ReportFiles write_report(const ConditionReport& r, const std::filesystem::path& dir, const std::string& stem);

/// Fixed-width pass/fail table of gallery outcomes.
std::string gallery_table(const std::vector<EntryOutcome>& outcomes);

/// Text of a refinement: status, rounds, log lines, strata and frontier.
std::string refinement_text(const RefinementState& r);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace strat
