#pragma once

// Built-in example scenes together with the verdicts they are expected to
// produce.

#include "strat/conditions.hpp"

#include <optional>
#include <string>
#include <vector>

namespace strat {

struct Expectation {
    /// Index into GalleryEntry::scenes.
    int scene = 0;
    Condition condition = Condition::W;
    std::string lower;
    std::string upper;
    Vec base;
    /// Absent for open questions.
    std::optional<Verdict> verdict;
    /// How the expected verdict is known: classical (a standard example),
    /// direct (immediate from the definitions) or analytic (worked out by hand).
    std::string source;
    /// Optional requirement on the reported slope.
    std::optional<Real> slope;
    Real slope_tol = 0.05L;
    /// Optional lower bound on C for a Fails verdict.
    std::optional<Real> min_c;
};

struct GalleryEntry {
    std::string name;
    std::string description;
    std::vector<Scene> scenes;
    std::vector<Expectation> checks;
    /// f is polynomially bounded (|f(t)| <= t^N on curves); false when there is no f.
    bool polynomially_bounded = true;
    /// All sets and maps are definable in an o-minimal structure.
    bool definable = true;
    bool open_question = false;
};

/// The eight shipped entries, in a fixed order.
const std::vector<GalleryEntry>& gallery();
const GalleryEntry& gallery_entry(const std::string& name);

struct CheckOutcome {
    const Expectation* expectation = nullptr;
    ConditionReport report;
    /// True when the expectation is met or there is none.
    bool pass = true;
    std::string note;
};

struct EntryOutcome {
    std::string name;
    std::vector<CheckOutcome> checks;
    bool pass() const;
};

/// Runs every check of the entry. Seeds derive from `params.seed` and the
/// check index only.
EntryOutcome run_entry(const GalleryEntry& e, const ConditionParams& params);

/// Runs the entries whose name contains `filter` (all when empty), in
/// gallery order. Entries run concurrently; entry k uses the seed
/// derive_seed(params.seed, 0x6a11, k), so results do not depend on threads.
std::vector<EntryOutcome> run_gallery(const std::string& filter, const ConditionParams& params, unsigned threads = 0);

}  // namespace strat
