#pragma once

// A finite family of strata with a frontier relation, and the sampled check
// of the stratification axioms.

#include "strat/strata.hpp"

#include <string>
#include <vector>

namespace strat {

/// lower lies in the closure of upper.
struct FrontierPair {
    int lower;
    int upper;
    bool operator==(const FrontierPair&) const = default;
};

class Stratification {
public:
    Stratification(int ambient_dim, Box box) : n_(ambient_dim), box_(std::move(box)) {}

    int ambient_dim() const { return n_; }
    const Box& box() const { return box_; }
    const std::vector<Stratum>& strata() const { return strata_; }
    const std::vector<FrontierPair>& frontier() const { return frontier_; }

    int add(Stratum s);
    void add_frontier(int lower, int upper);
    void set_frontier(std::vector<FrontierPair> pairs) { frontier_ = std::move(pairs); }
    /// -1 when absent.
    int index_of(const std::string& name) const;
    const Stratum& at(int i) const { return strata_.at(static_cast<std::size_t>(i)); }
    const Stratum& by_name(const std::string& name) const;
    std::size_t size() const { return strata_.size(); }
    int top_dim() const;

    /// Strata below `upper` in the transitive closure of the relation.
    std::vector<int> below(int upper) const;
    /// Acyclic with dimension strictly decreasing along every pair.
    bool is_partial_order() const;

private:
    int n_;
    Box box_;
    std::vector<Stratum> strata_;
    std::vector<FrontierPair> frontier_;
};

struct AxiomCheck {
    std::string axiom;  // regularity, disjoint, frontier, order
    bool pass = true;
    int samples = 0;
    std::string witness;
};

struct ValidationReport {
    std::vector<AxiomCheck> checks;
    bool pass() const;
    const AxiomCheck& get(const std::string& axiom) const;
    std::string str() const;
};

/// Samples every stratum and checks regularity, pairwise disjointness,
/// frontier coverage (every boundary limit lies within 1e-6 of a lower
/// stratum) and the order conditions.
ValidationReport validate(const Stratification& s, int samples_per_stratum, std::uint64_t seed = 1);

/// Limit points of s reached by walking from `from` towards the boundary of
/// its inequality cell (implicit) or parameter box (parametric).
std::vector<Vec> boundary_limits(const Stratum& s, const StratumPoint& from);

/// True when b lies within tol of s. For parametric strata the search starts
/// from the preimages of the nearest `hints` when given, else from a grid.
bool within(const Stratum& s, const Vec& b, Real tol, const std::vector<StratumPoint>* hints = nullptr);

}  // namespace strat
