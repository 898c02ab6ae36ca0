#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "riskalloc/mortality_curve.hpp"
#include "riskalloc/rate_curve.hpp"

namespace riskalloc {

/// Finite probability tree over time levels 0..depth.
///
/// Level 0 is the single root.  Every node stores its parent's index in the
/// previous level and the transition probability of the edge from that
/// parent.  Transition probabilities out of each node sum to one; every path
/// runs the full depth, so the atoms of the time-t information set are
/// exactly the level-t nodes and the level-depth nodes are the leaves.
///
/// Node order within a level is deterministic: grouped by parent index, and
/// within a parent in insertion order.
class EventTree {
public:
    int depth() const noexcept { return static_cast<int>(levels_.size()) - 1; }

    std::size_t level_size(int level) const;
    std::size_t leaf_count() const { return level_size(depth()); }

    /// Index of the parent node one level up; level in [1, depth].
    std::size_t parent(int level, std::size_t node) const;

    /// Transition probability of the edge into this node.
    double edge_prob(int level, std::size_t node) const;

    /// Unconditional probability of reaching this node.
    double node_prob(int level, std::size_t node) const;

    /// Indices of this node's children in the next level; level in [0, depth).
    std::span<const std::size_t> children(int level, std::size_t node) const;

    /// Line-per-node text form "level,parent_index,probability".
    std::string to_text() const;
    static EventTree from_text(const std::string& text);

private:
    friend class TreeBuilder;
    EventTree() = default;

    struct Node {
        std::size_t parent = 0;
        double edge_prob = 1.0;
        double path_prob = 1.0;
        std::size_t child_begin = 0;
        std::size_t child_count = 0;
    };

    void check_level(int level) const;

    std::vector<std::vector<Node>> levels_;
    std::vector<std::vector<std::size_t>> child_index_;
};

/// Incremental EventTree construction.  Nodes may be added in any order;
/// build() establishes the canonical order and validates probabilities.
class TreeBuilder {
public:
    TreeBuilder();

    /// Add a node at `level` (>= 1) under the parent's insertion index at
    /// level-1.  Returns the node's insertion index within its level.
    std::size_t add_node(int level, std::size_t parent, double prob);

    EventTree build() const;

private:
    struct Pending {
        std::size_t parent;
        double prob;
    };
    std::vector<std::vector<Pending>> levels_;
};

/// Values attached to the nodes of one tree level.
using LevelValues = std::vector<double>;

/// A process adapted to an EventTree: one value per node on levels 1..depth.
/// Level 0 is kept empty so that levels[t] always matches tree level t.
struct AdaptedProcess {
    std::vector<LevelValues> levels;

    static AdaptedProcess zeros(const EventTree& tree);

    LevelValues& at(int level) { return levels.at(static_cast<std::size_t>(level)); }
    const LevelValues& at(int level) const { return levels.at(static_cast<std::size_t>(level)); }
};

/// A payoff resolved at the final level: one finite value per leaf.
struct TerminalRisk {
    std::vector<double> values;

    static TerminalRisk constant(const EventTree& tree, double value);
};

/// E[x | information at to_level] for values x on from_level.
/// Computed one level at a time, so iterated coarsening is exact.
LevelValues conditional_expectation(const EventTree& tree, std::span<const double> values,
                                    int from_level, int to_level);

/// Unconditional expectation of values on a level.
double expectation(const EventTree& tree, std::span<const double> values, int level);

/// Verify `process` has one value per node on levels 1..depth; throws otherwise.
void check_adapted(const EventTree& tree, const AdaptedProcess& process);

/// Binary survival tree for a single life over `mortality.term()` periods.
///
/// An alive node branches into death (probability q_t, listed first) and
/// survival; a death node continues as a probability-one chain so that all
/// paths reach the final level.  Level t therefore holds t+1 nodes: death in
/// period 1..t in order, then the survivors.  The leaves are the t+1 atoms
/// "died in period 1", ..., "died in period T", "survived".
EventTree death_time_tree(const MortalityCurve& mortality);

/// Shift a payment stream one period later, accruing interest, with both
/// final payments made at the horizon.  Preserves the discounted path sums
/// of the input, demonstrating that only those sums matter.
AdaptedProcess reallocate_terminal(const EventTree& tree, const RateCurve& rates,
                                   const AdaptedProcess& payments);

}  // namespace riskalloc
