#include "riskalloc/event_tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "riskalloc/csv.hpp"
#include "riskalloc/errors.hpp"

namespace riskalloc {

namespace {
constexpr double kProbSumTol = 1e-9;
}

void EventTree::check_level(int level) const {
    if (level < 0 || level > depth()) throw std::out_of_range("tree level out of range");
}

std::size_t EventTree::level_size(int level) const {
    check_level(level);
    return levels_[static_cast<std::size_t>(level)].size();
}

std::size_t EventTree::parent(int level, std::size_t node) const {
    check_level(level);
    if (level == 0) throw std::out_of_range("the root has no parent");
    return levels_[static_cast<std::size_t>(level)].at(node).parent;
}

double EventTree::edge_prob(int level, std::size_t node) const {
    check_level(level);
    return levels_[static_cast<std::size_t>(level)].at(node).edge_prob;
}

double EventTree::node_prob(int level, std::size_t node) const {
    check_level(level);
    return levels_[static_cast<std::size_t>(level)].at(node).path_prob;
}

std::span<const std::size_t> EventTree::children(int level, std::size_t node) const {
    check_level(level);
    if (level == depth()) throw std::out_of_range("leaves have no children");
    const Node& n = levels_[static_cast<std::size_t>(level)].at(node);
    const auto& index = child_index_[static_cast<std::size_t>(level)];
    return {index.data() + n.child_begin, n.child_count};
}

std::string EventTree::to_text() const {
    std::ostringstream out;
    out << "0,-1,1\n";
    for (int level = 1; level <= depth(); ++level) {
        const auto& nodes = levels_[static_cast<std::size_t>(level)];
        for (const Node& n : nodes) {
            out << level << ',' << n.parent << ',' << csv::format_double(n.edge_prob) << '\n';
        }
    }
    return out.str();
}

EventTree EventTree::from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    TreeBuilder builder;
    int line_no = 0;
    bool saw_root = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;

        if (std::count(line.begin(), line.end(), ',') != 2)
            throw ParseError("<tree>", line_no, "expected level,parent_index,probability");
        std::size_t c1 = line.find(',');
        std::size_t c2 = line.find(',', c1 + 1);
        std::string field[3] = {line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1),
                                line.substr(c2 + 1)};

        auto parse_int = [&](const std::string& s) {
            int value = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
            if (ec != std::errc() || ptr != s.data() + s.size())
                throw ParseError("<tree>", line_no, "bad integer '" + s + "'");
            return value;
        };
        auto parse_prob = [&](const std::string& s) {
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
            if (ec != std::errc() || ptr != s.data() + s.size())
                throw ParseError("<tree>", line_no, "bad probability '" + s + "'");
            return value;
        };

        int level = parse_int(field[0]);
        int parent = parse_int(field[1]);
        double prob = parse_prob(field[2]);

        if (level == 0) {
            if (saw_root) throw ParseError("<tree>", line_no, "more than one root");
            if (parent != -1 || std::abs(prob - 1.0) > kProbSumTol)
                throw ParseError("<tree>", line_no, "root line must be 0,-1,1");
            saw_root = true;
            continue;
        }
        if (!saw_root) throw ParseError("<tree>", line_no, "first node must be the level-0 root");
        if (parent < 0) throw ParseError("<tree>", line_no, "parent index must be >= 0");
        builder.add_node(level, static_cast<std::size_t>(parent), prob);
    }
    if (!saw_root) throw ParseError("<tree>", std::max(line_no, 1), "empty tree");
    return builder.build();
}

TreeBuilder::TreeBuilder() = default;

std::size_t TreeBuilder::add_node(int level, std::size_t parent, double prob) {
    if (level < 1 || static_cast<std::size_t>(level) > levels_.size() + 1)
        throw std::out_of_range("node level must extend the tree by at most one generation");
    if (!std::isfinite(prob) || prob < 0.0 || prob > 1.0)
        throw std::domain_error("transition probability must lie in [0, 1]");
    std::size_t parent_count = level == 1 ? 1 : levels_[static_cast<std::size_t>(level - 2)].size();
    if (parent >= parent_count) throw std::out_of_range("no such parent at the previous level");

    if (static_cast<std::size_t>(level) > levels_.size()) levels_.emplace_back();
    auto& nodes = levels_[static_cast<std::size_t>(level - 1)];
    nodes.push_back({parent, prob});
    return nodes.size() - 1;
}

EventTree TreeBuilder::build() const {
    if (levels_.empty()) throw std::invalid_argument("tree has no nodes");

    EventTree tree;
    tree.levels_.resize(levels_.size() + 1);
    tree.levels_[0] = {EventTree::Node{0, 1.0, 1.0, 0, 0}};
    tree.child_index_.resize(levels_.size() + 1);

    // Sorted position of each insertion index, per level; the root maps to itself.
    std::vector<std::size_t> parent_position{0};

    for (std::size_t li = 0; li < levels_.size(); ++li) {
        const auto& pending = levels_[li];
        if (pending.empty()) throw std::invalid_argument("empty tree level");

        std::vector<std::size_t> order(pending.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return parent_position[pending[a].parent] < parent_position[pending[b].parent];
        });

        auto& parents = tree.levels_[li];
        auto& nodes = tree.levels_[li + 1];
        nodes.resize(pending.size());
        std::vector<std::size_t> position(pending.size());
        for (std::size_t slot = 0; slot < order.size(); ++slot) {
            const Pending& p = pending[order[slot]];
            std::size_t parent = parent_position[p.parent];
            nodes[slot] = {parent, p.prob, parents[parent].path_prob * p.prob, 0, 0};
            parents[parent].child_count += 1;
            position[order[slot]] = slot;
        }

        std::size_t begin = 0;
        for (auto& parent : parents) {
            parent.child_begin = begin;
            begin += parent.child_count;
            if (parent.child_count == 0)
                throw std::invalid_argument("interior node without children");
            double sum = 0.0;
            for (std::size_t c = parent.child_begin; c < parent.child_begin + parent.child_count;
                 ++c)
                sum += nodes[c].edge_prob;
            if (std::abs(sum - 1.0) > kProbSumTol)
                throw std::invalid_argument("children probabilities must sum to 1");
        }

        auto& index = tree.child_index_[li];
        index.resize(pending.size());
        std::iota(index.begin(), index.end(), std::size_t{0});

        parent_position = std::move(position);
    }
    return tree;
}

AdaptedProcess AdaptedProcess::zeros(const EventTree& tree) {
    AdaptedProcess process;
    process.levels.resize(static_cast<std::size_t>(tree.depth()) + 1);
    for (int t = 1; t <= tree.depth(); ++t)
        process.levels[static_cast<std::size_t>(t)].assign(tree.level_size(t), 0.0);
    return process;
}

TerminalRisk TerminalRisk::constant(const EventTree& tree, double value) {
    return TerminalRisk{std::vector<double>(tree.leaf_count(), value)};
}

LevelValues conditional_expectation(const EventTree& tree, std::span<const double> values,
                                    int from_level, int to_level) {
    if (from_level < 0 || from_level > tree.depth() || to_level < 0)
        throw std::out_of_range("conditional_expectation: level out of range");
    if (to_level >= from_level)
        throw std::invalid_argument("conditional_expectation: target level must be earlier");
    if (values.size() != tree.level_size(from_level))
        throw std::invalid_argument("conditional_expectation: one value per node required");

    LevelValues current(values.begin(), values.end());
    for (int level = from_level; level > to_level; --level) {
        LevelValues next(tree.level_size(level - 1), 0.0);
        for (std::size_t i = 0; i < current.size(); ++i)
            next[tree.parent(level, i)] += tree.edge_prob(level, i) * current[i];
        current = std::move(next);
    }
    return current;
}

double expectation(const EventTree& tree, std::span<const double> values, int level) {
    if (level < 0 || level > tree.depth()) throw std::out_of_range("expectation: level out of range");
    if (values.size() != tree.level_size(level))
        throw std::invalid_argument("expectation: one value per node required");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += tree.node_prob(level, i) * values[i];
    return sum;
}

void check_adapted(const EventTree& tree, const AdaptedProcess& process) {
    if (process.levels.size() != static_cast<std::size_t>(tree.depth()) + 1)
        throw std::invalid_argument("adapted process must cover levels 0..depth");
    if (!process.levels[0].empty())
        throw std::invalid_argument("adapted process starts at level 1; level 0 must be empty");
    for (int t = 1; t <= tree.depth(); ++t) {
        if (process.levels[static_cast<std::size_t>(t)].size() != tree.level_size(t))
            throw std::invalid_argument("adapted process shape does not match the tree");
    }
}

EventTree death_time_tree(const MortalityCurve& mortality) {
    TreeBuilder builder;
    int term = mortality.term();
    for (int t = 1; t <= term; ++t) {
        for (int dead = 0; dead + 1 < t; ++dead)
            builder.add_node(t, static_cast<std::size_t>(dead), 1.0);
        double q = mortality.conditional_death_prob(t);
        std::size_t alive = static_cast<std::size_t>(t - 1);
        builder.add_node(t, alive, q);
        builder.add_node(t, alive, 1.0 - q);
    }
    return builder.build();
}

AdaptedProcess reallocate_terminal(const EventTree& tree, const RateCurve& rates,
                                   const AdaptedProcess& payments) {
    check_adapted(tree, payments);
    int depth = tree.depth();
    if (rates.term() < depth)
        throw std::invalid_argument("rate curve is shorter than the tree horizon");

    AdaptedProcess moved = AdaptedProcess::zeros(tree);
    if (depth == 1) {
        moved.at(1) = payments.at(1);
        return moved;
    }
    for (int t = 2; t <= depth; ++t) {
        double accrual = 1.0 + rates.rate(t);
        for (std::size_t i = 0; i < tree.level_size(t); ++i) {
            double value = accrual * payments.at(t - 1)[tree.parent(t, i)];
            if (t == depth) value += payments.at(t)[i];
            moved.at(t)[i] = value;
        }
    }
    return moved;
}

}  // namespace riskalloc
