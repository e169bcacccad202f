#include "mla/partition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace mla {

double max_gap(const RegionValuation& lower, const RegionValuation& upper) {
    if (lower.size() != upper.size()) {
        throw DimensionMismatchError("bound valuations differ in region count");
    }
    double g = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        g = std::max(g, upper[i] - lower[i]);
    }
    return g;
}

std::int32_t PartitionTree::build_initial(std::vector<StateId>&& states, int bit, int depth) {
    if (bit >= depth || states.size() <= 1) {
        // At target depth (or indivisible); further agreed bits up to
        // `depth` are considered tested.
        Leaf leaf;
        leaf.states = std::move(states);
        leaf.next_bit = depth;
        leaves_.push_back(std::move(leaf));
        Node n;
        n.leaf = static_cast<std::int32_t>(leaves_.size() - 1);
        nodes_.push_back(n);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }
    std::vector<StateId> zero, one;
    for (StateId s : states) {
        (bit_of((*codes_)[s], bit) ? one : zero).push_back(s);
    }
    if (zero.empty()) return build_initial(std::move(one), bit + 1, depth);
    if (one.empty()) return build_initial(std::move(zero), bit + 1, depth);
    std::int32_t left = build_initial(std::move(zero), bit + 1, depth);
    std::int32_t right = build_initial(std::move(one), bit + 1, depth);
    Node n;
    n.bit = bit;
    n.kids[0] = left;
    n.kids[1] = right;
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

PartitionTree PartitionTree::initial(std::vector<std::uint64_t> codes, int total_bits, int depth) {
    if (depth < 0 || depth > total_bits) {
        throw DepthOutOfRangeError("initial depth " + std::to_string(depth) +
                                   " outside [0, " + std::to_string(total_bits) + "]");
    }
    if (codes.empty()) throw ConfigError("cannot partition an empty state space");
    PartitionTree t;
    t.codes_ = std::make_shared<const std::vector<std::uint64_t>>(std::move(codes));
    t.total_bits_ = total_bits;
    std::vector<StateId> all(t.codes_->size());
    for (StateId s = 0; s < all.size(); ++s) all[s] = s;
    t.root_ = t.build_initial(std::move(all), 0, depth);
    t.renumber_leaves();
    return t;
}

PartitionTree PartitionTree::initial_for(const GameGraph& g, int depth) {
    auto sc = g.state_codes();
    if (depth < 0) depth = sc.total_bits / 2;
    return initial(std::move(sc.codes), sc.total_bits, depth);
}

void PartitionTree::renumber_leaves() {
    // In-order walk; leaf ids follow the bit-prefix order of the tree.
    std::vector<Leaf> ordered;
    ordered.reserve(leaves_.size());
    std::function<void(std::int32_t)> walk = [&](std::int32_t ni) {
        Node& n = nodes_[ni];
        if (n.leaf >= 0) {
            std::int32_t id = static_cast<std::int32_t>(ordered.size());
            ordered.push_back(std::move(leaves_[n.leaf]));
            ordered.back().node = ni;
            n.leaf = id;
            return;
        }
        walk(n.kids[0]);
        walk(n.kids[1]);
    };
    walk(root_);
    leaves_ = std::move(ordered);
}

RegionId PartitionTree::region_of(StateId s) const {
    const std::uint64_t c = (*codes_)[s];
    std::int32_t ni = root_;
    while (nodes_[ni].leaf < 0) {
        ni = nodes_[ni].kids[bit_of(c, nodes_[ni].bit)];
    }
    return static_cast<RegionId>(nodes_[ni].leaf);
}

std::span<const StateId> PartitionTree::states_of(RegionId x) const {
    if (x >= leaves_.size()) {
        throw StaleRegionError("region " + std::to_string(x) + " out of range for generation " +
                               std::to_string(generation_));
    }
    return leaves_[x].states;
}

std::size_t PartitionTree::max_region_size() const {
    std::size_t m = 0;
    for (const Leaf& l : leaves_) m = std::max(m, l.states.size());
    return m;
}

PartitionTree PartitionTree::split_leaves(
    const std::vector<RegionId>& targets,
    std::vector<std::pair<RegionId, RegionId>>* child_map) const {
    PartitionTree t(*this);
    t.generation_ = generation_ + 1;
    for (RegionId x : targets) {
        const std::int32_t ni = leaves_[x].node;
        Leaf& parent = t.leaves_[x];
        // First untested bit on which the region's states disagree.
        int bit = parent.next_bit;
        const std::uint64_t witness = (*t.codes_)[parent.states.front()];
        while (bit < t.total_bits_) {
            bool differs = false;
            for (StateId s : parent.states) {
                if (t.bit_of((*t.codes_)[s], bit) != t.bit_of(witness, bit)) {
                    differs = true;
                    break;
                }
            }
            if (differs) break;
            ++bit;
        }
        if (bit >= t.total_bits_) {
            throw CannotRefineError("region " + std::to_string(x) + " is not splittable");
        }
        Leaf zero, one;
        zero.next_bit = one.next_bit = bit + 1;
        for (StateId s : parent.states) {
            (t.bit_of((*t.codes_)[s], bit) ? one : zero).states.push_back(s);
        }
        const std::int32_t li0 = static_cast<std::int32_t>(t.leaves_.size());
        t.leaves_.push_back(std::move(zero));
        t.leaves_.push_back(std::move(one));
        Node n0;
        n0.leaf = li0;
        Node n1;
        n1.leaf = li0 + 1;
        t.nodes_.push_back(n0);
        t.nodes_.push_back(n1);
        // The parent's node becomes internal; its leaf slot is orphaned and
        // dropped by renumber_leaves (which walks the node tree).
        Node& split_node = t.nodes_[ni];
        split_node.bit = bit;
        split_node.leaf = -1;
        split_node.kids[0] = static_cast<std::int32_t>(t.nodes_.size() - 2);
        split_node.kids[1] = static_cast<std::int32_t>(t.nodes_.size() - 1);
    }
    t.renumber_leaves();
    if (child_map) {
        // Map each old region to where its states ended up (one or two
        // new regions; both entries equal when the region did not split).
        child_map->clear();
        child_map->resize(leaves_.size(), {0, 0});
        for (RegionId x = 0; x < leaves_.size(); ++x) {
            RegionId a = t.region_of(leaves_[x].states.front());
            RegionId b = a;
            for (StateId s : leaves_[x].states) {
                RegionId r = t.region_of(s);
                if (r != a) b = r;
            }
            (*child_map)[x] = {std::min(a, b), std::max(a, b)};
        }
    }
    return t;
}

SplitAllResult PartitionTree::split_all(const RegionValuation& lower,
                                                       const RegionValuation& upper,
                                                       double eps_abs) const {
    if (lower.size() != num_regions() || upper.size() != num_regions()) {
        throw DimensionMismatchError("bound valuations do not cover the partition");
    }
    std::vector<RegionId> over, targets;
    for (RegionId x = 0; x < num_regions(); ++x) {
        if (upper[x] - lower[x] > eps_abs) {
            over.push_back(x);
            if (splittable(x)) targets.push_back(x);
        }
    }
    if (!over.empty() && targets.empty()) {
        throw CannotRefineError("all " + std::to_string(over.size()) +
                                " regions over the gap threshold are singletons");
    }
    SplitAllResult res;
    if (targets.empty()) {
        res.tree = *this;
        res.lower = lower;
        res.upper = upper;
        return res;
    }
    std::vector<std::pair<RegionId, RegionId>> child_map;
    res.tree = split_leaves(targets, &child_map);
    res.splits = targets.size();
    res.lower = RegionValuation::constant(res.tree.num_regions(), 0.0, BoundRole::Lower);
    res.upper = RegionValuation::constant(res.tree.num_regions(), 0.0, BoundRole::Upper);
    for (RegionId x = 0; x < num_regions(); ++x) {
        auto [a, b] = child_map[x];
        res.lower[a] = lower[x];
        res.upper[a] = upper[x];
        res.lower[b] = lower[x];
        res.upper[b] = upper[x];
    }
    return res;
}

PartitionTree PartitionTree::split_ratio(const RegionValuation& lower,
                                         const RegionValuation& upper, double eps_abs,
                                         double ratio) const {
    if (ratio < 0.0 || ratio > 1.0) throw ConfigError("ratio must lie in [0,1]");
    (void)eps_abs; // selection is purely gap-ranked
    std::vector<RegionId> candidates;
    for (RegionId x = 0; x < num_regions(); ++x) {
        if (splittable(x)) candidates.push_back(x);
    }
    if (candidates.empty()) {
        throw CannotRefineError("no splittable region left");
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](RegionId a, RegionId b) {
        double ga = upper[a] - lower[a];
        double gb = upper[b] - lower[b];
        if (ga != gb) return ga > gb;
        return a < b;
    });
    std::size_t want = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(num_regions()) - 1e-12));
    want = std::max<std::size_t>(want, 1);
    want = std::min(want, candidates.size());
    std::vector<RegionId> targets(candidates.begin(), candidates.begin() + want);
    return split_leaves(targets, nullptr);
}

std::string PartitionTree::dump(const RegionValuation* lower,
                                const RegionValuation* upper) const {
    std::ostringstream out;
    // Reconstruct the bit pattern of each leaf by walking the tree once.
    std::vector<std::string> prefixes(leaves_.size());
    std::function<void(std::int32_t, std::string)> walk = [&](std::int32_t ni,
                                                              std::string path) {
        const Node& n = nodes_[ni];
        if (n.leaf >= 0) {
            path.resize(static_cast<std::size_t>(leaves_[n.leaf].next_bit), '*');
            prefixes[n.leaf] = std::move(path);
            return;
        }
        std::string p0 = path, p1 = path;
        p0.resize(static_cast<std::size_t>(n.bit), '*');
        p1.resize(static_cast<std::size_t>(n.bit), '*');
        p0 += '0';
        p1 += '1';
        walk(n.kids[0], std::move(p0));
        walk(n.kids[1], std::move(p1));
    };
    walk(root_, "");
    for (RegionId x = 0; x < leaves_.size(); ++x) {
        out << x << ' ' << (prefixes[x].empty() ? "-" : prefixes[x]) << ' '
            << leaves_[x].states.size();
        if (lower) out << ' ' << (*lower)[x];
        if (upper) out << ' ' << (*upper)[x];
        out << '\n';
    }
    return out.str();
}

} // namespace mla
