#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mla/game.hpp"

namespace mla {

using RegionId = std::uint32_t;

enum class BoundRole { Lower, Upper };

/// Real value per region, tagged with the bound direction it tracks.
struct RegionValuation {
    std::vector<double> values;
    BoundRole role = BoundRole::Lower;

    static RegionValuation constant(std::size_t n, double x, BoundRole role) {
        return {std::vector<double>(n, x), role};
    }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

/// Largest per-region gap upper[x] - lower[x].
double max_gap(const RegionValuation& lower, const RegionValuation& upper);

struct SplitAllResult;

/**
 * Partition of the state space as a binary decision tree over the states'
 * bit encoding. Bits are tested in encoding order; every leaf is a region
 * holding its states in ascending id order. Splitting a region tests the
 * first not-yet-tested bit on which its states disagree, so both children
 * are nonempty and the region count grows by exactly one per split
 * (bit values shared by all states of a region are skipped — they can
 * never separate it).
 *
 * Immutable; refinement returns a new tree one generation up.
 */
class PartitionTree {
public:
    PartitionTree() = default; // empty placeholder; not a usable partition

    /// Complete tree over the first `depth` bits, leaves without states
    /// pruned. Codes are one encoding word per state.
    static PartitionTree initial(std::vector<std::uint64_t> codes, int total_bits, int depth);
    /// Convenience: codes from the graph's schema (or state indices when no
    /// schema is declared); depth < 0 picks the default total_bits/2.
    static PartitionTree initial_for(const GameGraph& g, int depth = -1);

    std::size_t num_regions() const { return leaves_.size(); }
    std::size_t num_states() const { return codes_->size(); }
    int total_bits() const { return total_bits_; }
    int generation() const { return generation_; }

    /// Leaf whose bit tests match the state's encoding. O(total_bits).
    RegionId region_of(StateId s) const;
    /// The region's states, ascending ids. Throws StaleRegionError for ids
    /// outside this generation's range.
    std::span<const StateId> states_of(RegionId x) const;
    std::size_t region_size(RegionId x) const { return states_of(x).size(); }
    bool splittable(RegionId x) const { return states_of(x).size() >= 2; }

    std::uint64_t code(StateId s) const { return (*codes_)[s]; }

    /// Splits every region with upper-lower gap strictly above eps_abs.
    /// No such region: returns the tree unchanged. Some over-threshold region
    /// exists but none is splittable: throws CannotRefineError.
    SplitAllResult split_all(const RegionValuation& lower, const RegionValuation& upper,
                             double eps_abs) const;

    /// Splits the ceil(ratio * |R|) splittable regions of largest gap
    /// (ties to the lower region id); always at least one when any region
    /// is splittable, else throws CannotRefineError.
    PartitionTree split_ratio(const RegionValuation& lower, const RegionValuation& upper,
                              double eps_abs, double ratio) const;

    /// Live-storage footprint 2|R| + max_x |x|.
    std::size_t space_metric() const { return 2 * num_regions() + max_region_size(); }
    std::size_t max_region_size() const;

    /// Diagnostics: one line per region — id, bit prefix ('*' marks skipped
    /// bits), size, and the bounds when given.
    std::string dump(const RegionValuation* lower = nullptr,
                     const RegionValuation* upper = nullptr) const;

private:
    struct Node {
        int bit = -1;          // tested bit; -1 for leaves
        std::int32_t kids[2] = {-1, -1};
        std::int32_t leaf = -1; // index into leaves_ for leaf nodes
    };
    struct Leaf {
        std::vector<StateId> states; // ascending
        int next_bit = 0;            // first bit a split may test
        std::int32_t node = -1;
    };

    int bit_of(std::uint64_t code, int bit) const {
        return static_cast<int>((code >> (total_bits_ - 1 - bit)) & 1u);
    }
    PartitionTree split_leaves(const std::vector<RegionId>& targets,
                               std::vector<std::pair<RegionId, RegionId>>* child_map) const;
    void renumber_leaves();
    std::int32_t build_initial(std::vector<StateId>&& states, int bit, int depth);

    std::shared_ptr<const std::vector<std::uint64_t>> codes_;
    int total_bits_ = 0;
    int generation_ = 0;
    std::int32_t root_ = -1;
    std::vector<Node> nodes_;
    std::vector<Leaf> leaves_;
};

struct SplitAllResult {
    PartitionTree tree;
    RegionValuation lower, upper; // migrated: children inherit the parent
    std::size_t splits = 0;
};

} // namespace mla
