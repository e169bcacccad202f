#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mla/errors.hpp"
#include "mla/numeric.hpp"

namespace mla {

/**
 * Ordered list of named integer variables describing a state space.
 *
 * Each variable with domain size l occupies ceil(log2(l)) bits. A state's
 * assignment encodes to a single code word: variables in declaration order,
 * most significant bit first within each variable. Partition trees test
 * these bits in order, so the declaration order decides the split order.
 */
class VariableSchema {
public:
    struct Variable {
        std::string name;
        std::uint64_t domain_size = 1;
    };

    VariableSchema() = default;
    explicit VariableSchema(std::vector<Variable> vars);

    /// Single pseudo-variable covering indices [0, n); used when a graph
    /// carries no declared variables.
    static VariableSchema index_schema(std::uint64_t n, const std::string& name = "state");

    const std::vector<Variable>& variables() const { return vars_; }
    int bits_of(std::size_t var) const { return bits_[var]; }
    int total_bits() const { return total_bits_; }
    std::size_t size() const { return vars_.size(); }

    /// Pack an assignment (one value per variable) into a code word.
    std::uint64_t encode(std::span<const std::uint64_t> assignment) const;
    /// Inverse of encode for codes produced by it.
    std::vector<std::uint64_t> decode(std::uint64_t code) const;

    bool operator==(const VariableSchema&) const = default;

private:
    std::vector<Variable> vars_;
    std::vector<int> bits_;
    int total_bits_ = 0;
};

} // namespace mla
