#pragma once

#include <string>
#include <vector>

#include "sce/bits.hpp"
#include "sce/error.hpp"

namespace sce::prob {

// Finite categorical distribution over labelled states. Normalized within
// 1e-9 at construction.
class Pmf {
public:
    Pmf(std::vector<std::string> support, std::vector<double> probs);

    // Two-state distribution over {"0","1"} with p("1") = alpha.
    static Pmf bernoulli(double alpha);

    std::size_t size() const { return probs_.size(); }
    const std::vector<std::string>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }
    double operator[](std::size_t i) const { return probs_[i]; }

private:
    std::vector<std::string> support_;
    std::vector<double> probs_;
};

struct JointVar {
    std::string name;
    std::vector<std::string> states;
};

// Dense joint distribution over a list of variables. Cells are addressed in
// mixed radix with the first variable most significant.
class JointTable {
public:
    JointTable(std::vector<JointVar> variables, std::vector<double> probs);

    const std::vector<JointVar>& variables() const { return vars_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t cell_count() const { return probs_.size(); }

    int var_index(const std::string& name) const;  // throws UnknownNode

    // Mixed-radix helpers over the full variable list.
    std::size_t index_of(const std::vector<int>& states) const;
    void decode(std::size_t index, std::vector<int>& states) const;

    // Marginal over the named variables (kept in this table's variable order).
    JointTable marginal(const std::vector<std::string>& keep) const;

    // Condition on variable=state assignments; result drops the fixed
    // variables and renormalizes. Throws ZeroProbabilityConditioning when the
    // event has no mass.
    JointTable condition(const std::vector<std::pair<std::string, std::string>>& assignments) const;

    // Probability of a (partial) assignment.
    double event_probability(const std::vector<std::pair<std::string, std::string>>& assignments) const;

    // Single-variable view; the table must hold exactly one variable, or the
    // name of the wanted variable is given and the rest are marginalized out.
    Pmf pmf() const;
    Pmf pmf_of(const std::string& name) const;

    Bits entropy() const;

private:
    std::vector<JointVar> vars_;
    std::vector<double> probs_;
    std::vector<std::size_t> strides_;
};

Bits entropy(const Pmf& p);

// H(target | given) as the expectation over the conditioning variables;
// zero-probability configurations contribute nothing.
Bits conditional_entropy(const JointTable& joint, const std::string& target,
                         const std::vector<std::string>& given);

// D(p || q) in bits; +inf when p puts mass where q has none. Supports must
// match exactly.
Bits kl_divergence(const Pmf& p, const Pmf& q);

// KL between two joints over the identical variable list (used for
// causal-strength style comparisons of full joints).
Bits kl_divergence(const JointTable& p, const JointTable& q);

// I(A;B|C) in bits; tiny negative rounding is clamped.
Bits mutual_information(const JointTable& joint, const std::vector<std::string>& a,
                        const std::vector<std::string>& b,
                        const std::vector<std::string>& given = {});

struct SpecificMi {
    Bits i1;    // D(p(Y|x) || p(Y)), never negative
    double i2;  // H(Y) - H(Y|X=x), sign carries meaning
};

// The two value-specific decompositions of mutual information for X=x.
SpecificMi specific_mi(const JointTable& joint, const std::string& x_node,
                       const std::string& x_value, const std::string& target);

}  // namespace sce::prob
