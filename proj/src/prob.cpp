#include "sce/prob.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sce::prob {

namespace {

constexpr double kNormTolerance = 1e-9;

double entropy_of_probs(const std::vector<double>& probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

}  // namespace

Pmf::Pmf(std::vector<std::string> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.size() != probs_.size())
        fail(Errc::validation_error, "pmf support/probability length mismatch");
    if (support_.empty()) fail(Errc::validation_error, "empty pmf");
    std::set<std::string> labels(support_.begin(), support_.end());
    if (labels.size() != support_.size()) fail(Errc::validation_error, "duplicate pmf state labels");
    double total = 0.0;
    for (double p : probs_) {
        if (std::isnan(p) || p < 0.0) fail(Errc::validation_error, "negative or NaN probability");
        total += p;
    }
    if (std::abs(total - 1.0) > kNormTolerance)
        fail(Errc::validation_error, "pmf sums to " + std::to_string(total));
}

Pmf Pmf::bernoulli(double alpha) { return Pmf({"0", "1"}, {1.0 - alpha, alpha}); }

JointTable::JointTable(std::vector<JointVar> variables, std::vector<double> probs)
    : vars_(std::move(variables)), probs_(std::move(probs)) {
    std::size_t cells = 1;
    strides_.resize(vars_.size());
    for (std::size_t i = vars_.size(); i-- > 0;) {
        if (vars_[i].states.empty()) fail(Errc::validation_error, "joint variable with no states");
        strides_[i] = cells;
        cells *= vars_[i].states.size();
    }
    if (probs_.size() != cells) fail(Errc::validation_error, "joint table cell count mismatch");
    double total = 0.0;
    for (double p : probs_) {
        if (std::isnan(p) || p < 0.0) fail(Errc::validation_error, "negative or NaN joint probability");
        total += p;
    }
    if (std::abs(total - 1.0) > kNormTolerance)
        fail(Errc::validation_error, "joint table sums to " + std::to_string(total));
}

int JointTable::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) return static_cast<int>(i);
    fail(Errc::unknown_node, "'" + name + "' not in joint table");
}

std::size_t JointTable::index_of(const std::vector<int>& states) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        idx += static_cast<std::size_t>(states[i]) * strides_[i];
    return idx;
}

void JointTable::decode(std::size_t index, std::vector<int>& states) const {
    states.resize(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        states[i] = static_cast<int>(index / strides_[i]);
        index %= strides_[i];
    }
}

JointTable JointTable::marginal(const std::vector<std::string>& keep) const {
    std::vector<int> kept;
    std::vector<char> wanted(vars_.size(), 0);
    for (const auto& name : keep) wanted[static_cast<std::size_t>(var_index(name))] = 1;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (wanted[i]) kept.push_back(static_cast<int>(i));

    std::vector<JointVar> mvars;
    std::size_t mcells = 1;
    for (int i : kept) {
        mvars.push_back(vars_[static_cast<std::size_t>(i)]);
        mcells *= vars_[static_cast<std::size_t>(i)].states.size();
    }
    std::vector<std::size_t> mstrides(kept.size());
    std::size_t acc = 1;
    for (std::size_t i = kept.size(); i-- > 0;) {
        mstrides[i] = acc;
        acc *= vars_[static_cast<std::size_t>(kept[i])].states.size();
    }

    std::vector<double> mprobs(mcells, 0.0);
    std::vector<int> states;
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
        if (probs_[cell] == 0.0) continue;
        decode(cell, states);
        std::size_t mi = 0;
        for (std::size_t k = 0; k < kept.size(); ++k)
            mi += static_cast<std::size_t>(states[static_cast<std::size_t>(kept[k])]) * mstrides[k];
        mprobs[mi] += probs_[cell];
    }
    return JointTable(std::move(mvars), std::move(mprobs));
}

double JointTable::event_probability(
    const std::vector<std::pair<std::string, std::string>>& assignments) const {
    std::vector<int> want(vars_.size(), -1);
    for (const auto& [name, label] : assignments) {
        const int vi = var_index(name);
        const auto& states = vars_[static_cast<std::size_t>(vi)].states;
        auto it = std::find(states.begin(), states.end(), label);
        if (it == states.end())
            fail(Errc::unknown_state, "'" + label + "' is not a state of '" + name + "'");
        want[static_cast<std::size_t>(vi)] = static_cast<int>(it - states.begin());
    }
    double total = 0.0;
    std::vector<int> states;
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
        if (probs_[cell] == 0.0) continue;
        decode(cell, states);
        bool match = true;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (want[i] >= 0 && states[i] != want[i]) {
                match = false;
                break;
            }
        if (match) total += probs_[cell];
    }
    return total;
}

JointTable JointTable::condition(
    const std::vector<std::pair<std::string, std::string>>& assignments) const {
    std::vector<int> want(vars_.size(), -1);
    for (const auto& [name, label] : assignments) {
        const int vi = var_index(name);
        const auto& states = vars_[static_cast<std::size_t>(vi)].states;
        auto it = std::find(states.begin(), states.end(), label);
        if (it == states.end())
            fail(Errc::unknown_state, "'" + label + "' is not a state of '" + name + "'");
        want[static_cast<std::size_t>(vi)] = static_cast<int>(it - states.begin());
    }

    std::vector<JointVar> rvars;
    std::vector<int> kept;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (want[i] < 0) {
            rvars.push_back(vars_[i]);
            kept.push_back(static_cast<int>(i));
        }
    std::vector<std::size_t> rstrides(kept.size());
    std::size_t acc = 1;
    for (std::size_t i = kept.size(); i-- > 0;) {
        rstrides[i] = acc;
        acc *= vars_[static_cast<std::size_t>(kept[i])].states.size();
    }

    std::vector<double> rprobs(acc, 0.0);
    double mass = 0.0;
    std::vector<int> states;
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
        if (probs_[cell] == 0.0) continue;
        decode(cell, states);
        bool match = true;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (want[i] >= 0 && states[i] != want[i]) {
                match = false;
                break;
            }
        if (!match) continue;
        mass += probs_[cell];
        std::size_t ri = 0;
        for (std::size_t k = 0; k < kept.size(); ++k)
            ri += static_cast<std::size_t>(states[static_cast<std::size_t>(kept[k])]) * rstrides[k];
        rprobs[ri] += probs_[cell];
    }
    if (mass <= 0.0)
        fail(Errc::zero_probability_conditioning, "conditioning event has zero probability");
    for (double& p : rprobs) p /= mass;
    return JointTable(std::move(rvars), std::move(rprobs));
}

Pmf JointTable::pmf() const {
    if (vars_.size() != 1) fail(Errc::internal, "pmf() on a multi-variable table");
    return Pmf(vars_[0].states, probs_);
}

Pmf JointTable::pmf_of(const std::string& name) const {
    return marginal({name}).pmf();
}

Bits JointTable::entropy() const { return Bits::from_value(entropy_of_probs(probs_)); }

Bits entropy(const Pmf& p) { return Bits::from_value(entropy_of_probs(p.probs())); }

Bits conditional_entropy(const JointTable& joint, const std::string& target,
                         const std::vector<std::string>& given) {
    for (const auto& g : given)
        if (g == target) fail(Errc::overlapping_sets, "target conditioned on itself");
    std::vector<std::string> both = given;
    both.push_back(target);
    // H(target|given) = H(target, given) - H(given)
    const double h_joint = joint.marginal(both).entropy().value();
    const double h_given =
        given.empty() ? 0.0 : joint.marginal(given).entropy().value();
    return Bits::from_value(h_joint - h_given);
}

Bits kl_divergence(const Pmf& p, const Pmf& q) {
    if (p.support() != q.support()) fail(Errc::support_mismatch, "KL requires identical supports");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return Bits::infinity();
        total += p[i] * std::log2(p[i] / q[i]);
    }
    return Bits::from_value(total);
}

Bits kl_divergence(const JointTable& p, const JointTable& q) {
    const auto& pv = p.variables();
    const auto& qv = q.variables();
    if (pv.size() != qv.size()) fail(Errc::support_mismatch, "joint KL variable mismatch");
    for (std::size_t i = 0; i < pv.size(); ++i)
        if (pv[i].name != qv[i].name || pv[i].states != qv[i].states)
            fail(Errc::support_mismatch, "joint KL variable mismatch at '" + pv[i].name + "'");
    double total = 0.0;
    for (std::size_t cell = 0; cell < p.probs().size(); ++cell) {
        const double a = p.probs()[cell];
        if (a == 0.0) continue;
        const double b = q.probs()[cell];
        if (b == 0.0) return Bits::infinity();
        total += a * std::log2(a / b);
    }
    return Bits::from_value(total);
}

Bits mutual_information(const JointTable& joint, const std::vector<std::string>& a,
                        const std::vector<std::string>& b,
                        const std::vector<std::string>& given) {
    std::set<std::string> seen;
    for (const auto* group : {&a, &b, &given})
        for (const auto& name : *group) {
            joint.var_index(name);
            if (!seen.insert(name).second)
                fail(Errc::overlapping_sets, "'" + name + "' appears in more than one set");
        }

    auto h = [&](std::vector<std::string> names) {
        if (names.empty()) return 0.0;
        return joint.marginal(names).entropy().value();
    };
    std::vector<std::string> ac = a, bc = b, abc = a;
    ac.insert(ac.end(), given.begin(), given.end());
    bc.insert(bc.end(), given.begin(), given.end());
    abc.insert(abc.end(), b.begin(), b.end());
    abc.insert(abc.end(), given.begin(), given.end());
    // I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)
    return Bits::from_value(h(ac) + h(bc) - h(abc) - h(given));
}

SpecificMi specific_mi(const JointTable& joint, const std::string& x_node,
                       const std::string& x_value, const std::string& target) {
    if (joint.event_probability({{x_node, x_value}}) <= 0.0)
        fail(Errc::zero_probability_conditioning,
             "p(" + x_node + "=" + x_value + ") = 0");
    const Pmf marginal = joint.pmf_of(target);
    const Pmf conditional = joint.condition({{x_node, x_value}}).pmf_of(target);
    SpecificMi out{kl_divergence(conditional, marginal),
                   entropy(marginal).value() - entropy(conditional).value()};
    return out;
}

}  // namespace sce::prob
