#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sce/model.hpp"

namespace sce::measures {

enum class MeasureKind {
    ste,   // specific total effect
    scde,  // specific controlled direct effect (mediator held at a value)
    snde,  // specific natural direct effect
    snie,  // specific natural indirect effect
    information_flow,
    conditional_information_flow,  // flow imposing the mediator set
    causal_strength,
};

const char* measure_kind_name(MeasureKind kind);

struct MeasureSpec {
    MeasureKind kind = MeasureKind::ste;
    graph::NodeRoleSpec roles;
    std::string cause_value;                     // required for the specific kinds
    std::optional<std::string> mediator_value;   // scde only
    std::vector<std::pair<std::string, std::string>> conditioning;  // observed covariate -> state
    bool normalized = false;
    // Weight baseline alternatives p(x'|u) (true, the default) or plain p(x')
    // (false), which keeps the measure local to the cause's own mechanism.
    bool local_baseline = true;
};

struct MeasureValue {
    Bits bits;
    std::optional<double> normalized;
    // intermediate distributions kept for audit: the intervened effect
    // distribution and the course-of-nature mixture it is compared against
    std::vector<std::pair<std::string, prob::Pmf>> components;
};

// raw / (raw + residual); 0 when raw is zero, 1 when raw is positive with no
// residual uncertainty left, and 1 at raw = +inf.
double normalize_measure(Bits raw, Bits residual_entropy);

// D( p(Y|x-hat,u) || sum_x' w(x') p(Y|x'-hat,u) )
MeasureValue ste(const model::CausalModel& m, const MeasureSpec& spec);

// As ste with the mediator additionally forced to spec.mediator_value on both
// sides. Requires exactly one mediator.
MeasureValue scde(const model::CausalModel& m, const MeasureSpec& spec);

// D( p(Y|x-hat,u) || sum_{x',z'} w(x') p(z'|x-hat,u) p(Y|x'-hat,z',u) )
MeasureValue snde(const model::CausalModel& m, const MeasureSpec& spec);

// D( p(Y|x-hat,u) || sum_{x',z'} w(x') p(z'|x'-hat,u) p(Y|x-hat,z',u) )
MeasureValue snie(const model::CausalModel& m, const MeasureSpec& spec);

// Information flow from x to y; with an imposed set the flow is evaluated
// under interventions on every imposed configuration, weighted by its
// observational probability.
MeasureValue information_flow(const model::CausalModel& m, const std::string& x,
                              const std::string& y,
                              const std::vector<std::string>& imposed = {});

// KL between the joint and the post-cutting distribution of the cut set.
MeasureValue causal_strength(const model::CausalModel& m,
                             const std::vector<std::pair<std::string, std::string>>& cut);

// Dispatch on spec.kind; information-flow kinds take the mediator set as the
// imposed set, causal strength cuts the cause->effect edge.
MeasureValue evaluate(const model::CausalModel& m, const MeasureSpec& spec);

}  // namespace sce::measures
