#include "sce/measures.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sce::measures {

namespace {

using model::CausalModel;
using model::Intervention;
using prob::JointTable;
using prob::Pmf;

using Assignments = std::vector<std::pair<std::string, std::string>>;

bool is_specific(MeasureKind k) {
    return k == MeasureKind::ste || k == MeasureKind::scde || k == MeasureKind::snde ||
           k == MeasureKind::snie;
}

void validate_spec(const CausalModel& m, const MeasureSpec& spec) {
    const auto& dag = m.dag();
    spec.roles.validate(dag);
    std::set<std::string> observed(spec.roles.observed_covariates.begin(),
                                   spec.roles.observed_covariates.end());
    std::set<std::string> seen;
    for (const auto& [name, label] : spec.conditioning) {
        if (!observed.count(name))
            fail(Errc::role_mismatch, "conditioning on '" + name + "' which is not an observed covariate");
        if (!seen.insert(name).second)
            fail(Errc::role_mismatch, "covariate '" + name + "' conditioned twice");
        dag.state_index(dag.index_of(name), label);
    }
    if (is_specific(spec.kind)) {
        const int x = dag.index_of(spec.roles.cause);
        dag.state_index(x, spec.cause_value);
    }
    if (spec.kind == MeasureKind::scde) {
        if (spec.roles.mediators.size() != 1 || !spec.mediator_value)
            fail(Errc::role_mismatch, "scde needs exactly one mediator and a mediator value");
        dag.state_index(dag.index_of(spec.roles.mediators[0]), *spec.mediator_value);
    }
    if (spec.normalized && !is_specific(spec.kind))
        fail(Errc::role_mismatch,
             std::string("normalization is defined for the specific measures, not ") +
                 measure_kind_name(spec.kind));
}

// p(cause | conditioning) or the plain marginal when the local baseline is
// switched off; also enforces that the requested cause value has mass.
Pmf cause_weights(const CausalModel& m, const MeasureSpec& spec) {
    const Assignments& cond = spec.conditioning;
    const Pmf conditional = model::query(m, {spec.roles.cause}, {}, cond).pmf();
    std::size_t want = 0;
    for (std::size_t i = 0; i < conditional.support().size(); ++i)
        if (conditional.support()[i] == spec.cause_value) want = i;
    if (conditional[want] <= 0.0)
        fail(Errc::zero_probability_conditioning,
             "p(" + spec.roles.cause + "=" + spec.cause_value + " | conditioning) = 0");
    if (spec.local_baseline) return conditional;
    return model::query(m, {spec.roles.cause}, {}, {}).pmf();
}

Pmf effect_under(const CausalModel& m, const MeasureSpec& spec, const Assignments& dos,
                 const Assignments& extra_obs = {}) {
    Intervention iv;
    iv.assignments = dos;
    Assignments obs = spec.conditioning;
    obs.insert(obs.end(), extra_obs.begin(), extra_obs.end());
    return model::query(m, {spec.roles.effect}, iv, obs).pmf();
}

MeasureValue finish(const MeasureSpec& spec, const Pmf& intervened, const Pmf& baseline) {
    MeasureValue out;
    out.bits = prob::kl_divergence(intervened, baseline);
    if (spec.normalized) out.normalized = normalize_measure(out.bits, prob::entropy(intervened));
    out.components.push_back({"intervened", intervened});
    out.components.push_back({"baseline", baseline});
    return out;
}

Pmf mix_accumulate(const std::vector<std::string>& support,
                   const std::vector<std::pair<double, Pmf>>& weighted) {
    std::vector<double> acc(support.size(), 0.0);
    for (const auto& [w, pmf] : weighted)
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * pmf[i];
    return Pmf(support, acc);
}

// Joint distribution of the mediator set under do(cause=value), given the
// conditioning assignment. Empty mediator set yields the one-cell table.
JointTable mediator_dist(const CausalModel& m, const MeasureSpec& spec,
                         const std::string& cause_value) {
    Intervention iv;
    iv.assignments = {{spec.roles.cause, cause_value}};
    return model::query(m, spec.roles.mediators, iv, spec.conditioning);
}

Assignments mediator_assignment(const JointTable& zdist, std::size_t cell) {
    Assignments out;
    std::vector<int> states;
    zdist.decode(cell, states);
    for (std::size_t i = 0; i < zdist.variables().size(); ++i)
        out.push_back({zdist.variables()[i].name,
                       zdist.variables()[i].states[static_cast<std::size_t>(states[i])]});
    return out;
}

}  // namespace

const char* measure_kind_name(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::ste: return "ste";
        case MeasureKind::scde: return "scde";
        case MeasureKind::snde: return "snde";
        case MeasureKind::snie: return "snie";
        case MeasureKind::information_flow: return "if";
        case MeasureKind::conditional_information_flow: return "cond_if";
        case MeasureKind::causal_strength: return "cs";
    }
    return "?";
}

double normalize_measure(Bits raw, Bits residual_entropy) {
    if (raw.value() == 0.0) return 0.0;
    if (raw.infinite()) return 1.0;
    if (residual_entropy.value() == 0.0) return 1.0;
    return raw.value() / (raw.value() + residual_entropy.value());
}

MeasureValue ste(const CausalModel& m, const MeasureSpec& spec) {
    validate_spec(m, spec);
    const Pmf weights = cause_weights(m, spec);
    const Pmf intervened = effect_under(m, spec, {{spec.roles.cause, spec.cause_value}});

    std::vector<std::pair<double, Pmf>> mix;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        mix.push_back({weights[i],
                       effect_under(m, spec, {{spec.roles.cause, weights.support()[i]}})});
    }
    return finish(spec, intervened, mix_accumulate(intervened.support(), mix));
}

MeasureValue scde(const CausalModel& m, const MeasureSpec& spec) {
    validate_spec(m, spec);
    const Pmf weights = cause_weights(m, spec);
    const std::pair<std::string, std::string> med{spec.roles.mediators[0], *spec.mediator_value};
    const Pmf intervened = effect_under(m, spec, {{spec.roles.cause, spec.cause_value}, med});

    std::vector<std::pair<double, Pmf>> mix;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        mix.push_back({weights[i],
                       effect_under(m, spec, {{spec.roles.cause, weights.support()[i]}, med})});
    }
    return finish(spec, intervened, mix_accumulate(intervened.support(), mix));
}

MeasureValue snde(const CausalModel& m, const MeasureSpec& spec) {
    validate_spec(m, spec);
    const Pmf weights = cause_weights(m, spec);
    const Pmf intervened = effect_under(m, spec, {{spec.roles.cause, spec.cause_value}});
    const JointTable zdist = mediator_dist(m, spec, spec.cause_value);

    std::vector<std::pair<double, Pmf>> mix;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        for (std::size_t cell = 0; cell < zdist.cell_count(); ++cell) {
            const double w = weights[i] * zdist.probs()[cell];
            if (w == 0.0) continue;
            mix.push_back({w, effect_under(m, spec, {{spec.roles.cause, weights.support()[i]}},
                                           mediator_assignment(zdist, cell))});
        }
    }
    return finish(spec, intervened, mix_accumulate(intervened.support(), mix));
}

MeasureValue snie(const CausalModel& m, const MeasureSpec& spec) {
    validate_spec(m, spec);
    const Pmf weights = cause_weights(m, spec);
    const Pmf intervened = effect_under(m, spec, {{spec.roles.cause, spec.cause_value}});

    std::vector<std::pair<double, Pmf>> mix;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const JointTable zdist = mediator_dist(m, spec, weights.support()[i]);
        for (std::size_t cell = 0; cell < zdist.cell_count(); ++cell) {
            const double w = weights[i] * zdist.probs()[cell];
            if (w == 0.0) continue;
            mix.push_back({w, effect_under(m, spec, {{spec.roles.cause, spec.cause_value}},
                                           mediator_assignment(zdist, cell))});
        }
    }
    return finish(spec, intervened, mix_accumulate(intervened.support(), mix));
}

MeasureValue information_flow(const CausalModel& m, const std::string& x, const std::string& y,
                              const std::vector<std::string>& imposed) {
    const auto& dag = m.dag();
    dag.index_of(x);
    dag.index_of(y);
    for (const auto& v : imposed)
        if (v == x || v == y) fail(Errc::overlapping_sets, "imposed set overlaps cause/effect");

    const JointTable vdist = imposed.empty()
                                 ? JointTable({}, {1.0})
                                 : model::query(m, imposed, {}, {});

    double total = 0.0;
    for (std::size_t vcell = 0; vcell < vdist.cell_count(); ++vcell) {
        const double pv = vdist.probs()[vcell];
        if (pv == 0.0) continue;
        Intervention v_iv;
        if (!imposed.empty()) {
            std::vector<int> states;
            vdist.decode(vcell, states);
            for (std::size_t i = 0; i < vdist.variables().size(); ++i)
                v_iv.assignments.push_back(
                    {vdist.variables()[i].name,
                     vdist.variables()[i].states[static_cast<std::size_t>(states[i])]});
        }

        const Pmf xdist = model::query(m, {x}, v_iv, {}).pmf();
        std::vector<Pmf> effect_rows;
        std::vector<std::pair<double, Pmf>> mix;
        for (std::size_t i = 0; i < xdist.size(); ++i) {
            Intervention iv = v_iv;
            iv.assignments.push_back({x, xdist.support()[i]});
            Pmf row = model::query(m, {y}, iv, {}).pmf();
            if (xdist[i] > 0.0) mix.push_back({xdist[i], row});
            effect_rows.push_back(std::move(row));
        }
        const Pmf baseline = mix_accumulate(effect_rows[0].support(), mix);
        for (std::size_t i = 0; i < xdist.size(); ++i) {
            if (xdist[i] == 0.0) continue;
            const Bits kl = prob::kl_divergence(effect_rows[i], baseline);
            if (kl.infinite()) return {Bits::infinity(), std::nullopt, {}};
            total += pv * xdist[i] * kl.value();
        }
    }
    return {Bits::from_value(total), std::nullopt, {}};
}

MeasureValue causal_strength(const CausalModel& m,
                             const std::vector<std::pair<std::string, std::string>>& cut) {
    const JointTable joint = model::joint_distribution(m);
    const JointTable severed = model::post_cutting(m, cut);
    return {prob::kl_divergence(joint, severed), std::nullopt, {}};
}

MeasureValue evaluate(const CausalModel& m, const MeasureSpec& spec) {
    switch (spec.kind) {
        case MeasureKind::ste: return ste(m, spec);
        case MeasureKind::scde: return scde(m, spec);
        case MeasureKind::snde: return snde(m, spec);
        case MeasureKind::snie: return snie(m, spec);
        case MeasureKind::information_flow:
            validate_spec(m, spec);
            return information_flow(m, spec.roles.cause, spec.roles.effect, {});
        case MeasureKind::conditional_information_flow:
            validate_spec(m, spec);
            return information_flow(m, spec.roles.cause, spec.roles.effect, spec.roles.mediators);
        case MeasureKind::causal_strength:
            validate_spec(m, spec);
            return causal_strength(m, {{spec.roles.cause, spec.roles.effect}});
    }
    fail(Errc::internal, "unhandled measure kind");
}

}  // namespace sce::measures
