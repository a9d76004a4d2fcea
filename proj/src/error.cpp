#include "sce/error.hpp"

namespace sce {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::cyclic_graph: return "CyclicGraph";
        case Errc::unknown_node: return "UnknownNode";
        case Errc::unknown_state: return "UnknownState";
        case Errc::unknown_edge: return "UnknownEdge";
        case Errc::unknown_link: return "UnknownLink";
        case Errc::overlapping_sets: return "OverlappingSets";
        case Errc::too_many_covariates: return "TooManyCovariates";
        case Errc::support_mismatch: return "SupportMismatch";
        case Errc::zero_probability_conditioning: return "ZeroProbabilityConditioning";
        case Errc::state_space_too_large: return "StateSpaceTooLarge";
        case Errc::role_mismatch: return "RoleMismatch";
        case Errc::undefined_conditional: return "UndefinedConditional";
        case Errc::not_identifiable: return "NotIdentifiable";
        case Errc::all_replicates_failed: return "AllReplicatesFailed";
        case Errc::series_too_short: return "SeriesTooShort";
        case Errc::parse_error: return "ParseError";
        case Errc::validation_error: return "ValidationError";
        case Errc::internal: return "InternalError";
    }
    return "Error";
}

bool errc_is_statistical(Errc code) {
    switch (code) {
        case Errc::zero_probability_conditioning:
        case Errc::undefined_conditional:
        case Errc::not_identifiable:
        case Errc::all_replicates_failed:
            return true;
        default:
            return false;
    }
}

}  // namespace sce
