#pragma once

#include <stdexcept>
#include <string>

namespace sce {

enum class Errc {
    cyclic_graph,
    unknown_node,
    unknown_state,
    unknown_edge,
    unknown_link,
    overlapping_sets,
    too_many_covariates,
    support_mismatch,
    zero_probability_conditioning,
    state_space_too_large,
    role_mismatch,
    undefined_conditional,
    not_identifiable,
    all_replicates_failed,
    series_too_short,
    parse_error,
    validation_error,
    internal,
};

const char* errc_name(Errc code);

// Statistical errors arise from the data (empty cells, failed gates); everything
// else is a usage or input problem. The CLI maps the two classes to exit codes.
bool errc_is_statistical(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace sce
