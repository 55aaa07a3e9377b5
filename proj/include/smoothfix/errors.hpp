#ifndef SMOOTHFIX_ERRORS_HPP
#define SMOOTHFIX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smoothfix {

/// Domain failure codes. These signal "the math says no" outcomes as opposed
/// to configuration or I/O problems, which use ConfigError.
enum class Errc {
    degenerate_weights,
    subcritical_count,
    horizon_unbounded,
    divergent,
    condition_d_violated,
    no_root,
    evaluation_failed,
    grid_too_coarse,
    degenerate_at_zero,
    quadrature_failure,
    mean_mismatch,
    no_characteristic_function,
    empty_pool,
    mean_collapse,
    zero_mean,
    too_few_samples,
    hypotheses_violated,
    mass_deficit,
    divergent_inverse_moment,
    degenerate_pair,
    product_underflow,
    bad_input,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

/// Bad scenario files, malformed JSON, missing paths. Maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace smoothfix

#endif
