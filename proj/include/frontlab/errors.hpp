#pragma once

#include <stdexcept>
#include <string>

namespace frontlab {

// Stable error codes. Each maps 1:1 to a process exit code and to the
// "code" field of the machine-readable error JSON emitted by the CLI.
enum class errc {
    generic = 1,
    config = 2,
    no_critical_length = 3,
    no_critical_mu = 4,
    light_tail_required = 5,
    no_semi_wave = 6,
    ordering_violated = 7,
    inconclusive = 8,
    invariant_breach = 9,
    numerical = 10,
    contract = 11,
    no_profile = 12,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::generic: return "Error";
        case errc::config: return "ConfigError";
        case errc::no_critical_length: return "NoCriticalLength";
        case errc::no_critical_mu: return "NoCriticalMu";
        case errc::light_tail_required: return "LightTailRequired";
        case errc::no_semi_wave: return "NoSemiWave";
        case errc::ordering_violated: return "OrderingViolated";
        case errc::inconclusive: return "Inconclusive";
        case errc::invariant_breach: return "InvariantBreach";
        case errc::numerical: return "NumericalError";
        case errc::contract: return "ContractViolation";
        case errc::no_profile: return "NoProfile";
    }
    return "Error";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

struct config_error : error {
    explicit config_error(const std::string& m) : error(errc::config, m) {}
};

struct contract_violation : error {
    explicit contract_violation(const std::string& m) : error(errc::contract, m) {}
};

struct invariant_breach : error {
    explicit invariant_breach(const std::string& m) : error(errc::invariant_breach, m) {}
};

struct numerical_error : error {
    explicit numerical_error(const std::string& m) : error(errc::numerical, m) {}
};

struct light_tail_required : error {
    explicit light_tail_required(const std::string& m) : error(errc::light_tail_required, m) {}
};

struct no_semi_wave : error {
    explicit no_semi_wave(const std::string& m) : error(errc::no_semi_wave, m) {}
};

struct no_profile : error {
    explicit no_profile(const std::string& m) : error(errc::no_profile, m) {}
};

struct no_critical_length : error {
    explicit no_critical_length(const std::string& m) : error(errc::no_critical_length, m) {}
};

struct no_critical_mu : error {
    explicit no_critical_mu(const std::string& m) : error(errc::no_critical_mu, m) {}
};

struct ordering_violated : error {
    explicit ordering_violated(const std::string& m) : error(errc::ordering_violated, m) {}
};

struct inconclusive : error {
    explicit inconclusive(const std::string& m) : error(errc::inconclusive, m) {}
};

}  // namespace frontlab
