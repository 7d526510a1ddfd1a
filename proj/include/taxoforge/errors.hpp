#pragma once

#include <stdexcept>
#include <string>

namespace taxoforge {

// Error categories mirror the CLI exit classification.
enum class ErrorCategory { Config, Io, Gateway, Contract };

class TaxoError : public std::runtime_error {
public:
    TaxoError(ErrorCategory cat, std::string msg)
        : std::runtime_error(std::move(msg)), category_(cat) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

inline TaxoError config_error(const std::string& msg)   { return {ErrorCategory::Config, "config: " + msg}; }
inline TaxoError io_error(const std::string& msg)       { return {ErrorCategory::Io, "io: " + msg}; }
inline TaxoError parse_error(const std::string& msg)    { return {ErrorCategory::Io, "parse: " + msg}; }
inline TaxoError version_error(const std::string& msg)  { return {ErrorCategory::Io, "version: " + msg}; }
inline TaxoError gateway_error(const std::string& msg)  { return {ErrorCategory::Gateway, "gateway: " + msg}; }
inline TaxoError format_error(const std::string& msg)   { return {ErrorCategory::Gateway, "format: " + msg}; }
inline TaxoError contract_error(const std::string& msg) { return {ErrorCategory::Contract, "contract: " + msg}; }
inline TaxoError identity_error(const std::string& msg) { return {ErrorCategory::Contract, "identity: " + msg}; }
inline TaxoError capacity_error(const std::string& msg) { return {ErrorCategory::Contract, "capacity: " + msg}; }
inline TaxoError sizing_error(const std::string& msg)   { return {ErrorCategory::Contract, "sizing: " + msg}; }

inline const char* category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Config: return "config";
        case ErrorCategory::Io: return "I/O";
        case ErrorCategory::Gateway: return "gateway";
        case ErrorCategory::Contract: return "contract";
    }
    return "unknown";
}

} // namespace taxoforge
