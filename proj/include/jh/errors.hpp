#pragma once

#include <stdexcept>
#include <string>

namespace jh {

/// Root of every error raised by the harness.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments, detected before any model call.
class ConfigError : public Error {
public:
    using Error::Error;
};

// llm_gateway
class GatewayError : public Error {
public:
    using Error::Error;
};
class AuthError : public GatewayError {
public:
    using GatewayError::GatewayError;
};
class ReplayMissError : public GatewayError {
public:
    using GatewayError::GatewayError;
};
class ExhaustedRetries : public GatewayError {
public:
    using GatewayError::GatewayError;
};
class MalformedResponse : public GatewayError {
public:
    using GatewayError::GatewayError;
};
/// Non-retryable HTTP status other than 401/403.
class HttpStatusError : public GatewayError {
public:
    HttpStatusError(int status, const std::string& what) : GatewayError(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};
class InvalidRequest : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// prompt_kit
class TemplateError : public Error {
public:
    using Error::Error;
};

// persona_engine
class PersonaParseError : public Error {
public:
    using Error::Error;
};
class UnknownDataset : public Error {
public:
    using Error::Error;
};

// solver
class FormatMismatch : public Error {
public:
    using Error::Error;
};
class SolverError : public Error {
public:
    using Error::Error;
};

// evaluator / baselines
class VerdictParseError : public Error {
public:
    using Error::Error;
};
class ScoreParseError : public Error {
public:
    using Error::Error;
};

// dataset_hub
class SchemaError : public Error {
public:
    SchemaError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
    /// 1-based line number, 0 when not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};
class CountMismatch : public Error {
public:
    using Error::Error;
};

// analytics
class EmptyRun : public Error {
public:
    using Error::Error;
};
class IdMismatch : public Error {
public:
    using Error::Error;
};
class TooFewRuns : public Error {
public:
    using Error::Error;
};
class MissingRecords : public Error {
public:
    using Error::Error;
};

}  // namespace jh
