#pragma once

#include <stdexcept>
#include <string>

namespace nsmax {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IngestError : public Error {
public:
    IngestError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

class ValidationError : public Error { using Error::Error; };
class ProjectionError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class DegenerateError : public Error { using Error::Error; };
class NumericalError : public Error { using Error::Error; };
class BoundsError : public Error { using Error::Error; };
class InitializationError : public Error { using Error::Error; };
class BootstrapError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class SimulationError : public Error { using Error::Error; };
class ResourceError : public Error { using Error::Error; };

class TICError : public Error {
public:
    TICError(const std::string& msg, double condition_number)
        : Error(msg + " (condition number " + std::to_string(condition_number) + ")"),
          cond_(condition_number) {}
    double condition_number() const noexcept { return cond_; }

private:
    double cond_;
};

class MarginFitError : public Error {
public:
    MarginFitError(const std::string& msg, std::string site_id)
        : Error(site_id.empty() ? msg : msg + " (site " + site_id + ")"), site_(std::move(site_id)) {}
    const std::string& site_id() const noexcept { return site_; }

private:
    std::string site_;
};

// Raised when an internal invariant (stage monotonicity, nesting dominance) breaks.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

void log_warning(const std::string& msg);
void log_note(const std::string& msg);

}  // namespace nsmax
