#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace amdim {

/// A parameter lies outside the open domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// One or more named preconditions failed; `failed()` lists them.
class PreconditionError : public std::runtime_error {
public:
    PreconditionError(std::string message, std::vector<std::string> failed)
        : std::runtime_error(std::move(message)), failed_(std::move(failed)) {}
    const std::vector<std::string>& failed() const noexcept { return failed_; }

private:
    std::vector<std::string> failed_;
};

/// A statistical estimate is too noisy to support the requested conclusion.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace amdim
