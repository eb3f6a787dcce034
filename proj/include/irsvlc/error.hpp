#pragma once

#include <stdexcept>
#include <string>

namespace irsvlc {

/// A scenario or input that violates a documented constraint. `field` is the
/// dotted path of the offending value (e.g. "aps[2].position").
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& constraint)
        : std::invalid_argument(field.empty() ? constraint : field + ": " + constraint),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// An exhaustive search whose candidate count exceeds the configured guard.
class SearchSpaceError : public std::length_error {
public:
    using std::length_error::length_error;
};

}  // namespace irsvlc
