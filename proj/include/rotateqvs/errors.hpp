#pragma once

#include <stdexcept>
#include <string>

namespace rqvs {

/// Raised when an operation needs a nonzero quaternion (inverse, normalize,
/// any per-coordinate rotation fed a degenerate time embedding).
struct ZeroNormError : std::domain_error {
    explicit ZeroNormError(const std::string& what) : std::domain_error(what) {}
};

/// Rotation axis deviates from unit length beyond tolerance.
struct BadAxisError : std::invalid_argument {
    explicit BadAxisError(const std::string& what) : std::invalid_argument(what) {}
};

/// A quadruple file line with the wrong column count or an unparsable time field.
struct MalformedLineError : std::runtime_error {
    MalformedLineError(const std::string& file, long line_no, const std::string& why)
        : std::runtime_error(file + ":" + std::to_string(line_no) + ": " + why),
          line(line_no) {}
    long line;
};

struct UnknownDatasetError : std::invalid_argument {
    explicit UnknownDatasetError(const std::string& name)
        : std::invalid_argument("unknown dataset: " + name) {}
};

struct EmptyRanksError : std::invalid_argument {
    EmptyRanksError() : std::invalid_argument("metrics over an empty rank list") {}
};

struct InfeasibleSpecError : std::invalid_argument {
    explicit InfeasibleSpecError(const std::string& why) : std::invalid_argument(why) {}
};

/// Checkpoint dimensions disagree with the dataset vocabulary.
struct ShapeMismatchError : std::runtime_error {
    explicit ShapeMismatchError(const std::string& why) : std::runtime_error(why) {}
};

/// Entity/relation/time label that the vocabulary cannot resolve.
struct UnknownLabelError : std::runtime_error {
    explicit UnknownLabelError(const std::string& label)
        : std::runtime_error("unknown label: " + label) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& why) : std::runtime_error(why) {}
};

} // namespace rqvs
