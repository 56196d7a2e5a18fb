#pragma once

// Error taxonomy. Two layers below the base:
//   validation_error  - the input itself is malformed (bad moment sequence,
//                       weights that don't sum to one, unparseable text).
//   domain_error      - the input is fine but can't support the requested
//                       operation (depth exhausted, conditioning on an
//                       impossible event, exact-only query on a sampled cdf).
// The CLI maps validation -> exit 2, domain -> exit 3. kind() is the stable
// machine-readable tag that ends up in error JSON.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace phenom {

class error : public std::runtime_error {
  public:
    error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

  private:
    std::string kind_;
};

class validation_error : public error {
  public:
    using error::error;
};

class domain_error : public error {
  public:
    using error::error;
};

struct parse_error : validation_error {
    explicit parse_error(const std::string& what) : validation_error("ParseError", what) {}
};

struct not_a_probability : validation_error {
    explicit not_a_probability(const std::string& what)
        : validation_error("NotAProbability", what) {}
};

struct not_unit_at_zero : validation_error {
    explicit not_unit_at_zero(const std::string& what)
        : validation_error("NotUnitAtZero", what) {}
};

// Carries the witness: the (index, order) pair whose finite difference went
// negative, so callers can report exactly which inequality failed.
struct not_completely_monotone : validation_error {
    not_completely_monotone(std::size_t index, std::size_t order, const std::string& what)
        : validation_error("NotCompletelyMonotone", what), index(index), order(order) {}
    std::size_t index;
    std::size_t order;
};

struct weights_not_normalized : validation_error {
    explicit weights_not_normalized(const std::string& what)
        : validation_error("WeightsNotNormalized", what) {}
};

struct atom_out_of_range : validation_error {
    explicit atom_out_of_range(const std::string& what)
        : validation_error("AtomOutOfRange", what) {}
};

struct invalid_urn_geometry : validation_error {
    explicit invalid_urn_geometry(const std::string& what)
        : validation_error("InvalidUrnGeometry", what) {}
};

struct mixed_backend : validation_error {
    explicit mixed_backend(const std::string& what) : validation_error("MixedBackend", what) {}
};

struct depth_exceeded : domain_error {
    explicit depth_exceeded(const std::string& what) : domain_error("DepthExceeded", what) {}
};

struct index_out_of_range : domain_error {
    explicit index_out_of_range(const std::string& what)
        : domain_error("IndexOutOfRange", what) {}
};

struct impossible_evidence : domain_error {
    explicit impossible_evidence(const std::string& what)
        : domain_error("ImpossibleEvidence", what) {}
};

struct not_atomic : domain_error {
    explicit not_atomic(const std::string& what) : domain_error("NotAtomic", what) {}
};

}  // namespace phenom
