#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <variant>

namespace scmech {

enum class Errc {
    unbounded_label,
    not_diagonal,
    out_of_range,
    family_mismatch,
    invalid_family,
    out_of_support,
    reversed_interval,
    divide_at_top,
    zero_density,
    threshold_not_indifferent,
    thresholds_decreasing,
    support_mismatch,
    chain_unsolvable,
    grid_too_large,
    family_unsupported,
    degenerate_cell,
    nonmonotone_hazard,
    solver_stalled,
    config_invalid,
    unknown_example,
    io_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::unbounded_label: return "UNBOUNDED_LABEL";
        case Errc::not_diagonal: return "NOT_DIAGONAL";
        case Errc::out_of_range: return "OUT_OF_RANGE";
        case Errc::family_mismatch: return "FAMILY_MISMATCH";
        case Errc::invalid_family: return "INVALID_FAMILY";
        case Errc::out_of_support: return "OUT_OF_SUPPORT";
        case Errc::reversed_interval: return "REVERSED_INTERVAL";
        case Errc::divide_at_top: return "DIVIDE_AT_TOP";
        case Errc::zero_density: return "ZERO_DENSITY";
        case Errc::threshold_not_indifferent: return "THRESHOLD_NOT_INDIFFERENT";
        case Errc::thresholds_decreasing: return "THRESHOLDS_DECREASING";
        case Errc::support_mismatch: return "SUPPORT_MISMATCH";
        case Errc::chain_unsolvable: return "CHAIN_UNSOLVABLE";
        case Errc::grid_too_large: return "GRID_TOO_LARGE";
        case Errc::family_unsupported: return "FAMILY_UNSUPPORTED";
        case Errc::degenerate_cell: return "DEGENERATE_CELL";
        case Errc::nonmonotone_hazard: return "NONMONOTONE_HAZARD";
        case Errc::solver_stalled: return "SOLVER_STALLED";
        case Errc::config_invalid: return "CONFIG_INVALID";
        case Errc::unknown_example: return "UNKNOWN_EXAMPLE";
        case Errc::io_error: return "IO_ERROR";
    }
    return "UNKNOWN";
}

struct Error {
    Errc code;
    std::string message;

    std::string to_string() const {
        return std::string(errc_name(code)) + ": " + message;
    }
};

/// Minimal expected-style carrier: either a value or an Error.
template <typename T>
class Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(Error err) : v_(std::move(err)) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& {
        assert(ok());
        return std::get<T>(v_);
    }
    T& value() & {
        assert(ok());
        return std::get<T>(v_);
    }
    T&& value() && {
        assert(ok());
        return std::move(std::get<T>(v_));
    }
    const T& operator*() const& { return value(); }
    const T* operator->() const { return &value(); }

    const Error& error() const {
        assert(!ok());
        return std::get<Error>(v_);
    }

    /// Value if present, otherwise `fallback`.
    T value_or(T fallback) const {
        return ok() ? std::get<T>(v_) : std::move(fallback);
    }

private:
    std::variant<T, Error> v_;
};

template <typename T>
Result<T> fail(Errc code, std::string message) {
    return Result<T>(Error{code, std::move(message)});
}

}  // namespace scmech
