// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace idstyle {

enum class ErrorKind {
    Parameter,
    Shape,
    Index,
    Io,
    Format,
    Numerical,
    Detector,
    DegenerateInput,
    Config,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parameter: return "parameter error";
        case ErrorKind::Shape: return "shape error";
        case ErrorKind::Index: return "index error";
        case ErrorKind::Io: return "I/O error";
        case ErrorKind::Format: return "format error";
        case ErrorKind::Numerical: return "numerical divergence";
        case ErrorKind::Detector: return "detector error";
        case ErrorKind::DegenerateInput: return "degenerate input";
        case ErrorKind::Config: return "config error";
    }
    return "error";
}

/// Every failure raised by the library. `module()` names the component
/// that raised it so the CLI can print module-qualified messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& what)
        : std::runtime_error(module + ": " + to_string(kind) + ": " + what),
          kind_(kind),
          module_(std::move(module)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

/// Process exit code for an error kind: 1 usage, 2 I/O, 3 numerical.
inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io:
        case ErrorKind::Format:
            return 2;
        case ErrorKind::Numerical:
        case ErrorKind::DegenerateInput:
            return 3;
        default:
            return 1;
    }
}

}  // namespace idstyle
