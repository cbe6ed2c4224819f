// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ldm3d {

// Errors carry a category so the command-line front end can map them to
// process exit codes (config 2, data 3, numeric 4).
enum class ErrorKind { Contract, Config, Data, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Shape/channel/argument violations by the caller.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(ErrorKind::Contract, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

#define LDM3D_REQUIRE(cond, msg)                                \
    do {                                                        \
        if (!(cond)) throw ::ldm3d::ContractError(msg);         \
    } while (0)

}  // namespace ldm3d
