#pragma once

#include <stdexcept>
#include <string>

namespace edlab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by its arguments.
class ContractError : public Error {
public:
    using Error::Error;
};

/// The numerics produced a non-finite value or left their accuracy envelope.
class NumericAbort : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration. The message starts with the key path.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace edlab
