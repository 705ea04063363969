#pragma once

#include <stdexcept>
#include <string>

namespace phtwin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a model (e.g. impedance at DC).
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Physical quantity outside the supported operating range.
class RangeError : public Error
{
public:
    using Error::Error;
};

/// Electrode has not been hydrated (soaked) and cannot be read.
class NotReadyError : public Error
{
public:
    using Error::Error;
};

/// Malformed value crossing a firmware or wire boundary.
class ProtocolError : public Error
{
public:
    using Error::Error;
};

/// Command exhausted its retries without an acknowledgement.
class LinkFailure : public Error
{
public:
    using Error::Error;
};

/// Device already has a recording session.
class BusyError : public Error
{
public:
    using Error::Error;
};

/// Rejected user input (annotations, configuration, file contents).
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// Operation not allowed in the current session state.
class StateError : public Error
{
public:
    using Error::Error;
};

/// Lookup of an unknown session or resource.
class NotFoundError : public Error
{
public:
    using Error::Error;
};

/// Post-processing failure (empty window, degenerate fit, no settling).
class AnalysisError : public Error
{
public:
    using Error::Error;
};

class EmptyWindowError : public AnalysisError
{
public:
    using AnalysisError::AnalysisError;
};

class RankError : public AnalysisError
{
public:
    using AnalysisError::AnalysisError;
};

class NoSettleError : public AnalysisError
{
public:
    using AnalysisError::AnalysisError;
};

} // namespace phtwin
