#pragma once

#include <stdexcept>
#include <string>

namespace ptcam
{
// Base of every error raised by the library. Callers that only care about
// "something numeric went wrong" can catch this one.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A precondition on user-supplied parameters failed.
class InvalidParameter : public Error
{
public:
    using Error::Error;
};

// Integration step exceeds the resolvable bound.
class StepSizeError : public InvalidParameter
{
public:
    using InvalidParameter::InvalidParameter;
};

// A supermode amplifies, so the linear model has no steady state.
class InstabilityError : public Error
{
public:
    using Error::Error;
};

// Evaluated exactly at the coalescence point, where g_eff diverges.
class TransitionSingularity : public Error
{
public:
    using Error::Error;
};

// Gain equals loss; the PT/EP amplification ratio is infinite.
class BalancedGainError : public Error
{
public:
    using Error::Error;
};

class DivergenceError : public Error
{
public:
    using Error::Error;
};

// Reference quantity too small to divide by.
class DegenerateError : public Error
{
public:
    using Error::Error;
};

// Peak narrower than the grid can resolve.
class ResolutionError : public Error
{
public:
    using Error::Error;
};

class PoorFitError : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

namespace detail
{
inline void require(bool ok, const std::string& what)
{
    if (!ok) throw InvalidParameter(what);
}
} // namespace detail
} // namespace ptcam
