#pragma once

#include <stdexcept>
#include <string>

namespace polcorr
{
//! Argument outside the domain of a formula (angle out of range, mu >= 1, ...)
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

//! Invalid or inconsistent configuration. Maps to CLI exit status 2.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Least-squares fit could not be performed.
class FitError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! File could not be read, written or parsed.
class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace polcorr
