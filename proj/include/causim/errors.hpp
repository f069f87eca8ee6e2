#pragma once

#include <stdexcept>
#include <string>

namespace causim {

// Invalid configuration (bad field values, violated invariants). Messages
// name the offending field path, e.g. "noise.beta: precision must be > 0".
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed data file (grid CSV, trajectory CSV) or records missing
// required fields.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ground-truth access requested through a disabled oracle handle, or
// before any interaction produced a record.
class OracleAccessError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Signals that the episode horizon has been reached.
class EpisodeComplete : public std::runtime_error {
public:
    EpisodeComplete()
        : std::runtime_error("episode complete: horizon reached") { }
    explicit EpisodeComplete(const std::string& what)
        : std::runtime_error(what) { }
};

} // namespace causim
