#pragma once

#include <stdexcept>

namespace fedlab {

// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Empty input or length mismatch between vectors that are combined.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A computation produced or would admit a non-finite value.
class NumericError : public Error {
public:
    using Error::Error;
};

// A metric has no defined value for the given input (e.g. zero vector).
class UndefinedMetric : public Error {
public:
    using Error::Error;
};

// An operation was invoked on an object missing required state.
class StateError : public Error {
public:
    using Error::Error;
};

// Fitness values sum to zero, so fitness-proportional weights are undefined.
class DegenerateFitness : public Error {
public:
    using Error::Error;
};

// Client updates carry the wrong or mixed payload kinds for the strategy.
class PayloadError : public Error {
public:
    using Error::Error;
};

// Invalid configuration value detected before any compute.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem failure (missing file, unwritable path, refusing to overwrite).
class IoError : public Error {
public:
    using Error::Error;
};

// Checkpoint file failed integrity checks (checksum, truncation, bad header).
class CorruptCheckpoint : public Error {
public:
    using Error::Error;
};

// Checkpoint declares a format version this build does not understand.
class VersionError : public Error {
public:
    using Error::Error;
};

// A population mixes checkpoints with different element counts.
class ArchitectureMismatch : public Error {
public:
    using Error::Error;
};

// A directory holds no ingestible checkpoints.
class EmptyPopulation : public Error {
public:
    using Error::Error;
};

}  // namespace fedlab
