#pragma once

#include <stdexcept>
#include <string>

namespace roomsg {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument or violated precondition.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Rotation log requested too close to the pi branch cut.
class BranchAmbiguityError : public Error {
 public:
  using Error::Error;
};

// Rank-deficient (collinear/coincident) correspondences in alignment.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Too few associated samples between two trajectories.
class InsufficientOverlapError : public Error {
 public:
  using Error::Error;
};

// Dangling reference or duplicate id in the scene graph.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Lookup of a missing node/frame id.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Malformed document; message names the offending path.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Out-of-order frame id in a stream.
class StreamOrderError : public Error {
 public:
  using Error::Error;
};

// Reconstruction provider could not produce a result.
class ReconstructionFailedError : public Error {
 public:
  using Error::Error;
};

// No transition pair yielded a usable relative pose.
class EdgeEstimationFailedError : public Error {
 public:
  using Error::Error;
};

// Pose graph has free variables no factor or anchor constrains.
class UnconstrainedError : public Error {
 public:
  using Error::Error;
};

// Bad configuration value or unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace roomsg
