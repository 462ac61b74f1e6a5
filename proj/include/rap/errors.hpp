#pragma once

#include <stdexcept>
#include <string>

namespace rap {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RAP_DEFINE_ERROR(Name)              \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  };

// arrayio
RAP_DEFINE_ERROR(FormatError)
RAP_DEFINE_ERROR(TruncatedError)
RAP_DEFINE_ERROR(DataError)
RAP_DEFINE_ERROR(IoError)
RAP_DEFINE_ERROR(UnsupportedError)

// shared shape / argument errors
RAP_DEFINE_ERROR(DimError)
RAP_DEFINE_ERROR(EmptyMaskError)

// retrieval
RAP_DEFINE_ERROR(RankError)

// gating
RAP_DEFINE_ERROR(ZeroPrototypeError)

// edge / chamfer
RAP_DEFINE_ERROR(EmptyEdgesError)
RAP_DEFINE_ERROR(EmptyGateError)
RAP_DEFINE_ERROR(EmptyPremaskError)

// prompt / segmenter
RAP_DEFINE_ERROR(SeedError)
RAP_DEFINE_ERROR(NoPromptError)
RAP_DEFINE_ERROR(AdapterError)

// pipeline
RAP_DEFINE_ERROR(ManifestError)
RAP_DEFINE_ERROR(ConfigError)

#undef RAP_DEFINE_ERROR

/// Wraps an error raised inside a pipeline stage with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace rap
