#pragma once

#include <stdexcept>
#include <string>

namespace passdrop {

// Root of every error the library throws. `is_io()` separates I/O failures
// (CLI exit 1) from validation failures (CLI exit 2).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual bool is_io() const noexcept { return false; }
};

#define PASSDROP_DEFINE_ERROR(Name)              \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

PASSDROP_DEFINE_ERROR(LexiconError);
PASSDROP_DEFINE_ERROR(StimulusError);
PASSDROP_DEFINE_ERROR(ListBuildError);
PASSDROP_DEFINE_ERROR(ScoreError);
PASSDROP_DEFINE_ERROR(PairError);
PASSDROP_DEFINE_ERROR(ValidationError);
PASSDROP_DEFINE_ERROR(StatsError);
PASSDROP_DEFINE_ERROR(ReportError);
PASSDROP_DEFINE_ERROR(ProtocolError);
PASSDROP_DEFINE_ERROR(FormatError);

#undef PASSDROP_DEFINE_ERROR

class IoError : public Error {
public:
    using Error::Error;
    bool is_io() const noexcept override { return true; }
};

} // namespace passdrop
