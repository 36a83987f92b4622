#pragma once

#include <stdexcept>
#include <string>

namespace alina
{

enum class Errc
{
    invalid_argument,
    not_found,
    no_frames,
    dimension_mismatch,
    decode_failed,
    io_failed,
    out_of_bounds,
    invalid_roi,
    singular,
    point_at_infinity,
    precondition,
};

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error
{
public:
    Error(Errc code, const std::string &what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Raised by the pipeline to tag the stage a failure came from.
class StageError : public Error
{
public:
    StageError(std::string stage, const Error &cause)
        : Error(cause.code(), stage + ": " + cause.what()), stage_(std::move(stage))
    {
    }
    const std::string &stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace alina
