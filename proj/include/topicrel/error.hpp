#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topicrel {

// Base for every error raised by the library. `kind()` is a stable
// machine-readable tag used in CLI summary lines and HTTP error bodies.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line_number, std::string reason)
        : Error("MalformedLine",
                "line " + std::to_string(line_number) + ": " + reason),
          line_number_(line_number), reason_(std::move(reason)) {}

    std::size_t line_number() const noexcept { return line_number_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_number_;
    std::string reason_;
};

class InsufficientEdges : public Error {
public:
    InsufficientEdges(std::size_t needed, std::size_t available)
        : Error("InsufficientEdges",
                "need " + std::to_string(needed) + " hierarchy edges, graph has " +
                    std::to_string(available)),
          needed_(needed), available_(available) {}

    std::size_t needed() const noexcept { return needed_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t needed_;
    std::size_t available_;
};

class ExhaustedCandidates : public Error {
public:
    ExhaustedCandidates(std::size_t attempts, std::size_t found, std::size_t wanted)
        : Error("ExhaustedCandidates",
                "gave up after " + std::to_string(attempts) + " attempts with " +
                    std::to_string(found) + " of " + std::to_string(wanted) +
                    " unlinked pairs"),
          attempts_(attempts) {}

    std::size_t attempts() const noexcept { return attempts_; }

private:
    std::size_t attempts_;
};

class HttpStatusError : public Error {
public:
    explicit HttpStatusError(int status)
        : Error("HttpStatus", "endpoint answered HTTP " + std::to_string(status)),
          status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

// Lightweight helper for the many errors that only carry a message.
#define TOPICREL_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

TOPICREL_DEFINE_ERROR(DuplicatePrefLabelForId);
TOPICREL_DEFINE_ERROR(EmptyGraph);
TOPICREL_DEFINE_ERROR(InvalidArgument);
TOPICREL_DEFINE_ERROR(DuplicatePairId);
TOPICREL_DEFINE_ERROR(DuplicateTuple);
TOPICREL_DEFINE_ERROR(ConflictingCandidate);
TOPICREL_DEFINE_ERROR(UnknownPair);
TOPICREL_DEFINE_ERROR(MissingPlaceholderValue);
TOPICREL_DEFINE_ERROR(InvalidTemplate);
TOPICREL_DEFINE_ERROR(TransportError);
TOPICREL_DEFINE_ERROR(MalformedResponseBody);
TOPICREL_DEFINE_ERROR(MissingAuthToken);
TOPICREL_DEFINE_ERROR(UnknownScriptKey);
TOPICREL_DEFINE_ERROR(SlugCollision);
TOPICREL_DEFINE_ERROR(FormatError);
TOPICREL_DEFINE_ERROR(ManifestError);
TOPICREL_DEFINE_ERROR(IoError);

#undef TOPICREL_DEFINE_ERROR

}  // namespace topicrel
