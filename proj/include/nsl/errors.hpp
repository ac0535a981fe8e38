#pragma once

#include <stdexcept>
#include <string>

namespace nsl {

// Base for every domain error raised by the library. `code()` is a stable
// machine-readable tag surfaced through the CLI and HTTP API.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define NSL_DEFINE_ERROR(Name, Code)                                          \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(Code, what) {}         \
    }

NSL_DEFINE_ERROR(ParseError, "ParseError");
NSL_DEFINE_ERROR(DanglingRef, "DanglingRef");
NSL_DEFINE_ERROR(CyclicNesting, "CyclicNesting");
NSL_DEFINE_ERROR(NestedTripletMissing, "NestedTripletMissing");
NSL_DEFINE_ERROR(UnknownPop, "UnknownPop");
NSL_DEFINE_ERROR(UnknownTemplate, "UnknownTemplate");
NSL_DEFINE_ERROR(UnknownOrder, "UnknownOrder");
NSL_DEFINE_ERROR(UncoverableTopology, "UncoverableTopology");
NSL_DEFINE_ERROR(NoFlavorMatches, "NoFlavorMatches");
NSL_DEFINE_ERROR(NoIlMeetsPerformance, "NoIlMeetsPerformance");
NSL_DEFINE_ERROR(InvalidRequest, "InvalidRequest");
NSL_DEFINE_ERROR(NoFeasibleSolution, "NoFeasibleSolution");
NSL_DEFINE_ERROR(CapacityRaced, "CapacityRaced");
NSL_DEFINE_ERROR(IllegalTransition, "IllegalTransition");
NSL_DEFINE_ERROR(OutsideActiveWindow, "OutsideActiveWindow");
NSL_DEFINE_ERROR(ExposureDenied, "ExposureDenied");

#undef NSL_DEFINE_ERROR

// Attribute-level rejection of a service order; `path` is the dotted
// attribute path the tenant tried to set.
class AttributeError : public Error {
public:
    AttributeError(std::string code, std::string path, const std::string& what)
        : Error(std::move(code), what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class ForbiddenAttribute : public AttributeError {
public:
    ForbiddenAttribute(std::string path, const std::string& what)
        : AttributeError("ForbiddenAttribute", std::move(path), what) {}
};

class OutOfRange : public AttributeError {
public:
    OutOfRange(std::string path, const std::string& what)
        : AttributeError("OutOfRange", std::move(path), what) {}
};

}  // namespace nsl
