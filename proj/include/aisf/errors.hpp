#pragma once

#include <stdexcept>
#include <string>

namespace aisf {

// Base for every error the library throws. The CLI maps these to exit code 2.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct EmptySequenceError : Error {
    EmptySequenceError() : Error("affinity requires non-empty bit sequences") {}
};

struct UnencodableSymbolError : Error {
    explicit UnencodableSymbolError(char symbol)
        : Error(std::string("symbol not in codebook: '") + symbol + "'") {}
};

struct CodebookError : Error {
    explicit CodebookError(const std::string& what) : Error("codebook: " + what) {}
};

struct MissingSenderError : Error {
    explicit MissingSenderError(const std::string& id)
        : Error("message '" + id + "' has no encodable sender address") {}
};

struct EmptyTrainingSetError : Error {
    EmptyTrainingSetError() : Error("training set is empty") {}
};

struct EmptySourceSetError : Error {
    explicit EmptySourceSetError(const std::string& role)
        : Error("no library material to generate " + role + " receptors") {}
};

struct EmptyCorpusError : Error {
    EmptyCorpusError() : Error("corpus contains no usable messages") {}
};

struct UninitializedStateError : Error {
    UninitializedStateError() : Error("classifier state is not initialized") {}
};

struct UnknownMessageError : Error {
    explicit UnknownMessageError(const std::string& id)
        : Error("message '" + id + "' is not in the replay log") {}
};

struct WrongDirectionError : Error {
    explicit WrongDirectionError(const std::string& what) : Error("feedback direction: " + what) {}
};

struct ParseError : Error {
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what) {}
};

struct DuplicateIdError : Error {
    explicit DuplicateIdError(const std::string& id) : Error("duplicate message id '" + id + "'") {}
};

struct LengthMismatchError : Error {
    LengthMismatchError() : Error("verdict and label lists differ in length") {}
};

struct VersionMismatchError : Error {
    VersionMismatchError(unsigned got, unsigned want)
        : Error("state file version " + std::to_string(got) + ", expected " +
                std::to_string(want)) {}
};

struct CorruptStateError : Error {
    explicit CorruptStateError(const std::string& what) : Error("corrupt state file: " + what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

}  // namespace aisf
