#pragma once

#include <optional>
#include <string>

#include "aisf/errors.hpp"

namespace aisf {

enum class Label { Spam, Legitimate };

inline const char* to_string(Label l) { return l == Label::Spam ? "spam" : "legitimate"; }

inline Label label_from_string(std::string_view s) {
    if (s == "spam") return Label::Spam;
    if (s == "legitimate") return Label::Legitimate;
    throw Error{"unknown label '" + std::string(s) + "' (expected \"spam\" or \"legitimate\")"};
}

// One transaction: sender address plus header/body content, optionally labeled.
struct LabeledMessage {
    std::string id;
    std::string sender;
    std::string header;
    std::string body;
    std::optional<Label> label;
};

}  // namespace aisf
