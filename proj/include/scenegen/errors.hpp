#pragma once

#include <stdexcept>
#include <string>

namespace scenegen {

// Every failure carries a stable kind tag ("MalformedDocument", "ReplayMiss",
// ...) so callers and tests can branch on the category without string-matching
// the human-readable message.
class SceneError : public std::runtime_error {
public:
    SceneError(std::string kind, const std::string& message)
        : std::runtime_error("[" + kind + "] " + message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void fail(std::string kind, const std::string& message) {
    throw SceneError(std::move(kind), message);
}

}  // namespace scenegen
