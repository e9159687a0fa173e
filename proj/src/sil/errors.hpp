#pragma once
#include <stdexcept>
#include <string>

namespace sil {

// Solver/validation failures carry a short machine-readable code
// ("Incompatible", "KernelNotSimple", ...) plus a human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

inline void require(bool cond, const std::string& code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

} // namespace sil
