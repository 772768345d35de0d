/* dsh/errors.hpp — structured error type shared by every module.
 *
 * Every failure carries a machine-parseable code plus the
 * (module, operation, invariant) triple that identifies exactly which
 * contract was violated, so CLI consumers can map failures without
 * scraping prose.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace dsh {

/// @brief Exception carrying a stable error code and its provenance triple.
class Error : public std::runtime_error {
public:
    Error(std::string code, std::string module, std::string operation,
          std::string invariant, std::string detail = {})
        : std::runtime_error(format(code, module, operation, invariant, detail)),
          code_(std::move(code)),
          module_(std::move(module)),
          operation_(std::move(operation)),
          invariant_(std::move(invariant)),
          detail_(std::move(detail)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& module_name() const noexcept { return module_; }
    const std::string& operation() const noexcept { return operation_; }
    const std::string& invariant() const noexcept { return invariant_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    static std::string format(const std::string& code, const std::string& module,
                              const std::string& operation, const std::string& invariant,
                              const std::string& detail) {
        std::string s = "[" + code + "] (" + module + ", " + operation + ", " + invariant + ")";
        if (!detail.empty()) s += ": " + detail;
        return s;
    }

    std::string code_;
    std::string module_;
    std::string operation_;
    std::string invariant_;
    std::string detail_;
};

/// @brief Throw a dsh::Error when `cond` is false.
inline void require(bool cond, const char* code, const char* module, const char* operation,
                    const char* invariant, const std::string& detail = {}) {
    if (!cond) throw Error(code, module, operation, invariant, detail);
}

} // namespace dsh
