#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace griddeploy {

enum class Severity { Error, Warning };

inline const char* to_string(Severity s) {
    return s == Severity::Error ? "ERROR" : "WARNING";
}

// One machine-checkable defect: findings are data, not failures.
struct Finding {
    Severity severity = Severity::Error;
    std::string code;
    std::string subject;
    std::string message;

    bool operator==(const Finding&) const = default;

    std::string line() const {
        return std::string(to_string(severity)) + " " + code + " " + subject + ": " + message;
    }
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool empty() const { return findings.empty(); }

    bool has_errors() const {
        return std::any_of(findings.begin(), findings.end(),
                           [](const Finding& f) { return f.severity == Severity::Error; });
    }

    void add(Severity sev, std::string code, std::string subject, std::string message) {
        findings.push_back({sev, std::move(code), std::move(subject), std::move(message)});
    }

    // Deterministic report order: by subject, then code, then message.
    void sort_canonical() {
        std::stable_sort(findings.begin(), findings.end(),
                         [](const Finding& a, const Finding& b) {
                             if (a.subject != b.subject) return a.subject < b.subject;
                             if (a.code != b.code) return a.code < b.code;
                             return a.message < b.message;
                         });
    }

    bool has_code(const std::string& code) const {
        return std::any_of(findings.begin(), findings.end(),
                           [&](const Finding& f) { return f.code == code; });
    }
};

} // namespace griddeploy
