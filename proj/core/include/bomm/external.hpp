#pragma once

// Objectives evaluated by an external program. In the default mode the
// command is started once per point: it reads `x1,...,xd` on stdin and
// prints one number. In persistent mode a single process answers
// `EVAL x1,...,xd` lines with `OK value`.

#include <memory>
#include <string>

#include "bomm/core.hpp"

namespace bomm {

struct ExternalConfig {
    /// Run through /bin/sh -c.
    std::string command;
    bool persistent = false;
    /// Per-evaluation timeout.
    double timeout_seconds = 3600.0;
};

class ExternalObjective {
public:
    explicit ExternalObjective(ExternalConfig cfg);
    ~ExternalObjective();
    ExternalObjective(const ExternalObjective&) = delete;
    ExternalObjective& operator=(const ExternalObjective&) = delete;
    ExternalObjective(ExternalObjective&&) noexcept;
    ExternalObjective& operator=(ExternalObjective&&) noexcept;

    /// Throws EvaluationError on a non-zero exit, timeout, unparsable or
    /// non-finite output; the message carries the offending payload.
    double operator()(const VectorXd& x);

    const ExternalConfig& config() const { return cfg_; }

private:
    struct Process;
    double evaluate_once(const std::string& line);
    double evaluate_persistent(const std::string& line);

    ExternalConfig cfg_;
    std::unique_ptr<Process> proc_;
};

/// Comma-joined shortest round-trip representation of x.
std::string format_point(const VectorXd& x);

}  // namespace bomm
