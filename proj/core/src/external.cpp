#include "bomm/external.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "bomm/io.hpp"

namespace bomm {

std::string format_point(const VectorXd& x) {
    std::string s;
    for (Eigen::Index l = 0; l < x.size(); ++l) {
        if (l) s += ',';
        s += format_double(x[l]);
    }
    return s;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string describe_status(int status) {
    if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) return "signal " + std::to_string(WTERMSIG(status));
    return "status " + std::to_string(status);
}

double parse_value(const std::string& text, const std::string& payload) {
    double v = 0.0;
    try {
        v = parse_double(text);
    } catch (const std::exception&) {
        throw EvaluationError("unparsable objective output '" + text + "' for point " + payload);
    }
    if (!std::isfinite(v)) throw EvaluationError("non-finite objective output '" + text + "' for point " + payload);
    return v;
}

}  // namespace

struct ExternalObjective::Process {
    pid_t pid = -1;
    int to_child = -1;
    int from_child = -1;
    std::string buffer;
    bool eof = false;

    explicit Process(const std::string& command) {
        static const bool ignore_sigpipe = [] {
            std::signal(SIGPIPE, SIG_IGN);
            return true;
        }();
        (void)ignore_sigpipe;
        int in[2], out[2];
        if (pipe(in) != 0) throw EvaluationError(std::string("pipe failed: ") + std::strerror(errno));
        if (pipe(out) != 0) {
            close(in[0]);
            close(in[1]);
            throw EvaluationError(std::string("pipe failed: ") + std::strerror(errno));
        }
        pid = fork();
        if (pid < 0) throw EvaluationError(std::string("fork failed: ") + std::strerror(errno));
        if (pid == 0) {
            dup2(in[0], STDIN_FILENO);
            dup2(out[1], STDOUT_FILENO);
            close(in[0]);
            close(in[1]);
            close(out[0]);
            close(out[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(in[0]);
        close(out[1]);
        to_child = in[1];
        from_child = out[0];
        fcntl(to_child, F_SETFD, FD_CLOEXEC);
        fcntl(from_child, F_SETFD, FD_CLOEXEC);
    }

    ~Process() {
        close_input();
        if (from_child >= 0) close(from_child);
        if (pid > 0) {
            // Give the child a moment to exit on EOF, then insist.
            for (int i = 0; i < 100; ++i) {
                if (waitpid(pid, nullptr, WNOHANG) == pid) return;
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            }
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
        }
    }

    void close_input() {
        if (to_child >= 0) close(to_child);
        to_child = -1;
    }

    void write_all(const std::string& data) {
        std::size_t done = 0;
        while (done < data.size()) {
            const ssize_t k = write(to_child, data.data() + done, data.size() - done);
            if (k < 0) {
                if (errno == EINTR) continue;
                throw EvaluationError(std::string("writing to objective failed: ") + std::strerror(errno));
            }
            done += static_cast<std::size_t>(k);
        }
    }

    /// Reads until `stop(buffer)` holds or EOF; false on timeout.
    template <class Stop>
    bool read_until(Stop stop, Clock::time_point deadline) {
        char chunk[4096];
        while (!eof && !stop(buffer)) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
            if (left <= 0) return false;
            pollfd p{from_child, POLLIN, 0};
            const int r = poll(&p, 1, static_cast<int>(std::min<long long>(left, 1 << 30)));
            if (r < 0) {
                if (errno == EINTR) continue;
                throw EvaluationError(std::string("poll failed: ") + std::strerror(errno));
            }
            if (r == 0) continue;
            const ssize_t k = read(from_child, chunk, sizeof chunk);
            if (k < 0) {
                if (errno == EINTR) continue;
                throw EvaluationError(std::string("reading from objective failed: ") + std::strerror(errno));
            }
            if (k == 0)
                eof = true;
            else
                buffer.append(chunk, static_cast<std::size_t>(k));
        }
        return true;
    }

    int reap() {
        int status = 0;
        waitpid(pid, &status, 0);
        pid = -1;
        return status;
    }

    void kill_now() {
        if (pid > 0) {
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
            pid = -1;
        }
    }
};

ExternalObjective::ExternalObjective(ExternalConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.command.empty()) throw ParameterError("external objective needs a command");
    if (!(cfg_.timeout_seconds > 0.0)) throw ParameterError("timeout must be positive");
}

ExternalObjective::~ExternalObjective() = default;
ExternalObjective::ExternalObjective(ExternalObjective&&) noexcept = default;
ExternalObjective& ExternalObjective::operator=(ExternalObjective&&) noexcept = default;

double ExternalObjective::operator()(const VectorXd& x) {
    const std::string line = format_point(x);
    return cfg_.persistent ? evaluate_persistent(line) : evaluate_once(line);
}

namespace {

Clock::time_point deadline_after(double seconds) {
    return Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

}  // namespace

double ExternalObjective::evaluate_once(const std::string& line) {
    Process p(cfg_.command);
    p.write_all(line + "\n");
    p.close_input();
    if (!p.read_until([](const std::string&) { return false; }, deadline_after(cfg_.timeout_seconds))) {
        p.kill_now();
        throw EvaluationError("objective timed out after " + format_double(cfg_.timeout_seconds) + " s for point " +
                              line);
    }
    const int status = p.reap();
    const std::string out = trim(p.buffer);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw EvaluationError("objective failed with " + describe_status(status) + " for point " + line +
                              " (output '" + out + "')");
    return parse_value(out, line);
}

double ExternalObjective::evaluate_persistent(const std::string& line) {
    if (!proc_) proc_ = std::make_unique<Process>(cfg_.command);
    Process& p = *proc_;
    try {
        p.write_all("EVAL " + line + "\n");
    } catch (const EvaluationError&) {
        proc_.reset();
        throw;
    }
    const bool ok =
        p.read_until([](const std::string& b) { return b.find('\n') != std::string::npos; },
                     deadline_after(cfg_.timeout_seconds));
    if (!ok) {
        p.kill_now();
        proc_.reset();
        throw EvaluationError("objective timed out after " + format_double(cfg_.timeout_seconds) + " s for point " +
                              line);
    }
    const auto nl = p.buffer.find('\n');
    if (nl == std::string::npos) {
        const std::string rest = trim(p.buffer);
        p.close_input();
        const int status = p.reap();
        proc_.reset();
        throw EvaluationError("objective process ended (" + describe_status(status) + ") for point " + line +
                              " (output '" + rest + "')");
    }
    const std::string reply = trim(p.buffer.substr(0, nl));
    p.buffer.erase(0, nl + 1);
    if (reply.rfind("OK", 0) != 0)
        throw EvaluationError("unexpected objective reply '" + reply + "' for point " + line);
    return parse_value(trim(reply.substr(2)), line);
}

}  // namespace bomm
