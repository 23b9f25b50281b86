#pragma once

#include <chrono>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "rtlkit/common/error.hpp"

extern char** environ;

namespace rtlkit {

struct ProcessResult {
    int exit_code = 0;
    std::string out;  // stdout followed by stderr, in arrival order
};

/// Single-quotes a string for /bin/sh.
inline std::string shell_quote(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

/// Replaces `{name}` placeholders with shell-quoted values.
inline std::string expand_command(std::string command_template,
                                  const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        const std::string token = "{" + key + "}";
        const std::string quoted = shell_quote(value);
        for (auto pos = command_template.find(token); pos != std::string::npos;
             pos = command_template.find(token, pos + quoted.size()))
            command_template.replace(pos, token.size(), quoted);
    }
    return command_template;
}

/// Runs `command` through /bin/sh with merged stdout/stderr capture.
///
/// Exit status 126/127 from the shell (not executable / not found) and a
/// timeout both raise infrastructure errors; any other status is returned.
inline ProcessResult run_shell(const std::string& command, double timeout_seconds) {
    int fds[2];
    if (pipe(fds) != 0) fail(ErrorKind::Io, "pipe: " + std::string(std::strerror(errno)));

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addclose(&actions, fds[0]);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, fds[1]);
    posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);

    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    pid_t pid = 0;
    int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    close(fds[1]);
    if (rc != 0) {
        close(fds[0]);
        fail(ErrorKind::ToolNotFound, "cannot spawn /bin/sh: " + std::string(std::strerror(rc)));
    }

    ProcessResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_seconds));
    bool timed_out = false;
    char buf[4096];
    for (;;) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                             deadline - std::chrono::steady_clock::now())
                             .count();
        if (remaining <= 0) {
            timed_out = true;
            break;
        }
        pollfd pfd{fds[0], POLLIN, 0};
        int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 1000)));
        if (ready < 0 && errno == EINTR) continue;
        if (ready <= 0) continue;
        ssize_t n = read(fds[0], buf, sizeof buf);
        if (n > 0) result.out.append(buf, static_cast<std::size_t>(n));
        else if (n == 0 || errno != EINTR) break;
    }
    close(fds[0]);

    if (timed_out) kill(-pid, SIGKILL);
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {}
    if (timed_out)
        fail(ErrorKind::Timeout, "command timed out after " + std::to_string(timeout_seconds) +
                                     "s: " + command);

    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
    if (result.exit_code == 126 || result.exit_code == 127)
        fail(ErrorKind::ToolNotFound, "command not runnable (exit " +
                                          std::to_string(result.exit_code) + "): " + command +
                                          "\n" + result.out);
    return result;
}

} // namespace rtlkit
