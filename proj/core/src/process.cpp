#include "ctxfix/process.hpp"

#include "ctxfix/errors.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ctxfix {

namespace {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd_(o.release()) {}
    Fd& operator=(Fd&& o) noexcept {
        reset(o.release());
        return *this;
    }
    ~Fd() { reset(); }

    int get() const noexcept { return fd_; }
    int release() noexcept { return std::exchange(fd_, -1); }
    void reset(int fd = -1) noexcept {
        if (fd_ >= 0) {
            ::close(fd_);
        }
        fd_ = fd;
    }

private:
    int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) {
        throw Error(std::string("pipe() failed: ") + std::strerror(errno));
    }
    return {Fd(fds[0]), Fd(fds[1])};
}

} // namespace

ProcessResult run_process(const ProcessOptions& options) {
    if (options.argv.empty()) {
        throw ContractViolation("run_process: empty argv");
    }
    auto [out_r, out_w] = make_pipe();
    auto [err_r, err_w] = make_pipe();
    auto [exec_r, exec_w] = make_pipe();  // carries errno if exec fails

    std::vector<char*> argv;
    argv.reserve(options.argv.size() + 1);
    for (const auto& a : options.argv) {
        argv.push_back(const_cast<char*>(a.c_str()));
    }
    argv.push_back(nullptr);
    std::string cwd = options.working_directory.string();

    pid_t pid = ::fork();
    if (pid < 0) {
        throw Error(std::string("fork() failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(out_w.get(), STDOUT_FILENO);
        ::dup2(err_w.get(), STDERR_FILENO);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) {
            ::dup2(devnull, STDIN_FILENO);
        }
        if (options.cpu_limit_seconds > 0) {
            rlimit lim{static_cast<rlim_t>(options.cpu_limit_seconds),
                       static_cast<rlim_t>(options.cpu_limit_seconds + 1)};
            ::setrlimit(RLIMIT_CPU, &lim);
        }
        int err = 0;
        if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
            err = errno;
        } else {
            ::execvp(argv[0], argv.data());
            err = errno;
        }
        ssize_t ignored = ::write(exec_w.get(), &err, sizeof err);
        (void)ignored;
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    out_w.reset();
    err_w.reset();
    exec_w.reset();

    int child_errno = 0;
    ssize_t n = ::read(exec_r.get(), &child_errno, sizeof child_errno);
    if (n == static_cast<ssize_t>(sizeof child_errno)) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        throw ToolUnavailable("cannot start '" + options.argv[0] + "': " + std::strerror(child_errno));
    }

    ProcessResult result;
    auto deadline = std::chrono::steady_clock::now() + options.timeout;
    pollfd fds[2] = {{out_r.get(), POLLIN, 0}, {err_r.get(), POLLIN, 0}};
    std::string* sinks[2] = {&result.stdout_text, &result.stderr_text};
    int open_streams = 2;
    char buf[8192];
    while (open_streams > 0) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            result.timed_out = true;
            ::kill(-pid, SIGKILL);
            break;
        }
        int rc = ::poll(fds, 2, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) {
                continue;
            }
            ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
            if (got > 0) {
                sinks[i]->append(buf, static_cast<std::size_t>(got));
            } else {
                fds[i].fd = -1;
                --open_streams;
            }
        }
    }
    int status = 0;
    if (!result.timed_out) {
        // Streams closed; the child may still be running if it closed them itself.
        while (true) {
            pid_t w = ::waitpid(pid, &status, WNOHANG);
            if (w == pid) {
                break;
            }
            if (std::chrono::steady_clock::now() >= deadline) {
                result.timed_out = true;
                ::kill(-pid, SIGKILL);
                ::waitpid(pid, &status, 0);
                break;
            }
            ::usleep(2000);
        }
    } else {
        ::waitpid(pid, &status, 0);
    }
    ::kill(-pid, SIGKILL);  // reap stray grandchildren in the group
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.term_signal = WTERMSIG(status);
    }
    return result;
}

} // namespace ctxfix
