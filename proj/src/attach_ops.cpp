#include <fcntl.h>
#include <net/if.h>
#include <sched.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <streambuf>

#include "slicelat/commands.hpp"

namespace slicelat {

namespace {

class FdGuard {
public:
    explicit FdGuard(int fd) : fd_(fd) {}
    ~FdGuard() {
        if (fd_ >= 0) {
            ::close(fd_);
        }
    }
    FdGuard(const FdGuard&) = delete;
    FdGuard& operator=(const FdGuard&) = delete;
    [[nodiscard]] int get() const noexcept { return fd_; }

private:
    int fd_;
};

std::string netns_path(int pid) {
    return "/proc/" + std::to_string(pid) + "/ns/net";
}

// Runs fn inside the network namespace of pid, then returns to our own.
template <typename Fn>
bool in_netns(int pid, Fn&& fn) {
    FdGuard self(::open("/proc/self/ns/net", O_RDONLY | O_CLOEXEC));
    FdGuard target(::open(netns_path(pid).c_str(), O_RDONLY | O_CLOEXEC));
    if (self.get() < 0 || target.get() < 0) {
        return false;
    }
    if (::setns(target.get(), CLONE_NEWNET) != 0) {
        return false;
    }
    fn();
    if (::setns(self.get(), CLONE_NEWNET) != 0) {
        throw Error(ErrorCode::IoError, std::string("cannot restore network namespace: ") + std::strerror(errno));
    }
    return true;
}

bool run_tool(const std::vector<std::string>& argv) {
    const pid_t child = ::fork();
    if (child < 0) {
        return false;
    }
    if (child == 0) {
        std::vector<char*> args;
        for (const auto& a : argv) {
            args.push_back(const_cast<char*>(a.c_str()));
        }
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    int status = 0;
    while (::waitpid(child, &status, 0) < 0) {
        if (errno != EINTR) {
            return false;
        }
    }
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

// Unbuffered-ish reader over a file descriptor; an interrupted read ends the
// stream so the caller can wind down.
class FdStreambuf : public std::streambuf {
public:
    explicit FdStreambuf(int fd) : fd_(fd) {}
    ~FdStreambuf() override { ::close(fd_); }

protected:
    int_type underflow() override {
        if (gptr() < egptr()) {
            return traits_type::to_int_type(*gptr());
        }
        const ssize_t n = ::read(fd_, buf_, sizeof buf_);
        if (n <= 0) {
            return traits_type::eof();
        }
        setg(buf_, buf_, buf_ + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    int fd_;
    char buf_[65536];
};

class FdIstream : public std::istream {
public:
    explicit FdIstream(int fd) : std::istream(nullptr), buf_(fd) { rdbuf(&buf_); }

private:
    FdStreambuf buf_;
};

class SystemAttachOps final : public AttachOps {
public:
    explicit SystemAttachOps(std::filesystem::path tracing_dir) : tracing_(std::move(tracing_dir)) {}

    bool privileged() const override { return ::geteuid() == 0; }

    bool namespace_exists(int pid) const override { return ::access(netns_path(pid).c_str(), R_OK) == 0; }

    bool probe_object_readable(const std::filesystem::path& object) const override {
        return std::filesystem::is_regular_file(object) && ::access(object.c_str(), R_OK) == 0;
    }

    std::optional<unsigned> interface_index(int pid, const std::string& ifname) override {
        unsigned index = 0;
        if (!in_netns(pid, [&] { index = ::if_nametoindex(ifname.c_str()); }) || index == 0) {
            return std::nullopt;
        }
        return index;
    }

    bool set_trace_buffer_kb(unsigned kb) override {
        std::ofstream f(tracing_ / "buffer_size_kb");
        f << kb << '\n';
        f.close();
        return static_cast<bool>(f);
    }

    bool attach_ingress(int pid, const std::string& ifname, const std::filesystem::path& object,
                        const std::string& section) override {
        bool ok = false;
        const bool entered = in_netns(pid, [&] {
            ok = run_tool({"tc", "qdisc", "replace", "dev", ifname, "clsact"}) &&
                 run_tool({"tc", "filter", "replace", "dev", ifname, "ingress", "bpf", "direct-action", "obj",
                           object.string(), "sec", section});
        });
        return entered && ok;
    }

    void detach_ingress(int pid, const std::string& ifname) override {
        in_netns(pid, [&] { run_tool({"tc", "filter", "del", "dev", ifname, "ingress"}); });
    }

    std::unique_ptr<std::istream> open_trace_stream() override {
        const int fd = ::open((tracing_ / "trace_pipe").c_str(), O_RDONLY | O_CLOEXEC);
        if (fd < 0) {
            return nullptr;
        }
        return std::make_unique<FdIstream>(fd);
    }

private:
    std::filesystem::path tracing_;
};

}  // namespace

std::unique_ptr<AttachOps> make_system_attach_ops(const ExperimentConfig& config) {
    return std::make_unique<SystemAttachOps>(config.tracing_dir);
}

}  // namespace slicelat
