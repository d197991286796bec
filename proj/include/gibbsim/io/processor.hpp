#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gibbsim/core/error.hpp"
#include "gibbsim/io/tensor_file.hpp"
#include "gibbsim/processor.hpp"

namespace gibbsim {

namespace detail {

struct Pipe {
    int fd[2] = {-1, -1};
    Pipe()
    {
        if (::pipe2(fd, O_CLOEXEC) != 0)
            throw ProcessorError(std::string("pipe: ") + std::strerror(errno));
    }
    ~Pipe()
    {
        close_end(0);
        close_end(1);
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;
    void close_end(int i)
    {
        if (fd[i] >= 0)
            ::close(fd[i]);
        fd[i] = -1;
    }
};

struct ProcessResult {
    std::vector<std::uint8_t> out;
    int status = 0;
    bool write_failed = false;
};

/// Runs `/bin/sh -c cmd`, feeding `input` to its stdin while collecting stdout.
inline ProcessResult run_shell(const std::string& cmd, std::span<const std::uint8_t> input)
{
    Pipe to_child, from_child;
    const pid_t pid = ::fork();
    if (pid < 0)
        throw ProcessorError(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(to_child.fd[0], STDIN_FILENO);
        ::dup2(from_child.fd[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    to_child.close_end(0);
    from_child.close_end(1);

    ProcessResult result;
    std::thread writer([&] {
        sigset_t block;
        sigemptyset(&block);
        sigaddset(&block, SIGPIPE);
        pthread_sigmask(SIG_BLOCK, &block, nullptr);
        std::size_t off = 0;
        while (off < input.size()) {
            const ssize_t n = ::write(to_child.fd[1], input.data() + off, input.size() - off);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                result.write_failed = true;
                break;
            }
            off += static_cast<std::size_t>(n);
        }
        to_child.close_end(1);
        if (result.write_failed) {
            const timespec zero{0, 0};
            sigtimedwait(&block, nullptr, &zero);
        }
    });

    std::uint8_t buf[1 << 16];
    for (;;) {
        const ssize_t n = ::read(from_child.fd[0], buf, sizeof buf);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            break;
        }
        if (n == 0)
            break;
        result.out.insert(result.out.end(), buf, buf + n);
    }
    writer.join();
    while (::waitpid(pid, &result.status, 0) < 0 && errno == EINTR) {
    }
    return result;
}

} // namespace detail

struct ProcessorOptions {
    /// Tensors per process invocation.
    std::size_t batch_size = 64;
    /// Expected output dims per input, same length as the inputs when set.
    std::vector<std::vector<std::uint32_t>> expected_dims;
};

/// Streams `inputs` through `cmd` in batches. Each batch is one process run;
/// failures name the batch index.
inline std::vector<Tensor> run_processor(const std::string& cmd, std::span<const Tensor> inputs,
                                         const ProcessorOptions& opt = {})
{
    std::vector<Tensor> outputs;
    if (inputs.empty())
        return outputs;
    if (opt.batch_size < 1)
        throw ArgumentError("run_processor: batch size must be positive");
    if (!opt.expected_dims.empty() && opt.expected_dims.size() != inputs.size())
        throw ArgumentError("run_processor: expected_dims must match the number of inputs");
    outputs.reserve(inputs.size());
    for (std::size_t start = 0, batch = 0; start < inputs.size(); start += opt.batch_size, ++batch) {
        const std::size_t n = std::min(opt.batch_size, inputs.size() - start);
        const std::string where = "processor batch index " + std::to_string(batch);
        const auto res = detail::run_shell(cmd, encode_tensor_stream(inputs.subspan(start, n)));
        if (!WIFEXITED(res.status) || WEXITSTATUS(res.status) != 0) {
            const std::string how = WIFEXITED(res.status) ? "exit status " + std::to_string(WEXITSTATUS(res.status))
                                                          : "signal " + std::to_string(WTERMSIG(res.status));
            throw ProcessorError(where + ": command failed with " + how);
        }
        std::vector<Tensor> got;
        try {
            got = decode_tensor_stream(res.out);
        } catch (const FormatError& e) {
            throw ProcessorError(where + ": malformed output stream" +
                                 (res.write_failed ? " (command stopped reading its input)" : "") + ": " + e.what());
        }
        if (got.size() != n)
            throw ProcessorError(where + ": expected " + std::to_string(n) + " outputs, got " +
                                 std::to_string(got.size()));
        for (std::size_t k = 0; k < n; ++k) {
            const std::vector<std::uint32_t>& want =
                opt.expected_dims.empty() ? inputs[start + k].dims : opt.expected_dims[start + k];
            if (got[k].dims != want || got[k].dtype != DType::Real32)
                throw ProcessorError(where + ": shape error in output " + std::to_string(k) +
                                     " (expected real tensor of the declared dims)");
            outputs.push_back(std::move(got[k]));
        }
    }
    return outputs;
}

/// Exchange form of a sample: complex [H,W], or complex [2,H,W] with the
/// companion as a zero-imaginary second channel; real [H,W] in magnitude mode.
inline Tensor processor_input(const SamplePair& pair)
{
    if (!pair.is_complex())
        return to_tensor(pair.magnitude_input());
    if (!pair.companion)
        return to_tensor(pair.complex_input());
    const ComplexImage planes[2] = {pair.complex_input(), to_complex(*pair.companion)};
    return stack_channels(planes);
}

/// Adapts an external command to the in-process Processor interface.
inline Processor subprocess_processor(std::string cmd, std::size_t batch_size = 64)
{
    return [cmd = std::move(cmd), batch_size](std::span<const SamplePair> batch) {
        std::vector<Tensor> in;
        ProcessorOptions opt;
        opt.batch_size = batch_size;
        in.reserve(batch.size());
        for (const auto& p : batch) {
            in.push_back(processor_input(p));
            opt.expected_dims.push_back(
                {static_cast<std::uint32_t>(p.target.height()), static_cast<std::uint32_t>(p.target.width())});
        }
        std::vector<RealImage> out;
        for (const auto& t : run_processor(cmd, in, opt))
            out.push_back(to_real_image(t));
        return out;
    };
}

/// Reference processor body: modulus of channel 0 of each input tensor.
inline Tensor passthrough_tensor(const Tensor& in)
{
    if (in.dims.size() != 2 && in.dims.size() != 3)
        throw FormatError("passthrough: field 'ndim' must be 2 or 3");
    if (in.dtype == DType::Complex32)
        return to_tensor(magnitude(to_complex_image(in, 0)));
    RealImage r = to_real_image(in, 0);
    for (auto& v : r)
        v = std::abs(v);
    return to_tensor(r);
}

} // namespace gibbsim
