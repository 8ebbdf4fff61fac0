#include "pcoh/runtime.hpp"

#include <algorithm>
#include <array>
#include <condition_variable>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "pcoh/errors.hpp"

namespace pcoh {

    std::vector<Message> Transport::exchange(const std::vector<std::vector<Message>>& outbox, std::string_view tag)
    {
        if (int(outbox.size()) != size())
            throw ConfigError("exchange: outbox has " + std::to_string(outbox.size()) + " slots for " + std::to_string(size()) + " ranks");

        std::vector<Bytes> outgoing(size());
        for(int d = 0; d < size(); ++d)
            for(const Message& msg: outbox[d]) {
                if (msg.destination != std::uint32_t(d) or int(msg.destination) >= size())
                    throw ConfigError("exchange: message for rank " + std::to_string(msg.destination) + " in slot " + std::to_string(d)
                                      + " of " + std::to_string(size()));
                Message copy_header = msg;
                copy_header.source = std::uint32_t(rank());
                encode_frame(copy_header, outgoing[d]);
            }

        std::vector<Bytes> incoming = alltoall(std::move(outgoing), tag);

        std::vector<Message> inbox;
        for(int s = 0; s < size(); ++s)
            for(Message& msg: decode_frames(incoming[s])) {
                if (msg.source != std::uint32_t(s) or msg.destination != std::uint32_t(rank()))
                    throw ProtocolError("misrouted frame " + std::to_string(msg.source) + " -> " + std::to_string(msg.destination)
                                        + " received by " + std::to_string(rank()) + " from " + std::to_string(s));
                inbox.push_back(std::move(msg));
            }
        return inbox;
    }

    std::int64_t Transport::all_reduce_sum(std::int64_t local)
    {
        Bytes b;
        ByteWriter(b).i64(local);
        std::int64_t sum = 0;
        for(const Bytes& x: all_gather(b)) {
            ByteReader r(x);
            sum += r.i64();
        }
        return sum;
    }

    std::vector<Bytes> Transport::all_gather(const Bytes& local)
    {
        return alltoall(std::vector<Bytes>(size(), local), "all_gather");
    }

    std::vector<Bytes> Transport::gather(const Bytes& local, int root)
    {
        std::vector<Bytes> out(size());
        out[root] = local;
        auto in = alltoall(std::move(out), "gather");
        if (rank() != root)
            in.clear();
        return in;
    }

    void Transport::barrier() { alltoall(std::vector<Bytes>(size()), "barrier"); }

    namespace {

        // thrown on ranks that stop because some other rank failed first
        struct RunAborted : ProtocolError {
            using ProtocolError::ProtocolError;
        };

        enum class FailureKind : std::uint8_t { Config = 1, Internal = 2, Protocol = 3, Other = 4 };

        struct Failure {
            int rank {0};
            FailureKind kind {FailureKind::Other};
            bool secondary {false};
            std::string message;
        };

        Failure describe(int rank, std::exception_ptr e)
        {
            Failure f;
            f.rank = rank;
            try {
                std::rethrow_exception(e);
            } catch(const RunAborted& x) {
                f.kind = FailureKind::Protocol;
                f.secondary = true;
                f.message = x.what();
            } catch(const ConfigError& x) {
                f.kind = FailureKind::Config;
                f.message = x.what();
            } catch(const InternalError& x) {
                f.kind = FailureKind::Internal;
                f.message = x.what();
            } catch(const ProtocolError& x) {
                f.kind = FailureKind::Protocol;
                f.message = x.what();
            } catch(const std::exception& x) {
                f.message = x.what();
            } catch(...) {
                f.message = "unknown exception";
            }
            return f;
        }

        [[noreturn]] void raise(const Failure& f)
        {
            std::string msg = "rank " + std::to_string(f.rank) + ": " + f.message;
            switch(f.kind) {
                case FailureKind::Config: throw ConfigError(msg);
                case FailureKind::Internal: throw InternalError(msg);
                case FailureKind::Protocol: throw ProtocolError(msg);
                default: throw std::runtime_error(msg);
            }
        }

        const Failure& root_cause(const std::vector<Failure>& failures)
        {
            for(const Failure& f: failures)
                if (not f.secondary)
                    return f;
            return failures.front();
        }

        // ---- in-process ----

        class Hub {
        public:
            Hub(int n, std::chrono::milliseconds timeout) : n_(n), timeout_(timeout), slots_(n, std::vector<Bytes>(n)) {}

            Bytes& slot(int source, int destination) { return slots_[source][destination]; }

            void arrive(int rank, std::string_view tag)
            {
                std::unique_lock lock(m_);
                if (aborted_)
                    throw RunAborted("run aborted: " + reason_);
                if (finished_ > 0)
                    fail_locked("rank " + std::to_string(rank) + " entered '" + std::string(tag) + "' after another rank returned");
                if (arrived_ == 0)
                    tag_ = tag;
                else if (tag_ != tag)
                    fail_locked("collective mismatch: rank " + std::to_string(rank) + " entered '" + std::string(tag)
                                + "' while others are in '" + tag_ + "'");

                std::uint64_t gen = generation_;
                if (++arrived_ == n_) {
                    arrived_ = 0;
                    ++generation_;
                    cv_.notify_all();
                    return;
                }
                bool woke = cv_.wait_for(lock, timeout_, [&] { return generation_ != gen or aborted_; });
                if (generation_ != gen)
                    return;
                if (not woke)
                    fail_locked("timeout in collective '" + tag_ + "'");
                throw RunAborted("run aborted: " + reason_);
            }

            void finish()
            {
                std::lock_guard lock(m_);
                ++finished_;
                if (arrived_ > 0 and not aborted_) {
                    aborted_ = true;
                    reason_ = "a rank returned while others wait in '" + tag_ + "'";
                    cv_.notify_all();
                }
            }

            void abort(const std::string& reason)
            {
                std::lock_guard lock(m_);
                if (not aborted_) {
                    aborted_ = true;
                    reason_ = reason;
                }
                cv_.notify_all();
            }

        private:
            [[noreturn]] void fail_locked(const std::string& reason)
            {
                if (not aborted_) {
                    aborted_ = true;
                    reason_ = reason;
                }
                cv_.notify_all();
                throw ProtocolError(reason);
            }

            int n_;
            std::chrono::milliseconds timeout_;
            std::vector<std::vector<Bytes>> slots_;     // [source][destination]

            std::mutex m_;
            std::condition_variable cv_;
            int arrived_ {0};
            int finished_ {0};
            std::uint64_t generation_ {0};
            std::string tag_;
            bool aborted_ {false};
            std::string reason_;
        };

        class InProcessTransport : public Transport {
        public:
            InProcessTransport(Hub& hub, int rank, int n) : hub_(hub), rank_(rank), n_(n) {}

            int rank() const override { return rank_; }
            int size() const override { return n_; }

            std::vector<Bytes> alltoall(std::vector<Bytes> outgoing, std::string_view tag) override
            {
                if (int(outgoing.size()) != n_)
                    throw ConfigError("alltoall: expected " + std::to_string(n_) + " buffers");
                // slot [s][d] is written only by s before the first barrier and read only by d after it
                for(int d = 0; d < n_; ++d)
                    hub_.slot(rank_, d) = std::move(outgoing[d]);
                hub_.arrive(rank_, tag);
                std::vector<Bytes> incoming(n_);
                for(int s = 0; s < n_; ++s)
                    incoming[s] = std::move(hub_.slot(s, rank_));
                hub_.arrive(rank_, tag);
                return incoming;
            }

        private:
            Hub& hub_;
            int rank_;
            int n_;
        };

        std::vector<Bytes> run_in_process(int n, const RankProgram& program, const RunOptions& options)
        {
            Hub hub(n, options.timeout);
            std::vector<Bytes> results(n);
            std::mutex failures_mutex;
            std::vector<Failure> failures;

            {
                std::vector<std::jthread> workers;
                workers.reserve(n);
                for(int r = 0; r < n; ++r)
                    workers.emplace_back([&, r] {
                        InProcessTransport t(hub, r, n);
                        try {
                            results[r] = program(t);
                            hub.finish();
                        } catch(...) {
                            Failure f = describe(r, std::current_exception());
                            {
                                std::lock_guard lock(failures_mutex);
                                failures.push_back(f);
                            }
                            hub.abort("rank " + std::to_string(r) + " failed: " + f.message);
                        }
                    });
            }

            if (not failures.empty())
                raise(root_cause(failures));
            return results;
        }

        // ---- multi-process ----

        std::uint32_t tag_hash(std::string_view tag)
        {
            std::uint32_t h = 2166136261u;
            for(char c: tag) {
                h ^= std::uint8_t(c);
                h *= 16777619u;
            }
            return h;
        }

        class SocketTransport : public Transport {
        public:
            SocketTransport(int rank, std::vector<int> fds, std::chrono::milliseconds timeout)
                : rank_(rank), fds_(std::move(fds)), timeout_(timeout)
            {
                for(int fd: fds_)
                    if (fd >= 0)
                        ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
            }

            int rank() const override { return rank_; }
            int size() const override { return int(fds_.size()); }

            std::vector<Bytes> alltoall(std::vector<Bytes> outgoing, std::string_view tag) override;

        private:
            int rank_;
            std::vector<int> fds_;
            std::chrono::milliseconds timeout_;
        };

        constexpr std::size_t header_size = 12;     // u32 tag hash, u64 payload length

        std::vector<Bytes> SocketTransport::alltoall(std::vector<Bytes> outgoing, std::string_view tag)
        {
            int n = size();
            if (int(outgoing.size()) != n)
                throw ConfigError("alltoall: expected " + std::to_string(n) + " buffers");

            std::uint32_t hash = tag_hash(tag);

            struct Peer {
                Bytes out;
                std::size_t sent {0};
                std::array<std::byte, header_size> header;
                std::size_t header_got {0};
                std::size_t got {0};
                bool received {false};
            };

            std::vector<Bytes> incoming(n);
            std::vector<Peer> peers(n);
            incoming[rank_] = std::move(outgoing[rank_]);
            for(int p = 0; p < n; ++p) {
                if (p == rank_)
                    continue;
                Bytes& out = peers[p].out;
                out.reserve(header_size + outgoing[p].size());
                ByteWriter w(out);
                w.u32(hash);
                w.u64(outgoing[p].size());
                out.insert(out.end(), outgoing[p].begin(), outgoing[p].end());
                Bytes().swap(outgoing[p]);
            }

            auto deadline = std::chrono::steady_clock::now() + timeout_;
            std::vector<pollfd> polls;
            std::vector<int> who;
            while(true) {
                polls.clear();
                who.clear();
                for(int p = 0; p < n; ++p) {
                    if (p == rank_)
                        continue;
                    short events = 0;
                    if (peers[p].sent < peers[p].out.size())
                        events |= POLLOUT;
                    if (not peers[p].received)
                        events |= POLLIN;
                    if (events) {
                        polls.push_back({fds_[p], events, 0});
                        who.push_back(p);
                    }
                }
                if (polls.empty())
                    break;

                auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
                if (left.count() <= 0)
                    throw ProtocolError("timeout in collective '" + std::string(tag) + "'");
                int ready = ::poll(polls.data(), polls.size(), int(std::min<long long>(left.count(), 1 << 30)));
                if (ready < 0) {
                    if (errno == EINTR)
                        continue;
                    throw ProtocolError(std::string("poll: ") + std::strerror(errno));
                }

                for(std::size_t i = 0; i < polls.size(); ++i) {
                    int p = who[i];
                    Peer& peer = peers[p];
                    short rev = polls[i].revents;
                    if (rev == 0)
                        continue;

                    if ((rev & POLLOUT) and peer.sent < peer.out.size()) {
                        ssize_t k = ::send(fds_[p], peer.out.data() + peer.sent, peer.out.size() - peer.sent, MSG_NOSIGNAL);
                        if (k < 0 and errno != EAGAIN and errno != EWOULDBLOCK and errno != EINTR)
                            throw RunAborted("send to rank " + std::to_string(p) + ": " + std::strerror(errno));
                        if (k > 0)
                            peer.sent += std::size_t(k);
                    }

                    if ((rev & (POLLIN | POLLHUP | POLLERR)) and not peer.received) {
                        std::byte* dst;
                        std::size_t want;
                        if (peer.header_got < header_size) {
                            dst = peer.header.data() + peer.header_got;
                            want = header_size - peer.header_got;
                        } else {
                            dst = incoming[p].data() + peer.got;
                            want = incoming[p].size() - peer.got;
                        }
                        ssize_t k = ::recv(fds_[p], dst, want, 0);
                        if (k == 0)
                            throw RunAborted("rank " + std::to_string(p) + " closed its connection during '" + std::string(tag) + "'");
                        if (k < 0) {
                            if (errno == EAGAIN or errno == EWOULDBLOCK or errno == EINTR)
                                continue;
                            throw RunAborted("recv from rank " + std::to_string(p) + ": " + std::strerror(errno));
                        }
                        if (peer.header_got < header_size) {
                            peer.header_got += std::size_t(k);
                            if (peer.header_got == header_size) {
                                ByteReader r(peer.header);
                                std::uint32_t their = r.u32();
                                std::uint64_t len = r.u64();
                                if (their != hash)
                                    throw ProtocolError("collective mismatch: rank " + std::to_string(p) + " is not in '" + std::string(tag) + "'");
                                incoming[p].resize(len);
                                peer.received = (len == 0);
                            }
                        } else {
                            peer.got += std::size_t(k);
                            peer.received = (peer.got == incoming[p].size());
                        }
                    }
                }
            }
            return incoming;
        }

        void write_all(int fd, const Bytes& data)
        {
            std::size_t off = 0;
            while(off < data.size()) {
                ssize_t k = ::write(fd, data.data() + off, data.size() - off);
                if (k < 0) {
                    if (errno == EINTR)
                        continue;
                    return;
                }
                off += std::size_t(k);
            }
        }

        [[noreturn]] void child_main(int r, int n, std::vector<int> fds, int result_fd, const RankProgram& program,
                                     const RunOptions& options)
        {
            std::signal(SIGPIPE, SIG_IGN);
            Bytes report;
            ByteWriter w(report);
            int status = 0;
            try {
                SocketTransport t(r, std::move(fds), options.timeout);
                Bytes result = program(t);
                w.u8(0);
                w.u64(result.size());
                report.insert(report.end(), result.begin(), result.end());
            } catch(...) {
                Failure f = describe(r, std::current_exception());
                report.clear();
                w.u8(std::uint8_t(f.kind));
                w.u8(f.secondary);
                w.string(f.message);
                status = 1;
            }
            (void)n;
            write_all(result_fd, report);
            ::close(result_fd);
            std::fflush(nullptr);
            ::_exit(status);
        }

        std::vector<Bytes> run_processes(int n, const RankProgram& program, const RunOptions& options)
        {
            std::fflush(nullptr);

            std::vector<std::vector<int>> mesh(n, std::vector<int>(n, -1));
            std::vector<int> all_fds;
            auto close_all = [&] {
                for(int fd: all_fds)
                    ::close(fd);
                all_fds.clear();
            };

            for(int i = 0; i < n; ++i)
                for(int j = i + 1; j < n; ++j) {
                    int sv[2];
                    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) {
                        close_all();
                        throw std::runtime_error(std::string("socketpair: ") + std::strerror(errno));
                    }
                    mesh[i][j] = sv[0];
                    mesh[j][i] = sv[1];
                    all_fds.push_back(sv[0]);
                    all_fds.push_back(sv[1]);
                }

            std::vector<int> result_read(n, -1), result_write(n, -1);
            for(int r = 0; r < n; ++r) {
                int pp[2];
                if (::pipe(pp) != 0) {
                    close_all();
                    throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
                }
                result_read[r] = pp[0];
                result_write[r] = pp[1];
                all_fds.push_back(pp[0]);
                all_fds.push_back(pp[1]);
            }

            std::vector<pid_t> pids(n, -1);
            for(int r = 0; r < n; ++r) {
                pid_t pid = ::fork();
                if (pid < 0) {
                    for(int q = 0; q < r; ++q)
                        ::kill(pids[q], SIGKILL);
                    for(int q = 0; q < r; ++q)
                        ::waitpid(pids[q], nullptr, 0);
                    close_all();
                    throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
                }
                if (pid == 0) {
                    for(int fd: all_fds) {
                        bool keep = fd == result_write[r]
                                 or std::find(mesh[r].begin(), mesh[r].end(), fd) != mesh[r].end();
                        if (not keep)
                            ::close(fd);
                    }
                    child_main(r, n, mesh[r], result_write[r], program, options);
                }
                pids[r] = pid;
            }

            for(int fd: all_fds)
                if (std::find(result_read.begin(), result_read.end(), fd) == result_read.end())
                    ::close(fd);
            all_fds = result_read;

            std::vector<Bytes> reports(n);
            std::vector<bool> open(n, true);
            bool killed = false;
            auto kill_all = [&] {
                if (killed)
                    return;
                killed = true;
                for(pid_t pid: pids)
                    ::kill(pid, SIGKILL);
            };

            std::vector<Failure> failures;
            std::vector<bool> reported(n, false);
            auto inspect = [&](int r) {
                // a complete failure report from r triggers the abort of everyone else
                if (reported[r] or reports[r].empty() or reports[r][0] == std::byte {0})
                    return;
                try {
                    ByteReader rd(reports[r]);
                    Failure f;
                    f.rank = r;
                    f.kind = FailureKind(rd.u8());
                    f.secondary = rd.u8() != 0;
                    f.message = rd.string();
                    reported[r] = true;
                    failures.push_back(f);
                    if (not f.secondary)
                        kill_all();
                } catch(const ProtocolError&) {
                    // report still incomplete
                }
            };

            std::byte buf[1 << 16];
            while(std::find(open.begin(), open.end(), true) != open.end()) {
                std::vector<pollfd> polls;
                std::vector<int> who;
                for(int r = 0; r < n; ++r)
                    if (open[r]) {
                        polls.push_back({result_read[r], POLLIN, 0});
                        who.push_back(r);
                    }
                int ready = ::poll(polls.data(), polls.size(), -1);
                if (ready < 0) {
                    if (errno == EINTR)
                        continue;
                    kill_all();
                    break;
                }
                for(std::size_t i = 0; i < polls.size(); ++i) {
                    if (polls[i].revents == 0)
                        continue;
                    int r = who[i];
                    ssize_t k = ::read(result_read[r], buf, sizeof buf);
                    if (k < 0 and errno == EINTR)
                        continue;
                    if (k <= 0) {
                        open[r] = false;
                        continue;
                    }
                    reports[r].insert(reports[r].end(), buf, buf + k);
                    inspect(r);
                }
            }
            for(int fd: result_read)
                ::close(fd);

            std::vector<int> statuses(n, 0);
            for(int r = 0; r < n; ++r)
                ::waitpid(pids[r], &statuses[r], 0);

            std::vector<Bytes> results(n);
            for(int r = 0; r < n; ++r) {
                if (reported[r])
                    continue;
                bool ok = false;
                if (not reports[r].empty() and reports[r][0] == std::byte {0}) {
                    ByteReader rd(reports[r]);
                    rd.u8();
                    std::uint64_t len = rd.u64();
                    if (rd.remaining() == len) {
                        results[r].assign(reports[r].end() - std::ptrdiff_t(len), reports[r].end());
                        ok = true;
                    }
                }
                if (not ok) {
                    Failure f;
                    f.rank = r;
                    f.secondary = killed;
                    if (WIFSIGNALED(statuses[r]))
                        f.message = "worker terminated by signal " + std::to_string(WTERMSIG(statuses[r]));
                    else
                        f.message = "worker exited without a complete result";
                    failures.push_back(f);
                }
            }

            if (not failures.empty())
                raise(root_cause(failures));
            return results;
        }

    } // namespace

    std::vector<Bytes> run_ranks(int n, const RankProgram& program, const RunOptions& options)
    {
        if (n < 1)
            throw ConfigError("number of ranks must be at least 1, got " + std::to_string(n));
        if (options.transport == TransportKind::Process)
            return run_processes(n, program, options);
        return run_in_process(n, program, options);
    }

} // namespace pcoh
