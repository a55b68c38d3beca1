// Copyright 2026 The segnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segnas/external_evaluator.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"
#include "segnas/errors.h"
#include "segnas/nsga2.h"

namespace segnas {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace protocol {

std::string Hello(SpaceId space, int version) {
  return json{{"type", "hello"},
              {"protocol", version},
              {"space", std::string(SpaceName(space))}}
      .dump();
}

std::string Ready(int capacity, const std::string& evaluator_id) {
  return json{{"type", "ready"},
              {"capacity", capacity},
              {"evaluator_id", evaluator_id}}
      .dump();
}

std::string Eval(std::uint64_t id, const EvalRequest& request) {
  json objectives = json::array();
  if (request.want_error) objectives.push_back("error");
  if (request.want_latency) objectives.push_back("latency");
  return json{{"type", "eval"},
              {"id", id},
              {"genome", request.genome.Canonical()},
              {"subset_fraction", request.subset_fraction},
              {"objectives", objectives}}
      .dump();
}

std::string Result(std::uint64_t id, const EvalResponse& response) {
  json frame{{"type", "result"},
             {"id", id},
             {"miou_error_pct", response.miou_error_pct},
             {"wall_time_ms", response.wall_time_ms}};
  if (response.latency_cycles) {
    frame["latency_cycles"] = *response.latency_cycles;
  }
  return frame.dump();
}

std::string ErrorFrame(std::uint64_t id, const std::string& message) {
  return json{{"type", "error"}, {"id", id}, {"message", message}}.dump();
}

}  // namespace protocol

// One worker subprocess connected through a socket pair on its stdin and
// stdout. Socket writes use MSG_NOSIGNAL so a dead worker surfaces as an
// error instead of SIGPIPE.
class WorkerProcess {
 public:
  explicit WorkerProcess(const std::string& command) {
    int fds[2];
    if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
      throw TransportError("socketpair failed");
    }
    pid_ = fork();
    if (pid_ < 0) {
      close(fds[0]);
      close(fds[1]);
      throw TransportError("fork failed");
    }
    if (pid_ == 0) {
      dup2(fds[1], STDIN_FILENO);
      dup2(fds[1], STDOUT_FILENO);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(fds[1]);
    fd_ = fds[0];
  }

  ~WorkerProcess() { Stop(); }

  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  bool WriteLine(const std::string& line) {
    const std::string framed = line + "\n";
    std::size_t sent = 0;
    while (sent < framed.size()) {
      const ssize_t n =
          send(fd_, framed.data() + sent, framed.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  // Next line, or nullopt on EOF, error, or deadline.
  std::optional<std::string> ReadLine(Clock::time_point deadline) {
    while (true) {
      const auto newline = buffer_.find('\n');
      if (newline != std::string::npos) {
        std::string line = buffer_.substr(0, newline);
        buffer_.erase(0, newline + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - Clock::now());
      if (remaining.count() <= 0) return std::nullopt;
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = poll(&pfd, 1, static_cast<int>(std::min<std::int64_t>(
                                          remaining.count(), 1 << 30)));
      if (ready < 0) {
        if (errno == EINTR) continue;
        return std::nullopt;
      }
      if (ready == 0) return std::nullopt;
      char chunk[4096];
      const ssize_t n = recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return std::nullopt;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void Stop() {
    if (fd_ >= 0) {
      close(fd_);
      fd_ = -1;
    }
    if (pid_ <= 0) return;
    // EOF on stdin asks the worker to exit; give it a moment, then kill.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }

 private:
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
};

struct ExternalEvaluator::Worker {
  std::unique_ptr<WorkerProcess> process;
  int capacity = 1;
  std::string last_error;
};

namespace {

std::string ResolveCommand(const std::string& configured) {
  if (const char* env = std::getenv(kWorkerCommandEnv); env && *env) {
    return env;
  }
  return configured;
}

Clock::time_point DeadlineAfter(double seconds) {
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(seconds));
}

}  // namespace

ExternalEvaluator::ExternalEvaluator(ExternalEvaluatorOptions options)
    : options_(std::move(options)) {
  options_.command = ResolveCommand(options_.command);
  if (options_.command.empty()) {
    throw ConfigError("external evaluator needs a worker command");
  }
  if (options_.workers < 1) throw ConfigError("need at least one worker");
  if (!(options_.timeout_s > 0.0)) {
    throw ConfigError("evaluation timeout must be positive");
  }
  if (options_.retries < 0) throw ConfigError("retries must be >= 0");
  for (int i = 0; i < options_.workers; ++i) {
    workers_.push_back(std::make_unique<Worker>());
    StartWorker(*workers_.back());
  }
}

ExternalEvaluator::~ExternalEvaluator() = default;

void ExternalEvaluator::StartWorker(Worker& worker) {
  worker.process.reset();
  worker.process = std::make_unique<WorkerProcess>(options_.command);
  if (!worker.process->WriteLine(protocol::Hello(options_.space))) {
    throw TransportError("cannot send handshake to worker");
  }
  const auto line =
      worker.process->ReadLine(DeadlineAfter(options_.timeout_s));
  if (!line) {
    throw TransportError("worker did not complete the handshake");
  }
  json frame;
  try {
    frame = json::parse(*line);
  } catch (const json::exception&) {
    throw TransportError("malformed handshake frame: " + *line);
  }
  const std::string type = frame.value("type", "");
  if (type == "error") {
    throw TransportError("worker rejected handshake: " +
                         frame.value("message", std::string("?")));
  }
  if (type != "ready") {
    throw TransportError("expected a ready frame, got: " + *line);
  }
  if (frame.contains("protocol") && frame["protocol"] != kProtocolVersion) {
    throw TransportError("worker speaks protocol " + frame["protocol"].dump() +
                         ", expected " + std::to_string(kProtocolVersion));
  }
  const int capacity = frame.value("capacity", 0);
  if (capacity < 1) throw TransportError("worker capacity must be >= 1");
  worker.capacity = capacity;
  const std::string id = frame.value("evaluator_id", std::string("external"));
  if (evaluator_id_.empty()) evaluator_id_ = id;
}

int ExternalEvaluator::capacity() const {
  int total = 0;
  for (const auto& w : workers_) total += w->capacity;
  return total;
}

std::vector<std::size_t> ExternalEvaluator::RunOnWorker(
    Worker& worker, std::span<const EvalRequest> requests,
    const std::vector<std::size_t>& indices,
    std::vector<EvalResponse>& responses) {
  std::map<std::uint64_t, std::size_t> in_flight;
  auto unanswered = [&] {
    std::vector<std::size_t> left;
    for (const auto& [id, index] : in_flight) left.push_back(index);
    return left;
  };
  for (std::size_t index : indices) {
    const std::uint64_t id = next_id_++;
    in_flight[id] = index;
    if (!worker.process->WriteLine(protocol::Eval(id, requests[index]))) {
      worker.last_error = "worker closed its input";
      return indices;
    }
  }
  const auto deadline = DeadlineAfter(options_.timeout_s);
  while (!in_flight.empty()) {
    const auto line = worker.process->ReadLine(deadline);
    if (!line) {
      worker.last_error = Clock::now() >= deadline
                              ? "evaluation timed out"
                              : "worker exited during evaluation";
      return unanswered();
    }
    json frame;
    try {
      frame = json::parse(*line);
      const std::string type = frame.at("type").get<std::string>();
      const auto id = frame.at("id").get<std::uint64_t>();
      const auto it = in_flight.find(id);
      if (it == in_flight.end()) {
        worker.last_error = "response for unknown request id";
        return unanswered();
      }
      const EvalRequest& request = requests[it->second];
      if (type == "error") {
        throw EvaluationError("worker failed on " +
                              request.genome.Canonical() + ": " +
                              frame.value("message", std::string("?")));
      }
      if (type != "result") {
        worker.last_error = "unexpected frame type '" + type + "'";
        return unanswered();
      }
      EvalResponse response;
      response.evaluator_id = evaluator_id_;
      response.miou_error_pct = frame.at("miou_error_pct").get<double>();
      if (frame.contains("latency_cycles") &&
          !frame["latency_cycles"].is_null()) {
        response.latency_cycles = frame["latency_cycles"].get<double>();
      }
      if (request.want_latency && !response.latency_cycles) {
        worker.last_error = "result frame lacks requested latency";
        return unanswered();
      }
      response.wall_time_ms = frame.value("wall_time_ms", std::int64_t{0});
      responses[it->second] = response;
      in_flight.erase(it);
    } catch (const json::exception&) {
      worker.last_error = "malformed frame: " + *line;
      return unanswered();
    }
  }
  return {};
}

EvalResponse ExternalEvaluator::Evaluate(const EvalRequest& request) {
  return EvaluateBatch(std::span<const EvalRequest>(&request, 1)).front();
}

std::vector<EvalResponse> ExternalEvaluator::EvaluateBatch(
    std::span<const EvalRequest> requests) {
  for (const EvalRequest& r : requests) ValidateRequest(r);
  std::vector<EvalResponse> responses(requests.size());
  std::vector<int> attempts(requests.size(), 0);
  std::deque<std::size_t> pending;
  for (std::size_t i = 0; i < requests.size(); ++i) pending.push_back(i);

  std::mutex mu;
  std::exception_ptr failure;
  bool abort = false;

  auto work = [&](Worker& worker) {
    while (true) {
      std::vector<std::size_t> batch;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (abort) return;
        while (!pending.empty() &&
               static_cast<int>(batch.size()) < worker.capacity) {
          batch.push_back(pending.front());
          pending.pop_front();
        }
      }
      if (batch.empty()) return;
      std::vector<std::size_t> failed;
      try {
        failed = RunOnWorker(worker, requests, batch, responses);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        abort = true;
        return;
      }
      if (failed.empty()) continue;
      {
        std::lock_guard<std::mutex> lock(mu);
        for (std::size_t index : failed) {
          if (++attempts[index] > options_.retries) {
            if (!failure) {
              failure = std::make_exception_ptr(TransportError(
                  worker.last_error + " (" +
                  requests[index].genome.Canonical() + ")"));
            }
            abort = true;
          } else {
            pending.push_back(index);
          }
        }
        if (abort) {
          worker.process->Stop();
          return;
        }
      }
      try {
        StartWorker(worker);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        abort = true;
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers_.size(); ++w) {
    threads.emplace_back(work, std::ref(*workers_[w]));
  }
  work(*workers_.front());
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return responses;
}

}  // namespace segnas
