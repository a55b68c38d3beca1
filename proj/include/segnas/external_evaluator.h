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

#ifndef SEGNAS_EXTERNAL_EVALUATOR_H_
#define SEGNAS_EXTERNAL_EVALUATOR_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "segnas/evaluator.h"
#include "segnas/genome.h"

namespace segnas {

inline constexpr int kProtocolVersion = 1;

// Environment variable that replaces the configured worker command.
inline constexpr const char* kWorkerCommandEnv = "SEGNAS_WORKER_COMMAND";

// Line-delimited JSON frames exchanged with evaluation workers. Each function
// returns one frame without the trailing newline.
namespace protocol {

std::string Hello(SpaceId space, int version = kProtocolVersion);
std::string Ready(int capacity, const std::string& evaluator_id);
std::string Eval(std::uint64_t id, const EvalRequest& request);
std::string Result(std::uint64_t id, const EvalResponse& response);
std::string ErrorFrame(std::uint64_t id, const std::string& message);

}  // namespace protocol

struct ExternalEvaluatorOptions {
  std::string command;
  SpaceId space = SpaceId::kXception;
  int workers = 1;
  double timeout_s = 600.0;
  // Extra attempts per request after a transport failure; each attempt
  // restarts the worker that failed.
  int retries = 1;
};

class WorkerProcess;

// Evaluates genomes in one or more worker subprocesses. Each worker
// advertises a capacity at handshake and may hold that many requests in
// flight; responses are matched to requests by id, so workers may answer in
// any order.
class ExternalEvaluator : public Evaluator {
 public:
  // Launches and handshakes every worker. Throws TransportError on launch
  // failure, protocol mismatch, or a rejected handshake.
  explicit ExternalEvaluator(ExternalEvaluatorOptions options);
  ~ExternalEvaluator() override;

  ExternalEvaluator(const ExternalEvaluator&) = delete;
  ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

  std::string id() const override { return evaluator_id_; }
  int capacity() const override;
  EvalResponse Evaluate(const EvalRequest& request) override;
  std::vector<EvalResponse> EvaluateBatch(
      std::span<const EvalRequest> requests) override;

 private:
  struct Worker;

  void StartWorker(Worker& worker);
  // Runs `indices` on one worker; returns the indices left unanswered after
  // a transport failure (empty on success).
  std::vector<std::size_t> RunOnWorker(Worker& worker,
                                       std::span<const EvalRequest> requests,
                                       const std::vector<std::size_t>& indices,
                                       std::vector<EvalResponse>& responses);

  ExternalEvaluatorOptions options_;
  std::string evaluator_id_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::atomic<std::uint64_t> next_id_{1};
};

}  // namespace segnas

#endif  // SEGNAS_EXTERNAL_EVALUATOR_H_
