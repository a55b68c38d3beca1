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

#include "segnas/evaluator.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "segnas/errors.h"

namespace segnas {

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos
                         ? ""
                         : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double ParseDouble(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw EvaluationError(std::string("cannot parse ") + what + " '" + text +
                          "'");
  }
}

std::int64_t ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

void ValidateRequest(const EvalRequest& request) {
  if (!(request.subset_fraction > 0.0 && request.subset_fraction <= 1.0)) {
    throw EvaluationError("subset_fraction must lie in (0, 1]");
  }
}

std::vector<EvalResponse> Evaluator::EvaluateBatch(
    std::span<const EvalRequest> requests) {
  std::vector<EvalResponse> responses(requests.size());
  const std::size_t workers = std::min<std::size_t>(
      std::max(1, capacity()), requests.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      responses[i] = Evaluate(requests[i]);
    }
    return responses;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < requests.size(); i = next++) {
        try {
          responses[i] = Evaluate(requests[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return responses;
}

double HashNoise(const Genome& genome) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : genome.Canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

double SurrogateError(const Genome& genome, const SurrogateConstants& c) {
  double error = 0.0;
  if (genome.space() == SpaceId::kXception) {
    const XceptionArch arch = DecodeXception(genome);
    const int removed = 16 - arch.ActiveBlocks();
    const int excess = std::max(0, arch.entry_stride - 2);
    const bool large_aspp = arch.aspp_rates == std::array{12, 24, 36};
    error = c.base_xception + c.removal * removed +
            c.stride * excess * excess - (large_aspp ? c.aspp : 0.0);
  } else {
    const MobileNetV2Arch arch = DecodeMobileNetV2(genome);
    const MobileNetV2Arch supernet = MobileNetV2Supernet();
    const int removed = supernet.ActiveLayers() - arch.ActiveLayers();
    int excess_sq = 0;
    for (int i = 0; i < 4; ++i) {
      const int e = std::max(0, arch.strides[i] - supernet.strides[i]);
      excess_sq += e * e;
    }
    error = c.base_mobilenetv2 + c.removal * removed + c.stride * excess_sq;
  }
  error += c.noise * HashNoise(genome);
  return std::clamp(error, 0.0, 100.0);
}

SyntheticEvaluator::SyntheticEvaluator(SurrogateConstants constants,
                                       ThroughputModel throughput,
                                       std::optional<int> input_side)
    : constants_(constants), throughput_(throughput), input_side_(input_side) {
  throughput_.Validate();
}

EvalResponse SyntheticEvaluator::Evaluate(const EvalRequest& request) {
  ValidateRequest(request);
  const auto start = std::chrono::steady_clock::now();
  EvalResponse response;
  response.evaluator_id = id();
  response.miou_error_pct = SurrogateError(request.genome, constants_);
  if (request.want_latency) {
    response.latency_cycles =
        CostOf(request.genome, throughput_, input_side_).latency_cycles;
  }
  response.wall_time_ms = ElapsedMs(start);
  return response;
}

std::vector<EvalResponse> SyntheticEvaluator::EvaluateBatch(
    std::span<const EvalRequest> requests) {
  std::vector<EvalResponse> out;
  out.reserve(requests.size());
  for (const EvalRequest& r : requests) out.push_back(Evaluate(r));
  return out;
}

TableEvaluator::Key TableEvaluator::KeyOf(const std::string& genome,
                                          double fraction) {
  return {genome, std::llround(fraction * 1e6)};
}

TableEvaluator TableEvaluator::FromCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvaluationError("cannot open evaluation table " + path);
  std::stringstream text;
  text << in.rdbuf();
  return FromCsvText(text.str(), "table:" + path);
}

TableEvaluator TableEvaluator::FromCsvText(const std::string& text,
                                           std::string id) {
  TableEvaluator table;
  table.id_ = std::move(id);
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  bool has_latency = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = SplitCsvLine(line);
    if (!header_seen) {
      if (fields.size() < 3 || fields[0] != "genome" ||
          fields[1] != "subset_fraction" || fields[2] != "miou_error_pct" ||
          (fields.size() == 4 && fields[3] != "latency_cycles") ||
          fields.size() > 4) {
        throw EvaluationError(
            "evaluation table header must be "
            "genome,subset_fraction,miou_error_pct[,latency_cycles]");
      }
      has_latency = fields.size() == 4;
      header_seen = true;
      continue;
    }
    if (fields.size() != (has_latency ? 4u : 3u)) {
      throw EvaluationError("evaluation table line " +
                            std::to_string(line_no) +
                            " has the wrong number of fields");
    }
    const Genome genome = Genome::Parse(fields[0]);
    Row row;
    row.miou_error_pct = ParseDouble(fields[2], "miou_error_pct");
    if (has_latency && !fields[3].empty()) {
      row.latency_cycles = ParseDouble(fields[3], "latency_cycles");
    }
    table.rows_[KeyOf(genome.Canonical(),
                      ParseDouble(fields[1], "subset_fraction"))] = row;
  }
  if (!header_seen) throw EvaluationError("evaluation table is empty");
  return table;
}

EvalResponse TableEvaluator::Evaluate(const EvalRequest& request) {
  ValidateRequest(request);
  const auto it =
      rows_.find(KeyOf(request.genome.Canonical(), request.subset_fraction));
  if (it == rows_.end()) {
    throw MissingEntryError("no table entry for " +
                            request.genome.Canonical() + " at fraction " +
                            std::to_string(request.subset_fraction));
  }
  EvalResponse response;
  response.evaluator_id = id_;
  response.miou_error_pct = it->second.miou_error_pct;
  if (request.want_latency) response.latency_cycles = it->second.latency_cycles;
  return response;
}

std::vector<EvalResponse> TableEvaluator::EvaluateBatch(
    std::span<const EvalRequest> requests) {
  std::vector<EvalResponse> out;
  out.reserve(requests.size());
  for (const EvalRequest& r : requests) out.push_back(Evaluate(r));
  return out;
}

}  // namespace segnas
