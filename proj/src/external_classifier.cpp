// Copyright 2026 The segshap Authors
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

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "segshap/model.hpp"

namespace segshap {

namespace {

using nlohmann::json;

/// Line-oriented bidirectional pipe to a child process started with
/// /bin/sh -c <command>.
class LineProcess {
 public:
  explicit LineProcess(const std::string& command) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw HandshakeFailure("pipe() failed");
    }
    pid_ = fork();
    if (pid_ < 0) throw HandshakeFailure("fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    out_ = fdopen(to_child[1], "w");
    in_ = fdopen(from_child[0], "r");
    if (out_ == nullptr || in_ == nullptr) {
      throw HandshakeFailure("fdopen() failed");
    }
    signal(SIGPIPE, SIG_IGN);
  }

  ~LineProcess() {
    if (out_ != nullptr) fclose(out_);
    if (in_ != nullptr) fclose(in_);
    if (pid_ > 0) {
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == 0) {
        kill(pid_, SIGTERM);
        waitpid(pid_, &status, 0);
      }
    }
  }

  LineProcess(const LineProcess&) = delete;
  LineProcess& operator=(const LineProcess&) = delete;

  void write_line(const std::string& line) {
    if (std::fputs(line.c_str(), out_) == EOF || std::fputc('\n', out_) == EOF ||
        std::fflush(out_) != 0) {
      throw ProcessExit("external classifier closed its input");
    }
  }

  std::string read_line() {
    std::string line;
    int c;
    while ((c = std::fgetc(in_)) != EOF) {
      if (c == '\n') return line;
      line.push_back(static_cast<char>(c));
    }
    throw ProcessExit("external classifier closed its output");
  }

 private:
  pid_t pid_ = -1;
  std::FILE* out_ = nullptr;
  std::FILE* in_ = nullptr;
};

class ExternalClassifier final : public Classifier {
 public:
  explicit ExternalClassifier(const std::string& command)
      : process_(command) {
    json reply;
    try {
      reply = roundtrip(json{{"op", "info"}});
    } catch (const ProcessExit& e) {
      throw HandshakeFailure(std::string("info handshake failed: ") + e.what());
    } catch (const ProtocolViolation& e) {
      throw HandshakeFailure(std::string("info handshake failed: ") + e.what());
    }
    if (!reply.contains("classes") || !reply["classes"].is_array() ||
        reply["classes"].empty() || !reply.contains("n_channels") ||
        !reply.contains("length")) {
      throw HandshakeFailure("malformed info reply");
    }
    for (const auto& name : reply["classes"]) {
      if (!name.is_string()) throw HandshakeFailure("malformed info reply");
      names_.push_back(name.get<std::string>());
    }
    const long long d = reply["n_channels"].get<long long>();
    const long long len = reply["length"].get<long long>();
    if (d < 1 || len < 1) throw HandshakeFailure("malformed info reply");
    channels_ = static_cast<std::size_t>(d);
    length_ = static_cast<std::size_t>(len);
  }

  ProbaMatrix predict_proba(std::span<const TimeSeries> batch) const override {
    check_batch(batch);
    if (batch.empty()) return {};
    json instances = json::array();
    for (const TimeSeries& x : batch) {
      json inst = json::array();
      for (std::size_t c = 0; c < x.channels(); ++c) {
        const auto chan = x.channel(c);
        inst.push_back(std::vector<double>(chan.begin(), chan.end()));
      }
      instances.push_back(std::move(inst));
    }
    const json reply =
        roundtrip(json{{"op", "predict_proba"}, {"instances", instances}});
    if (!reply.contains("proba") || !reply["proba"].is_array() ||
        reply["proba"].size() != batch.size()) {
      throw ProtocolViolation("predict_proba reply shape mismatch");
    }
    ProbaMatrix out;
    out.reserve(batch.size());
    for (const auto& row : reply["proba"]) {
      if (!row.is_array() || row.size() != names_.size()) {
        throw ProtocolViolation("probability row has wrong class count");
      }
      std::vector<double> probs;
      double total = 0.0;
      for (const auto& v : row) {
        if (!v.is_number()) throw ProtocolViolation("non-numeric probability");
        const double p = v.get<double>();
        if (!(p >= 0.0) || !std::isfinite(p)) {
          throw ProtocolViolation("negative or non-finite probability");
        }
        probs.push_back(p);
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw ProtocolViolation("probability row does not sum to 1");
      }
      out.push_back(std::move(probs));
    }
    return out;
  }

  const std::vector<std::string>& class_names() const override {
    return names_;
  }
  std::size_t channels() const override { return channels_; }
  std::size_t length() const override { return length_; }

 private:
  json roundtrip(const json& request) const {
    std::lock_guard<std::mutex> lock(io_mutex_);
    process_.write_line(request.dump());
    const std::string line = process_.read_line();
    json reply = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (reply.is_discarded() || !reply.is_object()) {
      throw ProtocolViolation("reply is not a JSON object: " + line);
    }
    if (reply.contains("error")) {
      throw ExternalProtocolError(reply["error"].is_string()
                                      ? reply["error"].get<std::string>()
                                      : "unspecified external error");
    }
    return reply;
  }

  mutable std::mutex io_mutex_;
  mutable LineProcess process_;
  std::vector<std::string> names_;
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
};

}  // namespace

ClassifierHandle connect_external(const std::string& command) {
  return std::make_shared<ExternalClassifier>(command);
}

}  // namespace segshap
