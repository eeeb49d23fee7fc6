// Copyright 2026 The treedet Authors
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

#include "treedet/adapter.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <httplib.h>
#include <mutex>
#include <nlohmann/json.hpp>

#include "treedet/base64.hpp"
#include "treedet/detfile.hpp"
#include "treedet/error.hpp"

namespace treedet {

using nlohmann::json;

namespace {

json parse_line(std::string_view line, Errc code, const char* what) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(code, std::string(what) + " is not valid JSON: " + e.what());
  }
}

class StdioTransport final : public AdapterTransport {
 public:
  explicit StdioTransport(const std::string& command) {
    // A dead adapter must surface as EPIPE, not kill the client.
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

    // Close-on-exec so adapters spawned by other threads never inherit these
    // ends; a stray copy of a write end would keep this child from seeing EOF.
    int to_child[2], from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error(Errc::connection, "pipe() failed");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error(Errc::connection, "pipe() failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw Error(Errc::connection, "fork() failed");
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
  }

  ~StdioTransport() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  StdioTransport(const StdioTransport&) = delete;
  StdioTransport& operator=(const StdioTransport&) = delete;

  std::string exchange(const std::string& request_line) override {
    std::string framed = request_line;
    framed.push_back('\n');
    std::size_t sent = 0;
    while (sent < framed.size()) {
      const ssize_t n = ::write(write_fd_, framed.data() + sent, framed.size() - sent);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(Errc::connection, std::string("adapter write failed: ") + std::strerror(errno));
      sent += std::size_t(n);
    }
    for (;;) {
      const std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(Errc::connection, "adapter closed its output before replying");
      buffer_.append(chunk, std::size_t(n));
    }
  }

 private:
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
};

class HttpTransport final : public AdapterTransport {
 public:
  HttpTransport(const std::string& base, std::string path) : client_(base), path_(std::move(path)) {
    client_.set_connection_timeout(10, 0);
    client_.set_read_timeout(120, 0);
  }

  std::string exchange(const std::string& request_line) override {
    auto res = client_.Post(path_, request_line, "application/json");
    if (!res) {
      throw Error(Errc::connection, "HTTP request failed: " + httplib::to_string(res.error()));
    }
    std::string body = res->body;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    if (res->status != 200) {
      // Adapters report protocol errors with a JSON body; pass it on for decoding.
      if (!body.empty() && body.front() == '{') return body;
      throw Error(Errc::connection, "HTTP status " + std::to_string(res->status));
    }
    return body;
  }

 private:
  httplib::Client client_;
  std::string path_;
};

}  // namespace

std::string encode_request(const InferRequest& req) {
  json j;
  j["protocol"] = req.protocol;
  j["tile_id"] = req.tile_id;
  j["image"] = base64_encode(req.png);
  j["min_confidence"] = req.min_confidence;
  j["max_instances"] = req.max_instances;
  return j.dump();
}

InferRequest decode_request(std::string_view line) {
  const json j = parse_line(line, Errc::protocol, "request");
  if (!j.is_object()) throw Error(Errc::protocol, "request must be a JSON object");
  InferRequest r;
  try {
    r.protocol = j.at("protocol").get<int>();
    r.tile_id = j.at("tile_id").get<std::string>();
    r.png = base64_decode(j.at("image").get<std::string>());
    r.min_confidence = j.at("min_confidence").get<double>();
    r.max_instances = j.at("max_instances").get<int>();
  } catch (const json::exception& e) {
    throw Error(Errc::protocol, std::string("malformed request: ") + e.what());
  }
  return r;
}

std::string encode_response(const std::string& tile_id, const std::vector<Detection>& dets, int protocol) {
  json j;
  j["protocol"] = protocol;
  j["tile_id"] = tile_id;
  json arr = json::array();
  for (const Detection& d : dets) arr.push_back(detection_to_json(d));
  j["detections"] = std::move(arr);
  return j.dump();
}

std::string encode_error_response(const std::string& tile_id, const std::string& message, int protocol) {
  json j;
  j["protocol"] = protocol;
  j["tile_id"] = tile_id;
  j["error"] = message;
  return j.dump();
}

std::vector<Detection> decode_response(std::string_view line, const std::string& expected_tile_id) {
  const json j = parse_line(line, Errc::schema, "response");
  if (!j.is_object()) throw Error(Errc::schema, "response must be a JSON object");
  if (!j.contains("protocol") || !j["protocol"].is_number_integer()) {
    throw Error(Errc::schema, "response lacks an integer protocol field");
  }
  const int protocol = j["protocol"].get<int>();
  if (protocol != kProtocolVersion) {
    throw Error(Errc::protocol, "protocol version mismatch: adapter speaks " + std::to_string(protocol) +
                                    ", client speaks " + std::to_string(kProtocolVersion));
  }
  if (j.contains("error")) {
    throw Error(Errc::protocol, "adapter error: " + (j["error"].is_string() ? j["error"].get<std::string>()
                                                                             : j["error"].dump()));
  }
  for (const auto& [k, v] : j.items()) {
    if (k != "protocol" && k != "tile_id" && k != "detections") {
      throw Error(Errc::schema, "response has unexpected key '" + k + "'");
    }
  }
  if (!j.contains("tile_id") || !j["tile_id"].is_string()) throw Error(Errc::schema, "response lacks tile_id");
  if (j["tile_id"].get<std::string>() != expected_tile_id) {
    throw Error(Errc::protocol, "response tile_id '" + j["tile_id"].get<std::string>() +
                                    "' does not match request '" + expected_tile_id + "'");
  }
  if (!j.contains("detections") || !j["detections"].is_array()) {
    throw Error(Errc::schema, "response detections must be an array");
  }
  std::vector<Detection> out;
  std::size_t i = 0;
  for (const json& d : j["detections"]) {
    out.push_back(detection_from_json(d, "tile " + expected_tile_id + " detection " + std::to_string(i++)));
  }
  return out;
}

std::unique_ptr<AdapterTransport> connect_adapter(const std::string& endpoint) {
  if (endpoint.rfind("stdio:", 0) == 0) {
    const std::string command = endpoint.substr(6);
    if (command.empty()) throw Error(Errc::invalid_argument, "stdio endpoint needs a command");
    return std::make_unique<StdioTransport>(command);
  }
  if (endpoint.rfind("http://", 0) == 0) {
    const std::size_t slash = endpoint.find('/', 7);
    const std::string base = slash == std::string::npos ? endpoint : endpoint.substr(0, slash);
    std::string path = slash == std::string::npos ? std::string("/infer") : endpoint.substr(slash);
    if (path == "/") path = "/infer";
    return std::make_unique<HttpTransport>(base, std::move(path));
  }
  throw Error(Errc::invalid_argument, "unsupported adapter endpoint '" + endpoint +
                                          "' (expected stdio:<cmd> or http://host:port)");
}

}  // namespace treedet
