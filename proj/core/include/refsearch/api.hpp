#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "refsearch/jobs.hpp"
#include "refsearch/store.hpp"

namespace refsearch {

constexpr int kDefaultPort = 7364;

struct ApiError {
  int http_status = 400;
  std::string code;  // parse_error, not_found, bad_request, internal
  std::string message;
  std::optional<std::size_t> offset;
  std::optional<std::size_t> length;

  nlohmann::json to_json() const;
};

/// Raw search parameters as they arrive on the query string or the CLI.
struct SearchParams {
  std::optional<std::string> q;
  std::optional<std::string> offset;
  std::optional<std::string> limit;
  std::optional<std::string> sort;
};

/// An absent or blank `q` matches everything.
std::variant<SearchRequest, ApiError> build_search_request(const SearchParams& params);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// The HTTP handlers without the transport, so they can be called directly.
class ApiService {
 public:
  ApiService(const Store& store, JobRegistry* registry = nullptr, JobRunner* runner = nullptr)
      : store_(store), registry_(registry), runner_(runner) {}

  ApiResponse search(const SearchParams& params) const;
  ApiResponse get_case(const std::string& id) const;
  ApiResponse types() const;
  ApiResponse stats() const;
  ApiResponse submit_job(const std::string& body) const;
  ApiResponse list_jobs() const;
  ApiResponse get_job(const std::string& id) const;

 private:
  const Store& store_;
  JobRegistry* registry_;
  JobRunner* runner_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;
  std::optional<std::string> ui_origin;
};

class ApiServer {
 public:
  ApiServer(const ApiService& service, ServerOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listening socket and returns the port. Throws
  /// std::runtime_error when the address is in use.
  int bind();
  /// Serves until stop(); bind() must have succeeded. Returns at once if
  /// stop() came first.
  void listen();
  /// Safe from any thread; releases the port.
  void stop();
  bool is_running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace refsearch
