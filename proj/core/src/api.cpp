#include "refsearch/api.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <mutex>
#include <thread>

namespace refsearch {

using nlohmann::json;

json ApiError::to_json() const {
  json out{{"code", code}, {"message", message}};
  if (offset) out["offset"] = *offset;
  if (length) out["length"] = *length;
  return out;
}

namespace {

std::optional<std::size_t> parse_count(const std::string& text) {
  std::size_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

ApiError bad_request(std::string message) { return ApiError{400, "bad_request", std::move(message), {}, {}}; }

ApiResponse error_response(const ApiError& e) { return ApiResponse{e.http_status, e.to_json()}; }

ApiResponse not_found(const std::string& what) {
  return error_response(ApiError{404, "not_found", what + " not found", {}, {}});
}

}  // namespace

std::variant<SearchRequest, ApiError> build_search_request(const SearchParams& params) {
  SearchRequest request;
  if (params.q && params.q->find_first_not_of(" \t\r\n") != std::string::npos) {
    try {
      request.query = parse_query(*params.q);
    } catch (const ParseError& e) {
      return ApiError{400, "parse_error", e.message(), e.offset(), e.length()};
    }
  }
  if (params.offset) {
    auto v = parse_count(*params.offset);
    if (!v) return bad_request("offset must be a non-negative integer");
    request.offset = *v;
  }
  if (params.limit) {
    auto v = parse_count(*params.limit);
    if (!v) return bad_request("limit must be a non-negative integer");
    if (*v > kMaxPageSize) return bad_request("limit must be at most " + std::to_string(kMaxPageSize));
    request.limit = *v;
  }
  if (params.sort && !params.sort->empty()) {
    try {
      request.sort = SortSpec::parse(*params.sort);
    } catch (const std::invalid_argument& e) {
      return bad_request(std::string("invalid sort: ") + e.what());
    }
  }
  return request;
}

ApiResponse ApiService::search(const SearchParams& params) const {
  auto built = build_search_request(params);
  if (auto* error = std::get_if<ApiError>(&built)) return error_response(*error);
  return ApiResponse{200, to_json(store_.search(std::get<SearchRequest>(built)))};
}

ApiResponse ApiService::get_case(const std::string& id) const {
  auto c = store_.get_case(id);
  if (!c) return not_found("case " + id);
  json body = to_json(*c);
  if (auto url = commit_url(*c)) body["commitUrl"] = *url;
  return ApiResponse{200, std::move(body)};
}

ApiResponse ApiService::types() const {
  const StoreStats stats = store_.stats();
  std::vector<std::pair<std::string, std::size_t>> counts(stats.counts_by_type.begin(), stats.counts_by_type.end());
  std::stable_sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  json body = json::array();
  for (const auto& [type, count] : counts) body.push_back({{"type", type}, {"count", count}});
  return ApiResponse{200, std::move(body)};
}

ApiResponse ApiService::stats() const { return ApiResponse{200, to_json(store_.stats())}; }

ApiResponse ApiService::submit_job(const std::string& body) const {
  if (registry_ == nullptr || runner_ == nullptr) {
    return error_response(ApiError{400, "bad_request", "job submission is disabled", {}, {}});
  }
  JobRequest request;
  try {
    request = job_request_from_json(json::parse(body));
  } catch (const json::parse_error& e) {
    return error_response(bad_request(std::string("request body is not JSON: ") + e.what()));
  } catch (const std::invalid_argument& e) {
    return error_response(bad_request(e.what()));
  }
  if (auto problems = request.problems(); !problems.empty()) {
    std::string message = problems.front();
    for (std::size_t i = 1; i < problems.size(); ++i) message += "; " + problems[i];
    return error_response(bad_request(message));
  }
  return ApiResponse{202, to_json(runner_->submit(request))};
}

ApiResponse ApiService::list_jobs() const {
  json body = json::array();
  if (registry_ != nullptr) {
    for (const auto& job : registry_->list()) body.push_back(to_json(job));
  }
  return ApiResponse{200, std::move(body)};
}

ApiResponse ApiService::get_job(const std::string& id) const {
  std::optional<IngestJob> job;
  if (registry_ != nullptr) job = registry_->get(id);
  if (!job) return not_found("job " + id);
  return ApiResponse{200, to_json(*job)};
}

// ---------------------------------------------------------------------------

struct ApiServer::Impl {
  enum class State { Idle, Bound, Listening, Stopped };

  const ApiService& service;
  ServerOptions options;
  httplib::Server server;
  int port = -1;
  std::mutex mutex;
  State state = State::Idle;

  Impl(const ApiService& s, ServerOptions o) : service(s), options(std::move(o)) {}

  // httplib only releases the listening socket from a running server, so a
  // socket that was bound but never served is closed by a short listen.
  void close_bound_socket() {
    std::thread t([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    server.stop();
    t.join();
  }
};

namespace {

void reply(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

}  // namespace

ApiServer::ApiServer(const ApiService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& srv = impl_->server;
  const ApiService& api = impl_->service;

  // Without SO_REUSEPORT so that a second server on a busy port fails to bind.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  srv.Get("/api/refactorings", [&api](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.search(SearchParams{param(req, "q"), param(req, "offset"), param(req, "limit"), param(req, "sort")}));
  });
  srv.Get(R"(/api/refactorings/([^/]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.get_case(req.matches[1]));
  });
  srv.Get("/api/meta/types", [&api](const httplib::Request&, httplib::Response& res) { reply(res, api.types()); });
  srv.Get("/api/stats", [&api](const httplib::Request&, httplib::Response& res) { reply(res, api.stats()); });
  srv.Post("/api/jobs", [&api](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.submit_job(req.body));
    if (res.status == 202) {
      res.set_header("Location", "/api/jobs/" + json::parse(res.body).at("jobId").get<std::string>());
    }
  });
  srv.Get("/api/jobs", [&api](const httplib::Request&, httplib::Response& res) { reply(res, api.list_jobs()); });
  srv.Get(R"(/api/jobs/([^/]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.get_job(req.matches[1]));
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    reply(res, ApiResponse{500, ApiError{500, "internal", message, {}, {}}.to_json()});
  });
  srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (req.path.rfind("/api/", 0) == 0 || res.status != 404) {
      const std::string code = res.status == 404 ? "not_found" : res.status >= 500 ? "internal" : "bad_request";
      reply(res, ApiResponse{res.status, ApiError{res.status, code, "no route for " + req.method + " " + req.path, {}, {}}
                                             .to_json()});
    }
  });

  if (impl_->options.ui_origin) {
    const std::string origin = *impl_->options.ui_origin;
    srv.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    });
    srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
  }
  if (impl_->options.ui_dir) {
    if (!srv.set_mount_point("/", impl_->options.ui_dir->string())) {
      throw std::runtime_error("UI directory " + impl_->options.ui_dir->string() + " does not exist");
    }
  }
}

ApiServer::~ApiServer() {
  if (!impl_) return;
  stop();
  std::lock_guard lock(impl_->mutex);
  if (impl_->state == Impl::State::Bound) {
    impl_->close_bound_socket();
    impl_->state = Impl::State::Stopped;
  }
}

int ApiServer::bind() {
  std::lock_guard lock(impl_->mutex);
  if (impl_->state != Impl::State::Idle) throw std::logic_error("server is already bound");
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(o.host);
  } else {
    impl_->port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (impl_->port < 0) {
    throw std::runtime_error("cannot listen on " + o.host + ":" + std::to_string(o.port) + " (address in use?)");
  }
  impl_->state = Impl::State::Bound;
  return impl_->port;
}

void ApiServer::listen() {
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->state == Impl::State::Idle) throw std::logic_error("listen() before bind()");
    if (impl_->state != Impl::State::Bound) return;
    impl_->state = Impl::State::Listening;
  }
  impl_->server.listen_after_bind();
}

void ApiServer::stop() {
  if (!impl_) return;
  std::lock_guard lock(impl_->mutex);
  switch (impl_->state) {
    case Impl::State::Listening:
      impl_->server.wait_until_ready();
      impl_->server.stop();
      break;
    case Impl::State::Bound:
      impl_->close_bound_socket();
      break;
    default:
      break;
  }
  impl_->state = Impl::State::Stopped;
}

bool ApiServer::is_running() const { return impl_->server.is_running(); }

}  // namespace refsearch
