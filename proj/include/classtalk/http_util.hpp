#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace classtalk::http {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // without trailing slash; may be empty

  std::string origin() const;
};

// Parses "scheme://host[:port][/path]"; a missing scheme means http. Throws
// ConfigError.
Url parse_url(std::string_view url);

struct Response {
  int status = 0;
  std::string body;
};

// Connection-level failure description (refused, timeout, TLS, ...).
struct Failure {
  std::string message;
};

using Headers = std::multimap<std::string, std::string>;

std::variant<Response, Failure> post(const Url& base, const std::string& path,
                                     const std::string& body, const Headers& headers,
                                     std::chrono::duration<double> timeout);

std::variant<Response, Failure> get(const Url& base, const std::string& path,
                                    std::chrono::duration<double> timeout);

}  // namespace classtalk::http
