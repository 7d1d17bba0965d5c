#include "classtalk/http_util.hpp"

#include <charconv>

#include <httplib.h>

#include "classtalk/errors.hpp"

namespace classtalk::http {

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

Url parse_url(std::string_view url) {
  Url out;
  std::string_view rest = url;
  if (auto pos = rest.find("://"); pos != std::string_view::npos) {
    out.scheme = std::string(rest.substr(0, pos));
    rest.remove_prefix(pos + 3);
  } else {
    out.scheme = "http";
  }
  if (out.scheme != "http" && out.scheme != "https") {
    throw ConfigError("unsupported URL scheme in '" + std::string(url) + "'");
  }
  std::string_view authority = rest;
  if (auto slash = rest.find('/'); slash != std::string_view::npos) {
    authority = rest.substr(0, slash);
    out.path = std::string(rest.substr(slash));
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  }
  out.port = out.scheme == "https" ? 443 : 80;
  if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const auto port_text = authority.substr(colon + 1);
    int port = 0;
    const auto [ptr, ec] =
        std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port <= 0 ||
        port > 65535) {
      throw ConfigError("invalid port in '" + std::string(url) + "'");
    }
    out.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw ConfigError("missing host in '" + std::string(url) + "'");
  out.host = std::string(authority);
  return out;
}

namespace {

httplib::Client make_client(const Url& base, std::chrono::duration<double> timeout) {
  httplib::Client client(base.origin());
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(usec);
  const auto rem = usec - sec;
  client.set_connection_timeout(sec.count(), rem.count());
  client.set_read_timeout(sec.count(), rem.count());
  client.set_write_timeout(sec.count(), rem.count());
  return client;
}

std::variant<Response, Failure> convert(const httplib::Result& res) {
  if (!res) return Failure{httplib::to_string(res.error())};
  return Response{res->status, res->body};
}

}  // namespace

std::variant<Response, Failure> post(const Url& base, const std::string& path,
                                     const std::string& body, const Headers& headers,
                                     std::chrono::duration<double> timeout) {
  auto client = make_client(base, timeout);
  httplib::Headers h(headers.begin(), headers.end());
  return convert(client.Post(base.path + path, h, body, "application/json"));
}

std::variant<Response, Failure> get(const Url& base, const std::string& path,
                                    std::chrono::duration<double> timeout) {
  auto client = make_client(base, timeout);
  return convert(client.Get(base.path + path));
}

}  // namespace classtalk::http
