#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>

#include "heavytail/error.hpp"
#include "heavytail/ingestion.hpp"

namespace heavytail {

struct FetchOptions {
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff{200};
  std::string user_agent = "heavytail/0.1";

  /// Defaults overridden by HEAVYTAIL_TIMEOUT (seconds) and HEAVYTAIL_USER_AGENT.
  static FetchOptions from_environment() {
    FetchOptions options;
    if (const char *t = std::getenv("HEAVYTAIL_TIMEOUT")) {
      char *end = nullptr;
      const double seconds = std::strtod(t, &end);
      if (end != t && *end == '\0' && seconds > 0.0)
        options.timeout = std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
    }
    if (const char *ua = std::getenv("HEAVYTAIL_USER_AGENT"); ua && *ua)
      options.user_agent = ua;
    return options;
  }
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// One GET, no retries. Implementations throw Error(Transport) for connection
/// failures and Error(Timeout) when the timeout elapses.
class HttpTransport {
public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string &url, const FetchOptions &options) = 0;
};

struct ParsedUrl {
  std::string scheme;
  std::string authority; // host[:port]
  std::string path;      // path + query, at least "/"
};

inline ParsedUrl parse_url(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos)
    throw Error(ErrorCode::Validation, "not an absolute URL: '" + std::string(url) + "'");
  ParsedUrl out;
  out.scheme = html::detail::lower(url.substr(0, sep));
  if (out.scheme != "http" && out.scheme != "https")
    throw Error(ErrorCode::Validation, "unsupported URL scheme '" + out.scheme + "'");
  const auto rest = url.substr(sep + 3);
  const auto slash = rest.find_first_of("/?#");
  out.authority = std::string(rest.substr(0, slash));
  if (out.authority.empty())
    throw Error(ErrorCode::Validation, "URL has no host: '" + std::string(url) + "'");
  out.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (const auto hash = out.path.find('#'); hash != std::string::npos)
    out.path.erase(hash);
  if (out.path.empty() || out.path.front() != '/')
    out.path.insert(0, "/");
  return out;
}

/// Resolves a link found on `base` (absolute, root-relative or relative).
inline std::string resolve_url(std::string_view base, std::string_view href) {
  if (href.find("://") != std::string_view::npos)
    return std::string(href);
  const auto parsed = parse_url(base);
  const std::string origin = parsed.scheme + "://" + parsed.authority;
  if (href.starts_with("//"))
    return parsed.scheme + ":" + std::string(href);
  if (href.starts_with("/"))
    return origin + std::string(href);
  std::string dir = parsed.path.substr(0, parsed.path.find('?'));
  dir = dir.substr(0, dir.rfind('/') + 1);
  return origin + dir + std::string(href);
}

/// Per-year page URL: "&year=<value>" appended to the ranking URL ('?' when
/// the URL has no query yet).
inline std::string year_url(std::string_view ranking_url, std::string_view year_value) {
  std::string url(ranking_url);
  url += url.find('?') == std::string::npos ? "?year=" : "&year=";
  url += year_value;
  return url;
}

class HttplibTransport final : public HttpTransport {
public:
  HttpResponse get(const std::string &url, const FetchOptions &options) override {
    const ParsedUrl parsed = parse_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (parsed.scheme == "https")
      throw Error(ErrorCode::Transport, "HTTPS support was not compiled in");
#endif
    httplib::Client client(parsed.scheme + "://" + parsed.authority);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    client.set_follow_location(true);
    const httplib::Headers headers{{"User-Agent", options.user_agent}};

    const auto started = std::chrono::steady_clock::now();
    auto result = client.Get(parsed.path, headers);
    if (!result) {
      const auto err = result.error();
      const auto elapsed = std::chrono::steady_clock::now() - started;
      const bool timed_out =
          err == httplib::Error::ConnectionTimeout ||
          ((err == httplib::Error::Read || err == httplib::Error::Write) &&
           elapsed >= options.timeout * 9 / 10);
      if (timed_out)
        throw Error(ErrorCode::Timeout, "no response from " + url + " within " +
                                            std::to_string(options.timeout.count()) + " ms");
      throw Error(ErrorCode::Transport, httplib::to_string(err) + " (" + url + ")");
    }
    return HttpResponse{result->status, result->body};
  }
};

/// GET with retries: connection failures and 5xx responses are retried up to
/// `options.retries` times with exponential backoff; other non-2xx statuses
/// and timeouts fail immediately.
inline std::string fetch_page(const std::string &url, HttpTransport &transport,
                              const FetchOptions &options = {}) {
  parse_url(url);
  auto delay = options.backoff;
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= options.retries;
    try {
      const HttpResponse response = transport.get(url, options);
      if (response.status >= 200 && response.status < 300)
        return response.body;
      if (response.status < 500 || last)
        throw Error(ErrorCode::Transport,
                    "HTTP " + std::to_string(response.status) + " for " + url, response.status);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::Transport || e.status() != 0 || last)
        throw;
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

struct DownloadedPages {
  std::vector<PageInput> pages;
  std::vector<std::string> warnings;
};

/// Fetches a ranking page, reads its year selector and fetches every year's
/// page with at most `parallel` requests in flight. Pages come back in
/// selector order regardless of completion order.
inline DownloadedPages download_ranking(const std::string &ranking_url, HttpTransport &transport,
                                        const FetchOptions &options, const Selectors &sel = {},
                                        std::size_t parallel = 4) {
  DownloadedPages out;
  const std::string first = fetch_page(ranking_url, transport, options);
  auto years = parse_years(first, sel);
  out.warnings = years.warnings;
  if (years.fallback) {
    out.pages.push_back(PageInput{years.years.front().label, first});
    return out;
  }

  const std::size_t n = years.years.size();
  out.pages.resize(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out.pages[i] = PageInput{years.years[i].label,
                                 fetch_page(year_url(ranking_url, years.years[i].value),
                                            transport, options)};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t workers = std::clamp<std::size_t>(parallel, 1, n);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(worker);
  }
  for (auto &failure : failures)
    if (failure)
      std::rethrow_exception(failure);
  return out;
}

} // namespace heavytail
