#include <chrono>
#include <string>

#include <gtest/gtest.h>

#include "heavytail/http.hpp"
#include "local_server.hpp"

using namespace heavytail;
using namespace std::chrono_literals;

TEST(Url, ParseAndResolve) {
  const auto u = parse_url("https://www.rankingthebrands.com/The-Brand-Rankings.aspx?x=1#f");
  EXPECT_EQ(u.scheme, "https");
  EXPECT_EQ(u.authority, "www.rankingthebrands.com");
  EXPECT_EQ(u.path, "/The-Brand-Rankings.aspx?x=1");
  EXPECT_EQ(parse_url("http://h:8080").path, "/");
  EXPECT_THROW(parse_url("ftp://x/"), Error);
  EXPECT_THROW(parse_url("nope"), Error);

  const std::string base = "http://h/dir/page.aspx?q=1";
  EXPECT_EQ(resolve_url(base, "/ranking?rankingID=1"), "http://h/ranking?rankingID=1");
  EXPECT_EQ(resolve_url(base, "other.aspx"), "http://h/dir/other.aspx");
  EXPECT_EQ(resolve_url(base, "https://e.org/x"), "https://e.org/x");
  EXPECT_EQ(resolve_url(base, "//cdn/x"), "http://cdn/x");
}

TEST(Url, YearParameter) {
  EXPECT_EQ(year_url("http://h/r?rankingID=1", "12"), "http://h/r?rankingID=1&year=12");
  EXPECT_EQ(year_url("http://h/r", "12"), "http://h/r?year=12");
}

TEST(Fetch, OkAndNotFound) {
  LocalServer server;
  HttplibTransport transport;
  FetchOptions opt;
  opt.backoff = 10ms;
  EXPECT_NE(fetch_page(server.url("/index"), transport, opt).find("listRankings"),
            std::string::npos);
  try {
    fetch_page(server.url("/missing"), transport, opt);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::Transport);
    EXPECT_EQ(e.status(), 404);
  }
}

TEST(Fetch, RetriesServerErrors) {
  LocalServer server;
  HttplibTransport transport;
  FetchOptions opt;
  opt.backoff = 10ms;
  opt.retries = 2;
  EXPECT_EQ(fetch_page(server.url("/flaky"), transport, opt), "ok");
  EXPECT_EQ(server.flaky_hits.load(), 3);
}

TEST(Fetch, Timeout) {
  LocalServer server;
  HttplibTransport transport;
  FetchOptions opt;
  opt.timeout = 1s;
  opt.backoff = 50ms;
  const auto start = std::chrono::steady_clock::now();
  try {
    fetch_page(server.url("/slow"), transport, opt);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::Timeout) << e.what();
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, 2 * opt.timeout + opt.backoff);
}

TEST(Fetch, UnreachableHost) {
  HttplibTransport transport;
  FetchOptions opt;
  opt.timeout = 2s;
  opt.retries = 0;
  try {
    // Port 9 on loopback: nothing listens there.
    fetch_page("http://127.0.0.1:9/", transport, opt);
    FAIL();
  } catch (const Error &e) {
    EXPECT_TRUE(e.code() == ErrorCode::Transport || e.code() == ErrorCode::Timeout);
  }
}

TEST(Download, AllYearsInSelectorOrder) {
  LocalServer server;
  HttplibTransport transport;
  FetchOptions opt;
  for (std::size_t parallel : {1u, 4u}) {
    const auto got = download_ranking(server.url("/ranking?rankingID=1"), transport, opt, {}, parallel);
    ASSERT_EQ(got.pages.size(), 2u);
    EXPECT_EQ(got.pages[0].label, "2015");
    EXPECT_EQ(got.pages[1].label, "2014");
    EXPECT_NE(got.pages[1].markup.find("9,486,237"), std::string::npos);
    EXPECT_EQ(got.pages[0].markup.find("9,486,237"), std::string::npos);
  }
}
