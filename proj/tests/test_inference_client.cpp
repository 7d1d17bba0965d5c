#include <chrono>

#include <doctest.h>

#include "classtalk/annotator.hpp"
#include "classtalk/errors.hpp"
#include "classtalk/feature_catalog.hpp"
#include "classtalk/inference_client.hpp"
#include "mock_servers.hpp"
#include "temp_dir.hpp"

using namespace classtalk;
using classtalk::testing::MockClassifierServer;

namespace {

ClassifierRequest request_of(const std::string& feature, std::size_t n) {
  ClassifierRequest r{feature, {}};
  for (std::size_t i = 0; i < n; ++i) r.items.push_back({"item " + std::to_string(i), {}});
  return r;
}

ClientLimits fast_limits(std::size_t max_batch = 32) {
  ClientLimits l;
  l.max_batch = max_batch;
  l.timeout = std::chrono::seconds(5);
  l.backoff_base = std::chrono::milliseconds(1);
  return l;
}

const std::vector<std::string> kAll = classtalk::catalog::classifier_feature_names();

}  // namespace

TEST_SUITE("inference_client") {

TEST_CASE("wire codecs round-trip") {
  ClassifierRequest req{"uptake", {{"Why?", std::string("I added them")}, {"Ok", std::nullopt}}};
  const auto body = encode_request(req);
  CHECK(body.find("\"context\":null") != std::string::npos);
  const auto back = decode_request(body);
  CHECK(back.feature == "uptake");
  REQUIRE(back.items.size() == 2);
  CHECK(back.items[0].context == "I added them");
  CHECK_FALSE(back.items[1].context.has_value());

  ClassifierResponse resp{{1, 0}, {0.9, 0.25}, "m"};
  const auto r2 = decode_response(encode_response(resp));
  CHECK(r2.labels == resp.labels);
  CHECK(r2.scores == resp.scores);
  CHECK(r2.model_id == "m");
  CHECK_THROWS_AS(decode_response(R"({"labels":[1]})"), ProtocolError);
  CHECK_THROWS_AS(decode_response("not json"), ProtocolError);
}

TEST_CASE("response validation") {
  const auto req = request_of("uptake", 2);
  CHECK_NOTHROW(validate_response(req, {{0, 1}, {0.1, 1.0}, ""}, 2));
  CHECK_THROWS_AS(validate_response(req, {{0}, {0.1}, ""}, 2), ProtocolError);
  CHECK_THROWS_AS(validate_response(req, {{0, 2}, {0.1, 0.1}, ""}, 2), ProtocolError);
  CHECK_THROWS_AS(validate_response(req, {{0, 1}, {0.1, 1.5}, ""}, 2), ProtocolError);
}

TEST_CASE("endpoint parsing") {
  const auto e = Endpoint::parse("http://localhost:9000/api");
  CHECK(e.host == "localhost");
  CHECK(e.port == 9000);
  CHECK(e.base_path == "/api");
  CHECK(Endpoint::parse("127.0.0.1:8000").port == 8000);
  CHECK_THROWS_AS(Endpoint::parse("ftp://x"), ConfigError);
}

TEST_CASE("chunks requests in order") {
  MockClassifierServer server(kAll);
  const auto resp = classify_batch(Endpoint::parse(server.url()), request_of("uptake", 25),
                                   fast_limits(10), 2);
  const auto calls = server.requests();
  REQUIRE(calls.size() == 3);
  CHECK(calls[0].items.size() == 10);
  CHECK(calls[2].items.size() == 5);
  CHECK(calls[1].items[0].text == "item 10");
  REQUIRE(resp.labels.size() == 25);
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(resp.labels[i] == testing::hash_labeler("uptake", {"item " + std::to_string(i), {}}).first);
  }
}

TEST_CASE("scripted label is passed through") {
  MockClassifierServer server(kAll, [](const std::string&, const ClassifierItem&) {
    return std::pair{1, 0.5};
  });
  const auto resp = classify_batch(Endpoint::parse(server.url()),
                                   request_of("student_reasoning", 6), fast_limits(4), 2);
  CHECK(resp.labels == std::vector<int>(6, 1));
}

TEST_CASE("short response is a protocol error") {
  MockClassifierServer server(kAll);
  server.set_short_responses(true);
  CHECK_THROWS_AS(classify_batch(Endpoint::parse(server.url()), request_of("uptake", 10),
                                 fast_limits(), 2),
                  ProtocolError);
}

TEST_CASE("retries transient failures then succeeds") {
  MockClassifierServer server(kAll);
  server.script_statuses({503, 429});
  const auto resp = classify_batch(Endpoint::parse(server.url()), request_of("uptake", 3),
                                   fast_limits(), 2);
  CHECK(resp.labels.size() == 3);
  CHECK(server.attempts() == 3);
}

TEST_CASE("gives up after the retry budget") {
  MockClassifierServer server(kAll);
  server.script_statuses({500, 500, 500, 500});
  CHECK_THROWS_AS(classify_batch(Endpoint::parse(server.url()), request_of("uptake", 3),
                                 fast_limits(), 2),
                  TransportError);
  CHECK(server.attempts() == 3);
}

TEST_CASE("client errors are not retried") {
  MockClassifierServer server(kAll);
  server.script_statuses({404});
  CHECK_THROWS_AS(classify_batch(Endpoint::parse(server.url()), request_of("uptake", 3),
                                 fast_limits(), 2),
                  TransportError);
  CHECK(server.attempts() == 1);
}

TEST_CASE("unreachable service") {
  Endpoint e = Endpoint::parse("http://127.0.0.1:" + std::to_string(testing::unused_port()));
  auto limits = fast_limits();
  limits.retries = 1;
  CHECK_THROWS_AS(classify_batch(e, request_of("uptake", 1), limits, 2), TransportError);
  CHECK_THROWS_AS(health_check(e, limits), TransportError);
}

TEST_CASE("zero max_batch is a configuration error") {
  MockClassifierServer server(kAll);
  CHECK_THROWS_AS(classify_batch(Endpoint::parse(server.url()), request_of("uptake", 1),
                                 fast_limits(0), 2),
                  ConfigError);
}

TEST_CASE("health lists served features") {
  MockClassifierServer server(kAll);
  const auto h = health_check(Endpoint::parse(server.url()));
  CHECK(h.ok);
  CHECK(h.features.size() == 5);
  RemoteClassifier remote(Endpoint::parse(server.url()), fast_limits());
  CHECK(remote.inventory().size() == 5);
}

TEST_CASE("empty inventory refuses classifier annotation") {
  MockClassifierServer server({});
  RemoteClassifier remote(Endpoint::parse(server.url()), fast_limits());
  Transcript t("t", {}, {{0, "S", "one two three four five six seven eight", {}, {}}});
  const RoleMap roles = {{"S", Role::student}};
  CHECK_THROWS_AS(
      annotate_with_classifier(t, builtin_feature_spec("student_reasoning"), roles, remote),
      ConfigError);
  CHECK(server.requests().empty());
}

TEST_CASE("precomputed file parsing") {
  const std::string data =
      "source_id,row_index,feature,label,score\n"
      "a,0,uptake,1,0.9\n"
      "a,1,uptake,0,0.2\n"
      "b,0,uptake,1,0.75\n"
      "a,0,student_reasoning,1,0.5\n";
  const auto table = parse_precomputed(data, "uptake");
  CHECK(table.size() == 3);
  CHECK(table.at(RowKey{"b", 0}).score == 0.75);
  CHECK(parse_precomputed(data, "student_reasoning").size() == 1);
}

TEST_CASE("precomputed file errors carry line numbers") {
  auto line_of = [](const std::string& data) -> std::size_t {
    try {
      parse_precomputed(data, "uptake");
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string header = "source_id,row_index,feature,label,score\n";
  CHECK(line_of(header + "a,0,uptake,1,0.9\na,0,uptake,0,0.1\n") == 3);
  CHECK(line_of(header + "a,x,uptake,1,0.9\n") == 2);
  CHECK(line_of(header + "a,0,uptake,1\n") == 2);
  CHECK(line_of("source,row\n") == 1);
}

TEST_CASE("precomputed backend serves keyed labels") {
  PrecomputedClassifier pre;
  pre.add_feature("uptake", {{RowKey{"a", 1}, {1, 0.8}}});
  ClassifierRequest req{"uptake", {{"x", {}}}};
  const std::vector<RowKey> keys = {{"a", 1}};
  const auto resp = pre.classify(req, keys);
  CHECK(resp.labels == std::vector<int>{1});
  CHECK(resp.scores == std::vector<double>{0.8});
  const std::vector<RowKey> missing = {{"a", 2}};
  CHECK_THROWS_AS(pre.classify(req, missing), ProtocolError);
  CHECK(pre.inventory() == std::vector<std::string>{"uptake"});
}

TEST_CASE("precomputed from_file loads every feature") {
  testing::TempDir dir;
  const auto path = dir.write("labels.csv",
                              "source_id,row_index,feature,label,score\n"
                              "a,0,uptake,1,0.9\na,0,student_reasoning,0,0.3\n");
  auto pre = PrecomputedClassifier::from_file(path);
  auto inv = pre.inventory();
  std::sort(inv.begin(), inv.end());
  CHECK(inv == std::vector<std::string>{"student_reasoning", "uptake"});
  CHECK_THROWS_AS(load_precomputed(dir / "none.csv", "uptake"), IoError);
}

}  // TEST_SUITE
