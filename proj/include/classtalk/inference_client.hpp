#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace classtalk {

struct ClassifierItem {
  std::string text;
  std::optional<std::string> context;
};

struct ClassifierRequest {
  std::string feature;
  std::vector<ClassifierItem> items;
};

struct ClassifierResponse {
  std::vector<int> labels;
  std::vector<double> scores;
  std::string model_id;
};

// Identifies the utterance an item was drawn from. Live services ignore it;
// the precomputed backend looks labels up by it.
struct RowKey {
  std::string source_id;
  std::size_t row_index = 0;
  auto operator<=>(const RowKey&) const = default;
};

// Checks a response against a request: equal lengths, labels inside
// [0, label_count), scores finite and in [0, 1]. Throws ProtocolError naming
// the feature.
void validate_response(const ClassifierRequest& request, const ClassifierResponse& response,
                       int label_count);

// Anything that can label utterances for a classifier feature.
class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;

  // `keys` is parallel to request.items. Must return one label and score per
  // item, in request order.
  virtual ClassifierResponse classify(const ClassifierRequest& request,
                                      std::span<const RowKey> keys) = 0;

  // Features this backend can serve.
  virtual std::vector<std::string> inventory() = 0;
};

struct Endpoint {
  std::string scheme = "http";
  std::string host = "127.0.0.1";
  int port = 8000;
  std::string base_path;  // prefix prepended to /classify and /health

  // Accepts "http://host:port[/prefix]" or "host:port".
  static Endpoint parse(std::string_view url);
  std::string origin() const;
};

struct ClientLimits {
  std::size_t max_batch = 32;
  std::chrono::duration<double> timeout{30.0};
  int retries = 2;
  std::chrono::milliseconds backoff_base{200};
};

struct HealthStatus {
  bool ok = false;
  std::vector<std::string> features;
};

// JSON bodies of the wire protocol.
std::string encode_request(const ClassifierRequest& request);
ClassifierRequest decode_request(std::string_view body);
std::string encode_response(const ClassifierResponse& response);
ClassifierResponse decode_response(std::string_view body);

// Splits `request` into chunks of at most limits.max_batch items, POSTs them
// to /classify in order and concatenates the results. Connection failures,
// timeouts, 429 and 5xx answers are retried up to limits.retries times with
// exponential backoff. Throws TransportError or ProtocolError.
ClassifierResponse classify_batch(const Endpoint& endpoint, const ClassifierRequest& request,
                                  const ClientLimits& limits, int label_count);

// GET /health. Throws TransportError when unreachable.
HealthStatus health_check(const Endpoint& endpoint, const ClientLimits& limits = {});

// Live service backend.
class RemoteClassifier : public ClassifierBackend {
 public:
  RemoteClassifier(Endpoint endpoint, ClientLimits limits = {});

  ClassifierResponse classify(const ClassifierRequest& request,
                              std::span<const RowKey> keys) override;
  std::vector<std::string> inventory() override;

  const Endpoint& endpoint() const { return endpoint_; }
  const ClientLimits& limits() const { return limits_; }

 private:
  Endpoint endpoint_;
  ClientLimits limits_;
};

struct PrecomputedLabel {
  int label = 0;
  double score = 0.0;
};

using PrecomputedTable = std::map<RowKey, PrecomputedLabel>;

// Rows of `feature` from a CSV with header source_id,row_index,feature,label,score.
// Throws ParseError (with 1-based line) on malformed or duplicate rows.
PrecomputedTable load_precomputed(const std::filesystem::path& path, std::string_view feature);
PrecomputedTable parse_precomputed(std::string_view csv_data, std::string_view feature);

// Backend over precomputed label files, one table per feature.
class PrecomputedClassifier : public ClassifierBackend {
 public:
  PrecomputedClassifier() = default;
  // Loads every classifier feature present in the file.
  static PrecomputedClassifier from_file(const std::filesystem::path& path);

  void add_feature(std::string feature, PrecomputedTable table);

  // Missing keys are protocol errors.
  ClassifierResponse classify(const ClassifierRequest& request,
                              std::span<const RowKey> keys) override;
  std::vector<std::string> inventory() override;

 private:
  std::map<std::string, PrecomputedTable, std::less<>> tables_;
};

}  // namespace classtalk
