#include "classtalk/inference_client.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "classtalk/csv.hpp"
#include "classtalk/errors.hpp"
#include "classtalk/feature_catalog.hpp"
#include "classtalk/http_util.hpp"
#include "classtalk/transcript.hpp"
#include "classtalk/transcript_io.hpp"

namespace classtalk {

using nlohmann::json;

void validate_response(const ClassifierRequest& request, const ClassifierResponse& response,
                       int label_count) {
  const auto& f = request.feature;
  if (response.labels.size() != request.items.size() ||
      response.scores.size() != request.items.size()) {
    throw ProtocolError("feature '" + f + "': expected " + std::to_string(request.items.size()) +
                        " results, got " + std::to_string(response.labels.size()) +
                        " labels and " + std::to_string(response.scores.size()) + " scores");
  }
  for (std::size_t i = 0; i < response.labels.size(); ++i) {
    const int label = response.labels[i];
    if (label < 0 || label >= label_count) {
      throw ProtocolError("feature '" + f + "': label " + std::to_string(label) + " at item " +
                          std::to_string(i) + " is outside 0.." +
                          std::to_string(label_count - 1));
    }
    const double score = response.scores[i];
    if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
      throw ProtocolError("feature '" + f + "': score at item " + std::to_string(i) +
                          " is outside [0, 1]");
    }
  }
}

Endpoint Endpoint::parse(std::string_view url) {
  const auto u = http::parse_url(url);
  return Endpoint{u.scheme, u.host, u.port, u.path};
}

std::string Endpoint::origin() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

std::string encode_request(const ClassifierRequest& request) {
  json items = json::array();
  for (const auto& item : request.items) {
    items.push_back({{"text", item.text},
                     {"context", item.context ? json(*item.context) : json(nullptr)}});
  }
  return json{{"feature", request.feature}, {"items", std::move(items)}}.dump();
}

ClassifierRequest decode_request(std::string_view body) {
  try {
    const auto doc = json::parse(body);
    ClassifierRequest request;
    request.feature = doc.at("feature").get<std::string>();
    for (const auto& item : doc.at("items")) {
      ClassifierItem ci;
      ci.text = item.at("text").get<std::string>();
      if (auto it = item.find("context"); it != item.end() && !it->is_null()) {
        ci.context = it->get<std::string>();
      }
      request.items.push_back(std::move(ci));
    }
    return request;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed classify request: ") + e.what());
  }
}

std::string encode_response(const ClassifierResponse& response) {
  return json{{"labels", response.labels},
              {"scores", response.scores},
              {"model_id", response.model_id}}
      .dump();
}

ClassifierResponse decode_response(std::string_view body) {
  try {
    const auto doc = json::parse(body);
    ClassifierResponse response;
    for (const auto& l : doc.at("labels")) {
      if (!l.is_number_integer()) throw ProtocolError("classify response label is not an integer");
      response.labels.push_back(l.get<int>());
    }
    for (const auto& s : doc.at("scores")) response.scores.push_back(s.get<double>());
    if (auto it = doc.find("model_id"); it != doc.end() && it->is_string()) {
      response.model_id = it->get<std::string>();
    }
    return response;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed classify response: ") + e.what());
  }
}

namespace {

http::Url to_url(const Endpoint& e) { return http::Url{e.scheme, e.host, e.port, e.base_path}; }

bool is_transient(int status) { return status == 429 || status >= 500; }

// One POST /classify with retries; returns the response body.
std::string post_with_retry(const Endpoint& endpoint, const std::string& body,
                            const ClientLimits& limits) {
  const auto url = to_url(endpoint);
  std::string last_error;
  for (int attempt = 0; attempt <= limits.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(limits.backoff_base * (1 << (attempt - 1)));
    }
    auto result = http::post(url, "/classify", body, {}, limits.timeout);
    if (auto* failure = std::get_if<http::Failure>(&result)) {
      last_error = failure->message;
      continue;
    }
    auto& response = std::get<http::Response>(result);
    if (response.status >= 200 && response.status < 300) return std::move(response.body);
    last_error = "HTTP " + std::to_string(response.status) + ": " + response.body;
    if (!is_transient(response.status)) break;
  }
  throw TransportError("classify request to " + endpoint.origin() + " failed: " + last_error);
}

}  // namespace

ClassifierResponse classify_batch(const Endpoint& endpoint, const ClassifierRequest& request,
                                  const ClientLimits& limits, int label_count) {
  if (limits.max_batch == 0) throw ConfigError("max_batch must be at least 1");
  ClassifierResponse combined;
  for (std::size_t begin = 0; begin < request.items.size(); begin += limits.max_batch) {
    const std::size_t end = std::min(request.items.size(), begin + limits.max_batch);
    ClassifierRequest chunk{request.feature,
                            {request.items.begin() + static_cast<std::ptrdiff_t>(begin),
                             request.items.begin() + static_cast<std::ptrdiff_t>(end)}};
    auto response = decode_response(post_with_retry(endpoint, encode_request(chunk), limits));
    validate_response(chunk, response, label_count);
    combined.labels.insert(combined.labels.end(), response.labels.begin(),
                           response.labels.end());
    combined.scores.insert(combined.scores.end(), response.scores.begin(),
                           response.scores.end());
    if (combined.model_id.empty()) combined.model_id = std::move(response.model_id);
  }
  return combined;
}

HealthStatus health_check(const Endpoint& endpoint, const ClientLimits& limits) {
  auto result = http::get(to_url(endpoint), "/health", limits.timeout);
  if (auto* failure = std::get_if<http::Failure>(&result)) {
    throw TransportError("health check of " + endpoint.origin() + " failed: " +
                         failure->message);
  }
  const auto& response = std::get<http::Response>(result);
  if (response.status != 200) {
    throw TransportError("health check of " + endpoint.origin() + " returned HTTP " +
                         std::to_string(response.status));
  }
  try {
    const auto doc = json::parse(response.body);
    HealthStatus status;
    status.ok = doc.at("ok").get<bool>();
    for (const auto& f : doc.at("features")) status.features.push_back(f.get<std::string>());
    return status;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed health response: ") + e.what());
  }
}

RemoteClassifier::RemoteClassifier(Endpoint endpoint, ClientLimits limits)
    : endpoint_(std::move(endpoint)), limits_(limits) {}

ClassifierResponse RemoteClassifier::classify(const ClassifierRequest& request,
                                              std::span<const RowKey>) {
  const auto count = catalog::label_count(request.feature);
  if (!count) throw ConfigError("unknown classifier feature '" + request.feature + "'");
  return classify_batch(endpoint_, request, limits_, *count);
}

std::vector<std::string> RemoteClassifier::inventory() {
  auto status = health_check(endpoint_, limits_);
  if (!status.ok) return {};
  return status.features;
}

namespace {

const std::vector<std::string> kPrecomputedHeader = {"source_id", "row_index", "feature",
                                                     "label", "score"};

template <typename Fn>
void for_each_precomputed_row(std::string_view csv_data, Fn&& fn) {
  const auto records = csv::parse(csv_data);
  if (records.empty() || records.front().fields != kPrecomputedHeader) {
    throw ParseError("precomputed labels must start with header "
                     "source_id,row_index,feature,label,score",
                     records.empty() ? 1 : records.front().line);
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.fields.size() != 5) {
      throw ParseError("expected 5 fields, found " + std::to_string(rec.fields.size()),
                       rec.line);
    }
    const auto row = parse_number(rec.fields[1]);
    const auto label = parse_number(rec.fields[3]);
    const auto score = parse_number(rec.fields[4]);
    if (rec.fields[0].empty() || rec.fields[2].empty() || !row || *row < 0 ||
        std::floor(*row) != *row || !label || std::floor(*label) != *label || !score ||
        !std::isfinite(*score)) {
      throw ParseError("malformed precomputed row", rec.line);
    }
    fn(rec.line, RowKey{rec.fields[0], static_cast<std::size_t>(*row)}, rec.fields[2],
       PrecomputedLabel{static_cast<int>(*label), *score});
  }
}

}  // namespace

PrecomputedTable parse_precomputed(std::string_view csv_data, std::string_view feature) {
  PrecomputedTable table;
  for_each_precomputed_row(csv_data, [&](std::size_t line, RowKey key, const std::string& f,
                                         PrecomputedLabel value) {
    if (f != feature) return;
    if (!table.emplace(std::move(key), value).second) {
      throw ParseError("duplicate precomputed key for feature '" + f + "'", line);
    }
  });
  return table;
}

PrecomputedTable load_precomputed(const std::filesystem::path& path, std::string_view feature) {
  return parse_precomputed(read_file(path), feature);
}

PrecomputedClassifier PrecomputedClassifier::from_file(const std::filesystem::path& path) {
  const auto data = read_file(path);
  std::map<std::string, PrecomputedTable> tables;
  for_each_precomputed_row(data, [&](std::size_t line, RowKey key, const std::string& f,
                                     PrecomputedLabel value) {
    if (!tables[f].emplace(std::move(key), value).second) {
      throw ParseError("duplicate precomputed key for feature '" + f + "'", line);
    }
  });
  PrecomputedClassifier backend;
  for (auto& [feature, table] : tables) backend.add_feature(feature, std::move(table));
  return backend;
}

void PrecomputedClassifier::add_feature(std::string feature, PrecomputedTable table) {
  tables_[std::move(feature)] = std::move(table);
}

ClassifierResponse PrecomputedClassifier::classify(const ClassifierRequest& request,
                                                   std::span<const RowKey> keys) {
  if (keys.size() != request.items.size()) {
    throw PreconditionError("precomputed lookup needs one row key per item");
  }
  auto it = tables_.find(request.feature);
  if (it == tables_.end()) {
    throw ProtocolError("no precomputed labels for feature '" + request.feature + "'");
  }
  ClassifierResponse response;
  response.model_id = "precomputed";
  for (const auto& key : keys) {
    auto hit = it->second.find(key);
    if (hit == it->second.end()) {
      throw ProtocolError("feature '" + request.feature + "': no precomputed label for " +
                          key.source_id + " row " + std::to_string(key.row_index));
    }
    response.labels.push_back(hit->second.label);
    response.scores.push_back(hit->second.score);
  }
  return response;
}

std::vector<std::string> PrecomputedClassifier::inventory() {
  std::vector<std::string> out;
  for (const auto& [feature, _] : tables_) out.push_back(feature);
  return out;
}

}  // namespace classtalk
