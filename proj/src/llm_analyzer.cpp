#include "classtalk/llm_analyzer.hpp"

#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "classtalk/errors.hpp"

namespace classtalk {

using nlohmann::json;

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

void PromptTemplate::validate() const {
  const auto n = count_occurrences(user_template, kTranscriptPlaceholder);
  if (n != 1) {
    throw ConfigError("prompt template '" + name + "' must contain " +
                      std::string(kTranscriptPlaceholder) + " exactly once (found " +
                      std::to_string(n) + ")");
  }
}

std::string PromptTemplate::fill(std::string_view transcript_text) const {
  validate();
  std::string out = user_template;
  out.replace(out.find(kTranscriptPlaceholder), kTranscriptPlaceholder.size(), transcript_text);
  return out;
}

PromptTemplate summarize_template() {
  return {"summarize",
          "You are an assistant to education researchers. You read classroom and tutoring "
          "transcripts and describe them accurately and concisely.",
          "Here is a transcript of a conversation between a teacher or tutor and students. "
          "Each line is numbered.\n\n{transcript}\n\n"
          "Summarize the conversation in one paragraph: what was taught, how the discussion "
          "progressed, and how students participated."};
}

PromptTemplate suggestions_template() {
  return {"suggestions",
          "You are an experienced instructional coach who gives teachers specific, "
          "actionable feedback grounded in what happened in their lessons.",
          "Here is a transcript of a conversation between a teacher or tutor and students. "
          "Each line is numbered.\n\n{transcript}\n\n"
          "Suggest up to three concrete ways the teacher or tutor could elicit more student "
          "reasoning. Cite the line numbers each suggestion refers to."};
}

PromptTemplate builtin_template(std::string_view name) {
  if (name == "summarize") return summarize_template();
  if (name == "suggestions") return suggestions_template();
  throw ConfigError("unknown prompt '" + std::string(name) +
                    "' (builtin prompts: summarize, suggestions; use a template file for custom)");
}

void FormatOptions::validate() const {
  if (line_format.find("{speaker}") == std::string::npos ||
      line_format.find("{text}") == std::string::npos) {
    throw ConfigError("line format must reference {speaker} and {text}");
  }
}

std::string format_line(const Utterance& u, const FormatOptions& options) {
  std::string fmt = options.line_format;
  if (!options.include_line_numbers) {
    if (auto pos = fmt.find("{line}"); pos != std::string::npos) {
      auto next = fmt.find('{', pos + 6);
      fmt.erase(pos, (next == std::string::npos ? fmt.size() : next) - pos);
    }
  }
  // Substitute text last so braces inside utterances are left alone.
  replace_all(fmt, "{line}", std::to_string(u.row_index));
  replace_all(fmt, "{speaker}", u.speaker);
  if (auto pos = fmt.find("{text}"); pos != std::string::npos) fmt.replace(pos, 6, u.text);
  return fmt;
}

std::string format_transcript(const Transcript& transcript, const FormatOptions& options) {
  options.validate();
  std::string out;
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    if (i) out.push_back('\n');
    out += format_line(transcript[i], options);
  }
  return out;
}

TruncatedText truncate_to_budget(const Transcript& transcript, const FormatOptions& options,
                                 const Budget& budget) {
  options.validate();
  const std::size_t marker_len = budget.marker.size() + 1;
  std::vector<std::string> lines;
  lines.reserve(transcript.size());
  std::size_t total = 0;
  for (const auto& u : transcript.utterances()) {
    lines.push_back(format_line(u, options) + "\n");
    total += lines.back().size();
  }
  TruncatedText out;
  if (total <= budget.max_chars) {
    for (const auto& l : lines) out.text += l;
    return out;
  }
  if (budget.max_chars < marker_len) {
    throw PreconditionError("budget of " + std::to_string(budget.max_chars) +
                            " chars cannot hold the truncation marker");
  }
  const std::size_t room = budget.max_chars - marker_len;
  for (const auto& l : lines) {
    if (out.text.size() + l.size() > room) break;
    out.text += l;
  }
  out.text += budget.marker + "\n";
  out.truncated = true;
  return out;
}

std::string encode_chat_request(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return json{{"model", request.model},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}}
      .dump();
}

std::string decode_chat_response(std::string_view body) {
  try {
    const auto doc = json::parse(body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed chat completion response: ") + e.what());
  }
}

HttpChatClient::HttpChatClient(std::string base_url, std::string api_key,
                               std::chrono::duration<double> timeout)
    : base_(http::parse_url(base_url)), api_key_(std::move(api_key)), timeout_(timeout) {}

HttpChatClient HttpChatClient::from_environment(std::string base_url,
                                                const std::string& key_variable) {
  const char* key = std::getenv(key_variable.c_str());
  if (!key || !*key) {
    throw ConfigError("environment variable " + key_variable + " is not set");
  }
  return HttpChatClient(std::move(base_url), key);
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  http::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto result = http::post(base_, "/chat/completions", encode_chat_request(request), headers,
                           timeout_);
  if (auto* failure = std::get_if<http::Failure>(&result)) {
    throw TransportError("chat completion request to " + base_.origin() +
                         " failed: " + failure->message);
  }
  const auto& response = std::get<http::Response>(result);
  if (response.status < 200 || response.status >= 300) {
    std::string message = response.body;
    try {
      const auto doc = json::parse(response.body);
      message = doc.at("error").at("message").get<std::string>();
    } catch (const json::exception&) {
    }
    throw TransportError("chat completion failed with HTTP " + std::to_string(response.status) +
                         ": " + message);
  }
  return decode_chat_response(response.body);
}

std::size_t transcript_char_budget(const PromptTemplate& tmpl, const PromptParams& params) {
  const double tokens = static_cast<double>(params.context_tokens) -
                        static_cast<double>(std::max(0, params.max_output_tokens));
  const double chars = std::floor(tokens * params.chars_per_token) -
                       static_cast<double>(tmpl.system_text.size()) -
                       static_cast<double>(tmpl.user_template.size() -
                                           kTranscriptPlaceholder.size());
  return chars > 0 ? static_cast<std::size_t>(chars) : 0;
}

PromptResult run_prompt(const PromptTemplate& tmpl, const Transcript& transcript,
                        const FormatOptions& options, ChatClient& client,
                        const PromptParams& params) {
  tmpl.validate();
  const auto budget = transcript_char_budget(tmpl, params);
  const auto body = truncate_to_budget(transcript, options, Budget{budget});

  ChatRequest request;
  request.model = params.model_id;
  request.temperature = params.temperature;
  request.max_tokens = params.max_output_tokens;
  if (!tmpl.system_text.empty()) request.messages.push_back({"system", tmpl.system_text});
  request.messages.push_back({"user", tmpl.fill(body.text)});
  return {client.complete(request), body.truncated};
}

}  // namespace classtalk
