#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "classtalk/http_util.hpp"
#include "classtalk/transcript.hpp"

namespace classtalk {

inline constexpr std::string_view kTranscriptPlaceholder = "{transcript}";

struct PromptTemplate {
  std::string name;  // "summarize", "suggestions" or "custom"
  std::string system_text;
  std::string user_template;  // contains kTranscriptPlaceholder exactly once

  // Throws ConfigError unless the placeholder occurs exactly once.
  void validate() const;
  std::string fill(std::string_view transcript_text) const;
};

// Bundled templates. These prompt texts are authored for this tool.
PromptTemplate summarize_template();
PromptTemplate suggestions_template();
// Throws ConfigError for an unknown name ("custom" needs explicit text).
PromptTemplate builtin_template(std::string_view name);

struct FormatOptions {
  bool include_line_numbers = true;
  // Placeholders: {line}, {speaker}, {text}. {line} is dropped (with the
  // text up to the next placeholder) when line numbers are disabled.
  std::string line_format = "{line}. {speaker}: {text}";

  void validate() const;
};

std::string format_line(const Utterance& u, const FormatOptions& options);

// One line per utterance, joined by '\n' without a trailing newline.
std::string format_transcript(const Transcript& transcript, const FormatOptions& options = {});

inline constexpr std::string_view kTruncationMarker = "[... transcript truncated ...]";

struct Budget {
  std::size_t max_chars = 0;
  std::string marker = std::string(kTruncationMarker);
};

struct TruncatedText {
  std::string text;
  bool truncated = false;
};

// Keeps the longest prefix of whole formatted lines that fits. Every emitted
// line, including the marker, is '\n'-terminated and its length counts the
// terminator. When a line is dropped the marker line is appended and its
// length reserved. Output length never exceeds max_chars. Throws
// PreconditionError when lines must be dropped and max_chars cannot hold the
// marker line.
TruncatedText truncate_to_budget(const Transcript& transcript, const FormatOptions& options,
                                 const Budget& budget);

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 512;
};

std::string encode_chat_request(const ChatRequest& request);
// Content of the first choice. Throws ProtocolError.
std::string decode_chat_response(std::string_view body);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Throws TransportError carrying the provider's message on failure.
  virtual std::string complete(const ChatRequest& request) = 0;
};

// OpenAI-compatible POST {base_url}/chat/completions with a bearer token.
class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(std::string base_url, std::string api_key,
                 std::chrono::duration<double> timeout = std::chrono::seconds(120));

  // API key from the named environment variable; throws ConfigError if unset.
  static HttpChatClient from_environment(std::string base_url, const std::string& key_variable);

  std::string complete(const ChatRequest& request) override;

 private:
  http::Url base_;
  std::string api_key_;
  std::chrono::duration<double> timeout_;
};

struct PromptParams {
  std::string model_id = "gpt-4o-mini";
  double temperature = 0.0;
  int max_output_tokens = 512;
  // Model context window in tokens and the chars-per-token estimate used to
  // turn it into a character budget for the transcript.
  std::size_t context_tokens = 16000;
  double chars_per_token = 4.0;
};

struct PromptResult {
  std::string text;
  bool truncated_input = false;
};

// Character budget left for the transcript once the system text, template
// text and reserved output tokens are accounted for.
std::size_t transcript_char_budget(const PromptTemplate& tmpl, const PromptParams& params);

PromptResult run_prompt(const PromptTemplate& tmpl, const Transcript& transcript,
                        const FormatOptions& options, ChatClient& client,
                        const PromptParams& params = {});

}  // namespace classtalk
