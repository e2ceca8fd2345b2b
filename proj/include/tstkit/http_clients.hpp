// Copyright 2026 The tstkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef TSTKIT_HTTP_CLIENTS_HPP
#define TSTKIT_HTTP_CLIENTS_HPP

// JSON-over-HTTP backends:
//
//   text generation  POST <path>      {model_id, prompt, temperature, max_tokens} -> {text}
//   vocabulary       GET  <vocab>     -> {tokens: [...], vocab_hash}
//   logits           POST <logits>    {model_id, context_tokens: [ids]} -> {logits, vocab_hash}
//   classifier       POST <path>      {text} -> {label, score}
//
// A bearer token is read from the named environment variable when it is set.
// Logit arrays may use null for -inf.

#include <cstdlib>
#include <string>
#include <vector>

#include "httplib.h"
// <resolv.h>, pulled in by httplib, defines `_res` as a macro, which breaks
// later headers (Eigen) that use it as an identifier.
#ifdef _res
#undef _res
#endif
#include "json.hpp"
#include "tstkit/common.hpp"
#include "tstkit/decoder.hpp"
#include "tstkit/eval.hpp"
#include "tstkit/prompt_forge.hpp"

namespace tstkit {

inline constexpr const char* kDefaultTokenEnv = "TSTKIT_API_TOKEN";

/// Hash a server can publish for its ordered vocabulary.
inline std::string vocab_hash(const std::vector<std::string>& tokens) {
  std::uint64_t h = detail::fnv1a("vocab");
  for (const auto& t : tokens) {
    h = detail::fnv1a(t, h);
    h = detail::fnv1a(std::string_view("\n", 1), h);
  }
  return detail::hex64(h);
}

struct HttpEndpoint {
  std::string base_url;  // "http://host:port"
  std::string token_env = kDefaultTokenEnv;
  double timeout_seconds = 60.0;
};

namespace detail {

inline httplib::Headers auth_headers(const HttpEndpoint& ep) {
  httplib::Headers h;
  if (!ep.token_env.empty()) {
    if (const char* tok = std::getenv(ep.token_env.c_str()); tok && *tok) {
      h.emplace("Authorization", std::string("Bearer ") + tok);
    }
  }
  return h;
}

inline httplib::Client make_client(const HttpEndpoint& ep) {
  httplib::Client cli(ep.base_url);
  const auto secs = static_cast<time_t>(ep.timeout_seconds);
  cli.set_connection_timeout(secs, 0);
  cli.set_read_timeout(secs, 0);
  cli.set_write_timeout(secs, 0);
  return cli;
}

inline nlohmann::json parse_reply(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw TransportError(what + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(what + ": HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(what + ": malformed JSON reply: " + e.what());
  }
}

inline nlohmann::json post_json(const HttpEndpoint& ep, const std::string& path,
                                const nlohmann::json& body) {
  auto cli = make_client(ep);
  auto res = cli.Post(path, auth_headers(ep), body.dump(), "application/json");
  return parse_reply(res, "POST " + ep.base_url + path);
}

inline nlohmann::json get_json(const HttpEndpoint& ep, const std::string& path) {
  auto cli = make_client(ep);
  auto res = cli.Get(path, auth_headers(ep));
  return parse_reply(res, "GET " + ep.base_url + path);
}

}  // namespace detail

class HttpTextGenClient final : public TextGenClient {
 public:
  HttpTextGenClient(HttpEndpoint ep, std::string path = "/v1/complete")
      : ep_(std::move(ep)), path_(std::move(path)) {}

  std::string complete(const TextGenRequest& req) override {
    const nlohmann::json body = {{"model_id", req.model_id},
                                 {"prompt", req.prompt},
                                 {"temperature", req.temperature},
                                 {"max_tokens", req.max_tokens}};
    const auto reply = detail::post_json(ep_, path_, body);
    if (!reply.contains("text") || !reply["text"].is_string()) {
      throw ContractViolation("text-generation reply lacks a 'text' string");
    }
    return reply["text"].get<std::string>();
  }

 private:
  HttpEndpoint ep_;
  std::string path_;
};

class HttpLogitProvider final : public LogitProvider {
 public:
  HttpLogitProvider(HttpEndpoint ep, std::string model_id, std::string vocab_path = "/v1/vocab",
                    std::string logits_path = "/v1/logits")
      : ep_(std::move(ep)), model_id_(std::move(model_id)), logits_path_(std::move(logits_path)) {
    const auto reply = detail::get_json(ep_, vocab_path);
    try {
      vocab_ = reply.at("tokens").get<std::vector<std::string>>();
      hash_ = reply.at("vocab_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ContractViolation(std::string("vocabulary reply: ") + e.what());
    }
    if (vocab_.empty()) throw ContractViolation("provider vocabulary is empty");
  }

  const std::vector<std::string>& vocab() const override { return vocab_; }
  const std::string& hash() const { return hash_; }

  Vector logits(const TokenSeq& context) const override {
    const nlohmann::json body = {{"model_id", model_id_}, {"context_tokens", context}};
    const auto reply = detail::post_json(ep_, logits_path_, body);
    if (!reply.contains("vocab_hash") || reply["vocab_hash"] != hash_) {
      throw ContractViolation("logit reply vocab_hash does not match the vocabulary");
    }
    if (!reply.contains("logits") || !reply["logits"].is_array()) {
      throw ContractViolation("logit reply lacks a 'logits' array");
    }
    Vector out;
    out.reserve(vocab_.size());
    for (const auto& v : reply["logits"]) {
      if (v.is_null()) {
        out.push_back(kNegInf);
      } else if (v.is_number()) {
        out.push_back(v.get<double>());
      } else {
        throw ContractViolation("non-numeric logit");
      }
    }
    return out;
  }

 private:
  HttpEndpoint ep_;
  std::string model_id_;
  std::string logits_path_;
  std::vector<std::string> vocab_;
  std::string hash_;
};

class HttpClassifier final : public StyleClassifier {
 public:
  HttpClassifier(HttpEndpoint ep, std::string path = "/v1/classify")
      : ep_(std::move(ep)), path_(std::move(path)) {}

  Classification classify(const std::string& text) const override {
    const auto reply = detail::post_json(ep_, path_, {{"text", text}});
    try {
      return {reply.at("label").get<std::string>(), reply.at("score").get<double>()};
    } catch (const nlohmann::json::exception& e) {
      throw ContractViolation(std::string("classifier reply: ") + e.what());
    }
  }

 private:
  HttpEndpoint ep_;
  std::string path_;
};

}  // namespace tstkit

#endif  // TSTKIT_HTTP_CLIENTS_HPP
