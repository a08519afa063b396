// Copyright 2026 The xlit Authors.
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

#include "xlit/service.h"

#include <cstdlib>
#include <functional>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "xlit/corpus.h"
#include "xlit/log.h"
#include "xlit/text.h"
#include "xlit/utf8.h"
#include "xlit/validator.h"

namespace xlit::service {

using nlohmann::ordered_json;

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  ordered_json body;
  body["error"]["code"] = code;
  body["error"]["message"] = message;
  send_json(res, status, body);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const HttpError& e) {
      send_error(res, e.status, e.code, e.message);
    } catch (const workflow::WorkflowError& e) {
      send_error(res, e.http_status(), e.reason(), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "malformed_body", e.what());
    } catch (const model::UnknownSymbol& e) {
      send_error(res, 400, "unknown_symbol", e.what());
    } catch (const validate::UnknownLetter& e) {
      send_error(res, 400, "unknown_letter", e.what());
    } catch (const DecodeError& e) {
      send_error(res, 400, "malformed_utf8", e.what());
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kUnsupportedScript:
          send_error(res, 400, "unsupported_script", e.what());
          break;
        case ErrorCode::kInvalidInput:
        case ErrorCode::kInvalidConfig:
          send_error(res, 400, "invalid_request", e.what());
          break;
        case ErrorCode::kNotFound:
          send_error(res, 404, "not_found", e.what());
          break;
        default:
          send_error(res, 500, "internal", e.what());
      }
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

ordered_json parse_body(const httplib::Request& req) {
  ordered_json body;
  try {
    body = ordered_json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw HttpError{400, "malformed_body", e.what()};
  }
  if (!body.is_object()) throw HttpError{400, "malformed_body", "request body must be a JSON object"};
  return body;
}

template <typename T>
T field(const ordered_json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end()) throw HttpError{400, "malformed_body", std::string("missing field '") + name + "'"};
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw HttpError{400, "malformed_body", std::string("field '") + name + "' has the wrong type"};
  }
}

template <typename T>
T field_or(const ordered_json& body, const char* name, T fallback) {
  if (!body.contains(name) || body.at(name).is_null()) return fallback;
  return field<T>(body, name);
}

script::LanguageTag request_lang(const std::string& field) {
  try {
    return corpus::parse_lang(field);
  } catch (const Error& e) {
    throw HttpError{400, "unknown_language", e.what()};
  }
}

std::optional<std::string> query(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

std::uint64_t path_id(const httplib::Request& req) {
  try {
    return std::stoull(req.matches[1].str());
  } catch (const std::exception&) {
    throw HttpError{404, "not_found", "bad task id"};
  }
}

ordered_json validation_json(const validate::ValidationResult& r) {
  ordered_json o;
  o["valid"] = r.valid;
  o["roman_skeleton"] = r.roman_skeleton;
  o["native_skeleton"] = utf8::encode(r.native_skeleton);
  o["mismatch_index"] = r.mismatch_index ? ordered_json(*r.mismatch_index) : ordered_json(nullptr);
  ordered_json matches = ordered_json::array();
  for (const auto& m : r.matches) {
    matches.push_back({{"roman_index", m.roman_index}, {"native_begin", m.native_begin}, {"native_end", m.native_end}});
  }
  o["matches"] = std::move(matches);
  return o;
}

std::vector<std::string> string_list(const ordered_json& body, const char* name) {
  return field_or<std::vector<std::string>>(body, name, {});
}

}  // namespace

ServiceConfig ServiceConfig::from_env(ServiceConfig c) {
  if (const char* bind = std::getenv("XLIT_BIND")) {
    std::string b = bind;
    auto colon = b.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "XLIT_BIND must be host:port");
    c.host = b.substr(0, colon);
    try {
      c.port = std::stoi(b.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidConfig, "XLIT_BIND has a bad port: " + b);
    }
  }
  if (const char* j = std::getenv("XLIT_JOURNAL")) c.journal = j;
  if (const char* m = std::getenv("XLIT_MODEL")) c.model = std::string(m);
  if (const char* t = std::getenv("XLIT_TOKEN")) c.token = t;
  if (const char* l = std::getenv("XLIT_LM")) {
    for (std::string_view item : text::split(l, ',')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "XLIT_LM entries are lang=path: " + std::string(item));
      c.lms[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    }
  }
  return c;
}

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidConfig, "port out of range");
  if (beam < 1) throw Error(ErrorCode::kInvalidConfig, "beam must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "alpha must lie in [0, 1]");
  if (batch_size == 0) throw Error(ErrorCode::kInvalidConfig, "batch size must be positive");
  if (threads < 1) throw Error(ErrorCode::kInvalidConfig, "threads must be >= 1");
  if (journal.empty()) throw Error(ErrorCode::kInvalidConfig, "journal path is empty");
}

Service::Service(ServiceConfig config, std::shared_ptr<const model::XlitModel> model,
                 std::map<std::string, lm::UnigramWordLM> lms)
    : config_(std::move(config)), model_(std::move(model)), lms_(std::move(lms)) {
  config_.validate();
  if (!model_ && config_.model) {
    model_ = std::make_shared<const model::XlitModel>(model::XlitModel::load(*config_.model));
  }
  for (const auto& [lang, path] : config_.lms) {
    if (!lms_.count(lang)) lms_.emplace(lang, lm::UnigramWordLM::train(lm::parse_word_counts(text::read_file(path))));
  }
  store_ = std::make_unique<workflow::TaskStore>(config_.journal, config_.batch_size);
  server_ = std::make_unique<httplib::Server>();
  int threads = config_.threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (config_.port == 0) {
    int port = server_->bind_to_any_port(config_.host);
    if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + config_.host);
    return port;
  }
  if (!server_->bind_to_port(config_.host, config_.port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  return config_.port;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

void Service::routes() {
  httplib::Server& s = *server_;
  const std::string token = config_.token;
  s.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
    if (token.empty() || req.path == "/v1/health") return httplib::Server::HandlerResponse::Unhandled;
    std::string given = req.get_header_value("X-Xlit-Token");
    std::string auth = req.get_header_value("Authorization");
    if (given.empty() && auth.rfind("Bearer ", 0) == 0) given = auth.substr(7);
    if (given == token) return httplib::Server::HandlerResponse::Unhandled;
    send_error(res, 401, "unauthorized", "missing or wrong token");
    return httplib::Server::HandlerResponse::Handled;
  });

  s.Get("/v1/health", guarded([this](const httplib::Request&, httplib::Response& res) {
          ordered_json o;
          o["status"] = "ok";
          o["model_loaded"] = model_loaded();
          o["languages"] = model_ ? ordered_json(model_->vocab().languages()) : ordered_json::array();
          o["tasks"] = store_->tasks().size();
          send_json(res, 200, o);
        }));

  s.Post("/v1/transliterate", guarded([this](const httplib::Request& req, httplib::Response& res) {
           auto body = parse_body(req);
           auto word = field<std::string>(body, "word");
           auto lang = field<std::string>(body, "lang");
           auto topk = field_or<int>(body, "topk", 1);
           auto beam = field_or<int>(body, "beam", config_.beam);
           auto want_rerank = field_or<bool>(body, "rerank", false);
           if (!model_) throw HttpError{503, "model_not_loaded", "no model is loaded"};
           if (!model_->vocab().tag_id(lang)) {
             throw HttpError{400, "unknown_language", "the model has no tag for '" + lang + "'"};
           }
           if (beam < 1 || beam > config_.beam) {
             throw HttpError{400, "invalid_request", "beam must lie in [1, " + std::to_string(config_.beam) + "]"};
           }
           if (topk < 1 || topk > beam) {
             throw HttpError{400, "invalid_request", "topk must lie in [1, " + std::to_string(beam) + "]"};
           }
           utf8::decode(word);
           auto cands = model::beam_decode(*model_, word, lang, beam);
           if (want_rerank) {
             auto it = lms_.find(lang);
             if (it == lms_.end()) {
               throw HttpError{400, "no_language_model", "no word list loaded for '" + lang + "'"};
             }
             cands = model::rerank(std::move(cands), it->second,
                                   model::RerankConfig{config_.alpha, static_cast<std::size_t>(beam)});
           }
           if (cands.size() > static_cast<std::size_t>(topk)) cands.resize(static_cast<std::size_t>(topk));
           ordered_json o;
           o["word"] = word;
           o["lang"] = lang;
           o["candidates"] = ordered_json::array();
           for (const auto& c : cands) {
             ordered_json j;
             j["text"] = c.text;
             j["score"] = c.score;
             if (c.rerank_score) j["rerank_score"] = *c.rerank_score;
             o["candidates"].push_back(std::move(j));
           }
           send_json(res, 200, o);
         }));

  s.Post("/v1/validate", guarded([](const httplib::Request& req, httplib::Response& res) {
           auto body = parse_body(req);
           auto roman = field<std::string>(body, "roman");
           auto native = field<std::string>(body, "native");
           auto lang = request_lang(field<std::string>(body, "lang"));
           validate::ValidatorOptions options;
           options.geminate_leniency = field_or<bool>(body, "geminate_leniency", false);
           utf8::decode(native);
           auto result = validate::validate_pair(roman, native, validate::builtin_table(lang), options);
           send_json(res, 200, validation_json(result));
         }));

  s.Post("/v1/tasks", guarded([this](const httplib::Request& req, httplib::Response& res) {
           auto body = parse_body(req);
           auto lang = request_lang(field<std::string>(body, "lang"));
           auto words = field<std::vector<std::string>>(body, "words");
           auto actor = field_or<std::string>(body, "actor", "");
           auto tasks = store_->create(lang, words, actor);
           ordered_json o;
           o["tasks"] = ordered_json::array();
           for (const auto& t : tasks) o["tasks"].push_back(t.to_json());
           send_json(res, 201, o);
         }));

  s.Get("/v1/tasks/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
          auto role = query(req, "role");
          if (!role) throw HttpError{400, "invalid_request", "role is required"};
          auto task = store_->next(*role, query(req, "lang"));
          ordered_json o;
          o["task"] = task ? task->to_json() : ordered_json(nullptr);
          send_json(res, 200, o);
        }));

  s.Get(R"(/v1/tasks/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
          auto task = store_->get(path_id(req));
          if (!task) throw HttpError{404, "not_found", "no task " + req.matches[1].str()};
          send_json(res, 200, task->to_json());
        }));

  s.Post(R"(/v1/tasks/(\d+)/submit)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           auto body = parse_body(req);
           auto task = store_->submit(path_id(req), field_or<std::string>(body, "actor", ""),
                                      field<std::vector<std::string>>(body, "variants"));
           send_json(res, 200, task.to_json());
         }));

  s.Post(R"(/v1/tasks/(\d+)/review)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           auto body = parse_body(req);
           auto task = store_->review(path_id(req), field_or<std::string>(body, "actor", ""),
                                      string_list(body, "accepted"), string_list(body, "additions"));
           send_json(res, 200, task.to_json());
         }));

  s.Get("/v1/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
          auto lang = query(req, "lang");
          if (lang) request_lang(*lang);
          std::vector<std::uint64_t> empty;
          auto lex = store_->export_lexicon(lang, &empty);
          if (!empty.empty()) {
            std::vector<std::string> ids;
            for (auto id : empty) ids.push_back(std::to_string(id));
            res.set_header("X-Xlit-Empty-Tasks", text::join(ids, ","));
          }
          res.status = 200;
          res.set_content(corpus::format_lexicon(lex), "text/tab-separated-values; charset=utf-8");
        }));
}

}  // namespace xlit::service
