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

// JSON-over-HTTP service: transliteration, validation and the annotation
// task workflow under /v1.

#ifndef XLIT_SERVICE_H_
#define XLIT_SERVICE_H_

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "xlit/lm.h"
#include "xlit/model.h"
#include "xlit/workflow.h"

namespace httplib {
class Server;
}

namespace xlit::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string journal = "xlit_journal.jsonl";
  std::optional<std::string> model;  // checkpoint path
  // lang code -> word count file used for reranking
  std::map<std::string, std::string> lms;
  std::string token;  // empty disables the check
  int beam = 4;
  double alpha = 0.9;
  std::size_t batch_size = 100;
  int threads = 8;

  // XLIT_BIND (host:port), XLIT_JOURNAL, XLIT_MODEL, XLIT_TOKEN and
  // XLIT_LM ("hin=counts.tsv,ben=..."), on top of the given defaults.
  static ServiceConfig from_env(ServiceConfig defaults);
  static ServiceConfig from_env() { return from_env(ServiceConfig()); }
  void validate() const;
};

class Service {
 public:
  // Loads the model and language models named in the config unless they
  // are given directly.
  explicit Service(ServiceConfig config, std::shared_ptr<const model::XlitModel> model = nullptr,
                   std::map<std::string, lm::UnigramWordLM> lms = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const { return config_; }
  workflow::TaskStore& store() { return *store_; }
  bool model_loaded() const { return model_ != nullptr; }

  // Binds the configured host; port 0 picks a free one. Returns the port.
  int bind();
  // Serves until stop(). bind() must have succeeded.
  void listen();
  void stop();

 private:
  void routes();

  ServiceConfig config_;
  std::shared_ptr<const model::XlitModel> model_;
  std::map<std::string, lm::UnigramWordLM> lms_;
  std::unique_ptr<workflow::TaskStore> store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace xlit::service

#endif  // XLIT_SERVICE_H_
