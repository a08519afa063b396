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

#include "xlit/workflow.h"

#include <algorithm>
#include <chrono>
#include <set>
#include <utility>

#include "xlit/log.h"
#include "xlit/text.h"

namespace xlit::workflow {

using nlohmann::ordered_json;

std::string_view to_string(TaskState state) {
  switch (state) {
    case TaskState::kPending:
      return "pending";
    case TaskState::kTransliterated:
      return "transliterated";
    case TaskState::kReviewed:
      return "reviewed";
  }
  return "pending";
}

std::vector<std::string> AnnotationTask::final_variants() const {
  std::vector<std::string> out = accepted;
  for (const Variant& v : additions) out.push_back(v.roman);
  return out;
}

namespace {

ordered_json variants_json(const std::vector<Variant>& variants) {
  ordered_json arr = ordered_json::array();
  for (const Variant& v : variants) {
    ordered_json o;
    o["roman"] = v.roman;
    o["valid"] = v.valid ? ordered_json(*v.valid) : ordered_json(nullptr);
    arr.push_back(std::move(o));
  }
  return arr;
}

std::vector<Variant> variants_from(const ordered_json& arr) {
  std::vector<Variant> out;
  for (const auto& o : arr) {
    Variant v;
    v.roman = o.at("roman").get<std::string>();
    if (!o.at("valid").is_null()) v.valid = o.at("valid").get<bool>();
    out.push_back(std::move(v));
  }
  return out;
}

std::string now_iso() {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::time_point_cast<std::chrono::seconds>(now);
  std::time_t t = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Applies one event. Throws std::runtime_error for an event that does not
// fit the current states.
void apply_event(TaskMap& tasks, const ordered_json& ev) {
  const std::string type = ev.at("type").get<std::string>();
  const auto id = ev.at("id").get<std::uint64_t>();
  const std::string actor = ev.at("actor").get<std::string>();
  if (type == "create") {
    if (tasks.count(id)) throw std::runtime_error("task " + std::to_string(id) + " created twice");
    AnnotationTask task;
    task.id = id;
    task.native = ev.at("native").get<std::string>();
    task.lang = corpus::parse_lang(ev.at("lang").get<std::string>());
    task.batch = ev.at("batch").get<std::size_t>();
    tasks.emplace(id, std::move(task));
    return;
  }
  auto it = tasks.find(id);
  if (it == tasks.end()) throw std::runtime_error("event for unknown task " + std::to_string(id));
  AnnotationTask& task = it->second;
  if (type == "submit") {
    if (task.state != TaskState::kPending) throw std::runtime_error("submit on a task that is not pending");
    auto variants = variants_from(ev.at("variants"));
    if (variants.size() > kMaxVariants) throw std::runtime_error("too many variants");
    task.submitted = std::move(variants);
    task.transliterator = actor;
    task.state = TaskState::kTransliterated;
  } else if (type == "review") {
    if (task.state != TaskState::kTransliterated) throw std::runtime_error("review on a task that is not transliterated");
    auto accepted = ev.at("accepted").get<std::vector<std::string>>();
    for (const std::string& a : accepted) {
      bool found = std::any_of(task.submitted.begin(), task.submitted.end(),
                               [&](const Variant& v) { return v.roman == a; });
      if (!found) throw std::runtime_error("accepted variant '" + a + "' was never submitted");
    }
    auto additions = variants_from(ev.at("additions"));
    if (additions.size() > kMaxAdditions) throw std::runtime_error("too many additions");
    task.accepted = std::move(accepted);
    task.additions = std::move(additions);
    task.reviewer = actor;
    task.state = TaskState::kReviewed;
  } else {
    throw std::runtime_error("unknown event type '" + type + "'");
  }
}

}  // namespace

ordered_json AnnotationTask::to_json() const {
  ordered_json o;
  o["id"] = id;
  o["native"] = native;
  o["lang"] = corpus::format_lang(lang);
  o["batch"] = batch;
  o["state"] = std::string(to_string(state));
  o["submitted"] = variants_json(submitted);
  o["transliterator"] = transliterator;
  o["accepted"] = accepted;
  o["additions"] = variants_json(additions);
  o["reviewer"] = reviewer;
  return o;
}

WorkflowError::WorkflowError(Kind kind, const std::string& message)
    : Error(kind == Kind::kNotFound ? ErrorCode::kNotFound : ErrorCode::kInvalidInput, message), kind_(kind) {}

int WorkflowError::http_status() const noexcept {
  switch (kind_) {
    case Kind::kBadRequest:
      return 400;
    case Kind::kNotFound:
      return 404;
    case Kind::kIllegalTransition:
      return 409;
    case Kind::kCapExceeded:
      return 422;
  }
  return 400;
}

std::string_view WorkflowError::reason() const noexcept {
  switch (kind_) {
    case Kind::kBadRequest:
      return "invalid_request";
    case Kind::kNotFound:
      return "not_found";
    case Kind::kIllegalTransition:
      return "illegal_transition";
    case Kind::kCapExceeded:
      return "cap_exceeded";
  }
  return "invalid_request";
}

TaskMap replay(std::string_view journal, std::size_t* consumed, std::uint64_t* last_seq) {
  std::size_t end = journal.rfind('\n');
  end = end == std::string_view::npos ? 0 : end + 1;
  if (consumed) *consumed = end;
  TaskMap tasks;
  std::uint64_t seq = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < end) {
    std::size_t nl = journal.find('\n', pos);
    std::string_view line = journal.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      auto ev = ordered_json::parse(line);
      auto s = ev.at("seq").get<std::uint64_t>();
      if (s != seq + 1) {
        throw std::runtime_error("sequence number " + std::to_string(s) + " after " + std::to_string(seq));
      }
      seq = s;
      apply_event(tasks, ev);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, std::string("journal: ") + e.what());
    }
  }
  if (last_seq) *last_seq = seq;
  return tasks;
}

TaskStore::TaskStore(std::filesystem::path journal, std::size_t batch_size)
    : path_(std::move(journal)), batch_size_(batch_size) {
  if (batch_size_ == 0) throw Error(ErrorCode::kInvalidConfig, "batch size must be positive");
  std::string text;
  if (std::filesystem::exists(path_)) text = text::read_file(path_.string());
  std::size_t consumed = 0;
  tasks_ = replay(text, &consumed, &seq_);
  if (consumed < text.size()) {
    warn("journal " + path_.string() + ": dropping " + std::to_string(text.size() - consumed) +
         " bytes of a torn final record");
    std::filesystem::resize_file(path_, consumed);
  }
  if (!tasks_.empty()) next_id_ = tasks_.rbegin()->first + 1;
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::kIo, "cannot open journal " + path_.string());
}

void TaskStore::append(ordered_json event) {
  ordered_json ev;
  ev["seq"] = seq_ + 1;
  ev["ts"] = now_iso();
  for (auto& [k, v] : event.items()) ev[k] = std::move(v);
  std::string line = ev.dump() + "\n";
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "cannot append to journal " + path_.string());
  ++seq_;
  apply_event(tasks_, ev);
}

std::optional<bool> TaskStore::flag(const std::string& roman, const std::string& native,
                                    const script::LanguageTag& lang) const {
  std::string key = corpus::format_lang(lang);
  auto it = validators_.find(key);
  if (it == validators_.end()) {
    std::shared_ptr<validate::Validator> v;
    try {
      v = std::make_shared<validate::Validator>(validate::builtin_table(lang));
    } catch (const Error&) {
    }
    it = validators_.emplace(key, v).first;
  }
  if (!it->second) return std::nullopt;
  try {
    return it->second->validate(roman, native).valid;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<AnnotationTask> TaskStore::create(const script::LanguageTag& lang, const std::vector<std::string>& words,
                                              const std::string& actor) {
  using K = WorkflowError::Kind;
  if (words.empty()) throw WorkflowError(K::kBadRequest, "no words given");
  for (const std::string& w : words) {
    if (!corpus::is_valid_native(w, lang)) {
      throw WorkflowError(K::kBadRequest, "'" + w + "' is not a normalized " + corpus::format_lang(lang) + " word");
    }
  }
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t in_lang = 0;
  for (const auto& [id, t] : tasks_) in_lang += t.lang == lang;
  std::vector<AnnotationTask> out;
  for (const std::string& w : words) {
    ordered_json ev;
    ev["actor"] = actor;
    ev["type"] = "create";
    ev["id"] = next_id_;
    ev["native"] = w;
    ev["lang"] = corpus::format_lang(lang);
    ev["batch"] = in_lang++ / batch_size_;
    append(std::move(ev));
    out.push_back(tasks_.at(next_id_));
    ++next_id_;
  }
  return out;
}

namespace {

void check_romans(const std::vector<std::string>& romans, std::set<std::string>& seen) {
  for (const std::string& r : romans) {
    if (!corpus::is_valid_roman(r)) {
      throw WorkflowError(WorkflowError::Kind::kBadRequest, "'" + r + "' is not a valid roman word");
    }
    if (!seen.insert(r).second) {
      throw WorkflowError(WorkflowError::Kind::kBadRequest, "variant '" + r + "' given twice");
    }
  }
}

}  // namespace

AnnotationTask TaskStore::submit(std::uint64_t id, const std::string& actor,
                                 const std::vector<std::string>& variants) {
  using K = WorkflowError::Kind;
  std::lock_guard<std::mutex> lock(mu_);
  auto it = tasks_.find(id);
  if (it == tasks_.end()) throw WorkflowError(K::kNotFound, "no task " + std::to_string(id));
  const AnnotationTask& task = it->second;
  if (task.state != TaskState::kPending) {
    throw WorkflowError(K::kIllegalTransition,
                        "task " + std::to_string(id) + " is " + std::string(to_string(task.state)) + ", not pending");
  }
  if (variants.size() > kMaxVariants) {
    throw WorkflowError(K::kCapExceeded, std::to_string(variants.size()) + " variants submitted, at most " +
                                             std::to_string(kMaxVariants) + " allowed");
  }
  if (variants.empty()) throw WorkflowError(K::kBadRequest, "at least one variant is required");
  std::set<std::string> seen;
  check_romans(variants, seen);
  std::vector<Variant> flagged;
  for (const std::string& r : variants) flagged.push_back({r, flag(r, task.native, task.lang)});
  ordered_json ev;
  ev["actor"] = actor;
  ev["type"] = "submit";
  ev["id"] = id;
  ev["variants"] = variants_json(flagged);
  append(std::move(ev));
  return tasks_.at(id);
}

AnnotationTask TaskStore::review(std::uint64_t id, const std::string& actor, const std::vector<std::string>& accepted,
                                 const std::vector<std::string>& additions) {
  using K = WorkflowError::Kind;
  std::lock_guard<std::mutex> lock(mu_);
  auto it = tasks_.find(id);
  if (it == tasks_.end()) throw WorkflowError(K::kNotFound, "no task " + std::to_string(id));
  const AnnotationTask& task = it->second;
  if (task.state != TaskState::kTransliterated) {
    throw WorkflowError(K::kIllegalTransition, "task " + std::to_string(id) + " is " +
                                                   std::string(to_string(task.state)) + ", not transliterated");
  }
  if (additions.size() > kMaxAdditions) {
    throw WorkflowError(K::kCapExceeded, std::to_string(additions.size()) + " additions, at most " +
                                             std::to_string(kMaxAdditions) + " allowed");
  }
  std::set<std::string> seen;
  check_romans(accepted, seen);
  check_romans(additions, seen);
  for (const std::string& a : accepted) {
    bool found = std::any_of(task.submitted.begin(), task.submitted.end(),
                             [&](const Variant& v) { return v.roman == a; });
    if (!found) throw WorkflowError(K::kBadRequest, "'" + a + "' was not submitted for task " + std::to_string(id));
  }
  std::vector<Variant> flagged;
  for (const std::string& r : additions) flagged.push_back({r, flag(r, task.native, task.lang)});
  ordered_json ev;
  ev["actor"] = actor;
  ev["type"] = "review";
  ev["id"] = id;
  ev["accepted"] = accepted;
  ev["additions"] = variants_json(flagged);
  append(std::move(ev));
  return tasks_.at(id);
}

std::optional<AnnotationTask> TaskStore::next(std::string_view role, const std::optional<std::string>& lang) const {
  TaskState want;
  if (role == "transliterator") {
    want = TaskState::kPending;
  } else if (role == "validator" || role == "reviewer") {
    want = TaskState::kTransliterated;
  } else {
    throw WorkflowError(WorkflowError::Kind::kBadRequest, "unknown role '" + std::string(role) + "'");
  }
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& [id, t] : tasks_) {
    if (t.state != want) continue;
    if (lang && corpus::format_lang(t.lang) != *lang) continue;
    return t;
  }
  return std::nullopt;
}

std::optional<AnnotationTask> TaskStore::get(std::uint64_t id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = tasks_.find(id);
  if (it == tasks_.end()) return std::nullopt;
  return it->second;
}

TaskMap TaskStore::tasks() const {
  std::lock_guard<std::mutex> lock(mu_);
  return tasks_;
}

corpus::Lexicon TaskStore::export_lexicon(const std::optional<std::string>& lang,
                                          std::vector<std::uint64_t>* empty) const {
  std::lock_guard<std::mutex> lock(mu_);
  corpus::Lexicon lex;
  std::vector<std::uint64_t> none;
  for (const auto& [id, t] : tasks_) {
    if (t.state != TaskState::kReviewed) continue;
    if (lang && corpus::format_lang(t.lang) != *lang) continue;
    auto finals = t.final_variants();
    if (finals.empty()) none.push_back(id);
    for (const std::string& r : finals) {
      lex.add({r, t.native, t.lang, corpus::Source::kManual, std::nullopt});
    }
  }
  if (!none.empty()) {
    std::string ids;
    for (auto id : none) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    warn("export: reviewed tasks with no accepted variant: " + ids);
  }
  if (empty) *empty = std::move(none);
  return lex;
}

}  // namespace xlit::workflow
