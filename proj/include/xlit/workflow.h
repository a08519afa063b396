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

// Maker-checker annotation tasks persisted in an append-only JSON-lines
// journal. Replaying the journal rebuilds the task states.

#ifndef XLIT_WORKFLOW_H_
#define XLIT_WORKFLOW_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xlit/corpus.h"
#include "xlit/error.h"
#include "xlit/validator.h"

namespace xlit::workflow {

inline constexpr std::size_t kMaxVariants = 4;   // per transliterator
inline constexpr std::size_t kMaxAdditions = 2;  // per reviewer

enum class TaskState { kPending, kTransliterated, kReviewed };

std::string_view to_string(TaskState state);

struct Variant {
  std::string roman;
  std::optional<bool> valid;  // validator flag; empty when unchecked

  bool operator==(const Variant&) const = default;
};

struct AnnotationTask {
  std::uint64_t id = 0;
  std::string native;
  script::LanguageTag lang;
  std::size_t batch = 0;
  TaskState state = TaskState::kPending;
  std::vector<Variant> submitted;
  std::string transliterator;
  std::vector<std::string> accepted;  // subset of submitted
  std::vector<Variant> additions;
  std::string reviewer;

  // accepted followed by the additions
  std::vector<std::string> final_variants() const;
  nlohmann::ordered_json to_json() const;
  bool operator==(const AnnotationTask&) const = default;
};

// Failures of workflow requests, with the HTTP status they map to.
class WorkflowError : public Error {
 public:
  enum class Kind { kBadRequest, kNotFound, kIllegalTransition, kCapExceeded };
  WorkflowError(Kind kind, const std::string& message);
  Kind kind() const noexcept { return kind_; }
  int http_status() const noexcept;
  std::string_view reason() const noexcept;

 private:
  Kind kind_;
};

using TaskMap = std::map<std::uint64_t, AnnotationTask>;

// Rebuilds tasks from journal text. Bytes after the last newline are a
// torn write and ignored; *consumed gets the length of the replayed
// prefix and *last_seq the last sequence number. Throws ParseError for a
// corrupt or inconsistent complete line.
TaskMap replay(std::string_view journal, std::size_t* consumed = nullptr, std::uint64_t* last_seq = nullptr);

class TaskStore {
 public:
  // Opens or creates the journal and replays it, cutting off a torn tail.
  explicit TaskStore(std::filesystem::path journal, std::size_t batch_size = 100);

  const std::filesystem::path& journal_path() const { return path_; }
  std::size_t batch_size() const { return batch_size_; }

  std::vector<AnnotationTask> create(const script::LanguageTag& lang, const std::vector<std::string>& words,
                                     const std::string& actor);
  // At most kMaxVariants variants, each a valid roman word. Flags come from
  // the validator for the task's language; they never block.
  AnnotationTask submit(std::uint64_t id, const std::string& actor, const std::vector<std::string>& variants);
  // accepted must be a subset of the submitted variants; at most
  // kMaxAdditions additions.
  AnnotationTask review(std::uint64_t id, const std::string& actor, const std::vector<std::string>& accepted,
                        const std::vector<std::string>& additions);

  // role "transliterator" gets the oldest pending task, "validator" the
  // oldest transliterated one. lang filters when given.
  std::optional<AnnotationTask> next(std::string_view role, const std::optional<std::string>& lang) const;
  std::optional<AnnotationTask> get(std::uint64_t id) const;
  TaskMap tasks() const;

  // Reviewed tasks' final variants with source "manual", in task order.
  // Reviewed tasks without variants are listed in empty.
  corpus::Lexicon export_lexicon(const std::optional<std::string>& lang,
                                 std::vector<std::uint64_t>* empty = nullptr) const;

  // Validator flag for a pair; empty when the language has no table.
  std::optional<bool> flag(const std::string& roman, const std::string& native,
                           const script::LanguageTag& lang) const;

 private:
  void append(nlohmann::ordered_json event);

  std::filesystem::path path_;
  std::size_t batch_size_;
  mutable std::mutex mu_;
  std::ofstream out_;
  TaskMap tasks_;
  std::uint64_t seq_ = 0;
  std::uint64_t next_id_ = 1;
  mutable std::map<std::string, std::shared_ptr<validate::Validator>> validators_;
};

}  // namespace xlit::workflow

#endif  // XLIT_WORKFLOW_H_
