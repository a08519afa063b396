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

#include "xlit/script.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "xlit/embedded_data.h"
#include "xlit/error.h"
#include "xlit/text.h"
#include "xlit/utf8.h"

namespace xlit::script {

namespace {

constexpr std::array<std::string_view, kScriptCount> kScriptNames = {
    "devanagari", "bengali", "gurmukhi", "gujarati", "oriya",
    "tamil",      "telugu",  "kannada",  "malayalam", "sinhala",
    "latin",      "arabic",  "meetei"};

constexpr std::array<std::string_view, 9> kClassNames = {
    "IndependentVowel", "VowelSign", "Consonant", "Virama", "Nukta",
    "Digit",            "Sign",      "Whitespace", "Other"};

constexpr char32_t kDevanagariFirst = 0x0900;

struct BuiltinLanguage {
  std::string_view code;
  Script script;
};

constexpr std::array<BuiltinLanguage, 22> kLanguages = {{
    {"asm", Script::kBengali},    {"ben", Script::kBengali},
    {"brx", Script::kDevanagari}, {"eng", Script::kLatin},
    {"guj", Script::kGujarati},   {"hin", Script::kDevanagari},
    {"kan", Script::kKannada},    {"kas", Script::kArabic},
    {"kok", Script::kDevanagari}, {"mai", Script::kDevanagari},
    {"mal", Script::kMalayalam},  {"mar", Script::kDevanagari},
    {"mni", Script::kMeetei},     {"nep", Script::kDevanagari},
    {"ori", Script::kOriya},      {"pan", Script::kGurmukhi},
    {"san", Script::kDevanagari}, {"sin", Script::kSinhala},
    {"snd", Script::kArabic},     {"tam", Script::kTamil},
    {"tel", Script::kTelugu},     {"urd", Script::kArabic},
}};

bool is_invisible(char32_t cp) {
  return cp == 0x200B || cp == 0x200C || cp == 0x200D || cp == 0x2060 ||
         cp == 0xFEFF || cp == 0x00AD;
}

char32_t parse_hex(std::string_view s, std::size_t line) {
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, 16);
  if (ec != std::errc() || ptr != s.data() + s.size() || value > 0x10FFFF) {
    throw ParseError(line, "bad code point '" + std::string(s) + "'");
  }
  return static_cast<char32_t>(value);
}

std::string hex4(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(cp));
  return buf;
}

std::string translate(std::string_view text, const ScriptSpec& from,
                      const ScriptSpec& to, TranslationReport* report) {
  TranslationReport local;
  std::u32string out = utf8::decode(text);
  for (char32_t& cp : out) {
    if (!from.contains(cp)) {
      ++local.foreign;
      continue;
    }
    const std::size_t off = cp - from.first;
    if (off < to.size() && from.mappable[off] && to.mappable[off]) {
      cp = to.first + static_cast<char32_t>(off);
      ++local.mapped;
    } else {
      ++local.unmapped;
    }
  }
  if (report) *report = local;
  return utf8::encode(out);
}

const ScriptSpec& brahmi_spec(const ScriptRegistry& registry, Script s) {
  const ScriptSpec& spec = registry.spec(s);
  if (!spec.brahmi) {
    throw Error(ErrorCode::kUnsupportedScript,
                "script '" + std::string(to_string(s)) +
                    "' is not Brahmi-derived; unification unsupported");
  }
  return spec;
}

}  // namespace

std::string_view to_string(Script script) {
  return kScriptNames[static_cast<std::size_t>(script)];
}

std::optional<Script> parse_script(std::string_view name) {
  for (std::size_t i = 0; i < kScriptNames.size(); ++i) {
    if (kScriptNames[i] == name) return static_cast<Script>(i);
  }
  return std::nullopt;
}

std::string_view to_string(CharClass cls) {
  return kClassNames[static_cast<std::size_t>(cls)];
}

std::optional<CharClass> parse_char_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<CharClass>(i);
  }
  return std::nullopt;
}

LanguageTag LanguageTag::of(std::string_view code) {
  for (const auto& lang : kLanguages) {
    if (lang.code == code) return LanguageTag{std::string(code), lang.script};
  }
  throw Error(ErrorCode::kInvalidInput,
              "unknown language code '" + std::string(code) + "'");
}

LanguageTag LanguageTag::custom(std::string_view code, Script script) {
  const bool ok = code.size() == 3 &&
                  std::all_of(code.begin(), code.end(),
                              [](char c) { return c >= 'a' && c <= 'z'; });
  if (!ok) {
    throw Error(ErrorCode::kInvalidInput,
                "language code must be three lowercase letters: '" +
                    std::string(code) + "'");
  }
  return LanguageTag{std::string(code), script};
}

const std::vector<std::string>& builtin_languages() {
  static const std::vector<std::string> codes = [] {
    std::vector<std::string> v;
    for (const auto& l : kLanguages) v.emplace_back(l.code);
    return v;
  }();
  return codes;
}

const ScriptRegistry& ScriptRegistry::builtin() {
  static const ScriptRegistry registry =
      parse(embedded_files().at("script_registry.tsv"));
  return registry;
}

ScriptRegistry ScriptRegistry::parse(std::string_view text) {
  ScriptRegistry reg;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    if (fields[0] == "@version") {
      if (fields.size() != 2) throw ParseError(line_no, "bad @version line");
      reg.version_ = std::stoi(std::string(fields[1]));
      if (reg.version_ != 1) {
        throw ParseError(line_no, "unsupported registry version " +
                                      std::string(fields[1]));
      }
      continue;
    }
    if (fields[0] == "@script") {
      if (fields.size() != 5) throw ParseError(line_no, "bad @script line");
      auto id = parse_script(fields[1]);
      if (!id) throw ParseError(line_no, "unknown script '" + std::string(fields[1]) + "'");
      ScriptSpec spec;
      spec.id = *id;
      spec.first = parse_hex(fields[2], line_no);
      spec.last = parse_hex(fields[3], line_no);
      if (spec.last < spec.first) throw ParseError(line_no, "empty block");
      spec.brahmi = fields[4] == "brahmi";
      for (const auto& other : reg.specs_) {
        if (other && !(spec.last < other->first || spec.first > other->last)) {
          throw ParseError(line_no, "block overlaps " +
                                        std::string(to_string(other->id)));
        }
      }
      spec.classes.assign(spec.size(), CharClass::kOther);
      spec.mappable.assign(spec.size(), 0);
      spec.assigned.assign(spec.size(), 0);
      auto& slot = reg.specs_[static_cast<std::size_t>(spec.id)];
      if (slot) throw ParseError(line_no, "duplicate script");
      slot = std::move(spec);
      continue;
    }
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
    const char32_t cp = parse_hex(fields[0], line_no);
    auto id = parse_script(fields[1]);
    if (!id || !reg.specs_[static_cast<std::size_t>(*id)]) {
      throw ParseError(line_no, "record for undeclared script");
    }
    ScriptSpec& spec = *reg.specs_[static_cast<std::size_t>(*id)];
    if (!spec.contains(cp)) throw ParseError(line_no, "code point outside block");
    auto cls = parse_char_class(fields[2]);
    if (!cls) throw ParseError(line_no, "unknown class '" + std::string(fields[2]) + "'");
    const std::size_t off = cp - spec.first;
    spec.classes[off] = *cls;
    spec.assigned[off] = 1;
    if (fields[3] == "1") {
      if (!spec.brahmi) throw ParseError(line_no, "mappable flag on non-Brahmi script");
      spec.mappable[off] = 1;
    } else if (fields[3] != "0") {
      throw ParseError(line_no, "mappable flag must be 0 or 1");
    }
  }
  if (reg.version_ == 0) throw ParseError(line_no, "missing @version");
  // Mappable offsets must have a mappable Devanagari partner.
  const auto& deva = reg.specs_[static_cast<std::size_t>(Script::kDevanagari)];
  for (const auto& spec : reg.specs_) {
    if (!spec || !spec->brahmi) continue;
    if (!deva) throw ParseError(line_no, "Brahmi scripts require a devanagari block");
    for (std::size_t off = 0; off < spec->size(); ++off) {
      if (spec->mappable[off] && (off >= deva->size() || !deva->mappable[off])) {
        throw ParseError(line_no, "mappable " + hex4(spec->first + static_cast<char32_t>(off)) +
                                      " has no Devanagari counterpart");
      }
    }
  }
  return reg;
}

ScriptRegistry ScriptRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ScriptRegistry::serialize() const {
  std::string out = "# xlit script registry: code point, script, class, mappable\n";
  out += "@version\t" + std::to_string(version_) + "\n";
  for (const auto& spec : specs_) {
    if (!spec) continue;
    out += "@script\t" + std::string(to_string(spec->id)) + "\t" + hex4(spec->first) +
           "\t" + hex4(spec->last) + "\t" + (spec->brahmi ? "brahmi" : "other") + "\n";
  }
  for (const auto& spec : specs_) {
    if (!spec) continue;
    for (std::size_t off = 0; off < spec->size(); ++off) {
      if (!spec->assigned[off]) continue;
      out += hex4(spec->first + static_cast<char32_t>(off)) + "\t" +
             std::string(to_string(spec->id)) + "\t" +
             std::string(to_string(spec->classes[off])) + "\t" +
             (spec->mappable[off] ? "1" : "0") + "\n";
    }
  }
  return out;
}

bool ScriptRegistry::has(Script script) const {
  return specs_[static_cast<std::size_t>(script)].has_value();
}

const ScriptSpec& ScriptRegistry::spec(Script script) const {
  const auto& s = specs_[static_cast<std::size_t>(script)];
  if (!s) {
    throw Error(ErrorCode::kUnregisteredScript,
                "script '" + std::string(to_string(script)) + "' is not registered");
  }
  return *s;
}

std::vector<Script> ScriptRegistry::scripts() const {
  std::vector<Script> out;
  for (const auto& s : specs_) {
    if (s) out.push_back(s->id);
  }
  return out;
}

CharClass ScriptRegistry::classify(char32_t cp, Script script) const {
  const ScriptSpec& s = spec(script);
  if (s.contains(cp)) return s.classes[cp - s.first];
  if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0x0B ||
      cp == 0x0C || cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200A) ||
      cp == 0x3000) {
    return CharClass::kWhitespace;
  }
  if (cp >= '0' && cp <= '9') return CharClass::kDigit;
  return CharClass::kOther;
}

std::optional<Script> ScriptRegistry::block_of(char32_t cp) const {
  for (const auto& s : specs_) {
    if (s && s->contains(cp)) return s->id;
  }
  return std::nullopt;
}

std::string normalize(std::string_view text) {
  std::u32string cps = utf8::decode(text);
  std::erase_if(cps, is_invisible);
  const std::string stripped = utf8::encode(cps);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kIo, "ICU NFC normalizer unavailable");
  }
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(stripped);
  if (nfc->isNormalized(src, status) && U_SUCCESS(status)) return stripped;
  status = U_ZERO_ERROR;
  const icu::UnicodeString dst = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kInvalidInput, "normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

CharClass classify_char(char32_t cp, Script script, const ScriptRegistry& registry) {
  return registry.classify(cp, script);
}

std::string to_devanagari(std::string_view text, Script from,
                          TranslationReport* report, const ScriptRegistry& registry) {
  const ScriptSpec& src = brahmi_spec(registry, from);
  return translate(text, src, brahmi_spec(registry, Script::kDevanagari), report);
}

std::string from_devanagari(std::string_view text, Script to,
                            TranslationReport* report, const ScriptRegistry& registry) {
  const ScriptSpec& dst = brahmi_spec(registry, to);
  return translate(text, brahmi_spec(registry, Script::kDevanagari), dst, report);
}

std::u32string consonant_skeleton(std::string_view word, Script script,
                                  const ScriptRegistry& registry) {
  std::u32string out;
  for (char32_t cp : utf8::decode(word)) {
    if (registry.classify(cp, script) == CharClass::kConsonant) out.push_back(cp);
  }
  return out;
}

bool is_in_script(std::u32string_view word, Script script,
                  const ScriptRegistry& registry) {
  const ScriptSpec& s = registry.spec(script);
  return std::all_of(word.begin(), word.end(), [&](char32_t cp) {
    return s.contains(cp) || (cp >= '0' && cp <= '9');
  });
}

}  // namespace xlit::script
