#include "corrprobe/text.hpp"

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utext.h>
#include <unicode/utf8.h>

#include <memory>

#include "corrprobe/error.hpp"

namespace corrprobe::text {

namespace {

icu::UnicodeString to_unicode(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

const icu::Normalizer2& nfc_normalizer() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw InvariantError("ICU NFC normalizer unavailable");
  return *n;
}

// One word-break iterator per thread; creating them is expensive.
icu::BreakIterator& word_iterator() {
  thread_local std::unique_ptr<icu::BreakIterator> it = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> bi(
        icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status)) throw InvariantError("ICU word break iterator unavailable");
    return bi;
  }();
  return *it;
}

}  // namespace

std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const auto& n = nfc_normalizer();
  const icu::UnicodeString u = to_unicode(s);
  if (n.isNormalized(u, status) && U_SUCCESS(status)) return std::string(s);
  status = U_ZERO_ERROR;
  icu::UnicodeString out = n.normalize(u, status);
  if (U_FAILURE(status)) throw InputError("NFC normalization failed");
  return to_utf8(out);
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    if (c >= 0 && u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
  }
  return out;
}

std::string canonical(std::string_view s) { return collapse_whitespace(nfc(s)); }

std::vector<Span> word_spans(std::string_view s) {
  std::vector<Span> out;
  if (s.empty()) return out;
  UErrorCode status = U_ZERO_ERROR;
  UText* ut = utext_openUTF8(nullptr, s.data(), static_cast<int64_t>(s.size()), &status);
  if (U_FAILURE(status)) throw InputError("invalid UTF-8 text");
  auto& it = word_iterator();
  it.setText(ut, status);
  if (U_FAILURE(status)) {
    utext_close(ut);
    throw InputError("word segmentation failed");
  }
  int32_t start = it.first();
  for (int32_t end = it.next(); end != icu::BreakIterator::DONE; start = end, end = it.next()) {
    if (it.getRuleStatus() != UBRK_WORD_NONE) {
      out.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end)});
    }
  }
  // Detach the iterator from the soon-to-be-closed UText.
  it.setText(icu::UnicodeString());
  utext_close(ut);
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  for (const Span& sp : word_spans(s)) out.emplace_back(s.substr(sp.begin, sp.size()));
  return out;
}

std::string to_lower(std::string_view s) {
  icu::UnicodeString u = to_unicode(s);
  u.toLower(icu::Locale::getRoot());
  return to_utf8(u);
}

std::string to_upper(std::string_view s) {
  icu::UnicodeString u = to_unicode(s);
  u.toUpper(icu::Locale::getRoot());
  return to_utf8(u);
}

std::string capitalize_first(std::string_view s) {
  if (s.empty()) return {};
  int32_t i = 0;
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
  if (c < 0) return std::string(s);
  return to_upper(s.substr(0, static_cast<std::size_t>(i))) +
         std::string(s.substr(static_cast<std::size_t>(i)));
}

CaseClass classify_case(std::string_view token) {
  bool any_upper = false;
  bool any_lower = false;
  bool first_upper = false;
  bool rest_has_upper = false;
  bool first_letter_seen = false;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(token.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(token.data());
  while (i < len) {
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    if (c < 0) continue;
    const bool up = u_isUUppercase(c) || u_istitle(c);
    const bool low = u_isULowercase(c);
    if (!up && !low) continue;
    if (!first_letter_seen) {
      first_letter_seen = true;
      first_upper = up;
    } else if (up) {
      rest_has_upper = true;
    }
    any_upper = any_upper || up;
    any_lower = any_lower || low;
  }
  if (!any_upper) return CaseClass::lower;
  if (first_upper && !rest_has_upper) return CaseClass::title;
  if (!any_lower) return CaseClass::upper;
  return CaseClass::mixed;
}

std::string apply_casing(std::string_view pattern, std::string_view replacement) {
  const std::string lower = to_lower(replacement);
  switch (classify_case(pattern)) {
    case CaseClass::lower:
    case CaseClass::mixed:
      return lower;
    case CaseClass::title:
      return capitalize_first(lower);
    case CaseClass::upper:
      return to_upper(replacement);
  }
  return lower;
}

std::size_t codepoint_count(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char ch : s) {
    if ((ch & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::size_t byte_offset(std::string_view s, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (seen == cp) return i;
      ++seen;
    }
  }
  if (seen == cp) return s.size();
  throw InputError("character offset " + std::to_string(cp) + " beyond text length " +
                   std::to_string(seen));
}

std::string_view strip_line(std::string_view line) {
  if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace corrprobe::text
