#include "civitopic/text.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <stdexcept>

namespace civitopic::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

char32_t fold_latin(char32_t cp) {
  switch (cp) {
    case U'à': case U'á': case U'â': case U'ã': case U'ä': case U'å':
    case U'ā': case U'ă': case U'ą':
      return U'a';
    case U'ç': case U'ć': case U'ĉ': case U'ċ': case U'č':
      return U'c';
    case U'è': case U'é': case U'ê': case U'ë': case U'ē': case U'ĕ':
    case U'ė': case U'ę': case U'ě':
      return U'e';
    case U'ì': case U'í': case U'î': case U'ï': case U'ĩ': case U'ī':
    case U'ĭ': case U'į': case U'ı':
      return U'i';
    case U'ñ': case U'ń': case U'ņ': case U'ň':
      return U'n';
    case U'ò': case U'ó': case U'ô': case U'õ': case U'ö': case U'ø':
    case U'ō': case U'ŏ': case U'ő':
      return U'o';
    case U'ù': case U'ú': case U'û': case U'ü': case U'ũ': case U'ū':
    case U'ŭ': case U'ů': case U'ű': case U'ų':
      return U'u';
    case U'ý': case U'ÿ':
      return U'y';
    default:
      return cp;
  }
}

bool is_combining_mark(char32_t cp) { return cp >= 0x0300 && cp <= 0x036F; }

}  // namespace

std::u32string decode_utf8(std::string_view input) {
  std::u32string out;
  out.reserve(input.size());
  std::size_t i = 0;
  while (i < input.size()) {
    const auto b0 = static_cast<unsigned char>(input[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool valid = i + static_cast<std::size_t>(extra) < input.size();
    for (int k = 1; valid && k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(input[i + k]);
      if ((b & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!valid) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(std::u32string_view input) {
  std::string out;
  out.reserve(input.size());
  for (char32_t cp : input) append_utf8(out, cp);
  return out;
}

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  if (cp >= 0x0100 && cp <= 0x0137) return cp | 1;
  if (cp == 0x0130) return U'i';
  if (cp >= 0x0139 && cp <= 0x0148) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x014A && cp <= 0x0177) return cp | 1;
  if (cp == 0x0178) return 0x00FF;
  if (cp >= 0x0179 && cp <= 0x017E) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x0391 && cp <= 0x03AB && cp != 0x03A2) return cp + 0x20;
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  return cp;
}

bool is_letter(char32_t cp) {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
  if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
  if (cp >= 0xC0 && cp <= 0x024F) return cp != 0xD7 && cp != 0xF7;
  if (is_combining_mark(cp)) return true;
  if (cp >= 0x0370 && cp <= 0x03FF) return cp != 0x037E && cp != 0x0387 && cp != 0x0375;
  if (cp >= 0x0400 && cp <= 0x0481) return true;
  if (cp >= 0x048A && cp <= 0x04FF) return true;
  if (cp >= 0x1E00 && cp <= 0x1EFF) return true;
  return false;
}

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x00A0: case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::string lowercase(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  for (char32_t cp : decode_utf8(input)) append_utf8(out, to_lower(cp));
  return out;
}

std::size_t length(std::string_view input) { return decode_utf8(input).size(); }

std::string clean(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  bool pending_space = false;
  for (char32_t cp : decode_utf8(input)) {
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (!is_letter(cp) && !is_digit(cp)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, to_lower(cp));
  }
  return out;
}

std::string normalize_whitespace_lower(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  bool pending_space = false;
  for (char32_t cp : decode_utf8(input)) {
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, to_lower(cp));
  }
  return out;
}

std::string fold(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  for (char32_t cp : decode_utf8(input)) {
    if (is_combining_mark(cp)) continue;
    append_utf8(out, fold_latin(to_lower(cp)));
  }
  return out;
}

std::string trim(std::string_view input) {
  const auto cps = decode_utf8(input);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_space(cps[b])) ++b;
  while (e > b && is_space(cps[e - 1])) --e;
  return encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view input) {
  std::vector<std::string> out;
  std::string current;
  for (char32_t cp : decode_utf8(input)) {
    if (is_space(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      append_utf8(current, cp);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string truncate_at_whitespace(std::string_view input, std::size_t max_chars) {
  const auto cps = decode_utf8(input);
  if (cps.size() <= max_chars) return std::string(input);
  std::size_t cut = max_chars;
  // A cut is clean when the first dropped character is whitespace.
  while (cut > 0 && !is_space(cps[cut])) --cut;
  if (cut == 0) cut = max_chars;
  while (cut > 0 && is_space(cps[cut - 1])) --cut;
  return encode_utf8(std::u32string_view(cps).substr(0, cut));
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("to_chars failed");
  return std::string(buf.data(), ptr);
}

}  // namespace civitopic::text
