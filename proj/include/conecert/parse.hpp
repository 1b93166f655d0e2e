#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "conecert/errors.hpp"

namespace conecert::detail {

// Cursor over a lower-cased copy of a mini-language string. Every failure
// reports the offset into the original text.
class SpecCursor {
 public:
  explicit SpecCursor(std::string_view text) : original_(text), text_(text) {
    std::transform(text_.begin(), text_.end(), text_.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }

  bool done() const { return pos_ >= text_.size(); }
  std::size_t pos() const { return pos_; }

  [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& what) const {
    throw ParseError(original_, at, what);
  }

  // Consumes "<tag>:" and returns the tag. `allow_bare` admits a tag with no
  // colon and no arguments (e.g. "const").
  std::string tag(bool allow_bare = false) {
    std::size_t start = pos_;
    while (!done() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected a family name");
    std::string name = text_.substr(start, pos_ - start);
    if (done() && allow_bare) return name;
    if (done() || text_[pos_] != ':') fail("expected ':' after '" + name + "'");
    ++pos_;
    return name;
  }

  double real() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    if (begin != end && *begin == '+') ++begin;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail("expected a real number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  int integer() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    int value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail("expected an integer");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  bool accept(char c) {
    if (!done() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void finish() const {
    if (!done()) fail("unexpected trailing characters");
  }

 private:
  std::string original_;
  std::string text_;
  std::size_t pos_ = 0;
};

}  // namespace conecert::detail
