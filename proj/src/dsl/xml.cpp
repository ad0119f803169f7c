#include "chargebt/dsl/xml.hpp"

#include <cctype>
#include <cstdint>

namespace chargebt::dsl::xml {

const Attribute* Element::attribute(std::string_view key) const {
  for (const Attribute& a : attributes) {
    if (a.name == key) return &a;
  }
  return nullptr;
}

namespace {

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}
bool is_name_char(char c) {
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '.';
}

void append_utf8(std::string& out, std::uint32_t cp) {
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

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  Element document() {
    skip_bom();
    skip_misc(true);
    if (eof()) fail("document has no root element");
    Element root = element();
    skip_misc(false);
    if (!eof()) fail("content after the root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const { throw SyntaxError(why, line_, column_); }
  [[noreturn]] void fail_at(const std::string& why, int line, int column) const {
    throw SyntaxError(why, line, column);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && !eof(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else if ((static_cast<unsigned char>(text_[pos_]) & 0xC0) != 0x80) {
        ++column_;
      }
      ++pos_;
    }
  }

  void expect(std::string_view s) {
    if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
    advance(s.size());
  }

  void skip_bom() {
    if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek())) != 0) advance();
  }

  void skip_comment() {
    const int line = line_, column = column_;
    advance(4);
    while (!starts_with("-->")) {
      if (eof()) fail_at("unterminated comment", line, column);
      advance();
    }
    advance(3);
  }

  void skip_misc(bool allow_prolog) {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        skip_comment();
      } else if (starts_with("<?")) {
        if (!allow_prolog) fail("processing instruction not allowed here");
        const int line = line_, column = column_;
        while (!starts_with("?>")) {
          if (eof()) fail_at("unterminated processing instruction", line, column);
          advance();
        }
        advance(2);
        allow_prolog = false;
      } else if (starts_with("<!")) {
        fail("DOCTYPE and CDATA are not supported");
      } else {
        return;
      }
    }
  }

  std::string name() {
    if (!is_name_start(peek())) fail("expected a name");
    const std::size_t start = pos_;
    while (!eof() && is_name_char(peek())) advance();
    return std::string(text_.substr(start, pos_ - start));
  }

  void entity(std::string& out) {
    const int line = line_, column = column_;
    advance();  // '&'
    const std::size_t start = pos_;
    while (!eof() && peek() != ';' && pos_ - start < 12) advance();
    if (peek() != ';') fail_at("unterminated entity reference", line, column);
    const std::string_view ref = text_.substr(start, pos_ - start);
    advance();
    if (ref == "amp") out += '&';
    else if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (ref.size() > 1 && ref[0] == '#') {
      const bool hex = ref[1] == 'x';
      const std::string digits(ref.substr(hex ? 2 : 1));
      std::uint32_t cp = 0;
      try {
        std::size_t used = 0;
        cp = static_cast<std::uint32_t>(std::stoul(digits, &used, hex ? 16 : 10));
        if (used != digits.size()) throw std::invalid_argument("digits");
      } catch (const std::exception&) {
        fail_at("bad character reference", line, column);
      }
      if (cp == 0 || cp > 0x10FFFF) fail_at("character reference out of range", line, column);
      append_utf8(out, cp);
    } else {
      fail_at("unknown entity '&" + std::string(ref) + ";'", line, column);
    }
  }

  Attribute attribute() {
    Attribute a;
    a.line = line_;
    a.column = column_;
    a.name = name();
    skip_ws();
    expect("=");
    skip_ws();
    const char quote = peek();
    if (quote != '"' && quote != '\'') fail("attribute value must be quoted");
    advance();
    for (;;) {
      if (eof()) fail_at("unterminated attribute value", a.line, a.column);
      const char c = peek();
      if (c == quote) break;
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') {
        entity(a.value);
      } else {
        a.value.push_back(c);
        advance();
      }
    }
    advance();
    return a;
  }

  Element element() {
    Element e;
    e.line = line_;
    e.column = column_;
    expect("<");
    e.name = name();
    for (;;) {
      const bool had_space = !eof() && std::isspace(static_cast<unsigned char>(peek())) != 0;
      skip_ws();
      if (eof()) fail_at("unclosed start tag <" + e.name + ">", e.line, e.column);
      if (starts_with("/>")) {
        advance(2);
        return e;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_space) fail("expected whitespace before attribute");
      Attribute a = attribute();
      if (e.attribute(a.name) != nullptr) fail_at("duplicate attribute '" + a.name + "'", a.line, a.column);
      e.attributes.push_back(std::move(a));
    }

    for (;;) {
      skip_ws();
      if (eof()) fail_at("element <" + e.name + "> is never closed", e.line, e.column);
      if (starts_with("<!--")) {
        skip_comment();
      } else if (starts_with("</")) {
        const int line = line_, column = column_;
        advance(2);
        const std::string closing = name();
        if (closing != e.name) {
          fail_at("element <" + e.name + "> is not closed (found </" + closing + "> at " + std::to_string(line) +
                      ":" + std::to_string(column) + ")",
                  e.line, e.column);
        }
        skip_ws();
        expect(">");
        return e;
      } else if (starts_with("<!") || starts_with("<?")) {
        fail("unsupported markup");
      } else if (peek() == '<') {
        e.children.push_back(element());
      } else {
        fail("unexpected character data");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

Element parse(std::string_view text) { return Reader(text).document(); }

std::string escape(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

}  // namespace chargebt::dsl::xml
