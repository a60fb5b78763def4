#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heavytail/error.hpp"

/// A small error-tolerant HTML reader: enough of the tokenizer and tree
/// construction rules to recover ranking tables from real-world markup, plus a
/// matcher for compound selectors (tag, .class, [attr], [attr=value]) joined by
/// descendant combinators. It never throws on malformed input.
namespace heavytail::html {

struct Node {
  enum class Kind { Element, Text };

  Kind kind = Kind::Element;
  std::string name; // lower-case tag name for elements
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text; // for text nodes
  std::vector<std::unique_ptr<Node>> children;
  Node *parent = nullptr;

  bool is_element() const noexcept { return kind == Kind::Element; }

  std::optional<std::string> attribute(std::string_view key) const {
    for (const auto &[k, v] : attributes)
      if (k == key)
        return v;
    return std::nullopt;
  }

  bool has_class(std::string_view cls) const {
    auto value = attribute("class");
    if (!value)
      return false;
    std::string_view rest = *value;
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(" \t\r\n\f");
      if (start == std::string_view::npos)
        break;
      rest.remove_prefix(start);
      const auto end = rest.find_first_of(" \t\r\n\f");
      if (rest.substr(0, end) == cls)
        return true;
      if (end == std::string_view::npos)
        break;
      rest.remove_prefix(end);
    }
    return false;
  }

  std::string text_content() const {
    if (kind == Kind::Text)
      return text;
    std::string out;
    append_text(out);
    return out;
  }

private:
  void append_text(std::string &out) const {
    for (const auto &child : children) {
      if (child->kind == Kind::Text)
        out += child->text;
      else
        child->append_text(out);
    }
  }
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto &c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

inline void append_utf8(std::string &out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
    cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

/// Decodes numeric references and the common named ones; anything else is
/// kept verbatim.
inline std::string decode_entities(std::string_view s) {
  static constexpr std::pair<std::string_view, std::uint32_t> named[] = {
      {"amp", '&'},    {"lt", '<'},      {"gt", '>'},     {"quot", '"'},
      {"apos", '\''},  {"nbsp", 0xA0},   {"copy", 0xA9},  {"reg", 0xAE},
      {"euro", 0x20AC}, {"pound", 0xA3}, {"ndash", 0x2013}, {"mdash", 0x2014},
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += '&';
      continue;
    }
    const std::string_view ref = s.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (ref.size() > 1 && ref[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ref[1] == 'x' || ref[1] == 'X';
      std::string_view digits = ref.substr(hex ? 2 : 1);
      bool valid = !digits.empty();
      for (char c : digits) {
        int d = -1;
        if (c >= '0' && c <= '9')
          d = c - '0';
        else if (hex && c >= 'a' && c <= 'f')
          d = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F')
          d = c - 'A' + 10;
        if (d < 0 || cp > 0x10FFFF) {
          valid = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
      }
      if (valid) {
        append_utf8(out, cp);
        decoded = true;
      }
    } else {
      for (const auto &[key, cp] : named) {
        if (ref == key) {
          append_utf8(out, cp);
          decoded = true;
          break;
        }
      }
    }
    if (decoded)
      i = semi;
    else
      out += '&';
  }
  return out;
}

inline bool is_void(std::string_view tag) {
  static constexpr std::string_view voids[] = {"area", "base", "br",    "col",  "embed",
                                               "hr",   "img",  "input", "link", "meta",
                                               "param", "source", "track", "wbr"};
  return std::find(std::begin(voids), std::end(voids), tag) != std::end(voids);
}

inline bool is_raw_text(std::string_view tag) {
  return tag == "script" || tag == "style" || tag == "textarea" || tag == "title";
}

/// Elements whose start tag implicitly closes an open element of the same kind.
inline bool closes_same(std::string_view tag) {
  return tag == "option" || tag == "li" || tag == "p" || tag == "tr" || tag == "td" ||
         tag == "th" || tag == "dt" || tag == "dd";
}

} // namespace detail

class Document {
public:
  explicit Document(std::string_view markup) : root_(std::make_unique<Node>()) {
    root_->name = "#document";
    parse(markup);
  }

  const Node &root() const noexcept { return *root_; }

  /// Elements nested deeper than this are kept as leaves; bounds recursion.
  static constexpr std::size_t max_depth = 256;

private:
  void parse(std::string_view s) {
    std::vector<Node *> open{root_.get()};
    std::size_t i = 0;
    std::string pending_text;

    auto flush_text = [&] {
      if (!pending_text.empty()) {
        auto node = std::make_unique<Node>();
        node->kind = Node::Kind::Text;
        node->text = detail::decode_entities(pending_text);
        node->parent = open.back();
        open.back()->children.push_back(std::move(node));
        pending_text.clear();
      }
    };

    while (i < s.size()) {
      if (s[i] != '<') {
        pending_text += s[i++];
        continue;
      }
      // Comments, doctype, processing instructions.
      if (s.compare(i, 4, "<!--") == 0) {
        flush_text();
        const auto end = s.find("-->", i + 4);
        i = end == std::string_view::npos ? s.size() : end + 3;
        continue;
      }
      if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
        flush_text();
        const auto end = s.find('>', i + 2);
        i = end == std::string_view::npos ? s.size() : end + 1;
        continue;
      }
      const bool closing = i + 1 < s.size() && s[i + 1] == '/';
      std::size_t j = i + (closing ? 2 : 1);
      if (j >= s.size() || !std::isalpha(static_cast<unsigned char>(s[j]))) {
        // Not a tag: a literal '<' in text.
        pending_text += s[i++];
        continue;
      }
      flush_text();
      std::size_t name_end = j;
      while (name_end < s.size() && !detail::is_space(s[name_end]) && s[name_end] != '>' &&
             s[name_end] != '/')
        ++name_end;
      const std::string tag = detail::lower(s.substr(j, name_end - j));

      if (closing) {
        const auto end = s.find('>', name_end);
        i = end == std::string_view::npos ? s.size() : end + 1;
        for (std::size_t k = open.size(); k-- > 1;) {
          if (open[k]->name == tag) {
            open.resize(k);
            break;
          }
        }
        continue;
      }

      auto node = std::make_unique<Node>();
      node->name = tag;
      bool self_closing = false;
      std::size_t p = name_end;
      while (p < s.size()) {
        while (p < s.size() && detail::is_space(s[p]))
          ++p;
        if (p >= s.size())
          break;
        if (s[p] == '>') {
          ++p;
          break;
        }
        if (s[p] == '/') {
          std::size_t q = p + 1;
          while (q < s.size() && detail::is_space(s[q]))
            ++q;
          self_closing = q < s.size() && s[q] == '>';
          p = q;
          continue;
        }
        std::size_t key_end = p;
        while (key_end < s.size() && !detail::is_space(s[key_end]) && s[key_end] != '=' &&
               s[key_end] != '>' && s[key_end] != '/')
          ++key_end;
        if (key_end == p) {
          ++p;
          continue;
        }
        std::string key = detail::lower(s.substr(p, key_end - p));
        p = key_end;
        while (p < s.size() && detail::is_space(s[p]))
          ++p;
        std::string value;
        if (p < s.size() && s[p] == '=') {
          ++p;
          while (p < s.size() && detail::is_space(s[p]))
            ++p;
          if (p < s.size() && (s[p] == '"' || s[p] == '\'')) {
            const char quote = s[p++];
            const auto close = s.find(quote, p);
            const auto stop = close == std::string_view::npos ? s.size() : close;
            value = detail::decode_entities(s.substr(p, stop - p));
            p = close == std::string_view::npos ? s.size() : close + 1;
          } else {
            std::size_t v_end = p;
            while (v_end < s.size() && !detail::is_space(s[v_end]) && s[v_end] != '>')
              ++v_end;
            value = detail::decode_entities(s.substr(p, v_end - p));
            p = v_end;
          }
        }
        if (!node->attribute(key))
          node->attributes.emplace_back(std::move(key), std::move(value));
      }
      i = p;

      if (detail::closes_same(tag)) {
        for (std::size_t k = open.size(); k-- > 1;) {
          if (open[k]->name == tag) {
            open.resize(k);
            break;
          }
          if (open[k]->name == "select" || open[k]->name == "ul" || open[k]->name == "ol" ||
              open[k]->name == "table" || open[k]->name == "div")
            break;
        }
      }

      Node *raw = node.get();
      node->parent = open.back();
      open.back()->children.push_back(std::move(node));

      if (detail::is_void(tag) || self_closing)
        continue;
      if (detail::is_raw_text(tag)) {
        const std::string close_tag = "</" + tag;
        std::size_t end = i;
        while (true) {
          end = s.find("</", end);
          if (end == std::string_view::npos)
            break;
          if (detail::lower(s.substr(end, close_tag.size())) == close_tag)
            break;
          end += 2;
        }
        const auto stop = end == std::string_view::npos ? s.size() : end;
        if (stop > i) {
          auto text = std::make_unique<Node>();
          text->kind = Node::Kind::Text;
          text->text = tag == "script" || tag == "style"
                           ? std::string(s.substr(i, stop - i))
                           : detail::decode_entities(s.substr(i, stop - i));
          text->parent = raw;
          raw->children.push_back(std::move(text));
        }
        if (end == std::string_view::npos) {
          i = s.size();
        } else {
          const auto gt = s.find('>', end);
          i = gt == std::string_view::npos ? s.size() : gt + 1;
        }
        continue;
      }
      if (open.size() < max_depth)
        open.push_back(raw);
    }
    flush_text();
  }

  std::unique_ptr<Node> root_;
};

// --- selectors ----------------------------------------------------------------

struct SimpleSelector {
  std::string tag; // empty matches any element
  std::vector<std::string> classes;
  std::vector<std::pair<std::string, std::optional<std::string>>> attributes;

  bool matches(const Node &node) const {
    if (!node.is_element())
      return false;
    if (!tag.empty() && tag != "*" && node.name != tag)
      return false;
    for (const auto &cls : classes)
      if (!node.has_class(cls))
        return false;
    for (const auto &[key, value] : attributes) {
      auto actual = node.attribute(key);
      if (!actual || (value && *actual != *value))
        return false;
    }
    return true;
  }
};

/// Compound selectors separated by whitespace (descendant combinator).
class Selector {
public:
  Selector() = default;

  explicit Selector(std::string_view text) : source_(text) {
    std::size_t i = 0;
    auto fail = [&](const std::string &why) {
      throw Error(ErrorCode::Validation, "selector '" + std::string(text) + "': " + why);
    };
    auto ident = [&](std::size_t from) {
      std::size_t k = from;
      while (k < text.size() && (std::isalnum(static_cast<unsigned char>(text[k])) ||
                                 text[k] == '-' || text[k] == '_' || text[k] == '*'))
        ++k;
      return k;
    };
    while (i < text.size()) {
      while (i < text.size() && detail::is_space(text[i]))
        ++i;
      if (i >= text.size())
        break;
      SimpleSelector part;
      std::size_t k = ident(i);
      part.tag = detail::lower(text.substr(i, k - i));
      i = k;
      while (i < text.size() && !detail::is_space(text[i])) {
        if (text[i] == '.') {
          k = ident(i + 1);
          if (k == i + 1)
            fail("empty class name");
          part.classes.emplace_back(text.substr(i + 1, k - i - 1));
          i = k;
        } else if (text[i] == '[') {
          const auto close = text.find(']', i);
          if (close == std::string_view::npos)
            fail("unterminated attribute selector");
          std::string_view body = text.substr(i + 1, close - i - 1);
          const auto eq = body.find('=');
          if (eq == std::string_view::npos) {
            part.attributes.emplace_back(detail::lower(body), std::nullopt);
          } else {
            std::string_view value = body.substr(eq + 1);
            if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
                value.back() == value.front())
              value = value.substr(1, value.size() - 2);
            part.attributes.emplace_back(detail::lower(body.substr(0, eq)), std::string(value));
          }
          i = close + 1;
        } else {
          fail(std::string("unsupported character '") + text[i] + "'");
        }
      }
      if (part.tag.empty() && part.classes.empty() && part.attributes.empty())
        fail("empty compound selector");
      parts_.push_back(std::move(part));
    }
    if (parts_.empty())
      fail("empty selector");
  }

  const std::string &source() const noexcept { return source_; }

  bool matches(const Node &node) const {
    if (parts_.empty() || !parts_.back().matches(node))
      return false;
    std::size_t want = parts_.size() - 1;
    for (const Node *up = node.parent; up && want > 0; up = up->parent)
      if (parts_[want - 1].matches(*up))
        --want;
    return want == 0;
  }

private:
  std::string source_;
  std::vector<SimpleSelector> parts_;
};

namespace detail {
inline void collect(const Node &node, const Selector &sel, std::vector<const Node *> &out,
                    bool first_only) {
  for (const auto &child : node.children) {
    if (first_only && !out.empty())
      return;
    if (!child->is_element())
      continue;
    if (sel.matches(*child))
      out.push_back(child.get());
    collect(*child, sel, out, first_only);
  }
}
} // namespace detail

/// Matching descendants of `scope` in document order.
inline std::vector<const Node *> select_all(const Node &scope, const Selector &sel) {
  std::vector<const Node *> out;
  detail::collect(scope, sel, out, false);
  return out;
}

inline const Node *select_first(const Node &scope, const Selector &sel) {
  std::vector<const Node *> out;
  detail::collect(scope, sel, out, true);
  return out.empty() ? nullptr : out.front();
}

/// Collapses runs of whitespace (including U+00A0) and trims both ends.
inline std::string normalize_space(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool nbsp = static_cast<unsigned char>(s[i]) == 0xC2 && i + 1 < s.size() &&
                      static_cast<unsigned char>(s[i + 1]) == 0xA0;
    if (detail::is_space(s[i]) || nbsp) {
      pending_space = true;
      if (nbsp)
        ++i;
      continue;
    }
    if (pending_space && !out.empty())
      out += ' ';
    pending_space = false;
    out += s[i];
  }
  return out;
}

} // namespace heavytail::html
