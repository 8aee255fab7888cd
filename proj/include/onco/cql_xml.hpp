#pragma once

// CQL XML wire format.
//
// to_xml() writes the canonical form: LF line endings, one-space indent per
// nesting level, the ns1 prefix, attributes in the order name, roleName,
// predicate, value. parse_xml() accepts any well-formed document in the CQL
// namespace (any prefix, any whitespace) and rejects unknown elements.

#include <cstddef>
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onco/cql.hpp"
#include "onco/error.hpp"

namespace onco::cql {

inline constexpr std::string_view kNamespace = "http://CQL.caBIG/1/gov.nih.nci.cagrid.CQLQuery";

namespace detail {

inline std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

class XmlWriter {
 public:
  void open(std::string_view tag, const std::vector<std::pair<std::string, std::string>>& attrs, bool empty) {
    indent();
    out_ += "<ns1:";
    out_ += tag;
    for (const auto& [k, v] : attrs) out_ += " " + k + "=\"" + escape(v) + "\"";
    out_ += empty ? "/>\n" : ">\n";
    if (!empty) ++depth_;
  }
  void close(std::string_view tag) {
    --depth_;
    indent();
    out_ += "</ns1:" + std::string(tag) + ">\n";
  }
  void text_element(std::string_view tag, std::string_view text) {
    indent();
    out_ += "<ns1:" + std::string(tag) + ">" + escape(text) + "</ns1:" + std::string(tag) + ">\n";
  }
  void raw(std::string_view s) { out_ += s; }
  std::string take() { return std::move(out_); }

  void constraint(const Constraint& c) {
    if (const auto* a = std::get_if<Attribute>(&c)) {
      std::vector<std::pair<std::string, std::string>> attrs{{"name", a->name},
                                                             {"predicate", std::string(to_string(a->predicate))}};
      if (a->value) attrs.emplace_back("value", *a->value);
      open("Attribute", attrs, true);
    } else if (const auto* as = std::get_if<Association>(&c)) {
      open("Association", {{"name", as->name}, {"roleName", as->roleName}}, !as->child);
      if (as->child) {
        constraint(**as->child);
        close("Association");
      }
    } else {
      const auto& g = std::get<Group>(c);
      open("Group", {{"logicRelation", std::string(to_string(g.op))}}, false);
      for (const auto& item : g.items) constraint(item);
      close("Group");
    }
  }

 private:
  void indent() { out_.append(depth_, ' '); }
  std::string out_;
  std::size_t depth_ = 0;
};

// Minimal XML element tree.
struct XmlElement {
  std::string qname;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<XmlElement> children;
  std::string text;
  std::size_t offset = 0;
};

class XmlParser {
 public:
  explicit XmlParser(std::string_view doc) : doc_(doc) {}

  XmlElement parse_document() {
    skip_misc();
    if (pos_ < doc_.size() && starts_with("<?xml")) {
      skip_past("?>");
      skip_misc();
    }
    if (pos_ >= doc_.size() || doc_[pos_] != '<') fail("expected root element");
    XmlElement root = element();
    skip_misc();
    if (pos_ != doc_.size()) fail("content after root element");
    return root;
  }

 private:
  bool starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

  [[noreturn]] void fail(const std::string& message) const {
    throw CqlError("malformed XML at offset " + std::to_string(pos_) + ": " + message);
  }

  void skip_ws() {
    while (pos_ < doc_.size() && (doc_[pos_] == ' ' || doc_[pos_] == '\t' || doc_[pos_] == '\n' || doc_[pos_] == '\r'))
      ++pos_;
  }

  void skip_past(std::string_view end) {
    auto at = doc_.find(end, pos_);
    if (at == std::string_view::npos) fail("unterminated construct, expected '" + std::string(end) + "'");
    pos_ = at + end.size();
  }

  // Whitespace, comments and processing instructions.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) skip_past("-->");
      else if (starts_with("<?")) skip_past("?>");
      else return;
    }
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.';
  }

  std::string name() {
    std::size_t start = pos_;
    while (pos_ < doc_.size() && name_char(doc_[pos_])) ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(doc_.substr(start, pos_ - start));
  }

  std::string decode(std::string_view raw) const {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      auto ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (!ent.empty() && ent[0] == '#') {
        std::uint32_t cp = 0;
        try {
          cp = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                   ? static_cast<std::uint32_t>(std::stoul(std::string(ent.substr(2)), nullptr, 16))
                   : static_cast<std::uint32_t>(std::stoul(std::string(ent.substr(1)), nullptr, 10));
        } catch (const std::exception&) {
          fail("bad character reference &" + std::string(ent) + ";");
        }
        append_utf8(out, cp);
      } else {
        fail("unknown entity &" + std::string(ent) + ";");
      }
      i = semi;
    }
    return out;
  }

  static void append_utf8(std::string& out, std::uint32_t cp) {
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

  XmlElement element() {
    XmlElement el;
    el.offset = pos_;
    ++pos_;  // '<'
    el.qname = name();
    for (;;) {
      skip_ws();
      if (pos_ >= doc_.size()) fail("unterminated start tag");
      if (doc_[pos_] == '/') {
        if (!starts_with("/>")) fail("expected '/>'");
        pos_ += 2;
        return el;
      }
      if (doc_[pos_] == '>') {
        ++pos_;
        break;
      }
      std::string key = name();
      skip_ws();
      if (pos_ >= doc_.size() || doc_[pos_] != '=') fail("expected '=' after attribute " + key);
      ++pos_;
      skip_ws();
      if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) fail("expected quoted value");
      char quote = doc_[pos_++];
      auto end = doc_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      for (const auto& [k, _] : el.attributes)
        if (k == key) fail("duplicate attribute " + key);
      el.attributes.emplace_back(key, decode(doc_.substr(pos_, end - pos_)));
      pos_ = end + 1;
    }
    for (;;) {
      if (pos_ >= doc_.size()) fail("missing end tag for " + el.qname);
      if (starts_with("<!--")) {
        skip_past("-->");
      } else if (starts_with("<![CDATA[")) {
        pos_ += 9;
        auto end = doc_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA");
        el.text += doc_.substr(pos_, end - pos_);
        pos_ = end + 3;
      } else if (starts_with("</")) {
        pos_ += 2;
        std::string closing = name();
        if (closing != el.qname) fail("end tag " + closing + " does not match " + el.qname);
        skip_ws();
        if (pos_ >= doc_.size() || doc_[pos_] != '>') fail("expected '>'");
        ++pos_;
        return el;
      } else if (doc_[pos_] == '<') {
        el.children.push_back(element());
      } else {
        auto next = doc_.find('<', pos_);
        if (next == std::string_view::npos) next = doc_.size();
        el.text += decode(doc_.substr(pos_, next - pos_));
        pos_ = next;
      }
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

inline bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

// Maps the generic tree onto the AST, resolving namespace prefixes.
class CqlReader {
 public:
  CqlQuery read(const XmlElement& root) {
    Scope scope = push_scope({}, root);
    expect_local(root, scope, "CQLQuery");
    allow_attributes(root, {});
    no_text(root);
    CqlQuery q;
    bool have_target = false;
    for (const auto& child : root.children) {
      Scope cs = push_scope(scope, child);
      auto local = local_name(child, cs);
      if (local == "Target") {
        if (have_target) throw CqlError("more than one Target");
        have_target = true;
        q.target = target(child, cs);
      } else if (local == "QueryModifier") {
        if (q.modifier) throw CqlError("more than one QueryModifier");
        q.modifier = modifier(child, cs);
      } else {
        throw CqlError("unknown element " + child.qname + " under CQLQuery");
      }
    }
    if (!have_target) throw CqlError("missing Target");
    return q;
  }

 private:
  using Scope = std::map<std::string, std::string>;

  static Scope push_scope(Scope scope, const XmlElement& el) {
    for (const auto& [k, v] : el.attributes) {
      if (k == "xmlns") scope[""] = v;
      else if (k.rfind("xmlns:", 0) == 0) scope[k.substr(6)] = v;
    }
    return scope;
  }

  static std::string local_name(const XmlElement& el, const Scope& scope) {
    auto colon = el.qname.find(':');
    std::string prefix = colon == std::string::npos ? "" : el.qname.substr(0, colon);
    std::string local = colon == std::string::npos ? el.qname : el.qname.substr(colon + 1);
    auto it = scope.find(prefix);
    if (it == scope.end())
      throw CqlError("element " + el.qname + ": " +
                     (prefix.empty() ? std::string("no default namespace") : "undeclared prefix " + prefix));
    if (it->second != kNamespace) throw CqlError("element " + el.qname + ": namespace mismatch (" + it->second + ")");
    return local;
  }

  static void expect_local(const XmlElement& el, const Scope& scope, std::string_view want) {
    auto local = local_name(el, scope);
    if (local != want) throw CqlError("expected " + std::string(want) + ", found " + el.qname);
  }

  static void allow_attributes(const XmlElement& el, std::initializer_list<std::string_view> allowed) {
    for (const auto& [k, _] : el.attributes) {
      if (k == "xmlns" || k.rfind("xmlns:", 0) == 0) continue;
      bool ok = false;
      for (auto a : allowed) ok = ok || a == k;
      if (!ok) throw CqlError("element " + el.qname + ": unexpected attribute " + k);
    }
  }

  static void no_text(const XmlElement& el) {
    if (!blank(el.text)) throw CqlError("element " + el.qname + ": unexpected text content");
  }

  static std::optional<std::string> attr(const XmlElement& el, std::string_view key) {
    for (const auto& [k, v] : el.attributes)
      if (k == key) return v;
    return std::nullopt;
  }

  static std::string required(const XmlElement& el, std::string_view key) {
    auto v = attr(el, key);
    if (!v) throw CqlError("element " + el.qname + ": missing attribute " + std::string(key));
    return *v;
  }

  std::optional<Box<Constraint>> single_child(const XmlElement& el, const Scope& scope) {
    if (el.children.size() > 1) throw CqlError("element " + el.qname + ": more than one child constraint");
    if (el.children.empty()) return std::nullopt;
    const auto& child = el.children.front();
    return Box<Constraint>(constraint(child, push_scope(scope, child)));
  }

  Target target(const XmlElement& el, const Scope& scope) {
    allow_attributes(el, {"name"});
    no_text(el);
    return Target{required(el, "name"), single_child(el, scope)};
  }

  Constraint constraint(const XmlElement& el, const Scope& scope) {
    auto local = local_name(el, scope);
    no_text(el);
    if (local == "Attribute") {
      allow_attributes(el, {"name", "predicate", "value"});
      if (!el.children.empty()) throw CqlError("Attribute cannot have children");
      auto pred_text = attr(el, "predicate").value_or("EQUAL_TO");
      auto pred = parse_predicate(pred_text);
      if (!pred) throw CqlError("Attribute: unknown predicate " + pred_text);
      return Attribute{required(el, "name"), *pred, attr(el, "value")};
    }
    if (local == "Association") {
      allow_attributes(el, {"name", "roleName"});
      return Association{required(el, "name"), required(el, "roleName"), single_child(el, scope)};
    }
    if (local == "Group") {
      allow_attributes(el, {"logicRelation"});
      auto op = required(el, "logicRelation");
      if (op != "AND" && op != "OR") throw CqlError("Group: unknown logicRelation " + op);
      Group g{op == "AND" ? LogicalOp::And : LogicalOp::Or, {}};
      for (const auto& child : el.children) g.items.push_back(constraint(child, push_scope(scope, child)));
      return g;
    }
    throw CqlError("unknown element " + el.qname);
  }

  QueryModifier modifier(const XmlElement& el, const Scope& scope) {
    allow_attributes(el, {"countOnly"});
    no_text(el);
    QueryModifier m;
    for (const auto& child : el.children) {
      Scope cs = push_scope(scope, child);
      auto local = local_name(child, cs);
      if (!child.children.empty()) throw CqlError(child.qname + " cannot have children");
      if (local == "DistinctAttribute") {
        if (m.distinctAttribute) throw CqlError("more than one DistinctAttribute");
        m.distinctAttribute = child.text;
      } else if (local == "AttributeNames") {
        m.attributeNames.push_back(child.text);
      } else {
        throw CqlError("unknown element " + child.qname + " under QueryModifier");
      }
    }
    return m;
  }
};

inline void canonical_tree(const XmlElement& el, std::string& out) {
  out += "<" + el.qname;
  auto attrs = el.attributes;
  std::sort(attrs.begin(), attrs.end());
  for (const auto& [k, v] : attrs) out += " " + k + "=\"" + escape(v) + "\"";
  out += ">";
  if (!blank(el.text)) out += escape(el.text);
  for (const auto& c : el.children) canonical_tree(c, out);
  out += "</" + el.qname + ">";
}

}  // namespace detail

inline std::string to_xml(const CqlQuery& q) {
  if (auto v = validate_grammar(q); !v.empty()) throw CqlError("invalid CQL AST: " + v.front());
  detail::XmlWriter w;
  w.open("CQLQuery", {{"xmlns:ns1", std::string(kNamespace)}}, false);
  w.open("Target", {{"name", q.target.name}}, !q.target.child);
  if (q.target.child) {
    w.constraint(**q.target.child);
    w.close("Target");
  }
  if (q.modifier) {
    w.open("QueryModifier", {}, false);
    if (q.modifier->distinctAttribute) w.text_element("DistinctAttribute", *q.modifier->distinctAttribute);
    for (const auto& n : q.modifier->attributeNames) w.text_element("AttributeNames", n);
    w.close("QueryModifier");
  }
  w.close("CQLQuery");
  return w.take();
}

// Throws CqlError on malformed XML, unknown elements, namespace mismatch, a
// missing Target, or any grammar violation.
inline CqlQuery parse_xml(std::string_view doc) {
  detail::XmlParser parser(doc);
  auto root = parser.parse_document();
  CqlQuery q = detail::CqlReader{}.read(root);
  if (auto v = validate_grammar(q); !v.empty()) throw CqlError("grammar violation: " + v.front());
  return q;
}

// Whitespace- and attribute-order-insensitive comparison of two XML documents.
inline bool equivalent_xml(std::string_view a, std::string_view b) {
  std::string ca, cb;
  detail::canonical_tree(detail::XmlParser(a).parse_document(), ca);
  detail::canonical_tree(detail::XmlParser(b).parse_document(), cb);
  return ca == cb;
}

}  // namespace onco::cql
