#include "chargebt/dsl/document.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "chargebt/dsl/xml.hpp"

namespace chargebt::dsl {

const TreeDefinition* TreeDocument::find_tree(std::string_view name) const {
  for (const TreeDefinition& t : trees) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const BehaviorSpec* TreeDocument::find_behavior(std::string_view name) const {
  for (const BehaviorSpec& b : manifest) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const KeyDeclaration* TreeDocument::find_key(std::string_view key) const {
  for (const KeyDeclaration& k : blackboard) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

void TreeDocument::declare_keys(bt::Blackboard& bb) const {
  for (const KeyDeclaration& k : blackboard) bb.declare(k.key, k.type);
}

namespace {

using xml::Attribute;
using xml::Element;

[[noreturn]] void fail(const std::string& why, const Element& e) { throw SyntaxError(why, e.line, e.column); }
[[noreturn]] void fail(const std::string& why, const Attribute& a) { throw SyntaxError(why, a.line, a.column); }

bt::SourceLocation location_of(const Element& e) { return {e.line, e.column}; }

void allow_attributes(const Element& e, std::initializer_list<std::string_view> allowed) {
  for (const Attribute& a : e.attributes) {
    if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end()) {
      fail("unknown attribute '" + a.name + "' on <" + e.name + ">", a);
    }
  }
}

const Attribute& required(const Element& e, std::string_view key) {
  const Attribute* a = e.attribute(key);
  if (a == nullptr) fail("<" + e.name + "> requires attribute '" + std::string(key) + "'", e);
  if (a->value.empty()) fail("attribute '" + std::string(key) + "' must not be empty", *a);
  return *a;
}

void no_children(const Element& e) {
  if (!e.children.empty()) fail("<" + e.name + "> cannot contain elements", e.children.front());
}

bool parse_flag(const Attribute& a) {
  if (a.value == "true") return true;
  if (a.value == "false") return false;
  fail("expected 'true' or 'false' for '" + a.name + "'", a);
}

long parse_integer(const Attribute& a) {
  try {
    std::size_t used = 0;
    const long v = std::stol(a.value, &used);
    if (used == a.value.size()) return v;
  } catch (const std::exception&) {
  }
  fail("expected an integer for '" + a.name + "', got '" + a.value + "'", a);
}

bt::ValueType parse_type(const Attribute& a) {
  const auto t = bt::value_type_from_string(a.value);
  if (!t) fail("unknown value type '" + a.value + "'", a);
  return *t;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<bt::PortBinding> parse_ports(const Attribute& a) {
  std::vector<bt::PortBinding> out;
  std::string_view rest = a.value;
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const std::string item = trim(rest.substr(0, semi));
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail("port binding '" + item + "' is not of the form port=key", a);
    bt::PortBinding b{trim(std::string_view(item).substr(0, eq)), trim(std::string_view(item).substr(eq + 1))};
    if (b.port.empty() || b.key.empty()) fail("port binding '" + item + "' is not of the form port=key", a);
    for (const auto& existing : out) {
      if (existing.port == b.port) fail("port '" + b.port + "' bound twice", a);
    }
    out.push_back(std::move(b));
  }
  return out;
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string tree_name) : tree_name_(std::move(tree_name)) {}

  bt::TreeNode node(const Element& e, const std::string& path) {
    bt::TreeNode n;
    n.location = location_of(e);
    if (e.name == "Sequence" || e.name == "Fallback") {
      allow_attributes(e, {"id", "label", "memory"});
      n.kind = e.name == "Sequence" ? bt::NodeKind::kSequence : bt::NodeKind::kFallback;
      if (const Attribute* a = e.attribute("memory")) n.memory = parse_flag(*a);
    } else if (e.name == "Parallel") {
      allow_attributes(e, {"id", "label", "success_threshold"});
      n.kind = bt::NodeKind::kParallel;
      if (const Attribute* a = e.attribute("success_threshold"); a != nullptr && a->value != "all") {
        const long v = parse_integer(*a);
        if (v < 0) fail("success_threshold must be 'all' or a non-negative count", *a);
        n.success_threshold = static_cast<std::size_t>(v);
      }
    } else if (e.name == "Decorator") {
      allow_attributes(e, {"id", "label", "type", "max_attempts"});
      n.kind = bt::NodeKind::kDecorator;
      const Attribute& type = required(e, "type");
      const auto kind = bt::decorator_from_string(type.value);
      if (!kind) fail("unknown decorator type '" + type.value + "'", type);
      n.decorator = *kind;
      const Attribute* attempts = e.attribute("max_attempts");
      if (n.decorator == bt::DecoratorKind::kRetryUntilSuccessful) {
        n.max_attempts = static_cast<int>(parse_integer(required(e, "max_attempts")));
      } else if (attempts != nullptr) {
        fail("max_attempts is only valid for RetryUntilSuccessful", *attempts);
      }
    } else if (e.name == "Action" || e.name == "Condition") {
      allow_attributes(e, {"id", "label", "name", "ports"});
      n.kind = e.name == "Action" ? bt::NodeKind::kAction : bt::NodeKind::kCondition;
      n.behavior = required(e, "name").value;
      if (const Attribute* a = e.attribute("ports")) n.ports = parse_ports(*a);
    } else {
      fail("unknown node element <" + e.name + ">", e);
    }

    if (const Attribute* a = e.attribute("id")) {
      if (a->value.empty()) fail("node id must not be empty", *a);
      n.id = a->value;
    } else {
      n.id = tree_name_ + "." + path;
    }
    if (!ids_.insert(n.id).second) throw DuplicateNodeId(n.id, e.line, e.column);
    if (const Attribute* a = e.attribute("label")) n.label = a->value;

    for (std::size_t i = 0; i < e.children.size(); ++i) {
      n.children.push_back(node(e.children[i], path + "." + std::to_string(i)));
    }
    return n;
  }

 private:
  std::string tree_name_;
  std::set<std::string> ids_;
};

void read_blackboard(const Element& e, TreeDocument& doc) {
  allow_attributes(e, {});
  for (const Element& k : e.children) {
    if (k.name != "Key") fail("expected <Key>, got <" + k.name + ">", k);
    allow_attributes(k, {"name", "type"});
    no_children(k);
    KeyDeclaration decl{required(k, "name").value, parse_type(required(k, "type")), location_of(k)};
    if (doc.find_key(decl.key) != nullptr) fail("blackboard key '" + decl.key + "' declared twice", k);
    doc.blackboard.push_back(std::move(decl));
  }
}

void read_manifest(const Element& e, TreeDocument& doc) {
  allow_attributes(e, {});
  for (const Element& b : e.children) {
    BehaviorSpec spec;
    if (b.name == "Action") {
      spec.kind = bt::BehaviorKind::kAction;
    } else if (b.name == "Condition") {
      spec.kind = bt::BehaviorKind::kCondition;
    } else {
      fail("expected <Action> or <Condition> in <Manifest>, got <" + b.name + ">", b);
    }
    allow_attributes(b, {"name"});
    spec.name = required(b, "name").value;
    spec.location = location_of(b);
    if (doc.find_behavior(spec.name) != nullptr) fail("behavior '" + spec.name + "' listed twice", b);
    for (const Element& p : b.children) {
      if (p.name != "Port") fail("expected <Port>, got <" + p.name + ">", p);
      allow_attributes(p, {"name", "type"});
      no_children(p);
      spec.ports.push_back({required(p, "name").value, parse_type(required(p, "type"))});
    }
    doc.manifest.push_back(std::move(spec));
  }
}

void read_tree(const Element& e, TreeDocument& doc) {
  allow_attributes(e, {"name"});
  const Attribute& name = required(e, "name");
  if (doc.find_tree(name.value) != nullptr) throw DuplicateTreeName(name.value, e.line, e.column);
  if (e.children.size() != 1) fail("<Tree> must contain exactly one root node", e);
  TreeBuilder builder(name.value);
  doc.trees.push_back({name.value, builder.node(e.children.front(), "0"), location_of(e)});
}

// Serialization --------------------------------------------------------------

class Writer {
 public:
  std::string str() const { return out_.str(); }

  void line(int depth, const std::string& text) { out_ << std::string(static_cast<std::size_t>(depth) * 2, ' ') << text << '\n'; }

  void node(const bt::TreeNode& n, int depth) {
    std::string open = "<" + element_name(n);
    attr(open, "id", n.id);
    if (!n.label.empty()) attr(open, "label", n.label);
    switch (n.kind) {
      case bt::NodeKind::kSequence:
      case bt::NodeKind::kFallback:
        attr(open, "memory", n.memory ? "true" : "false");
        break;
      case bt::NodeKind::kParallel:
        attr(open, "success_threshold", n.success_threshold ? std::to_string(*n.success_threshold) : "all");
        break;
      case bt::NodeKind::kDecorator:
        attr(open, "type", std::string(bt::to_string(n.decorator)));
        if (n.decorator == bt::DecoratorKind::kRetryUntilSuccessful) {
          attr(open, "max_attempts", std::to_string(n.max_attempts));
        }
        break;
      case bt::NodeKind::kAction:
      case bt::NodeKind::kCondition: {
        attr(open, "name", n.behavior);
        if (!n.ports.empty()) {
          std::string ports;
          for (const auto& p : n.ports) ports += (ports.empty() ? "" : ";") + p.port + "=" + p.key;
          attr(open, "ports", ports);
        }
        break;
      }
    }
    if (n.children.empty()) {
      line(depth, open + "/>");
      return;
    }
    line(depth, open + ">");
    for (const auto& c : n.children) node(c, depth + 1);
    line(depth, "</" + element_name(n) + ">");
  }

  static void attr(std::string& s, const std::string& key, const std::string& value) {
    s += " " + key + "=\"" + xml::escape(value) + "\"";
  }

 private:
  static std::string element_name(const bt::TreeNode& n) { return std::string(bt::to_string(n.kind)); }

  std::ostringstream out_;
};

}  // namespace

TreeDocument parse(std::string_view text) {
  const Element root = xml::parse(text);
  if (root.name != "TreeDocument") fail("root element must be <TreeDocument>", root);
  allow_attributes(root, {"format"});
  const Attribute& format = required(root, "format");
  if (format.value != std::to_string(kFormatVersion)) {
    throw UnsupportedFormat("unsupported format version '" + format.value + "'", format.line, format.column);
  }

  TreeDocument doc;
  bool seen_blackboard = false, seen_manifest = false;
  for (const Element& e : root.children) {
    if (e.name == "Blackboard") {
      if (std::exchange(seen_blackboard, true)) fail("more than one <Blackboard>", e);
      read_blackboard(e, doc);
    } else if (e.name == "Manifest") {
      if (std::exchange(seen_manifest, true)) fail("more than one <Manifest>", e);
      read_manifest(e, doc);
    } else if (e.name == "Tree") {
      read_tree(e, doc);
    } else {
      fail("unexpected element <" + e.name + "> in <TreeDocument>", e);
    }
  }
  return doc;
}

TreeDocument parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string serialize(const TreeDocument& doc) {
  Writer w;
  w.line(0, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
  w.line(0, "<TreeDocument format=\"" + std::to_string(doc.format_version) + "\">");
  if (!doc.blackboard.empty()) {
    w.line(1, "<Blackboard>");
    for (const auto& k : doc.blackboard) {
      std::string s = "<Key";
      Writer::attr(s, "name", k.key);
      Writer::attr(s, "type", std::string(bt::to_string(k.type)));
      w.line(2, s + "/>");
    }
    w.line(1, "</Blackboard>");
  }
  if (!doc.manifest.empty()) {
    w.line(1, "<Manifest>");
    for (const auto& b : doc.manifest) {
      const std::string tag = b.kind == bt::BehaviorKind::kAction ? "Action" : "Condition";
      std::string s = "<" + tag;
      Writer::attr(s, "name", b.name);
      if (b.ports.empty()) {
        w.line(2, s + "/>");
        continue;
      }
      w.line(2, s + ">");
      for (const auto& p : b.ports) {
        std::string ps = "<Port";
        Writer::attr(ps, "name", p.name);
        Writer::attr(ps, "type", std::string(bt::to_string(p.type)));
        w.line(3, ps + "/>");
      }
      w.line(2, "</" + tag + ">");
    }
    w.line(1, "</Manifest>");
  }
  for (const auto& t : doc.trees) {
    std::string s = "<Tree";
    Writer::attr(s, "name", t.name);
    w.line(1, s + ">");
    w.node(t.root, 2);
    w.line(1, "</Tree>");
  }
  w.line(0, "</TreeDocument>");
  return w.str();
}

TreeDocument merge(std::vector<TreeDocument> docs) {
  TreeDocument out;
  for (TreeDocument& d : docs) {
    for (KeyDeclaration& k : d.blackboard) {
      if (const KeyDeclaration* prev = out.find_key(k.key)) {
        if (prev->type != k.type) {
          throw ParseError("blackboard key '" + k.key + "' declared with conflicting types", k.location.line,
                           k.location.column);
        }
        continue;
      }
      out.blackboard.push_back(std::move(k));
    }
    for (BehaviorSpec& b : d.manifest) {
      if (const BehaviorSpec* prev = out.find_behavior(b.name)) {
        if (!(*prev == b)) {
          throw ParseError("behavior '" + b.name + "' declared differently", b.location.line, b.location.column);
        }
        continue;
      }
      out.manifest.push_back(std::move(b));
    }
    for (TreeDefinition& t : d.trees) {
      if (out.find_tree(t.name) != nullptr) throw DuplicateTreeName(t.name, t.location.line, t.location.column);
      out.trees.push_back(std::move(t));
    }
  }
  return out;
}

TreeDocument load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 9 && name.ends_with(".tree.xml")) files.push_back(entry.path());
  }
  if (files.empty()) throw std::runtime_error("no *.tree.xml files in " + dir);
  std::sort(files.begin(), files.end());
  std::vector<TreeDocument> docs;
  for (const auto& f : files) {
    try {
      docs.push_back(parse_file(f.string()));
    } catch (const ParseError& e) {
      throw ParseError(f.filename().string() + ": " + e.detail(), e.line(), e.column());
    }
  }
  return merge(std::move(docs));
}

}  // namespace chargebt::dsl
