#include "cpgql/mapper.hpp"

#include <array>
#include <sstream>

#include "embedded_data.hpp"

namespace cpgql {
namespace {

// Placeholders each template must carry, by template name.
const std::map<std::string, std::set<std::string>>& expected_placeholders() {
  static const std::map<std::string, std::set<std::string>> table{
      {"method_query", {"filters", "limit", "projection"}},
      {"call_query", {"filters", "limit", "projection"}},
      {"assignment_query", {"filters", "limit", "projection"}},
      {"data_flow", {"source", "sink", "limit"}},
      {"composite", {"source", "sink", "sink_scope", "path_filter", "limit"}},
      {"data_flow.reachable", {"source", "sink", "limit", "projection"}},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

QueryType template_query_type(const std::string& name) {
  const auto base = name.substr(0, name.find('.'));
  auto qt = query_type_from_string(base);
  if (!qt) throw MapperDefect("template section '" + name + "' does not name a query type");
  return *qt;
}

// Property accessor used in the projection lambda, per node family.
enum class NodeFamily { method, call, assignment, flow_node };

std::string_view accessor(NodeFamily family, OutputColumn col) {
  using C = OutputColumn;
  switch (family) {
    case NodeFamily::method:
      switch (col) {
        case C::typeFullName: return "methodReturn.typeFullName";
        case C::methodName: return "name";
        default: return to_string(col);
      }
    case NodeFamily::call:
      switch (col) {
        case C::fullName: return "methodFullName";
        case C::filename: return "method.filename";
        case C::methodName: return "method.name";
        default: return to_string(col);
      }
    case NodeFamily::assignment:
      switch (col) {
        case C::name: return "target.code";
        case C::fullName: return "method.fullName";
        case C::signature: return "method.signature";
        case C::filename: return "method.filename";
        case C::typeFullName: return "target.typeFullName";
        case C::methodName: return "method.name";
        default: return to_string(col);
      }
    case NodeFamily::flow_node:
      switch (col) {
        case C::name: return "propertyOption(PropertyNames.NAME)";
        case C::fullName: return "method.fullName";
        case C::signature: return "method.signature";
        case C::filename: return "method.filename";
        case C::typeFullName: return "propertyOption(PropertyNames.TYPE_FULL_NAME)";
        case C::methodName: return "method.name";
        default: return to_string(col);
      }
  }
  throw MapperDefect("unhandled node family");
}

std::string projection(NodeFamily family, const std::vector<OutputColumn>& cols) {
  if (cols.empty()) throw MapperDefect("projection over zero columns");
  std::string out = ".map(n => ";
  if (cols.size() == 1) {
    out += "n.";
    out += accessor(family, cols.front());
  } else {
    out += '(';
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ", ";
      out += "n.";
      out += accessor(family, cols[i]);
    }
    out += ')';
  }
  out += ").l";
  return out;
}

std::string limit_step(const std::optional<std::int64_t>& limit) {
  return limit ? ".take(" + std::to_string(*limit) + ")" : std::string();
}

bool is_identity_regex(const std::optional<std::string>& re) { return re && *re == ".*"; }

std::string regex_arg(const std::string& re) { return scala_string_literal(re); }
std::string name_arg(const std::string& id) { return scala_string_literal(escape_identifier(id)); }

std::string modifier_step(Modifier m) {
  switch (m) {
    case Modifier::public_: return ".isPublic";
    case Modifier::private_: return ".isPrivate";
    case Modifier::protected_: return ".isProtected";
    case Modifier::static_: return ".isStatic";
  }
  throw MapperDefect("unhandled modifier");
}

// Steps constraining a Method node. Field order is fixed.
std::string method_steps(const StructuralFilter& f) {
  std::string out;
  if (f.method_name && !is_identity_regex(f.method_name)) out += ".name(" + regex_arg(*f.method_name) + ")";
  if (f.type_name && !is_identity_regex(f.type_name))
    out += ".where(_.definingTypeDecl.fullName(" + regex_arg(*f.type_name) + "))";
  if (f.modifier) out += modifier_step(*f.modifier);
  if (f.annotation) out += ".where(_.annotation.name(" + name_arg(*f.annotation) + "))";
  return out;
}

// Wraps method-level steps as a constraint on the enclosing method.
std::string enclosing_method_scope(const StructuralFilter& f) {
  StructuralFilter method_only = f;
  method_only.target_identifier.reset();
  const auto steps = method_steps(method_only);
  return steps.empty() ? std::string() : ".where(_.method" + steps + ")";
}

std::string structural_filters(QueryType qt, const StructuralFilter& f) {
  switch (qt) {
    case QueryType::method_query: {
      auto out = method_steps(f);
      if (f.target_identifier) out += ".where(_.ast.isIdentifier.name(" + name_arg(*f.target_identifier) + "))";
      return out;
    }
    case QueryType::call_query: {
      std::string out;
      if (f.method_name && !is_identity_regex(f.method_name)) out += ".name(" + regex_arg(*f.method_name) + ")";
      StructuralFilter rest = f;
      rest.method_name.reset();
      out += enclosing_method_scope(rest);
      if (f.target_identifier)
        out += ".where(_.argument.isIdentifier.name(" + name_arg(*f.target_identifier) + "))";
      return out;
    }
    case QueryType::assignment_query: {
      auto out = enclosing_method_scope(f);
      if (f.target_identifier)
        out += ".where(_.target.isIdentifier.name(" + name_arg(*f.target_identifier) + "))";
      return out;
    }
    default:
      throw MapperDefect("structural filters requested for a flow query");
  }
}

enum class EndpointRole { source, sink };

std::string endpoint_traversal(const FlowEndpoint& ep, EndpointRole role) {
  switch (ep.kind) {
    case EndpointKind::parameter:
      if (!ep.method) throw MapperDefect("parameter endpoint without method");
      return "cpg.method.name(" + name_arg(*ep.method) + ").parameter";
    case EndpointKind::call: {
      if (!ep.name) throw MapperDefect("call endpoint without name");
      std::string out = "cpg.call.name(" + name_arg(*ep.name) + ")";
      if (role == EndpointRole::sink) out += ".argument";
      return out;
    }
    case EndpointKind::literal:
      if (!ep.value) throw MapperDefect("literal endpoint without value");
      return "cpg.literal.code(" + name_arg(*ep.value) + ")";
  }
  throw MapperDefect("unhandled endpoint kind");
}

std::string fill(const QueryTemplate& tpl, const std::map<std::string, std::string>& values) {
  for (const auto& p : tpl.required_placeholders)
    if (!values.contains(p)) throw MapperDefect("template '" + tpl.name + "' placeholder {{" + p + "}} has no value");
  for (const auto& [k, _] : values)
    if (!tpl.required_placeholders.contains(k))
      throw MapperDefect("template '" + tpl.name + "' has no placeholder {{" + k + "}}");

  std::string out;
  std::string_view s = tpl.skeleton;
  while (true) {
    const auto open = s.find("{{");
    if (open == std::string_view::npos) {
      out += s;
      break;
    }
    const auto close = s.find("}}", open);
    if (close == std::string_view::npos) throw MapperDefect("unterminated placeholder in '" + tpl.name + "'");
    out += s.substr(0, open);
    out += values.at(std::string(s.substr(open + 2, close - open - 2)));
    s.remove_prefix(close + 2);
  }
  return out;
}

const QueryTemplate& template_for(const std::string& name) {
  const auto& all = builtin_templates();
  auto it = all.find(name);
  if (it == all.end()) throw MapperDefect("no template named '" + name + "'");
  return it->second;
}

}  // namespace

std::set<std::string> placeholders_in(std::string_view skeleton) {
  std::set<std::string> out;
  for (auto open = skeleton.find("{{"); open != std::string_view::npos; open = skeleton.find("{{", open + 2)) {
    const auto close = skeleton.find("}}", open);
    if (close == std::string_view::npos) break;
    out.emplace(skeleton.substr(open + 2, close - open - 2));
  }
  return out;
}

std::map<std::string, QueryTemplate> parse_templates(std::string_view file_text) {
  std::map<std::string, QueryTemplate> out;
  std::istringstream in{std::string(file_text)};
  std::string line;
  QueryTemplate* current = nullptr;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      std::string name(t.substr(1, t.size() - 2));
      if (out.contains(name)) throw MapperDefect("duplicate template section '" + name + "'");
      current = &out[name];
      current->name = name;
      current->query_type = template_query_type(name);
      continue;
    }
    if (!current) throw MapperDefect("template text outside a section");
    if (!current->skeleton.empty()) throw MapperDefect("template '" + current->name + "' spans several lines");
    current->skeleton = std::string(t);
  }

  const auto& expected = expected_placeholders();
  for (auto& [name, tpl] : out) {
    auto want = expected.find(name);
    if (want == expected.end()) throw MapperDefect("unexpected template section '" + name + "'");
    tpl.required_placeholders = want->second;
    if (placeholders_in(tpl.skeleton) != tpl.required_placeholders)
      throw MapperDefect("template '" + name + "' placeholders do not match the mapper's fill set");
  }
  for (const auto& [name, _] : expected)
    if (!out.contains(name)) throw MapperDefect("template section '" + name + "' is missing");
  return out;
}

const std::map<std::string, QueryTemplate>& builtin_templates() {
  static const auto templates = parse_templates(embedded::templates_v1());
  return templates;
}

std::string escape_identifier(std::string_view raw) {
  static constexpr std::string_view meta = R"(\.^$|?*+()[]{}")";
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u == 0x7f) throw IdentifierError("identifier contains a control character");
    if (meta.find(c) != std::string_view::npos) out += '\\';
    out += c;
  }
  return out;
}

std::string scala_string_literal(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '\\' || c == '"') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

CpgqlQuery compile(const QuerySpec& spec, FlowProjection flow_projection) {
  CpgqlQuery q;
  q.spec_fingerprint = spec_fingerprint(spec);
  std::map<std::string, std::string> values;
  values["limit"] = limit_step(spec.limit);

  switch (spec.query_type) {
    case QueryType::method_query:
    case QueryType::call_query:
    case QueryType::assignment_query: {
      if (!spec.filter) throw MapperDefect("structural spec without filter");
      const NodeFamily family = spec.query_type == QueryType::method_query ? NodeFamily::method
                                : spec.query_type == QueryType::call_query ? NodeFamily::call
                                                                           : NodeFamily::assignment;
      values["filters"] = structural_filters(spec.query_type, *spec.filter);
      values["projection"] = projection(family, spec.output_columns);
      q.text = fill(template_for(std::string(to_string(spec.query_type))), values);
      return q;
    }
    case QueryType::data_flow:
    case QueryType::composite: {
      if (!spec.source || !spec.sink) throw MapperDefect("flow spec without endpoints");
      values["source"] = endpoint_traversal(*spec.source, EndpointRole::source);
      values["sink"] = endpoint_traversal(*spec.sink, EndpointRole::sink);
      std::string name(to_string(spec.query_type));
      if (spec.query_type == QueryType::composite) {
        if (!spec.filter) throw MapperDefect("composite spec without filter");
        values["sink_scope"] = enclosing_method_scope(*spec.filter);
        values["path_filter"] =
            spec.filter->target_identifier
                ? ".filterNot(_.elements.iterator.isCall.name(" + name_arg(*spec.filter->target_identifier) +
                      ").nonEmpty)"
                : std::string();
      } else if (flow_projection == FlowProjection::reachable) {
        name += ".reachable";
        values["projection"] = projection(NodeFamily::flow_node, spec.output_columns);
      }
      q.text = fill(template_for(name), values);
      return q;
    }
  }
  throw MapperDefect("unhandled query type");
}

}  // namespace cpgql
