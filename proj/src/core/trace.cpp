#include "carve/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>

#include "carve/error.hpp"

namespace carve {

namespace {

constexpr std::pair<EventKind, std::string_view> kEventNames[] = {
    {EventKind::InvokeFunPre, "invokeFunPre"},
    {EventKind::InvokeFun, "invokeFun"},
    {EventKind::FunctionEnter, "functionEnter"},
    {EventKind::FunctionExit, "functionExit"},
    {EventKind::StmtStart, "stmtStart"},
    {EventKind::StmtEnd, "stmtEnd"},
    {EventKind::Read, "read"},
    {EventKind::Write, "write"},
    {EventKind::GetField, "getField"},
    {EventKind::PutField, "putField"},
    {EventKind::Literal, "literal"},
};

std::optional<EventKind> event_kind_from(std::string_view name) {
  for (const auto& [k, n] : kEventNames)
    if (n == name) return k;
  return std::nullopt;
}

std::string format_double(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

[[noreturn]] void bad_line(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::Parse, "trace line " + std::to_string(line) + ": " + msg);
}

}  // namespace

std::string Value::type_tag() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Undefined>) return "undefined";
        else if constexpr (std::is_same_v<T, Null>) return "null";
        else if constexpr (std::is_same_v<T, bool>) return "boolean";
        else if constexpr (std::is_same_v<T, std::int64_t>) return "int";
        else if constexpr (std::is_same_v<T, double>) return "float";
        else if constexpr (std::is_same_v<T, std::string>) return "string";
        else return "ref";
      },
      v_);
}

std::string Value::literal_text() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Undefined>) return "undefined";
        else if constexpr (std::is_same_v<T, Null>) return "null";
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, std::string>) {
          std::string out = "\"";
          for (char c : v) {
            switch (c) {
              case '\n': out += "\\n"; break;
              case '\t': out += "\\t"; break;
              case '\r': out += "\\r"; break;
              case '"': out += "\\\""; break;
              case '\\': out += "\\\\"; break;
              default: out += c;
            }
          }
          return out + "\"";
        } else {
          return "<ref " + std::to_string(v.id) + ">";
        }
      },
      v_);
}

bool operator==(const Value& a, const Value& b) {
  if (a.v_.index() != b.v_.index()) return false;
  if (const double* da = std::get_if<double>(&a.v_)) {
    double db = std::get<double>(b.v_);
    return std::memcmp(da, &db, sizeof(double)) == 0;
  }
  return a.v_ == b.v_;
}

Json value_to_json(const Value& v) {
  if (v.is_ref()) return Json{{"k", "r"}, {"id", v.ref_id()}};
  Json j{{"k", "p"}, {"t", v.type_tag()}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::int64_t> ||
                      std::is_same_v<T, std::string>) {
          j["v"] = x;
        } else if constexpr (std::is_same_v<T, double>) {
          if (std::isfinite(x)) j["v"] = x;
          else j["v"] = format_double(x);
        }
      },
      v.storage());
  return j;
}

Value value_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("k")) throw Error(ErrorKind::Parse, "value needs 'k'");
  const std::string k = j["k"].get<std::string>();
  if (k == "r") {
    if (!j.contains("id") || !j["id"].is_number_integer())
      throw Error(ErrorKind::Parse, "reference value needs integer 'id'");
    RefId id = j["id"].get<RefId>();
    if (id <= 0) throw Error(ErrorKind::Parse, "reference ids must be positive");
    return Ref{id};
  }
  if (k != "p") throw Error(ErrorKind::Parse, "unknown value kind '" + k + "'");
  if (!j.contains("t") || !j["t"].is_string()) throw Error(ErrorKind::Parse, "primitive needs 't'");
  const std::string t = j["t"].get<std::string>();
  auto need_v = [&]() -> const Json& {
    if (!j.contains("v")) throw Error(ErrorKind::Parse, "primitive '" + t + "' needs 'v'");
    return j["v"];
  };
  if (t == "undefined") return Undefined{};
  if (t == "null") return Null{};
  if (t == "boolean") {
    const Json& v = need_v();
    if (!v.is_boolean()) throw Error(ErrorKind::Parse, "boolean value expected");
    return v.get<bool>();
  }
  if (t == "int") {
    const Json& v = need_v();
    if (!v.is_number_integer()) throw Error(ErrorKind::Parse, "int value expected");
    return v.get<std::int64_t>();
  }
  if (t == "float") {
    const Json& v = need_v();
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "Infinity") return std::numeric_limits<double>::infinity();
      if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
      if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    }
    throw Error(ErrorKind::Parse, "float value expected");
  }
  if (t == "string") {
    const Json& v = need_v();
    if (!v.is_string()) throw Error(ErrorKind::Parse, "string value expected");
    return v.get<std::string>();
  }
  throw Error(ErrorKind::Parse, "unknown primitive type '" + t + "'");
}

std::string_view to_string(EventKind kind) {
  for (const auto& [k, n] : kEventNames)
    if (k == kind) return n;
  return "?";
}

Json event_to_json(const TraceEvent& e) {
  Json j{{"ev", std::string(to_string(e.ev))}, {"iid", e.iid}};
  auto args = [&] {
    Json a = Json::array();
    for (const auto& v : e.args) a.push_back(value_to_json(v));
    return a;
  };
  switch (e.ev) {
    case EventKind::InvokeFunPre:
    case EventKind::InvokeFun:
      if (e.func_id) j["funcId"] = *e.func_id;
      if (e.base) j["base"] = value_to_json(*e.base);
      j["args"] = args();
      if (e.ev == EventKind::InvokeFun && e.result) j["result"] = value_to_json(*e.result);
      if (e.is_new) j["isNew"] = true;
      break;
    case EventKind::FunctionEnter:
      j["funcId"] = e.func_id.value_or(e.iid);
      if (e.receiver) j["receiver"] = value_to_json(*e.receiver);
      j["args"] = args();
      break;
    case EventKind::FunctionExit:
      j["result"] = value_to_json(e.result.value_or(Value(Undefined{})));
      break;
    case EventKind::StmtStart:
    case EventKind::StmtEnd:
      break;
    case EventKind::Read:
    case EventKind::Write:
      j["name"] = e.name;
      j["value"] = value_to_json(e.value.value_or(Value(Undefined{})));
      break;
    case EventKind::GetField:
    case EventKind::PutField:
      j["base"] = value_to_json(e.base.value_or(Value(Undefined{})));
      j["offset"] = e.offset;
      j["value"] = value_to_json(e.value.value_or(Value(Undefined{})));
      break;
    case EventKind::Literal: {
      j["value"] = value_to_json(e.value.value_or(Value(Undefined{})));
      if (!e.shape.empty()) j["shape"] = e.shape;
      if (!e.fields.empty()) {
        Json f = Json::array();
        for (const auto& [name, v] : e.fields) f.push_back(Json::array({name, value_to_json(v)}));
        j["fields"] = std::move(f);
      }
      break;
    }
  }
  return j;
}

TraceEvent event_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) bad_line(line, "record is not an object");
  if (!j.contains("ev") || !j["ev"].is_string()) bad_line(line, "missing 'ev'");
  auto kind = event_kind_from(j["ev"].get<std::string>());
  if (!kind) bad_line(line, "unknown event '" + j["ev"].get<std::string>() + "'");
  if (!j.contains("iid") || !j["iid"].is_number_integer()) bad_line(line, "missing integer 'iid'");
  TraceEvent e;
  e.ev = *kind;
  e.iid = j["iid"].get<Iid>();
  e.line = line;
  try {
    auto val = [&](const char* key, bool required) -> std::optional<Value> {
      if (!j.contains(key)) {
        if (required) bad_line(line, std::string("missing '") + key + "'");
        return std::nullopt;
      }
      return value_from_json(j[key]);
    };
    auto str = [&](const char* key) {
      if (!j.contains(key) || !j[key].is_string()) bad_line(line, std::string("missing '") + key + "'");
      return j[key].get<std::string>();
    };
    auto read_args = [&] {
      if (!j.contains("args")) return;
      if (!j["args"].is_array()) bad_line(line, "'args' must be an array");
      for (const auto& a : j["args"]) e.args.push_back(value_from_json(a));
    };
    auto func = [&] {
      if (j.contains("funcId")) {
        if (!j["funcId"].is_number_integer()) bad_line(line, "'funcId' must be an integer");
        e.func_id = j["funcId"].get<Iid>();
      }
    };
    switch (e.ev) {
      case EventKind::InvokeFunPre:
      case EventKind::InvokeFun:
        func();
        e.base = val("base", false);
        read_args();
        if (e.ev == EventKind::InvokeFun) e.result = val("result", false);
        e.is_new = j.value("isNew", false);
        break;
      case EventKind::FunctionEnter:
        func();
        if (!e.func_id) e.func_id = e.iid;
        e.receiver = val("receiver", false);
        read_args();
        break;
      case EventKind::FunctionExit:
        e.result = val("result", false);
        break;
      case EventKind::StmtStart:
      case EventKind::StmtEnd:
        break;
      case EventKind::Read:
      case EventKind::Write:
        e.name = str("name");
        e.value = val("value", true);
        break;
      case EventKind::GetField:
      case EventKind::PutField:
        e.base = val("base", true);
        e.offset = str("offset");
        e.value = val("value", true);
        break;
      case EventKind::Literal:
        e.value = val("value", true);
        e.shape = j.value("shape", std::string());
        if (j.contains("fields")) {
          for (const auto& f : j["fields"]) {
            if (!f.is_array() || f.size() != 2 || !f[0].is_string())
              bad_line(line, "literal fields must be [name, value] pairs");
            e.fields.emplace_back(f[0].get<std::string>(), value_from_json(f[1]));
          }
        }
        break;
    }
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::Parse && std::string(err.what()).find("trace line") != std::string::npos)
      throw;
    bad_line(line, err.what());
  } catch (const Json::exception& err) {
    bad_line(line, err.what());
  }
  return e;
}

std::string trace_header_line(const TraceHeader& header) {
  return Json{{"ev", "traceHeader"}, {"version", header.version}, {"astDump", header.ast_dump}}.dump();
}

TraceReader::TraceReader(std::istream& in) : in_(in) {
  // The header, when present, must be the first record.
  auto first = next_line();
  if (!first) return;
  Json j;
  try {
    j = Json::parse(*first);
  } catch (const Json::parse_error& e) {
    bad_line(line_no_, e.what());
  }
  if (j.is_object() && j.value("ev", std::string()) == "traceHeader") {
    TraceHeader h;
    h.version = j.value("version", 0);
    if (h.version != 1) bad_line(line_no_, "unsupported trace version");
    h.ast_dump = j.value("astDump", std::string());
    header_ = h;
  } else {
    pending_ = std::move(*first);
  }
}

std::optional<std::string> TraceReader::next_line() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    return line;
  }
  return std::nullopt;
}

void TraceReader::check(const TraceEvent& e) {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::Structure, "trace line " + std::to_string(e.line) + ": " + msg);
  };
  switch (e.ev) {
    case EventKind::InvokeFunPre:
      frames_.push_back({Frame::Kind::Invoke, e.iid});
      break;
    case EventKind::InvokeFun:
      if (frames_.empty() || frames_.back().kind != Frame::Kind::Invoke || frames_.back().iid != e.iid)
        fail("invokeFun without matching invokeFunPre at iid " + std::to_string(e.iid));
      frames_.pop_back();
      break;
    case EventKind::FunctionEnter:
      if (frames_.empty() || frames_.back().kind != Frame::Kind::Invoke || frames_.back().entered)
        fail("functionEnter not preceded by an open invokeFunPre");
      frames_.back().entered = true;
      frames_.push_back({Frame::Kind::Function, e.iid});
      break;
    case EventKind::FunctionExit:
      if (frames_.empty() || frames_.back().kind != Frame::Kind::Function)
        fail("functionExit without matching functionEnter");
      if (frames_.back().iid != e.iid)
        fail("functionExit iid " + std::to_string(e.iid) + " does not match functionEnter iid " +
             std::to_string(frames_.back().iid));
      frames_.pop_back();
      break;
    case EventKind::StmtStart:
      frames_.push_back({Frame::Kind::Statement, e.iid});
      break;
    case EventKind::StmtEnd:
      if (frames_.empty() || frames_.back().kind != Frame::Kind::Statement || frames_.back().iid != e.iid)
        fail("stmtEnd without matching stmtStart at iid " + std::to_string(e.iid));
      frames_.pop_back();
      break;
    default:
      break;
  }
}

std::optional<TraceEvent> TraceReader::next() {
  if (finished_) return std::nullopt;
  std::optional<std::string> line;
  if (pending_) {
    line = std::move(pending_);
    pending_.reset();
  } else {
    line = next_line();
  }
  if (!line) {
    finished_ = true;
    if (!frames_.empty()) {
      const Frame& f = frames_.back();
      const char* what = f.kind == Frame::Kind::Function ? "functionEnter"
                         : f.kind == Frame::Kind::Statement ? "stmtStart"
                                                            : "invokeFunPre";
      throw Error(ErrorKind::Structure, std::string("unterminated ") + what + " at iid " +
                                            std::to_string(f.iid) + " at end of trace");
    }
    return std::nullopt;
  }
  Json j;
  try {
    j = Json::parse(*line);
  } catch (const Json::parse_error& e) {
    bad_line(line_no_, e.what());
  }
  if (j.is_object() && j.value("ev", std::string()) == "traceHeader")
    bad_line(line_no_, "traceHeader must be the first record");
  TraceEvent e = event_from_json(j, line_no_);
  check(e);
  return e;
}

std::vector<TraceEvent> parse_trace(std::istream& in) {
  TraceReader reader(in);
  std::vector<TraceEvent> out;
  while (auto e = reader.next()) out.push_back(std::move(*e));
  return out;
}

std::vector<TraceEvent> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open trace " + path.string());
  return parse_trace(in);
}

void ObjRef::set_prop(const std::string& name, const Value& v) {
  for (auto& [k, val] : props) {
    if (k == name) {
      val = v;
      return;
    }
  }
  props.emplace_back(name, v);
}

const Value* ObjRef::prop(const std::string& name) const {
  for (const auto& [k, val] : props)
    if (k == name) return &val;
  return nullptr;
}

ObjRef* RefRegistry::get_obj_ref(const Value& value) {
  if (!value.is_ref()) return nullptr;
  RefId id = value.ref_id();
  auto [it, inserted] = refs_.try_emplace(id);
  if (inserted) it->second.id = id;
  return &it->second;
}

const ObjRef* RefRegistry::find(RefId id) const {
  auto it = refs_.find(id);
  return it == refs_.end() ? nullptr : &it->second;
}

ObjRef* RefRegistry::find(RefId id) {
  auto it = refs_.find(id);
  return it == refs_.end() ? nullptr : &it->second;
}

}  // namespace carve
