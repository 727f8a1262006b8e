#pragma once

// Trace event stream produced by the tracing harness, plus the ObjRef
// registry used to abstract runtime object identity.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "carve/ast.hpp"

namespace carve {

using RefId = std::int64_t;

struct Undefined {
  friend bool operator==(Undefined, Undefined) { return true; }
};
struct Null {
  friend bool operator==(Null, Null) { return true; }
};
struct Ref {
  RefId id = 0;
  friend bool operator==(Ref, Ref) = default;
};

// A traced value: a primitive or a reference to a user object.
class Value {
 public:
  using Storage = std::variant<Undefined, Null, bool, std::int64_t, double, std::string, Ref>;

  Value() = default;
  Value(Undefined v) : v_(v) {}
  Value(Null v) : v_(v) {}
  Value(bool v) : v_(v) {}
  Value(std::int64_t v) : v_(v) {}
  Value(int v) : v_(static_cast<std::int64_t>(v)) {}
  Value(double v) : v_(v) {}
  Value(std::string v) : v_(std::move(v)) {}
  Value(const char* v) : v_(std::string(v)) {}
  Value(Ref v) : v_(v) {}

  const Storage& storage() const { return v_; }

  bool is_ref() const { return std::holds_alternative<Ref>(v_); }
  bool is_undefined() const { return std::holds_alternative<Undefined>(v_); }
  RefId ref_id() const { return std::get<Ref>(v_).id; }

  // "int", "float", "string", "boolean", "null", "undefined" or "ref".
  std::string type_tag() const;

  // Canonical literal text. Floats always carry a decimal point or exponent
  // so the int/float tag survives re-parsing; the shortest representation
  // that round-trips is used.
  std::string literal_text() const;

  // Doubles compare bit-for-bit.
  friend bool operator==(const Value& a, const Value& b);

 private:
  Storage v_;
};

Json value_to_json(const Value& v);
Value value_from_json(const Json& j);

enum class EventKind {
  InvokeFunPre,
  InvokeFun,
  FunctionEnter,
  FunctionExit,
  StmtStart,
  StmtEnd,
  Read,
  Write,
  GetField,
  PutField,
  Literal,
};

std::string_view to_string(EventKind kind);

struct TraceEvent {
  EventKind ev = EventKind::StmtStart;
  Iid iid = 0;
  std::string name;                 // read, write
  std::string offset;               // getField, putField
  std::optional<Value> base;        // getField, putField, invokeFun(Pre)
  std::optional<Value> value;       // read, write, getField, putField, literal
  std::optional<Value> receiver;    // functionEnter
  std::vector<Value> args;          // invokeFun(Pre), functionEnter
  std::optional<Value> result;      // invokeFun, functionExit
  std::optional<Iid> func_id;       // invokeFun(Pre), functionEnter
  bool is_new = false;              // invokeFun(Pre) for constructor calls
  std::string shape;                // literal: "object" or "list"
  std::vector<std::pair<std::string, Value>> fields;  // literal initial contents
  std::size_t line = 0;             // 1-based line in the trace file
};

Json event_to_json(const TraceEvent& e);
// Throws Parse on malformed records.
TraceEvent event_from_json(const Json& j, std::size_t line);

struct TraceHeader {
  int version = 1;
  std::string ast_dump;
};

// Streams events from a JSONL source and checks the nesting invariants
// incrementally: enter/exit and stmtStart/stmtEnd are well-parenthesized,
// every functionEnter follows an unmatched invokeFunPre.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in);

  const std::optional<TraceHeader>& header() const { return header_; }

  // Next event, or nullopt at end of stream (after checking balance).
  std::optional<TraceEvent> next();

 private:
  struct Frame {
    enum class Kind { Invoke, Function, Statement } kind;
    Iid iid;
    bool entered = false;
  };

  std::optional<std::string> next_line();
  void check(const TraceEvent& e);

  std::istream& in_;
  std::size_t line_no_ = 0;
  std::optional<TraceHeader> header_;
  std::optional<std::string> pending_;
  std::vector<Frame> frames_;
  bool finished_ = false;
};

std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> load_trace(const std::filesystem::path& path);

std::string trace_header_line(const TraceHeader& header);

// Identity surrogate of a runtime object with the property state captured
// under dependency contexts.
struct ObjRef {
  RefId id = 0;
  std::string shape = "object";
  // Insertion ordered, last writer wins.
  std::vector<std::pair<std::string, Value>> props;

  void set_prop(const std::string& name, const Value& v);
  const Value* prop(const std::string& name) const;
};

class RefRegistry {
 public:
  // nullptr for primitives; otherwise the existing or a new ObjRef.
  ObjRef* get_obj_ref(const Value& value);
  const ObjRef* find(RefId id) const;
  ObjRef* find(RefId id);
  const std::map<RefId, ObjRef>& all() const { return refs_; }
  std::size_t size() const { return refs_.size(); }

 private:
  std::map<RefId, ObjRef> refs_;
};

}  // namespace carve
