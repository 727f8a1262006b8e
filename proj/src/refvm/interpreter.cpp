#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <stdexcept>
#include <variant>

#include "carve/error.hpp"
#include "carve/refvm.hpp"
#include "carve/trace.hpp"

namespace carve::refvm {

namespace {

struct Object;
using ObjPtr = std::shared_ptr<Object>;
using RtValue = std::variant<Undefined, Null, bool, std::int64_t, double, std::string, ObjPtr>;

struct Object {
  RefId id = 0;
  std::string cls;
  bool list = false;
  std::vector<std::pair<std::string, RtValue>> fields;
  std::vector<RtValue> items;

  RtValue* field(const std::string& name) {
    for (auto& [k, v] : fields)
      if (k == name) return &v;
    return nullptr;
  }
};

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AssertionFailed : RuntimeError {
  using RuntimeError::RuntimeError;
};

bool is_num(const RtValue& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

double as_double(const RtValue& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (auto* d = std::get_if<double>(&v)) return *d;
  throw RuntimeError("expected a number");
}

Value to_value(const RtValue& v) {
  return std::visit(
      [](const auto& x) -> Value {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ObjPtr>) return Value(Ref{x->id});
        else return Value(x);
      },
      v);
}

std::string display(const RtValue& v) {
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  if (auto* o = std::get_if<ObjPtr>(&v)) return (*o)->list ? "[list]" : "[object " + (*o)->cls + "]";
  return to_value(v).literal_text();
}

bool truthy(const RtValue& v) {
  return std::visit(
      [](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Undefined> || std::is_same_v<T, Null>) return false;
        else if constexpr (std::is_same_v<T, bool>) return x;
        else if constexpr (std::is_same_v<T, std::int64_t>) return x != 0;
        else if constexpr (std::is_same_v<T, double>) return x != 0.0 && !std::isnan(x);
        else if constexpr (std::is_same_v<T, std::string>) return !x.empty();
        else return true;
      },
      v);
}

bool loosely_equal(const RtValue& a, const RtValue& b) {
  if (is_num(a) && is_num(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
      return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
    return as_double(a) == as_double(b);
  }
  if (a.index() != b.index()) return false;
  if (auto* o = std::get_if<ObjPtr>(&a)) return *o == std::get<ObjPtr>(b);
  return to_value(a) == to_value(b);
}

// Assertion equality also treats NaN as equal to itself.
bool assert_equal_values(const RtValue& a, const RtValue& b) {
  if (is_num(a) && is_num(b) && std::isnan(as_double(a)) && std::isnan(as_double(b))) return true;
  return loosely_equal(a, b);
}

std::string offset_of(const RtValue& index) {
  if (auto* i = std::get_if<std::int64_t>(&index)) return std::to_string(*i);
  if (auto* s = std::get_if<std::string>(&index)) return *s;
  if (auto* d = std::get_if<double>(&index)) {
    if (std::floor(*d) == *d && std::isfinite(*d)) return std::to_string(static_cast<std::int64_t>(*d));
  }
  throw RuntimeError("invalid subscript");
}

std::optional<std::size_t> list_index(const std::string& offset) {
  if (offset.empty() || offset.size() > 12) return std::nullopt;
  for (char c : offset)
    if (c < '0' || c > '9') return std::nullopt;
  return static_cast<std::size_t>(std::stoull(offset));
}

const std::set<std::string>& builtins() {
  static const std::set<std::string> names{"hypot", "sqrt",  "abs", "floor", "min",         "max",
                                           "len",   "push",  "str", "keys",  "assert_equal", "assert_true"};
  return names;
}

class Interpreter {
 public:
  Interpreter(const AstForest& forest, std::ostream* trace) : forest_(forest), trace_(trace) {
    for (const AstNode* d : forest.function_decls()) {
      if (d->attr_flag("isTest")) continue;
      if (!d->has_attr("owner")) {
        functions_.try_emplace(d->attr_string("name"), d);
        classes_.insert(d->attr_string("name"));
      } else if (d->attr_flag("static")) {
        statics_.try_emplace(d->attr_string("name"), d);
        classes_.insert(d->attr_string("owner"));
      } else {
        methods_[d->attr_string("owner")].try_emplace(d->attr_string("method"), d);
        classes_.insert(d->attr_string("owner"));
      }
    }
    for (const auto& f : forest.files())
      for (const auto& item : f.root.children)
        if (item.attr_flag("isImport")) imports_.emplace_back(f.path, item.attr_string("module"));
  }

  TestOutcome run_test(Iid test_iid) {
    const AstNode& decl = forest_.node(test_iid);
    TestOutcome out;
    out.test = test_iid;
    out.name = decl.attr_string("name");
    const std::string& file = forest_.file_of(test_iid);
    for (const auto& [f, module] : imports_) {
      if (f != file) continue;
      bool found = std::any_of(forest_.files().begin(), forest_.files().end(),
                               [&](const SourceFile& sf) { return sf.path == module; });
      if (!found) {
        out.passed = false;
        out.message = "cannot import '" + module + "'";
        return out;
      }
    }
    emit_invoke_pre(test_iid, test_iid, std::nullopt, {}, false);
    emit_enter(test_iid, std::nullopt, {});
    Frame frame;
    try {
      exec_block(decl.children.back(), frame);
    } catch (const RuntimeError& e) {
      out.passed = false;
      out.message = e.what();
    }
    emit_exit(test_iid, Undefined{});
    emit_invoke(test_iid, test_iid, std::nullopt, {}, Undefined{}, false);
    return out;
  }

 private:
  struct Frame {
    std::map<std::string, RtValue> vars;
    std::optional<RtValue> self;
    RtValue ret = Undefined{};
  };
  enum class Flow { Normal, Return };

  // --- events ---------------------------------------------------------------

  void emit(const TraceEvent& e) {
    if (trace_) *trace_ << event_to_json(e).dump() << '\n';
  }
  static std::vector<Value> values(const std::vector<RtValue>& vs) {
    std::vector<Value> out;
    for (const auto& v : vs) out.push_back(to_value(v));
    return out;
  }
  void emit_simple(EventKind kind, Iid iid) {
    TraceEvent e;
    e.ev = kind;
    e.iid = iid;
    emit(e);
  }
  void emit_invoke_pre(Iid iid, std::optional<Iid> func, const std::optional<RtValue>& base,
                       const std::vector<RtValue>& args, bool is_new) {
    TraceEvent e;
    e.ev = EventKind::InvokeFunPre;
    e.iid = iid;
    e.func_id = func;
    if (base) e.base = to_value(*base);
    e.args = values(args);
    e.is_new = is_new;
    emit(e);
  }
  void emit_invoke(Iid iid, std::optional<Iid> func, const std::optional<RtValue>& base,
                   const std::vector<RtValue>& args, const RtValue& result, bool is_new) {
    TraceEvent e;
    e.ev = EventKind::InvokeFun;
    e.iid = iid;
    e.func_id = func;
    if (base) e.base = to_value(*base);
    e.args = values(args);
    e.result = to_value(result);
    e.is_new = is_new;
    emit(e);
  }
  void emit_enter(Iid decl, const std::optional<RtValue>& receiver, const std::vector<RtValue>& args) {
    TraceEvent e;
    e.ev = EventKind::FunctionEnter;
    e.iid = decl;
    e.func_id = decl;
    if (receiver) e.receiver = to_value(*receiver);
    e.args = values(args);
    emit(e);
  }
  void emit_exit(Iid decl, const RtValue& result) {
    TraceEvent e;
    e.ev = EventKind::FunctionExit;
    e.iid = decl;
    e.result = to_value(result);
    emit(e);
  }
  void emit_var(EventKind kind, Iid iid, const std::string& name, const RtValue& v) {
    TraceEvent e;
    e.ev = kind;
    e.iid = iid;
    e.name = name;
    e.value = to_value(v);
    emit(e);
  }
  void emit_field(EventKind kind, Iid iid, const RtValue& base, const std::string& offset, const RtValue& v) {
    TraceEvent e;
    e.ev = kind;
    e.iid = iid;
    e.base = to_value(base);
    e.offset = offset;
    e.value = to_value(v);
    emit(e);
  }
  void emit_literal(Iid iid, const ObjPtr& obj) {
    TraceEvent e;
    e.ev = EventKind::Literal;
    e.iid = iid;
    e.value = Value(Ref{obj->id});
    e.shape = obj->list ? "list" : "object";
    if (obj->list)
      for (std::size_t i = 0; i < obj->items.size(); ++i) e.fields.emplace_back(std::to_string(i), to_value(obj->items[i]));
    else
      for (const auto& [k, v] : obj->fields) e.fields.emplace_back(k, to_value(v));
    emit(e);
  }

  ObjPtr new_object(std::string cls, bool list) {
    auto o = std::make_shared<Object>();
    o->id = ++next_ref_;
    o->cls = std::move(cls);
    o->list = list;
    return o;
  }

  // --- statements -----------------------------------------------------------

  Flow exec_block(const AstNode& block, Frame& f) {
    for (const auto& s : block.children)
      if (exec(s, f) == Flow::Return) return Flow::Return;
    return Flow::Normal;
  }

  // Statement events around `body`; stmtEnd is emitted on unwinding too.
  template <typename F>
  auto traced(Iid iid, F&& body) {
    emit_simple(EventKind::StmtStart, iid);
    try {
      auto out = body();
      emit_simple(EventKind::StmtEnd, iid);
      return out;
    } catch (...) {
      emit_simple(EventKind::StmtEnd, iid);
      throw;
    }
  }

  Flow exec(const AstNode& s, Frame& f) {
    switch (s.kind) {
      case NodeKind::Block:
        return exec_block(s, f);
      case NodeKind::ExprStmt:
        traced(s.iid, [&] { return eval(s.children.at(0), f); });
        return Flow::Normal;
      case NodeKind::AssignStmt:
        traced(s.iid, [&] { return assign(s, f); });
        return Flow::Normal;
      case NodeKind::ReturnStmt:
        f.ret = traced(s.iid, [&]() -> RtValue { return s.children.empty() ? RtValue(Undefined{}) : eval(s.children[0], f); });
        return Flow::Return;
      case NodeKind::IfStmt: {
        bool cond = traced(s.iid, [&] { return truthy(eval(s.children.at(0), f)); });
        if (cond) return exec(s.children.at(1), f);
        if (s.children.size() > 2) return exec(s.children[2], f);
        return Flow::Normal;
      }
      case NodeKind::WhileStmt:
        while (traced(s.iid, [&] { return truthy(eval(s.children.at(0), f)); })) {
          tick();
          if (exec(s.children.at(1), f) == Flow::Return) return Flow::Return;
        }
        return Flow::Normal;
      case NodeKind::ForStmt:
        exec(s.children.at(0), f);
        while (traced(s.iid, [&] { return truthy(eval(s.children.at(1), f)); })) {
          tick();
          if (exec(s.children.at(3), f) == Flow::Return) return Flow::Return;
          exec(s.children.at(2), f);
        }
        return Flow::Normal;
      default:
        throw RuntimeError("cannot execute " + std::string(to_string(s.kind)));
    }
  }

  void tick() {
    if (++steps_ > 10'000'000) throw RuntimeError("step limit exceeded");
  }

  RtValue arith(const std::string& op, const RtValue& a, const RtValue& b) {
    if (op == "+" && (std::holds_alternative<std::string>(a) || std::holds_alternative<std::string>(b)))
      return display(a) + display(b);
    if (!is_num(a) || !is_num(b)) throw RuntimeError("operator " + op + " needs numbers");
    bool ints = std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b);
    if (ints && op != "/") {
      std::int64_t x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
      if (op == "+") return x + y;
      if (op == "-") return x - y;
      if (op == "*") return x * y;
      if (op == "%") return y == 0 ? RtValue(std::nan("")) : RtValue(x % y);
    }
    double x = as_double(a), y = as_double(b);
    if (op == "+") return x + y;
    if (op == "-") return x - y;
    if (op == "*") return x * y;
    if (op == "/") return x / y;
    if (op == "%") return std::fmod(x, y);
    throw RuntimeError("unknown operator " + op);
  }

  RtValue assign(const AstNode& s, Frame& f) {
    const std::string op = s.attr_string("op");
    const AstNode& target = s.children.at(0);
    const std::string bin = op == "=" ? "" : op.substr(0, 1);
    if (target.kind == NodeKind::NameExpr) {
      const std::string name = target.attr_string("name");
      RtValue v = eval(s.children.at(1), f);
      if (!bin.empty()) {
        auto it = f.vars.find(name);
        if (it == f.vars.end()) throw RuntimeError("'" + name + "' is not defined");
        emit_var(EventKind::Read, target.iid, name, it->second);
        v = arith(bin, it->second, v);
      }
      f.vars[name] = v;
      emit_var(EventKind::Write, target.iid, name, v);
      return v;
    }
    RtValue base = eval(target.children.at(0), f);
    std::string offset = target.kind == NodeKind::AttributeExpr ? target.attr_string("name")
                                                                 : offset_of(eval(target.children.at(1), f));
    RtValue v = eval(s.children.at(1), f);
    if (!bin.empty()) v = arith(bin, get_field(target.iid, base, offset), v);
    put_field(target.iid, base, offset, v);
    return v;
  }

  // --- expressions ----------------------------------------------------------

  RtValue get_field(Iid iid, const RtValue& base, const std::string& offset) {
    auto* o = std::get_if<ObjPtr>(&base);
    if (!o) throw RuntimeError("cannot read property '" + offset + "' of " + display(base));
    RtValue v = Undefined{};
    if ((*o)->list) {
      if (auto i = list_index(offset); i && *i < (*o)->items.size()) v = (*o)->items[*i];
    } else if (RtValue* fv = (*o)->field(offset)) {
      v = *fv;
    }
    emit_field(EventKind::GetField, iid, base, offset, v);
    return v;
  }

  void put_field(Iid iid, const RtValue& base, const std::string& offset, const RtValue& v) {
    auto* o = std::get_if<ObjPtr>(&base);
    if (!o) throw RuntimeError("cannot set property '" + offset + "' of " + display(base));
    if ((*o)->list) {
      auto i = list_index(offset);
      if (!i) throw RuntimeError("list index must be a non-negative integer");
      if (*i >= (*o)->items.size()) (*o)->items.resize(*i + 1, Undefined{});
      (*o)->items[*i] = v;
    } else if (RtValue* fv = (*o)->field(offset)) {
      *fv = v;
    } else {
      (*o)->fields.emplace_back(offset, v);
    }
    emit_field(EventKind::PutField, iid, base, offset, v);
  }

  RtValue literal(const AstNode& n) {
    const std::string type = n.attr_string("type");
    const Json& v = n.attrs.at("value");
    if (type == "int") return v.get<std::int64_t>();
    if (type == "float") {
      if (v.is_string()) {
        std::string t = v.get<std::string>();
        if (t == "NaN") return std::nan("");
        return t[0] == '-' ? -INFINITY : INFINITY;
      }
      return v.get<double>();
    }
    if (type == "string") return v.get<std::string>();
    if (type == "boolean") return v.get<bool>();
    if (type == "null") return Null{};
    return Undefined{};
  }

  RtValue eval(const AstNode& n, Frame& f) {
    switch (n.kind) {
      case NodeKind::Literal:
        return literal(n);
      case NodeKind::NameExpr: {
        const std::string name = n.attr_string("name");
        auto it = f.vars.find(name);
        if (it == f.vars.end()) throw RuntimeError("'" + name + "' is not defined");
        emit_var(EventKind::Read, n.iid, name, it->second);
        return it->second;
      }
      case NodeKind::SelfExpr:
        if (!f.self) throw RuntimeError("'this' outside a method");
        return *f.self;
      case NodeKind::AttributeExpr: {
        RtValue base = eval(n.children.at(0), f);
        return get_field(n.iid, base, n.attr_string("name"));
      }
      case NodeKind::SubscriptExpr: {
        RtValue base = eval(n.children.at(0), f);
        std::string offset = offset_of(eval(n.children.at(1), f));
        return get_field(n.iid, base, offset);
      }
      case NodeKind::ListExpr: {
        std::vector<RtValue> items;
        for (const auto& c : n.children) items.push_back(eval(c, f));
        ObjPtr o = new_object("list", true);
        o->items = std::move(items);
        emit_literal(n.iid, o);
        return o;
      }
      case NodeKind::MapExpr: {
        const Json& keys = n.attrs.at("keys");
        std::vector<RtValue> vals;
        for (const auto& c : n.children) vals.push_back(eval(c, f));
        ObjPtr o = new_object("object", false);
        for (std::size_t i = 0; i < vals.size(); ++i) {
          std::string k = keys.at(i).get<std::string>();
          if (RtValue* fv = o->field(k)) *fv = vals[i];
          else o->fields.emplace_back(k, vals[i]);
        }
        emit_literal(n.iid, o);
        return o;
      }
      case NodeKind::UnaryExpr: {
        RtValue v = eval(n.children.at(0), f);
        std::string op = n.attr_string("op");
        if (op == "!") return !truthy(v);
        if (op == "-") {
          if (auto* i = std::get_if<std::int64_t>(&v)) return -*i;
          return -as_double(v);
        }
        throw RuntimeError("unknown unary operator " + op);
      }
      case NodeKind::BinaryExpr: {
        std::string op = n.attr_string("op");
        RtValue a = eval(n.children.at(0), f);
        if (op == "&&") return truthy(a) ? eval(n.children.at(1), f) : a;
        if (op == "||") return truthy(a) ? a : eval(n.children.at(1), f);
        RtValue b = eval(n.children.at(1), f);
        if (op == "==") return loosely_equal(a, b);
        if (op == "!=") return !loosely_equal(a, b);
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
          int c;
          if (is_num(a) && is_num(b)) {
            double x = as_double(a), y = as_double(b);
            if (std::isnan(x) || std::isnan(y)) return false;
            c = x < y ? -1 : (x > y ? 1 : 0);
          } else if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
            c = std::get<std::string>(a).compare(std::get<std::string>(b));
          } else {
            throw RuntimeError("cannot compare " + display(a) + " and " + display(b));
          }
          if (op == "<") return c < 0;
          if (op == "<=") return c <= 0;
          if (op == ">") return c > 0;
          return c >= 0;
        }
        return arith(op, a, b);
      }
      case NodeKind::CallExpr:
        return call(n, f);
      case NodeKind::NewExpr:
        return construct(n, f);
      default:
        throw RuntimeError("cannot evaluate " + std::string(to_string(n.kind)));
    }
  }

  std::vector<RtValue> eval_args(const AstNode& n, Frame& f) {
    std::vector<RtValue> args;
    for (std::size_t i = 1; i < n.children.size(); ++i) args.push_back(eval(n.children[i], f));
    return args;
  }

  RtValue call(const AstNode& n, Frame& f) {
    const AstNode& callee = n.children.at(0);
    if (callee.kind == NodeKind::NameExpr) {
      const std::string name = callee.attr_string("name");
      if (auto it = functions_.find(name); it != functions_.end())
        return invoke(*it->second, n.iid, std::nullopt, eval_args(n, f), nullptr);
      if (builtins().contains(name)) return builtin(name, n, eval_args(n, f));
      throw RuntimeError("'" + name + "' is not a function");
    }
    if (callee.kind != NodeKind::AttributeExpr) throw RuntimeError("not callable");
    const std::string method = callee.attr_string("name");
    const AstNode& base_node = callee.children.at(0);
    if (base_node.kind == NodeKind::NameExpr) {
      const std::string owner = base_node.attr_string("name");
      if (!f.vars.contains(owner) && classes_.contains(owner)) {
        auto it = statics_.find(owner + "." + method);
        if (it == statics_.end()) throw RuntimeError("'" + owner + "." + method + "' is not a function");
        return invoke(*it->second, n.iid, std::nullopt, eval_args(n, f), nullptr);
      }
    }
    RtValue base = eval(base_node, f);
    auto* o = std::get_if<ObjPtr>(&base);
    if (!o) throw RuntimeError("cannot call '" + method + "' on " + display(base));
    const AstNode* decl = nullptr;
    if (auto cls = methods_.find((*o)->cls); cls != methods_.end())
      if (auto m = cls->second.find(method); m != cls->second.end()) decl = m->second;
    if (!decl) throw RuntimeError("'" + (*o)->cls + "' has no method '" + method + "'");
    return invoke(*decl, n.iid, base, eval_args(n, f), nullptr);
  }

  RtValue construct(const AstNode& n, Frame& f) {
    const std::string cls = n.attr_string("class");
    if (!classes_.contains(cls)) throw RuntimeError("'" + cls + "' is not a constructor");
    std::vector<RtValue> args = eval_args(n, f);
    ObjPtr obj = new_object(cls, false);
    if (auto it = functions_.find(cls); it != functions_.end()) return invoke(*it->second, n.iid, std::nullopt, args, obj);
    emit_invoke_pre(n.iid, std::nullopt, std::nullopt, args, true);
    emit_invoke(n.iid, std::nullopt, std::nullopt, args, obj, true);
    return obj;
  }

  RtValue invoke(const AstNode& decl, Iid call_iid, const std::optional<RtValue>& base,
                 const std::vector<RtValue>& args, const ObjPtr& created) {
    if (++depth_ > 500) {
      --depth_;
      throw RuntimeError("maximum call depth exceeded");
    }
    const bool is_new = created != nullptr;
    emit_invoke_pre(call_iid, decl.iid, base, args, is_new);
    Frame frame;
    if (base) frame.self = *base;
    if (created) frame.self = RtValue(created);
    std::size_t i = 0;
    for (const auto& c : decl.children)
      if (c.kind == NodeKind::Param) {
        frame.vars[c.attr_string("name")] = i < args.size() ? args[i] : RtValue(Undefined{});
        ++i;
      }
    emit_enter(decl.iid, frame.self, args);
    RtValue result = Undefined{};
    try {
      exec_block(decl.children.back(), frame);
      result = is_new ? RtValue(created) : frame.ret;
    } catch (...) {
      emit_exit(decl.iid, Undefined{});
      emit_invoke(call_iid, decl.iid, base, args, Undefined{}, is_new);
      --depth_;
      throw;
    }
    emit_exit(decl.iid, result);
    emit_invoke(call_iid, decl.iid, base, args, result, is_new);
    --depth_;
    return result;
  }

  RtValue builtin(const std::string& name, const AstNode& n, const std::vector<RtValue>& args) {
    emit_invoke_pre(n.iid, std::nullopt, std::nullopt, args, false);
    RtValue result = Undefined{};
    try {
      result = run_builtin(name, n, args);
    } catch (...) {
      emit_invoke(n.iid, std::nullopt, std::nullopt, args, Undefined{}, false);
      throw;
    }
    emit_invoke(n.iid, std::nullopt, std::nullopt, args, result, false);
    return result;
  }

  RtValue run_builtin(const std::string& name, const AstNode& n, const std::vector<RtValue>& args) {
    auto arg = [&](std::size_t i) -> const RtValue& {
      if (i >= args.size()) throw RuntimeError(name + ": missing argument");
      return args[i];
    };
    auto num = [&](std::size_t i) { return as_double(arg(i)); };
    if (name == "hypot") return std::hypot(num(0), num(1));
    if (name == "sqrt") return std::sqrt(num(0));
    if (name == "floor") return std::floor(num(0));
    if (name == "abs") {
      if (auto* i = std::get_if<std::int64_t>(&arg(0))) return *i < 0 ? -*i : *i;
      return std::fabs(num(0));
    }
    if (name == "min" || name == "max") {
      const RtValue& a = arg(0);
      const RtValue& b = arg(1);
      bool less = as_double(a) < as_double(b);
      return (name == "min") == less ? a : b;
    }
    if (name == "str") return display(arg(0));
    if (name == "len") {
      if (auto* s = std::get_if<std::string>(&arg(0))) return static_cast<std::int64_t>(s->size());
      if (auto* o = std::get_if<ObjPtr>(&arg(0)))
        return static_cast<std::int64_t>((*o)->list ? (*o)->items.size() : (*o)->fields.size());
      throw RuntimeError("len: unsupported value");
    }
    if (name == "push") {
      auto* o = std::get_if<ObjPtr>(&arg(0));
      if (!o || !(*o)->list) throw RuntimeError("push: not a list");
      put_field(n.iid, arg(0), std::to_string((*o)->items.size()), arg(1));
      return static_cast<std::int64_t>((*o)->items.size());
    }
    if (name == "keys") {
      auto* o = std::get_if<ObjPtr>(&arg(0));
      if (!o) throw RuntimeError("keys: not an object");
      ObjPtr out = new_object("list", true);
      for (const auto& [k, v] : (*o)->fields) out->items.push_back(k);
      emit_literal(n.iid, out);
      return out;
    }
    if (name == "assert_equal") {
      if (!assert_equal_values(arg(0), arg(1)))
        throw AssertionFailed("assert_equal failed at line " + std::to_string(n.span.start.line) + ": " +
                              display(arg(0)) + " != " + display(arg(1)));
      return Undefined{};
    }
    if (name == "assert_true") {
      if (!truthy(arg(0)))
        throw AssertionFailed("assert_true failed at line " + std::to_string(n.span.start.line));
      return Undefined{};
    }
    throw RuntimeError("unknown builtin " + name);
  }

  const AstForest& forest_;
  std::ostream* trace_;
  std::map<std::string, const AstNode*> functions_;
  std::map<std::string, const AstNode*> statics_;
  std::map<std::string, std::map<std::string, const AstNode*>> methods_;
  std::set<std::string> classes_;
  std::vector<std::pair<std::string, std::string>> imports_;
  RefId next_ref_ = 0;
  int depth_ = 0;
  long steps_ = 0;
};

}  // namespace

bool RunResult::all_passed() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const TestOutcome& o) { return o.passed; });
}

std::vector<Iid> all_tests(const AstForest& forest) {
  std::vector<Iid> out;
  for (const AstNode* d : forest.function_decls())
    if (d->attr_flag("isTest")) out.push_back(d->iid);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Iid> merged_tests(const AstForest& forest) {
  std::vector<Iid> out;
  for (const auto& f : forest.files()) {
    if (!f.root.attr_flag("merged")) continue;
    for (const auto& item : f.root.children)
      if (item.attr_flag("isTest")) out.push_back(item.iid);
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunResult run_tests(const AstForest& forest, const std::vector<Iid>& tests, std::ostream* trace,
                    const std::string& ast_dump) {
  if (trace) *trace << trace_header_line(TraceHeader{1, ast_dump}) << '\n';
  Interpreter vm(forest, trace);
  RunResult result;
  for (Iid t : tests) {
    const AstNode& n = forest.node(t);
    if (n.kind != NodeKind::FunctionDecl || !n.attr_flag("isTest"))
      throw Error(ErrorKind::Usage, "iid " + std::to_string(t) + " is not a test case");
    result.outcomes.push_back(vm.run_test(t));
  }
  return result;
}

}  // namespace carve::refvm
