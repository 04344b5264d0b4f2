#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rae/value.hpp"

namespace rae {

struct UndeclaredVariable : std::runtime_error {
  explicit UndeclaredVariable(const std::string& what) : std::runtime_error(what) {}
};
struct ValueOutOfRange : std::runtime_error {
  explicit ValueOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

/// Declared range of a state variable: a finite set of values or a
/// numeric interval. Finite sets may include Value::unknown() when the
/// domain wants unknown to be writable (it is always readable).
class RangeSpec {
 public:
  static RangeSpec finite(std::vector<Value> values) {
    RangeSpec r;
    r.values_ = std::move(values);
    if (r.values_.empty()) throw std::invalid_argument("RangeSpec: empty range");
    return r;
  }
  static RangeSpec interval(double lo, double hi) {
    RangeSpec r;
    r.interval_ = true;
    r.lo_ = lo;
    r.hi_ = hi;
    if (!(lo <= hi)) throw std::invalid_argument("RangeSpec: empty interval");
    return r;
  }

  bool is_interval() const { return interval_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<Value>& values() const { return values_; }

  bool contains(const Value& v) const {
    if (interval_) {
      if (!v.is_numeric()) return false;
      double x = v.as_number();
      return x >= lo_ && x <= hi_;
    }
    for (const auto& u : values_)
      if (u == v) return true;
    return false;
  }

 private:
  RangeSpec() = default;
  bool interval_ = false;
  double lo_ = 0, hi_ = 0;
  std::vector<Value> values_;
};

struct StateVarDecl {
  std::string name;
  std::vector<std::string> arg_sorts;  // one sort name per argument position
  RangeSpec range;
};

/// Immutable facts of a domain: named sets of argument tuples.
class RigidRelations {
 public:
  void declare(const std::string& name, std::vector<Args> tuples) {
    rels_[name] = std::move(tuples);
  }

  bool holds(const std::string& name, const Args& args) const {
    auto it = rels_.find(name);
    if (it == rels_.end()) return false;
    for (const auto& t : it->second)
      if (t == args) return true;
    return false;
  }

  const std::vector<Args>& tuples(const std::string& name) const {
    static const std::vector<Args> empty;
    auto it = rels_.find(name);
    return it == rels_.end() ? empty : it->second;
  }

  /// Unary relations double as object lists; this flattens one.
  std::vector<Value> objects(const std::string& name) const {
    std::vector<Value> out;
    for (const auto& t : tuples(name))
      if (t.size() == 1) out.push_back(t[0]);
    return out;
  }

 private:
  std::map<std::string, std::vector<Args>> rels_;
};

/// Variable declarations plus the named sorts used for argument
/// positions and free method parameters. Shared read-only by every
/// State of the domain.
class Declarations {
 public:
  void declare_var(StateVarDecl decl) {
    if (index_.count(decl.name))
      throw std::invalid_argument("duplicate state variable: " + decl.name);
    index_[decl.name] = vars_.size();
    vars_.push_back(std::move(decl));
  }

  void declare_sort(const std::string& name, std::vector<Value> values) {
    sorts_[name] = std::move(values);
  }

  const StateVarDecl* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &vars_[it->second];
  }

  const StateVarDecl& require(const std::string& name) const {
    const StateVarDecl* d = find(name);
    if (!d) throw UndeclaredVariable("undeclared state variable: " + name);
    return *d;
  }

  const std::vector<StateVarDecl>& vars() const { return vars_; }

  const std::vector<Value>& sort(const std::string& name) const {
    auto it = sorts_.find(name);
    if (it == sorts_.end()) throw std::invalid_argument("unknown sort: " + name);
    return it->second;
  }
  bool has_sort(const std::string& name) const { return sorts_.count(name) > 0; }

 private:
  std::vector<StateVarDecl> vars_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<Value>> sorts_;
};

/// Total assignment of declared variable instances. Unset instances read
/// as Unknown; writes are range checked. Value semantics: copies are
/// independent snapshots (planner rollouts rely on this).
class State {
 public:
  State() = default;
  explicit State(std::shared_ptr<const Declarations> decls) : decls_(std::move(decls)) {}

  const Value& read(const std::string& var, const Args& args = {}) const {
    require_decl(var);
    auto it = cells_.find(Key{var, args});
    static const Value unk = Value::unknown();
    return it == cells_.end() ? unk : it->second;
  }

  void write(const std::string& var, const Args& args, Value v) {
    const StateVarDecl& d = require_decl(var);
    // Unknown is always readable (default of unset cells) but only
    // writable when the declared range lists it.
    if (!d.range.contains(v))
      throw ValueOutOfRange("value " + v.repr() + " outside range of " + var);
    cells_[Key{var, args}] = std::move(v);
  }

  const Declarations& decls() const {
    if (!decls_) throw std::runtime_error("State without declarations");
    return *decls_;
  }
  std::shared_ptr<const Declarations> decls_ptr() const { return decls_; }

  /// Deterministic flat serialization; used for planner node keys and
  /// trace comparisons.
  std::string signature() const {
    std::ostringstream os;
    for (const auto& [k, v] : cells_) {
      os << k.var << args_repr(k.args) << '=' << v << ';';
    }
    return os.str();
  }

  std::size_t num_set_cells() const { return cells_.size(); }

  /// Ordered visitation of set cells.
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [k, v] : cells_) f(k.var, k.args, v);
  }

 private:
  struct Key {
    std::string var;
    Args args;
    bool operator<(const Key& o) const {
      if (int c = var.compare(o.var); c != 0) return c < 0;
      if (args.size() != o.args.size()) return args.size() < o.args.size();
      for (std::size_t i = 0; i < args.size(); ++i) {
        int c = args[i].compare(o.args[i]);
        if (c != 0) return c < 0;
      }
      return false;
    }
  };

  const StateVarDecl& require_decl(const std::string& var) const {
    return decls().require(var);
  }

  std::shared_ptr<const Declarations> decls_;
  std::map<Key, Value> cells_;
};

}  // namespace rae
