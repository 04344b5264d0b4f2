#pragma once

#include <compare>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rae {

/// Domain value: Symbol | Int | Real | Bool | Tuple | Unknown.
///
/// Unknown compares equal only to itself; a total canonical ordering
/// (variant tag first, then within-variant) makes Values usable as
/// ordered map keys and gives deterministic iteration everywhere.
class Value {
 public:
  enum class Kind { Symbol = 0, Int = 1, Real = 2, Bool = 3, Tuple = 4, Unknown = 5 };

  Value() : data_(std::monostate{}) {}

  static Value symbol(std::string s) { return Value(std::move(s)); }
  static Value integer(std::int64_t i) { return Value(i); }
  static Value real(double r) { return Value(r); }
  static Value boolean(bool b) { return Value(b); }
  static Value tuple(std::vector<Value> vs) { return Value(std::move(vs)); }
  static Value unknown() { return Value(); }

  // 2-D points show up constantly in the bundled domains.
  static Value point(std::int64_t x, std::int64_t y) {
    return tuple({integer(x), integer(y)});
  }

  Kind kind() const {
    switch (data_.index()) {
      case 0: return Kind::Unknown;
      case 1: return Kind::Symbol;
      case 2: return Kind::Int;
      case 3: return Kind::Real;
      case 4: return Kind::Bool;
      default: return Kind::Tuple;
    }
  }

  bool is_unknown() const { return kind() == Kind::Unknown; }
  bool is_symbol() const { return kind() == Kind::Symbol; }
  bool is_numeric() const { return kind() == Kind::Int || kind() == Kind::Real; }
  bool is_tuple() const { return kind() == Kind::Tuple; }

  const std::string& as_symbol() const { return std::get<std::string>(data_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_real() const { return std::get<double>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  const std::vector<Value>& as_tuple() const { return std::get<std::vector<Value>>(data_); }

  /// Numeric view across Int/Real; throws for anything else.
  double as_number() const {
    if (kind() == Kind::Int) return static_cast<double>(as_int());
    if (kind() == Kind::Real) return as_real();
    throw std::runtime_error("Value: not a number: " + repr());
  }

  bool operator==(const Value& o) const { return compare(o) == 0; }
  bool operator!=(const Value& o) const { return compare(o) != 0; }
  bool operator<(const Value& o) const { return compare(o) < 0; }
  bool operator>(const Value& o) const { return compare(o) > 0; }
  bool operator<=(const Value& o) const { return compare(o) <= 0; }
  bool operator>=(const Value& o) const { return compare(o) >= 0; }

  /// Canonical total order: tag rank, then within-variant.
  int compare(const Value& o) const {
    int ta = tag_rank(), tb = o.tag_rank();
    if (ta != tb) return ta < tb ? -1 : 1;
    switch (kind()) {
      case Kind::Unknown: return 0;
      case Kind::Symbol: {
        int c = as_symbol().compare(o.as_symbol());
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
      }
      case Kind::Int:
        return as_int() < o.as_int() ? -1 : (as_int() > o.as_int() ? 1 : 0);
      case Kind::Real:
        return as_real() < o.as_real() ? -1 : (as_real() > o.as_real() ? 1 : 0);
      case Kind::Bool:
        return as_bool() == o.as_bool() ? 0 : (!as_bool() ? -1 : 1);
      case Kind::Tuple: {
        const auto& a = as_tuple();
        const auto& b = o.as_tuple();
        for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
          int c = a[i].compare(b[i]);
          if (c != 0) return c;
        }
        return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
      }
    }
    return 0;
  }

  std::string repr() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }

  void print(std::ostream& os) const {
    switch (kind()) {
      case Kind::Unknown: os << "unknown"; break;
      case Kind::Symbol: os << as_symbol(); break;
      case Kind::Int: os << as_int(); break;
      case Kind::Real: os << as_real(); break;
      case Kind::Bool: os << (as_bool() ? "true" : "false"); break;
      case Kind::Tuple: {
        os << '(';
        const auto& t = as_tuple();
        for (std::size_t i = 0; i < t.size(); ++i) {
          if (i) os << ',';
          t[i].print(os);
        }
        os << ')';
        break;
      }
    }
  }

 private:
  explicit Value(std::string s) : data_(std::move(s)) {}
  explicit Value(std::int64_t i) : data_(i) {}
  explicit Value(double r) : data_(r) {}
  explicit Value(bool b) : data_(b) {}
  explicit Value(std::vector<Value> t) : data_(std::move(t)) {}

  int tag_rank() const { return static_cast<int>(kind()); }

  std::variant<std::monostate, std::string, std::int64_t, double, bool, std::vector<Value>> data_;
};

using Args = std::vector<Value>;

inline std::ostream& operator<<(std::ostream& os, const Value& v) {
  v.print(os);
  return os;
}

inline std::string args_repr(const Args& args) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ',';
    args[i].print(os);
  }
  os << ')';
  return os.str();
}

}  // namespace rae
