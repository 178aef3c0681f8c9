#include "vsql/sql/printer.hpp"

#include "vsql/sql/parser.hpp"

namespace vsql::sql {

namespace {

// Binding strength, mirroring the parser's precedence ladder.
enum Prec : int {
  kOr = 1,
  kAnd = 2,
  kNot = 3,
  kEquality = 4,
  kComparison = 5,
  kAdditive = 6,
  kMultiplicative = 7,
  kConcat = 8,
  kUnary = 9,
  kPrimary = 10,
};

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::logical_or:
      return kOr;
    case BinaryOp::logical_and:
      return kAnd;
    case BinaryOp::eq:
    case BinaryOp::ne:
    case BinaryOp::is:
    case BinaryOp::is_not:
    case BinaryOp::like:
    case BinaryOp::not_like:
    case BinaryOp::glob:
      return kEquality;
    case BinaryOp::lt:
    case BinaryOp::le:
    case BinaryOp::gt:
    case BinaryOp::ge:
      return kComparison;
    case BinaryOp::add:
    case BinaryOp::sub:
      return kAdditive;
    case BinaryOp::mul:
    case BinaryOp::div:
    case BinaryOp::mod:
      return kMultiplicative;
    case BinaryOp::concat:
      return kConcat;
  }
  return kPrimary;
}

int precedence(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Binary>) {
          return precedence(n.op);
        } else if constexpr (std::is_same_v<T, Unary>) {
          return n.op == UnaryOp::logical_not ? kNot : kUnary;
        } else if constexpr (std::is_same_v<T, Between> || std::is_same_v<T, InList> ||
                             std::is_same_v<T, InSubquery> || std::is_same_v<T, IsNull>) {
          return kEquality;
        } else if constexpr (std::is_same_v<T, Exists>) {
          return n.negated ? kNot : kPrimary;
        } else {
          return kPrimary;
        }
      },
      e.node);
}

class Printer {
 public:
  std::string query(const QueryAst& q) {
    std::string out = "select ";
    if (q.distinct) out += "distinct ";
    for (std::size_t i = 0; i < q.select_items.size(); ++i) {
      if (i > 0) out += ", ";
      const auto& item = q.select_items[i];
      out += expr(item.expr, 0);
      if (item.alias) out += " as " + quote_identifier(*item.alias);
    }
    if (q.from_item) {
      out += " from " + table(*q.from_item);
      for (const auto& j : q.joins) {
        out += j.join_type == JoinType::inner ? " inner join " : " left join ";
        out += table(j.relation);
        out += " on " + expr(j.on_condition, 0);
      }
    }
    if (q.where_clause) out += " where " + expr(*q.where_clause, 0);
    if (!q.group_by.empty()) {
      out += " group by ";
      for (std::size_t i = 0; i < q.group_by.size(); ++i) {
        if (i > 0) out += ", ";
        out += expr(q.group_by[i], 0);
      }
    }
    if (q.having) out += " having " + expr(*q.having, 0);
    if (!q.order_by.empty()) {
      out += " order by ";
      for (std::size_t i = 0; i < q.order_by.size(); ++i) {
        if (i > 0) out += ", ";
        out += expr(q.order_by[i].expr, 0);
        if (q.order_by[i].direction == SortDirection::desc) out += " desc";
      }
    }
    if (q.limit) out += " limit " + std::to_string(*q.limit);
    if (q.offset) {
      // OFFSET without LIMIT is not SQLite syntax; -1 means unbounded.
      if (!q.limit) out += " limit -1";
      out += " offset " + std::to_string(*q.offset);
    }
    return out;
  }

  std::string expr(const Expr& e, int min_prec) {
    std::string text = bare(e);
    if (precedence(e) < min_prec) return "(" + text + ")";
    return text;
  }

 private:
  static std::string table(const TableRef& t) {
    std::string out = quote_identifier(t.name);
    if (t.alias) out += " as " + quote_identifier(*t.alias);
    return out;
  }

  std::string list(const std::vector<Expr>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0) out += ", ";
      out += expr(items[i], 0);
    }
    return out;
  }

  std::string bare(const Expr& e) {
    return std::visit([this](const auto& n) { return node(n); }, e.node);
  }

  std::string node(const Literal& n) {
    switch (n.kind) {
      case Literal::Kind::string:
        return quote_string(n.text);
      case Literal::Kind::null:
        return "null";
      default:
        return n.text;
    }
  }

  std::string node(const ColumnRef& n) {
    if (n.relation.empty()) return quote_identifier(n.column);
    return quote_identifier(n.relation) + "." + quote_identifier(n.column);
  }

  std::string node(const Star& n) {
    if (n.relation.empty()) return "*";
    return quote_identifier(n.relation) + ".*";
  }

  std::string node(const Unary& n) {
    switch (n.op) {
      case UnaryOp::logical_not:
        return "not " + expr(*n.operand, kNot);
      case UnaryOp::negate:
      case UnaryOp::plus: {
        std::string operand = expr(*n.operand, kUnary);
        const char* sign = n.op == UnaryOp::negate ? "-" : "+";
        // Keep "- -x" from collapsing into a comment.
        if (!operand.empty() && (operand[0] == '-' || operand[0] == '+')) return sign + (" " + operand);
        return sign + operand;
      }
    }
    return {};
  }

  std::string node(const Binary& n) {
    const int p = precedence(n.op);
    return expr(*n.lhs, p) + " " + to_string(n.op) + " " + expr(*n.rhs, p + 1);
  }

  std::string node(const Between& n) {
    return expr(*n.operand, kEquality) + (n.negated ? " not between " : " between ") +
           expr(*n.low, kComparison) + " and " + expr(*n.high, kComparison);
  }

  std::string node(const InList& n) {
    return expr(*n.operand, kEquality) + (n.negated ? " not in (" : " in (") + list(n.items) + ")";
  }

  std::string node(const InSubquery& n) {
    return expr(*n.operand, kEquality) + (n.negated ? " not in (" : " in (") + query(*n.query) + ")";
  }

  std::string node(const IsNull& n) {
    return expr(*n.operand, kEquality) + (n.negated ? " is not null" : " is null");
  }

  std::string node(const FunctionCall& n) {
    std::string out = n.name + "(";
    if (n.star) {
      out += "*";
    } else {
      if (n.distinct) out += "distinct ";
      out += list(n.args);
    }
    return out + ")";
  }

  std::string node(const Cast& n) { return "cast(" + expr(*n.operand, 0) + " as " + n.type_name + ")"; }

  std::string node(const Case& n) {
    std::string out = "case";
    if (n.subject) out += " " + expr(*n.subject, 0);
    for (const auto& w : n.whens) {
      out += " when " + expr(w.condition, 0) + " then " + expr(w.result, 0);
    }
    if (n.otherwise) out += " else " + expr(*n.otherwise, 0);
    return out + " end";
  }

  std::string node(const ScalarSubquery& n) { return "(" + query(*n.query) + ")"; }

  std::string node(const Exists& n) {
    return std::string(n.negated ? "not exists (" : "exists (") + query(*n.query) + ")";
  }
};

}  // namespace

const char* to_string(BinaryOp op) noexcept {
  switch (op) {
    case BinaryOp::logical_or:
      return "or";
    case BinaryOp::logical_and:
      return "and";
    case BinaryOp::eq:
      return "=";
    case BinaryOp::ne:
      return "<>";
    case BinaryOp::lt:
      return "<";
    case BinaryOp::le:
      return "<=";
    case BinaryOp::gt:
      return ">";
    case BinaryOp::ge:
      return ">=";
    case BinaryOp::is:
      return "is";
    case BinaryOp::is_not:
      return "is not";
    case BinaryOp::like:
      return "like";
    case BinaryOp::not_like:
      return "not like";
    case BinaryOp::glob:
      return "glob";
    case BinaryOp::concat:
      return "||";
    case BinaryOp::add:
      return "+";
    case BinaryOp::sub:
      return "-";
    case BinaryOp::mul:
      return "*";
    case BinaryOp::div:
      return "/";
    case BinaryOp::mod:
      return "%";
  }
  return "?";
}

std::string quote_identifier(std::string_view name) {
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out += '`';
    out += c;
  }
  return out + "`";
}

std::string quote_string(std::string_view value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

std::string print(const QueryAst& ast) {
  validate(ast);
  return Printer().query(ast);
}

std::string print(const CreateView& view) {
  validate(view.query);
  return "create view " + quote_identifier(view.name) + " as " + Printer().query(view.query);
}

std::string print(const Expr& expr) { return Printer().expr(expr, 0); }

}  // namespace vsql::sql
