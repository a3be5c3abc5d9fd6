#include "fastmm/strassen.hpp"

#include <sstream>
#include <stdexcept>

namespace fastmm {
namespace {

using Q = Quadrant;

SignedPath term(int sign, Q q) { return {sign, {q}}; }

std::vector<SignedPath> compose(const std::vector<SignedPath>& outer,
                                const std::vector<SignedPath>& inner) {
  std::vector<SignedPath> out;
  out.reserve(outer.size() * inner.size());
  for (const auto& o : outer)
    for (const auto& i : inner) {
      SignedPath t{o.sign * i.sign, o.path};
      t.path.insert(t.path.end(), i.path.begin(), i.path.end());
      out.push_back(std::move(t));
    }
  return out;
}

std::string path_label(const QuadrantPath& path) {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '.';
    s += quadrant_label(path[i]);
  }
  return s;
}

std::string operand_label(char matrix, const std::vector<SignedPath>& terms) {
  auto one = [&](const SignedPath& t) {
    return t.path.empty() ? std::string(1, matrix)
                          : std::string(1, matrix) + "[" + path_label(t.path) + "]";
  };
  if (terms.size() == 1) return (terms.front().sign < 0 ? "-" : "") + one(terms.front());
  std::string s = "(";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i == 0) {
      if (terms[i].sign < 0) s += "-";
    } else {
      s += terms[i].sign < 0 ? " - " : " + ";
    }
    s += one(terms[i]);
  }
  return s + ")";
}

}  // namespace

std::string VariantClass::to_string() const {
  return std::to_string(w_a) + "-" + std::to_string(w_b) + "-" + std::to_string(w_c);
}

std::vector<StrassenOp> gemm_ops() {
  return {StrassenOp{0, "GEMM", {{1, {}}}, {{1, {}}}, {{1, {}}}}};
}

std::vector<StrassenOp> one_level_ops() {
  return {
      {0, "M1", {term(1, Q::Q00), term(1, Q::Q11)}, {term(1, Q::Q00), term(1, Q::Q11)},
       {term(1, Q::Q00), term(1, Q::Q11)}},
      {1, "M2", {term(1, Q::Q10), term(1, Q::Q11)}, {term(1, Q::Q00)},
       {term(1, Q::Q10), term(-1, Q::Q11)}},
      {2, "M3", {term(1, Q::Q00)}, {term(1, Q::Q01), term(-1, Q::Q11)},
       {term(1, Q::Q01), term(1, Q::Q11)}},
      {3, "M4", {term(1, Q::Q11)}, {term(1, Q::Q10), term(-1, Q::Q00)},
       {term(1, Q::Q00), term(1, Q::Q10)}},
      {4, "M5", {term(1, Q::Q00), term(1, Q::Q01)}, {term(1, Q::Q11)},
       {term(-1, Q::Q00), term(1, Q::Q01)}},
      {5, "M6", {term(1, Q::Q10), term(-1, Q::Q00)}, {term(1, Q::Q00), term(1, Q::Q01)},
       {term(1, Q::Q11)}},
      {6, "M7", {term(1, Q::Q01), term(-1, Q::Q11)}, {term(1, Q::Q10), term(1, Q::Q11)},
       {term(1, Q::Q00)}},
  };
}

std::vector<StrassenOp> two_level_ops() {
  const auto base = one_level_ops();
  std::vector<StrassenOp> out;
  out.reserve(base.size() * base.size());
  for (const auto& outer : base)
    for (const auto& inner : base) {
      StrassenOp op;
      op.id = out.size();
      op.name = outer.name + "." + inner.name.substr(1);
      op.a = compose(outer.a, inner.a);
      op.b = compose(outer.b, inner.b);
      op.c = compose(outer.c, inner.c);
      out.push_back(std::move(op));
    }
  return out;
}

std::vector<StrassenOp> ops_for_level(int levels) {
  switch (levels) {
    case 0: return gemm_ops();
    case 1: return one_level_ops();
    case 2: return two_level_ops();
    default: throw std::invalid_argument("levels must be 0, 1 or 2");
  }
}

VariantClass classify(const StrassenOp& op) { return {op.a.size(), op.b.size(), op.c.size()}; }

std::optional<std::string_view> variant_alias(const VariantClass& cls) {
  if (cls == VariantClass{1, 1, 1}) return "gemm";
  if (cls == VariantClass{2, 2, 2}) return "Var#0";
  return std::nullopt;
}

std::string format_op(const StrassenOp& op) {
  std::string s = op.name + ": " + operand_label('A', op.a) + " * " + operand_label('B', op.b) + " ->";
  for (const auto& t : op.c) {
    s += t.sign < 0 ? " -C" : " +C";
    if (!t.path.empty()) s += "[" + path_label(t.path) + "]";
  }
  return s;
}

std::string dump_ops(std::span<const StrassenOp> ops) {
  std::string s;
  for (const auto& op : ops) s += format_op(op) + "\n";
  return s;
}

bool paths_overlap(const QuadrantPath& x, const QuadrantPath& y) noexcept {
  const std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] != y[i]) return false;
  return true;
}

bool destinations_conflict(const StrassenOp& x, const StrassenOp& y) noexcept {
  for (const auto& a : x.c)
    for (const auto& b : y.c)
      if (paths_overlap(a.path, b.path)) return true;
  return false;
}

}  // namespace fastmm
