#include "dnmg/model.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dnmg::opt {

int Model::add_var(std::string name, double lo, double hi, bool integer) {
  Var v;
  v.name = std::move(name);
  v.lo = lo;
  v.hi = hi;
  v.integer = integer;
  const int id = static_cast<int>(vars_.size());
  var_index_.emplace(v.name, id);
  vars_.push_back(std::move(v));
  return id;
}

int Model::add_row(std::string tag, Sense sense, double rhs) {
  Row r;
  r.tag = std::move(tag);
  r.sense = sense;
  r.rhs = rhs;
  const int id = static_cast<int>(rows_.size());
  auto [it, inserted] = row_index_.emplace(r.tag, id);
  (void)it;
  if (!inserted) throw std::invalid_argument("duplicate row tag: " + r.tag);
  rows_.push_back(std::move(r));
  return id;
}

void Model::add_term(int row, int var, double coef) {
  if (coef == 0.0) return;
  auto& terms = rows_[row].terms;
  for (auto& [v, c] : terms) {
    if (v == var) {
      c += coef;
      return;
    }
  }
  terms.emplace_back(var, coef);
}

void Model::add_rhs_param(int row, std::string_view key, double coef) {
  if (coef == 0.0) return;
  auto& params = rows_[row].rhs_params;
  for (auto& p : params) {
    if (p.key == key) {
      p.coef += coef;
      return;
    }
  }
  params.push_back({std::string(key), coef});
}

int Model::find_var(std::string_view name) const {
  auto it = var_index_.find(std::string(name));
  return it == var_index_.end() ? -1 : it->second;
}

int Model::find_row(std::string_view tag) const {
  auto it = row_index_.find(std::string(tag));
  return it == row_index_.end() ? -1 : it->second;
}

bool Model::has_integers() const {
  for (const auto& v : vars_)
    if (v.integer) return true;
  return false;
}

void Model::validate() const {
  for (const auto& v : vars_) {
    if (!(v.lo <= v.hi))
      throw std::invalid_argument("inconsistent bounds on " + v.name);
    if (std::isnan(v.lo) || std::isnan(v.hi) || std::isnan(v.obj))
      throw std::invalid_argument("nan in variable " + v.name);
  }
  for (const auto& r : rows_) {
    if (std::isnan(r.rhs)) throw std::invalid_argument("nan rhs in " + r.tag);
    for (const auto& [v, c] : r.terms) {
      if (v < 0 || v >= num_vars())
        throw std::invalid_argument("dangling variable in row " + r.tag);
      if (std::isnan(c) || std::isinf(c))
        throw std::invalid_argument("bad coefficient in row " + r.tag);
    }
  }
}

namespace {

void write_term(std::ostream& os, double c, const std::string& name,
                bool& first) {
  if (c == 0.0) return;
  if (first) {
    os << (c < 0 ? "- " : "");
    first = false;
  } else {
    os << (c < 0 ? " - " : " + ");
  }
  const double a = std::abs(c);
  os << a << " " << name;
}

}  // namespace

void write_lp_format(const Model& m, std::ostream& os) {
  os << "\\ dnmg model export\nMinimize\n obj:";
  bool first = true;
  os << " ";
  for (int j = 0; j < m.num_vars(); ++j)
    write_term(os, m.var(j).obj, m.var(j).name, first);
  if (first) os << "0 " << (m.num_vars() ? m.var(0).name : "x");
  os << "\nSubject To\n";
  for (int i = 0; i < m.num_rows(); ++i) {
    const auto& r = m.row(i);
    os << " " << r.tag << ":";
    bool f2 = true;
    os << " ";
    for (const auto& [v, c] : r.terms) write_term(os, c, m.var(v).name, f2);
    if (f2) os << "0 " << (m.num_vars() ? m.var(0).name : "x");
    switch (r.sense) {
      case Sense::le: os << " <= "; break;
      case Sense::eq: os << " = "; break;
      case Sense::ge: os << " >= "; break;
    }
    os << r.rhs << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < m.num_vars(); ++j) {
    const auto& v = m.var(j);
    if (v.lo == -kInf && v.hi == kInf) {
      os << " " << v.name << " free\n";
    } else {
      if (v.lo == -kInf)
        os << " -inf <= " << v.name << " <= " << v.hi << "\n";
      else if (v.hi == kInf)
        os << " " << v.name << " >= " << v.lo << "\n";
      else
        os << " " << v.lo << " <= " << v.name << " <= " << v.hi << "\n";
    }
  }
  bool any_int = false;
  for (int j = 0; j < m.num_vars(); ++j) any_int |= m.var(j).integer;
  if (any_int) {
    os << "Binaries\n";
    for (int j = 0; j < m.num_vars(); ++j)
      if (m.var(j).integer) os << " " << m.var(j).name << "\n";
  }
  os << "End\n";
}

}  // namespace dnmg::opt
