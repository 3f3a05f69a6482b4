// Copyright 2026 The mcagg Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mcagg/lp_format.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mcagg/errors.h"

namespace mcagg {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool usable_name(const std::string& s) {
  if (s.empty() || s.size() > 200) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' &&
        c != '[' && c != ']' && c != ',') {
      return false;
    }
  }
  return true;
}

void write_terms(std::ostringstream& os, const std::vector<int>& idx,
                 const std::vector<double>& val,
                 const std::vector<std::string>& names) {
  bool first = true;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (val[k] == 0.0) continue;
    const double v = val[k];
    if (first) {
      os << (v < 0 ? "- " : "") << num(std::abs(v)) << " " << names[idx[k]];
    } else {
      os << (v < 0 ? " - " : " + ") << num(std::abs(v)) << " " << names[idx[k]];
    }
    first = false;
  }
  if (first) os << "0 " << names.front();
}

}  // namespace

std::string write_lp_text(const MipProblem& p) {
  const LpProblem& lp = p.lp;
  std::vector<std::string> names(lp.num_cols());
  std::map<std::string, int> seen;
  for (int j = 0; j < lp.num_cols(); ++j) {
    const std::string& given = j < static_cast<int>(lp.col_names.size()) ? lp.col_names[j] : "";
    names[j] = usable_name(given) && !seen.count(given) ? given : "x" + std::to_string(j);
    seen[names[j]] = j;
  }
  if (names.empty()) names.push_back("x0");
  std::ostringstream os;
  os << "\\ mcagg LP\n";
  os << "\\ offset: " << num(lp.objective_offset) << "\n";
  os << "\\ columns:";
  for (int j = 0; j < lp.num_cols(); ++j) os << " " << names[j];
  os << "\n";
  os << "Minimize\n obj: ";
  std::vector<int> idx;
  std::vector<double> val;
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (lp.cost[j] != 0.0) {
      idx.push_back(j);
      val.push_back(lp.cost[j]);
    }
  }
  write_terms(os, idx, val, names);
  os << "\nSubject To\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const LpRow& row = lp.rows[i];
    const std::string& given = i < static_cast<int>(lp.row_names.size()) ? lp.row_names[i] : "";
    const std::string name = usable_name(given) ? given : "r" + std::to_string(i);
    const bool lo = std::isfinite(row.lower);
    const bool hi = std::isfinite(row.upper);
    if (lo && hi && row.lower == row.upper) {
      os << " " << name << ": ";
      write_terms(os, row.index, row.value, names);
      os << " = " << num(row.lower) << "\n";
      continue;
    }
    if (lo) {
      os << " " << name << ": ";
      write_terms(os, row.index, row.value, names);
      os << " >= " << num(row.lower) << "\n";
    }
    if (hi) {
      os << " " << name << (lo ? "_hi" : "") << ": ";
      write_terms(os, row.index, row.value, names);
      os << " <= " << num(row.upper) << "\n";
    }
    if (!lo && !hi) {
      os << " " << name << ": ";
      write_terms(os, row.index, row.value, names);
      os << " >= -1e+30\n";
    }
  }
  os << "Bounds\n";
  for (int j = 0; j < lp.num_cols(); ++j) {
    const double l = lp.col_lower[j];
    const double u = lp.col_upper[j];
    if (p.integer.size() > static_cast<std::size_t>(j) && p.integer[j] && l == 0 && u == 1) {
      continue;
    }
    if (!std::isfinite(l) && !std::isfinite(u)) {
      os << " " << names[j] << " free\n";
    } else if (!std::isfinite(l)) {
      os << " -inf <= " << names[j] << " <= " << num(u) << "\n";
    } else if (!std::isfinite(u)) {
      if (l != 0.0) os << " " << names[j] << " >= " << num(l) << "\n";
    } else {
      os << " " << num(l) << " <= " << names[j] << " <= " << num(u) << "\n";
    }
  }
  std::ostringstream gen, bin;
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (p.integer.size() <= static_cast<std::size_t>(j) || !p.integer[j]) continue;
    if (lp.col_lower[j] == 0 && lp.col_upper[j] == 1) bin << " " << names[j] << "\n";
    else gen << " " << names[j] << "\n";
  }
  if (!gen.str().empty()) os << "Generals\n" << gen.str();
  if (!bin.str().empty()) os << "Binaries\n" << bin.str();
  os << "End\n";
  return os.str();
}

namespace {

enum class Section { kNone, kObjective, kRows, kBounds, kGenerals, kBinaries, kEnd };

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      if (i + 1 < line.size() && line[i + 1] == '=') {
        op += '=';
        ++i;
      }
      if (op == "=<") op = "<=";
      if (op == "=>") op = ">=";
      out.push_back(op);
      ++i;
    } else if (c == '+' || c == '-') {
      out.emplace_back(1, c);
      ++i;
    } else {
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
             line[j] != '<' && line[j] != '>' && line[j] != '=' &&
             !((line[j] == '+' || line[j] == '-') && j > i &&
               !(line[j - 1] == 'e' || line[j - 1] == 'E'))) {
        ++j;
      }
      out.push_back(line.substr(i, j - i));
      i = j;
    }
  }
  return out;
}

bool parse_number(const std::string& s, double& v) {
  std::string t = s;
  for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "inf" || t == "infinity") {
    v = kInf;
    return true;
  }
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0';
}

}  // namespace

MipProblem read_lp_text(const std::string& text) {
  MipProblem p;
  std::map<std::string, int> cols;
  double sense = 1.0;
  auto col = [&](const std::string& name) {
    auto it = cols.find(name);
    if (it != cols.end()) return it->second;
    const int j = p.add_column(0.0, 0.0, kInf, false, name);
    cols[name] = j;
    return j;
  };
  std::istringstream in(text);
  std::string line;
  Section section = Section::kNone;
  std::string pending;
  std::vector<std::string> statements;
  std::vector<Section> statement_sections;
  // Statements may span lines; a new one starts at "name:" or at a section.
  auto flush = [&] {
    if (!pending.empty()) {
      statements.push_back(pending);
      statement_sections.push_back(section);
      pending.clear();
    }
  };
  while (std::getline(in, line)) {
    std::string trimmed = line;
    const auto first = trimmed.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    trimmed = trimmed.substr(first);
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
      trimmed.pop_back();
    }
    if (trimmed[0] == '\\') {
      const std::string key = "\\ offset:";
      if (trimmed.rfind(key, 0) == 0) {
        double v = 0;
        if (!parse_number(trimmed.substr(key.size() + 1), v)) {
          throw ParseError("bad offset comment");
        }
        p.lp.objective_offset = v;
      }
      const std::string order = "\\ columns:";
      if (trimmed.rfind(order, 0) == 0) {
        std::istringstream names(trimmed.substr(order.size()));
        std::string name;
        while (names >> name) col(name);
      }
      continue;
    }
    std::string lower = trimmed;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    Section next = section;
    if (lower == "minimize" || lower == "min" || lower == "minimise") {
      next = Section::kObjective;
    } else if (lower == "maximize" || lower == "max" || lower == "maximise") {
      next = Section::kObjective;
      sense = -1.0;
    } else if (lower == "subject to" || lower == "st" || lower == "s.t.") {
      next = Section::kRows;
    } else if (lower == "bounds") {
      next = Section::kBounds;
    } else if (lower == "generals" || lower == "general") {
      next = Section::kGenerals;
    } else if (lower == "binaries" || lower == "binary") {
      next = Section::kBinaries;
    } else if (lower == "end") {
      next = Section::kEnd;
    }
    if (next != section || lower == "minimize" || lower == "maximize") {
      flush();
      section = next;
      continue;
    }
    if (section == Section::kRows || section == Section::kObjective) {
      if (trimmed.find(':') != std::string::npos) flush();
      pending += " " + trimmed;
    } else {
      flush();
      pending = trimmed;
      flush();
    }
  }
  flush();

  for (std::size_t s = 0; s < statements.size(); ++s) {
    std::string body = statements[s];
    const Section sec = statement_sections[s];
    std::string name;
    const auto colon = body.find(':');
    if ((sec == Section::kRows || sec == Section::kObjective) && colon != std::string::npos) {
      name = body.substr(0, colon);
      name.erase(0, name.find_first_not_of(' '));
      body = body.substr(colon + 1);
    }
    const std::vector<std::string> tok = tokenize(body);
    if (sec == Section::kObjective || sec == Section::kRows) {
      LpRow row;
      std::size_t k = 0;
      double sign = 1.0;
      double coef = 1.0;
      bool have_coef = false;
      for (; k < tok.size(); ++k) {
        const std::string& t = tok[k];
        if (t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">") break;
        if (t == "+") continue;
        if (t == "-") {
          sign = -sign;
          continue;
        }
        double v;
        if (parse_number(t, v)) {
          coef = v;
          have_coef = true;
          continue;
        }
        const int j = col(t);
        row.add(j, sign * coef);
        sign = 1.0;
        coef = 1.0;
        have_coef = false;
      }
      if (have_coef && sec == Section::kObjective) {
        p.lp.objective_offset += sign * coef;
      }
      if (sec == Section::kObjective) {
        for (std::size_t t = 0; t < row.index.size(); ++t) {
          p.lp.cost[row.index[t]] += sense * row.value[t];
        }
        continue;
      }
      if (k + 1 >= tok.size()) throw ParseError("row without right-hand side: " + name);
      std::string op = tok[k];
      double rhs_sign = 1.0;
      std::size_t r = k + 1;
      if (tok[r] == "-") {
        rhs_sign = -1.0;
        ++r;
      } else if (tok[r] == "+") {
        ++r;
      }
      double rhs;
      if (r >= tok.size() || !parse_number(tok[r], rhs)) {
        throw ParseError("bad right-hand side in row " + name);
      }
      rhs *= rhs_sign;
      if (op == "=") {
        row.set_sense(Sense::kEqual, rhs);
      } else if (op[0] == '>') {
        row.set_sense(Sense::kGreaterEqual, rhs <= -1e30 ? -kInf : rhs);
      } else {
        row.set_sense(Sense::kLessEqual, rhs);
      }
      p.lp.add_row(std::move(row), name);
    } else if (sec == Section::kBounds) {
      // Forms: "x free", "x >= l", "x <= u", "l <= x <= u", "x = v".
      std::vector<std::string> t;
      for (std::size_t k = 0; k < tok.size(); ++k) {
        if ((tok[k] == "-" || tok[k] == "+") && k + 1 < tok.size()) {
          double v;
          if (parse_number(tok[k + 1], v)) {
            t.push_back(tok[k] == "-" ? "-" + tok[k + 1] : tok[k + 1]);
            ++k;
            continue;
          }
        }
        t.push_back(tok[k]);
      }
      double v;
      if (t.size() == 2 && (t[1] == "free" || t[1] == "Free" || t[1] == "FREE")) {
        const int j = col(t[0]);
        p.lp.col_lower[j] = -kInf;
        p.lp.col_upper[j] = kInf;
      } else if (t.size() == 3 && !parse_number(t[0], v)) {
        const int j = col(t[0]);
        if (!parse_number(t[2], v)) throw ParseError("bad bound: " + body);
        if (t[1] == ">=") p.lp.col_lower[j] = v;
        else if (t[1] == "<=") p.lp.col_upper[j] = v;
        else if (t[1] == "=") p.lp.col_lower[j] = p.lp.col_upper[j] = v;
        else throw ParseError("bad bound: " + body);
      } else if (t.size() == 5 && t[1] == "<=" && t[3] == "<=") {
        double l, u;
        if (!parse_number(t[0], l) || !parse_number(t[4], u)) throw ParseError("bad bound: " + body);
        const int j = col(t[2]);
        p.lp.col_lower[j] = l;
        p.lp.col_upper[j] = u;
      } else {
        throw ParseError("bad bound: " + body);
      }
    } else if (sec == Section::kGenerals || sec == Section::kBinaries) {
      for (const std::string& t : tok) {
        const int j = col(t);
        p.integer[j] = 1;
        if (sec == Section::kBinaries) {
          p.lp.col_lower[j] = 0.0;
          p.lp.col_upper[j] = 1.0;
        }
      }
    }
  }
  return p;
}

}  // namespace mcagg
