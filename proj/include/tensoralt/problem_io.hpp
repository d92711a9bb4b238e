#ifndef TENSORALT_PROBLEM_IO_HPP
#define TENSORALT_PROBLEM_IO_HPP

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tensoralt/poly.hpp"

namespace tensoralt {

/// Parse failure with a position; the CLI maps this to exit code 1.
struct ParseError : std::runtime_error {
  int line = 0;
  int column = 0;
  ParseError(int line_, int column_, const std::string& what_)
      : std::runtime_error("line " + std::to_string(line_) + ", column " +
                           std::to_string(column_) + ": " + what_),
        line(line_),
        column(column_) {}
};

/// One declared problem: dimensions, objective and constraint polynomials as
/// coefficient/exponent lists, plus an optional transform matrix and Slater
/// point. The same data serves every subcommand.
struct ProblemFile {
  int n = 0;
  int m = 0;
  Polynomial objective;
  std::vector<Polynomial> constraints;
  std::optional<std::vector<std::vector<double>>> transform;
  std::optional<std::vector<double>> slater;
};

namespace io_detail {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
  std::vector<int> columns;
};

inline std::vector<Line> tokenize(std::istream& is) {
  std::vector<Line> lines;
  std::string raw;
  int number = 0;
  while (std::getline(is, raw)) {
    ++number;
    Line line;
    line.number = number;
    std::size_t i = 0;
    while (i < raw.size()) {
      if (raw[i] == '#') break;
      if (std::isspace(static_cast<unsigned char>(raw[i]))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j])) &&
             raw[j] != '#')
        ++j;
      line.tokens.push_back(raw.substr(i, j - i));
      line.columns.push_back(static_cast<int>(i) + 1);
      i = j;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

inline double parse_number(const Line& line, std::size_t tok) {
  const std::string& s = line.tokens[tok];
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line.number, line.columns[tok], "expected a number, got '" + s + "'");
  }
}

inline int parse_int(const Line& line, std::size_t tok) {
  const std::string& s = line.tokens[tok];
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line.number, line.columns[tok], "expected an integer, got '" + s + "'");
  }
}

}  // namespace io_detail

/// Text format: directives `n`, `m`, then `objective`/`constraint` blocks of
/// "coef e_1 .. e_n" term lines closed by `end`, an optional row-major
/// `transform` block, and an optional `slater` line. '#' starts a comment.
inline ProblemFile parse_problem_text(std::istream& is) {
  using io_detail::Line;
  const std::vector<Line> lines = io_detail::tokenize(is);
  ProblemFile pf;
  bool have_n = false, have_m = false, have_objective = false;

  std::size_t i = 0;
  auto parse_poly_block = [&](std::size_t& k) {
    Polynomial poly(pf.n);
    ++k;
    while (true) {
      if (k >= lines.size())
        throw ParseError(lines.back().number, 1, "unterminated block; expected 'end'");
      const Line& line = lines[k];
      if (line.tokens[0] == "end") {
        ++k;
        return poly;
      }
      if (static_cast<int>(line.tokens.size()) != pf.n + 1)
        throw ParseError(line.number, line.columns[0],
                         "term needs a coefficient and " + std::to_string(pf.n) + " exponents");
      const double coef = io_detail::parse_number(line, 0);
      std::vector<int> exps(pf.n);
      for (int j = 0; j < pf.n; ++j) {
        exps[j] = io_detail::parse_int(line, j + 1);
        if (exps[j] < 0)
          throw ParseError(line.number, line.columns[j + 1], "exponent must be nonnegative");
      }
      Exponent a(std::move(exps));
      if (a.degree() > pf.m)
        throw ParseError(line.number, line.columns[0],
                         "term degree exceeds declared degree " + std::to_string(pf.m));
      poly.add_term(a, coef);
      ++k;
    }
  };

  while (i < lines.size()) {
    const Line& line = lines[i];
    const std::string& head = line.tokens[0];
    if (head == "n") {
      if (line.tokens.size() != 2) throw ParseError(line.number, line.columns[0], "usage: n <dim>");
      pf.n = io_detail::parse_int(line, 1);
      if (pf.n < 1) throw ParseError(line.number, line.columns[1], "n must be >= 1");
      have_n = true;
      ++i;
    } else if (head == "m") {
      if (line.tokens.size() != 2)
        throw ParseError(line.number, line.columns[0], "usage: m <degree>");
      pf.m = io_detail::parse_int(line, 1);
      if (pf.m < 2 || pf.m % 2 != 0)
        throw ParseError(line.number, line.columns[1], "m must be even and >= 2");
      have_m = true;
      ++i;
    } else if (head == "objective" || head == "constraint") {
      if (!have_n || !have_m)
        throw ParseError(line.number, line.columns[0], "declare n and m before polynomials");
      if (line.tokens.size() != 1)
        throw ParseError(line.number, line.columns[1], "unexpected token after block header");
      const bool is_objective = head == "objective";
      Polynomial poly = parse_poly_block(i);
      if (is_objective) {
        if (have_objective)
          throw ParseError(line.number, line.columns[0], "duplicate objective block");
        pf.objective = std::move(poly);
        have_objective = true;
      } else {
        pf.constraints.push_back(std::move(poly));
      }
    } else if (head == "transform") {
      if (!have_n) throw ParseError(line.number, line.columns[0], "declare n before transform");
      std::vector<std::vector<double>> rows;
      ++i;
      while (true) {
        if (i >= lines.size())
          throw ParseError(lines.back().number, 1, "unterminated transform; expected 'end'");
        const Line& row = lines[i];
        if (row.tokens[0] == "end") {
          ++i;
          break;
        }
        if (static_cast<int>(row.tokens.size()) != pf.n)
          throw ParseError(row.number, row.columns[0],
                           "transform row needs " + std::to_string(pf.n) + " entries");
        std::vector<double> r(pf.n);
        for (int j = 0; j < pf.n; ++j) r[j] = io_detail::parse_number(row, j);
        rows.push_back(std::move(r));
        ++i;
      }
      if (static_cast<int>(rows.size()) != pf.n)
        throw ParseError(line.number, line.columns[0],
                         "transform needs " + std::to_string(pf.n) + " rows");
      pf.transform = std::move(rows);
    } else if (head == "slater") {
      if (!have_n) throw ParseError(line.number, line.columns[0], "declare n before slater");
      if (static_cast<int>(line.tokens.size()) != pf.n + 1)
        throw ParseError(line.number, line.columns[0],
                         "slater needs " + std::to_string(pf.n) + " coordinates");
      std::vector<double> x(pf.n);
      for (int j = 0; j < pf.n; ++j) x[j] = io_detail::parse_number(line, j + 1);
      pf.slater = std::move(x);
      ++i;
    } else {
      throw ParseError(line.number, line.columns[0], "unknown directive '" + head + "'");
    }
  }

  if (!have_n) throw ParseError(1, 1, "missing 'n' declaration");
  if (!have_m) throw ParseError(1, 1, "missing 'm' declaration");
  if (!have_objective) throw ParseError(1, 1, "missing objective block");
  return pf;
}

inline nlohmann::json poly_to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [a, c] : p.terms())
    terms.push_back({{"coef", c}, {"exps", a.values()}});
  return terms;
}

inline Polynomial poly_from_json(const nlohmann::json& j, int n, int m) {
  Polynomial p(n);
  if (!j.is_array()) throw ParseError(0, 0, "polynomial must be an array of terms");
  for (const auto& t : j) {
    if (!t.contains("coef") || !t.contains("exps"))
      throw ParseError(0, 0, "term needs 'coef' and 'exps'");
    std::vector<int> exps = t.at("exps").get<std::vector<int>>();
    if (static_cast<int>(exps.size()) != n)
      throw ParseError(0, 0, "exps length must equal n");
    for (int e : exps)
      if (e < 0) throw ParseError(0, 0, "exponent must be nonnegative");
    Exponent a(std::move(exps));
    if (a.degree() > m) throw ParseError(0, 0, "term degree exceeds m");
    p.add_term(a, t.at("coef").get<double>());
  }
  return p;
}

inline ProblemFile parse_problem_json(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, static_cast<int>(e.byte), e.what());
  }
  ProblemFile pf;
  try {
    pf.n = j.at("n").get<int>();
    pf.m = j.at("m").get<int>();
    if (pf.n < 1) throw ParseError(0, 0, "n must be >= 1");
    if (pf.m < 2 || pf.m % 2 != 0) throw ParseError(0, 0, "m must be even and >= 2");
    pf.objective = poly_from_json(j.at("objective"), pf.n, pf.m);
    if (j.contains("constraints"))
      for (const auto& c : j.at("constraints"))
        pf.constraints.push_back(poly_from_json(c, pf.n, pf.m));
    if (j.contains("transform")) {
      auto t = j.at("transform").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(t.size()) != pf.n)
        throw ParseError(0, 0, "transform must be n x n");
      for (const auto& row : t)
        if (static_cast<int>(row.size()) != pf.n)
          throw ParseError(0, 0, "transform must be n x n");
      pf.transform = std::move(t);
    }
    if (j.contains("slater")) {
      auto x = j.at("slater").get<std::vector<double>>();
      if (static_cast<int>(x.size()) != pf.n)
        throw ParseError(0, 0, "slater point must have n coordinates");
      pf.slater = std::move(x);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, 0, e.what());
  }
  return pf;
}

/// Both encodings share one semantics; JSON is detected by a leading '{'.
inline ProblemFile parse_problem(std::istream& is) {
  std::stringstream buffer;
  buffer << is.rdbuf();
  std::string content = buffer.str();
  for (char c : content) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    std::istringstream again(content);
    if (c == '{') return parse_problem_json(again);
    return parse_problem_text(again);
  }
  throw ParseError(1, 1, "empty problem file");
}

inline ProblemFile parse_problem_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open file: " + path);
  return parse_problem(is);
}

inline std::string write_problem_text(const ProblemFile& pf) {
  std::ostringstream os;
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "n " << pf.n << "\n";
  os << "m " << pf.m << "\n";
  auto block = [&](const char* name, const Polynomial& p) {
    os << name << "\n";
    for (const auto& [a, c] : p.terms()) {
      os << num(c);
      for (int j = 0; j < pf.n; ++j) os << ' ' << a[j];
      os << "\n";
    }
    os << "end\n";
  };
  block("objective", pf.objective);
  for (const auto& c : pf.constraints) block("constraint", c);
  if (pf.transform) {
    os << "transform\n";
    for (const auto& row : *pf.transform) {
      for (int j = 0; j < pf.n; ++j) os << (j ? " " : "") << num(row[j]);
      os << "\n";
    }
    os << "end\n";
  }
  if (pf.slater) {
    os << "slater";
    for (double v : *pf.slater) os << ' ' << num(v);
    os << "\n";
  }
  return os.str();
}

inline std::string write_problem_json(const ProblemFile& pf) {
  nlohmann::json j;
  j["n"] = pf.n;
  j["m"] = pf.m;
  j["objective"] = poly_to_json(pf.objective);
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : pf.constraints) cons.push_back(poly_to_json(c));
  j["constraints"] = cons;
  if (pf.transform) j["transform"] = *pf.transform;
  if (pf.slater) j["slater"] = *pf.slater;
  return j.dump(2) + "\n";
}

}  // namespace tensoralt

#endif  // TENSORALT_PROBLEM_IO_HPP
