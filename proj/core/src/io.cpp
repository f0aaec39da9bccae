#include "ascert/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ascert {

namespace {

// Token stream over '#'-commented, line-oriented text.
struct Lines {
  std::vector<std::vector<std::string>> rows;
  size_t cur = 0;

  explicit Lines(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::vector<std::string> toks;
      std::string t;
      while (ls >> t) toks.push_back(t);
      if (!toks.empty()) rows.push_back(std::move(toks));
    }
  }

  const std::vector<std::string>& next(const std::string& what) {
    if (cur >= rows.size())
      throw std::runtime_error("unexpected end of file, expected " + what);
    return rows[cur++];
  }

  const std::vector<std::string>& expect(const std::string& key) {
    const auto& r = next(key);
    if (r[0] != key)
      throw std::runtime_error("expected '" + key + "', found '" + r[0] + "'");
    return r;
  }
};

double to_double(const std::string& s) {
  size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad number: " + s);
  return v;
}

int to_int(const std::string& s) {
  size_t pos = 0;
  int v = std::stoi(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad integer: " + s);
  return v;
}

Mat read_matrix(Lines& L, int rows, int cols, const std::string& what) {
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& r = L.next(what + " row");
    if (static_cast<int>(r.size()) != cols)
      throw std::runtime_error(what + ": expected " + std::to_string(cols) +
                               " values per row");
    for (int j = 0; j < cols; ++j) M(i, j) = to_double(r[j]);
  }
  return M;
}

Vec read_vector(Lines& L, int len, const std::string& what) {
  const auto& r = L.next(what);
  if (static_cast<int>(r.size()) != len)
    throw std::runtime_error(what + ": expected " + std::to_string(len) +
                             " values");
  Vec v(len);
  for (int j = 0; j < len; ++j) v(j) = to_double(r[j]);
  return v;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix(std::ostringstream& os, const Mat& M) {
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j)
      os << (j ? " " : "") << fmt(M(i, j));
    os << "\n";
  }
}

void write_vector(std::ostringstream& os, const Vec& v) {
  for (int j = 0; j < v.size(); ++j) os << (j ? " " : "") << fmt(v(j));
  os << "\n";
}

}  // namespace

ProblemData parse_problem(std::istream& is) {
  Lines L(is);
  ProblemData pd;
  L.expect("ascert-problem");
  const auto& dims = L.expect("dims");
  if (dims.size() != 4) throw std::runtime_error("dims needs n m p");
  int n = to_int(dims[1]), m = to_int(dims[2]), p = to_int(dims[3]);
  if (n < 1 || m < 0 || p < 0) throw std::runtime_error("bad dims");

  L.expect("H");
  pd.mp.H = read_matrix(L, n, n, "H");
  L.expect("f");
  pd.mp.f = read_vector(L, n, "f");
  L.expect("f_theta");
  pd.mp.f_theta = read_matrix(L, n, p, "f_theta");
  L.expect("A");
  pd.mp.A = read_matrix(L, m, n, "A");
  L.expect("b");
  pd.mp.b = read_vector(L, m, "b");
  L.expect("W");
  pd.mp.W = read_matrix(L, m, p, "W");

  const auto& th = L.expect("theta0");
  if (th.size() != 2) throw std::runtime_error("theta0 needs a row count");
  int nl = to_int(th[1]);
  for (int i = 0; i < nl; ++i) {
    const auto& r = L.next("theta0 row");
    if (static_cast<int>(r.size()) != p + 2)
      throw std::runtime_error("theta0 row: expected c(p), d, strict");
    HalfPlane hp;
    hp.c = Vec(p);
    for (int j = 0; j < p; ++j) hp.c(j) = to_double(r[j]);
    hp.d = to_double(r[p]);
    hp.strict = to_int(r[p + 1]) != 0;
    pd.mp.theta0.linear.push_back(std::move(hp));
  }

  const auto& st = L.expect("start");
  if (st.size() != 2) throw std::runtime_error("start needs origin|affine");
  if (st[1] == "origin") {
    pd.F0 = Mat::Zero(n, p);
    pd.G0 = Vec::Zero(n);
  } else if (st[1] == "affine") {
    pd.F0 = read_matrix(L, n, p, "F0");
    pd.G0 = read_vector(L, n, "G0");
  } else {
    throw std::runtime_error("start must be origin or affine");
  }

  const auto& w0 = L.expect("w0");
  for (size_t i = 1; i < w0.size(); ++i) {
    int j = to_int(w0[i]);
    if (j < 1 || j > m) throw std::runtime_error("w0 index out of range");
    pd.w0.append(j - 1);
  }

  while (true) {
    const auto& r = L.next("option or end");
    if (r[0] == "end") break;
    if (r[0] == "option" && r.size() == 3)
      pd.options[r[1]] = r[2];
    else
      throw std::runtime_error("expected 'option key value' or 'end'");
  }
  return pd;
}

ProblemData load_problem(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return parse_problem(is);
}

std::string serialize_problem(const ProblemData& pd) {
  const MpQP& mp = pd.mp;
  std::ostringstream os;
  os << "ascert-problem 1\n";
  os << "dims " << mp.n() << " " << mp.m() << " " << mp.p() << "\n";
  os << "H\n";
  write_matrix(os, mp.H);
  os << "f\n";
  write_vector(os, mp.f);
  os << "f_theta\n";
  write_matrix(os, mp.f_theta);
  os << "A\n";
  write_matrix(os, mp.A);
  os << "b\n";
  write_vector(os, mp.b);
  os << "W\n";
  write_matrix(os, mp.W);
  os << "theta0 " << mp.theta0.linear.size() << "\n";
  for (const auto& hp : mp.theta0.linear) {
    for (int j = 0; j < hp.c.size(); ++j) os << fmt(hp.c(j)) << " ";
    os << fmt(hp.d) << " " << (hp.strict ? 1 : 0) << "\n";
  }
  bool origin = (pd.F0.size() == 0 || pd.F0.cwiseAbs().maxCoeff() == 0.0) &&
                (pd.G0.size() == 0 || pd.G0.cwiseAbs().maxCoeff() == 0.0);
  if (origin) {
    os << "start origin\n";
  } else {
    os << "start affine\n";
    write_matrix(os, pd.F0);
    write_vector(os, pd.G0);
  }
  os << "w0";
  for (int j : pd.w0.idx) os << " " << (j + 1);
  os << "\n";
  for (const auto& [k, v] : pd.options) os << "option " << k << " " << v << "\n";
  os << "end\n";
  return os.str();
}

std::string problem_hash(const ProblemData& pd) {
  std::string s = serialize_problem(pd);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string serialize_partition(const Partition& part) {
  std::ostringstream os;
  os << "ascert-partition 1\n";
  os << "hash " << (part.problem_hash.empty() ? "-" : part.problem_hash) << "\n";
  os << "dims " << part.n << " " << part.m << " " << part.p << "\n";
  os << "options " << (part.options.empty() ? "-" : part.options) << "\n";
  os << "nmax " << part.nmax() << "\n";
  os << "nreg " << part.nreg() << "\n";
  int id = 0;
  for (const auto& r : part.regions) {
    os << "region " << ++id << "\n";
    os << "status " << static_cast<int>(r.status) << "\n";
    os << "k " << r.k << "\n";
    os << "wschanges";
    for (int c : r.wschanges) os << " " << c;
    os << "\n";
    os << "ws";
    for (int j : r.ws.idx) os << " " << (j + 1);
    os << "\n";
    os << "flops " << r.flops << "\n";
    os << "linear " << r.theta.linear.size() << "\n";
    for (const auto& hp : r.theta.linear) {
      for (int j = 0; j < hp.c.size(); ++j) os << fmt(hp.c(j)) << " ";
      os << fmt(hp.d) << " " << (hp.strict ? 1 : 0) << "\n";
    }
    os << "quadratic " << r.theta.quadratic.size() << "\n";
    for (const auto& q : r.theta.quadratic) {
      write_matrix(os, q.Q);
      write_vector(os, q.R);
      os << fmt(q.S) << " " << (q.strict ? 1 : 0) << "\n";
    }
    os << "F\n";
    write_matrix(os, r.F);
    os << "G\n";
    write_vector(os, r.G);
  }
  os << "end\n";
  return os.str();
}

Partition parse_partition(std::istream& is) {
  Lines L(is);
  Partition part;
  L.expect("ascert-partition");
  const auto& hash = L.expect("hash");
  part.problem_hash = hash.size() > 1 && hash[1] != "-" ? hash[1] : "";
  const auto& dims = L.expect("dims");
  part.n = to_int(dims[1]);
  part.m = to_int(dims[2]);
  part.p = to_int(dims[3]);
  const auto& optrow = L.expect("options");
  if (optrow.size() > 1 && optrow[1] != "-") {
    std::string o;
    for (size_t i = 1; i < optrow.size(); ++i) {
      if (i > 1) o += " ";
      o += optrow[i];
    }
    part.options = o;
  }
  int nmax = to_int(L.expect("nmax").at(1));
  int nreg = to_int(L.expect("nreg").at(1));

  while (true) {
    const auto& r = L.next("region or end");
    if (r[0] == "end") break;
    if (r[0] != "region") throw std::runtime_error("expected region record");
    RegionTuple t;
    t.status = static_cast<TupleStatus>(to_int(L.expect("status").at(1)));
    t.k = to_int(L.expect("k").at(1));
    const auto& ch = L.expect("wschanges");
    for (size_t i = 1; i < ch.size(); ++i) t.wschanges.push_back(to_int(ch[i]));
    const auto& ws = L.expect("ws");
    for (size_t i = 1; i < ws.size(); ++i) t.ws.append(to_int(ws[i]) - 1);
    t.flops = std::stoll(L.expect("flops").at(1));
    int nl = to_int(L.expect("linear").at(1));
    for (int i = 0; i < nl; ++i) {
      const auto& row = L.next("linear row");
      if (static_cast<int>(row.size()) != part.p + 2)
        throw std::runtime_error("linear row has wrong width");
      HalfPlane hp;
      hp.c = Vec(part.p);
      for (int j = 0; j < part.p; ++j) hp.c(j) = to_double(row[j]);
      hp.d = to_double(row[part.p]);
      hp.strict = to_int(row[part.p + 1]) != 0;
      t.theta.linear.push_back(std::move(hp));
    }
    int nq = to_int(L.expect("quadratic").at(1));
    for (int i = 0; i < nq; ++i) {
      QuadIneq q;
      q.Q = read_matrix(L, part.p, part.p, "Q");
      q.R = read_vector(L, part.p, "R");
      const auto& sr = L.next("S strict");
      q.S = to_double(sr.at(0));
      q.strict = to_int(sr.at(1)) != 0;
      t.theta.quadratic.push_back(std::move(q));
    }
    L.expect("F");
    t.F = read_matrix(L, part.n, part.p, "F");
    L.expect("G");
    t.G = read_vector(L, part.n, "G");
    part.regions.push_back(std::move(t));
  }
  if (part.nmax() != nmax || part.nreg() != nreg)
    throw std::runtime_error("partition header does not match its regions");
  return part;
}

Partition load_partition(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return parse_partition(is);
}

void save_text(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << content;
}

}  // namespace ascert
