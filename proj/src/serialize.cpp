#include "ergolab/serialize.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace ergolab {

namespace {

json rat_to_json(const Rat& r) { return json::array({r.num, r.den}); }

Rat rat_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(Err::BadInput, "rational must be [num, den]");
  return Rat(j[0].get<i64>(), j[1].get<i64>());
}

}  // namespace

json matrix_to_json(const TransitionMatrix& B) {
  return json{{"size", B.size}, {"rows", B.rows}};
}

TransitionMatrix matrix_from_json(const json& j) {
  if (!j.contains("size") || !j.contains("rows")) fail(Err::BadInput, "matrix needs size and rows");
  TransitionMatrix B;
  B.size = j["size"].get<int>();
  if (B.size < 1 || B.size > 4096) fail(Err::BadInput, "matrix size out of range");
  const json& rows = j["rows"];
  if (!rows.is_array() || int(rows.size()) != B.size) fail(Err::BadInput, "row count mismatch");
  for (const json& row : rows) {
    if (!row.is_array() || int(row.size()) != B.size) fail(Err::BadInput, "row length mismatch");
    std::vector<int> r;
    r.reserve(B.size);
    for (const json& v : row) {
      int e = v.get<int>();
      if (e != 0 && e != 1) fail(Err::BadInput, "matrix entries must be 0 or 1");
      r.push_back(e);
    }
    B.rows.push_back(std::move(r));
  }
  return B;
}

json measure_to_json(const MarkovMeasure& m) {
  json P = json::array();
  for (const auto& row : m.P) P.push_back(row);
  return json{{"p", m.p}, {"P", std::move(P)}};
}

MarkovMeasure measure_from_json(const json& j) {
  if (!j.contains("p") || !j.contains("P")) fail(Err::BadInput, "measure needs p and P");
  std::vector<double> p = j["p"].get<std::vector<double>>();
  std::vector<std::vector<double>> P;
  for (const json& row : j["P"]) P.push_back(row.get<std::vector<double>>());
  const int l = int(p.size());
  if (l < 1 || int(P.size()) != l) fail(Err::BadInput, "p/P size mismatch");
  TransitionMatrix B;
  B.size = l;
  for (const auto& row : P) {
    if (int(row.size()) != l) fail(Err::BadInput, "P row length mismatch");
    std::vector<int> r;
    r.reserve(l);
    for (double v : row) r.push_back(v > 0 ? 1 : 0);
    B.rows.push_back(std::move(r));
  }
  return make_markov_measure(B, std::move(p), std::move(P));
}

json partition_to_json(const PartitionFile& pf) {
  json rects = json::array();
  for (const PartRect& r : pf.rects)
    rects.push_back(json{{"corner", json::array({r.s0, r.u0})},
                         {"lengths", json::array({r.S, r.U})}});
  return json{{"matrix", json::array({json::array({pf.a, pf.b}), json::array({pf.c, pf.d})})},
              {"rectangles", std::move(rects)}};
}

PartitionFile partition_from_json(const json& j) {
  if (!j.contains("matrix") || !j.contains("rectangles"))
    fail(Err::BadInput, "partition needs matrix and rectangles");
  const json& M = j["matrix"];
  if (!M.is_array() || M.size() != 2 || M[0].size() != 2 || M[1].size() != 2)
    fail(Err::BadInput, "partition matrix must be 2x2");
  PartitionFile pf;
  pf.a = M[0][0].get<i64>();
  pf.b = M[0][1].get<i64>();
  pf.c = M[1][0].get<i64>();
  pf.d = M[1][1].get<i64>();
  for (const json& r : j["rectangles"]) {
    if (!r.contains("corner") || !r.contains("lengths"))
      fail(Err::BadInput, "rectangle needs corner and lengths");
    PartRect pr;
    pr.s0 = r["corner"][0].get<double>();
    pr.u0 = r["corner"][1].get<double>();
    pr.S = r["lengths"][0].get<double>();
    pr.U = r["lengths"][1].get<double>();
    pf.rects.push_back(pr);
  }
  return pf;
}

json schedule_to_json(const Schedule& s) {
  json levels = json::array();
  for (const LevelSpec& L : s.levels) {
    json comps = json::array();
    for (const MarkovMeasure& m : L.components) comps.push_back(measure_to_json(m));
    json weights = json::array();
    for (const Rat& a : L.weights) weights.push_back(rat_to_json(a));
    levels.push_back(json{{"k", L.k},
                          {"components", std::move(comps)},
                          {"weights", std::move(weights)},
                          {"seg_len", L.seg_len},
                          {"ring_bridge", L.ring_bridge},
                          {"up_bridge", L.up_bridge}});
  }
  json rows = json::array();
  for (const ScheduleLevel& r : s.rows) {
    json C = json::array();
    for (const Rat& c : r.C) C.push_back(rat_to_json(c));
    rows.push_back(json{{"k", r.k},
                        {"C", std::move(C)},
                        {"seg_count", r.seg_count},
                        {"N", r.N},
                        {"X", r.X},
                        {"Y", r.Y},
                        {"T", r.T},
                        {"M", r.M}});
  }
  return json{{"K", s.K},
              {"levels", std::move(levels)},
              {"rows", std::move(rows)},
              {"total_len", s.total_len}};
}

Schedule schedule_from_json(const json& j) {
  Schedule s;
  s.K = j.at("K").get<int>();
  s.total_len = j.at("total_len").get<i64>();
  for (const json& jl : j.at("levels")) {
    LevelSpec L;
    L.k = jl.at("k").get<int>();
    for (const json& jc : jl.at("components")) L.components.push_back(measure_from_json(jc));
    for (const json& jw : jl.at("weights")) L.weights.push_back(rat_from_json(jw));
    L.seg_len = jl.at("seg_len").get<std::vector<i64>>();
    L.ring_bridge = jl.at("ring_bridge").get<std::vector<i64>>();
    L.up_bridge = jl.at("up_bridge").get<i64>();
    s.levels.push_back(std::move(L));
  }
  for (const json& jr : j.at("rows")) {
    ScheduleLevel r;
    r.k = jr.at("k").get<int>();
    for (const json& jc : jr.at("C")) r.C.push_back(rat_from_json(jc));
    r.seg_count = jr.at("seg_count").get<std::vector<i64>>();
    r.N = jr.at("N").get<i64>();
    r.X = jr.at("X").get<i64>();
    r.Y = jr.at("Y").get<i64>();
    r.T = jr.at("T").get<i64>();
    r.M = jr.at("M").get<i64>();
    s.rows.push_back(std::move(r));
  }
  if (int(s.levels.size()) != s.K || int(s.rows.size()) != s.K)
    fail(Err::BadInput, "schedule level/row count mismatch");
  return s;
}

std::string tracking_csv(const TrackingReport& rep) {
  std::ostringstream os;
  os << "checkpoint,k,i,n,D,threshold,pass\n";
  for (const Checkpoint& c : rep.rows) {
    os << c.kind << ',' << c.k << ',' << c.i << ',' << c.n << ',';
    os.precision(17);
    os << c.D << ',' << c.threshold << ',' << (c.pass ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string orbit_csv(const std::vector<OrbitRow>& rows) {
  std::ostringstream os;
  os << "t,x,y,in_disk,chi_plus_running\n";
  os.precision(17);
  for (const OrbitRow& r : rows)
    os << r.t << ',' << r.x << ',' << r.y << ',' << (r.in_disk ? 1 : 0) << ',' << r.chi_plus_run
       << '\n';
  return os.str();
}

std::string shadow_csv(const PseudoOrbit& po, const ShadowResult* sr) {
  std::ostringstream os;
  os << "n,x,y,jump,correction\n";
  os.precision(17);
  for (std::size_t n = 0; n < po.points.size(); ++n) {
    double jump = n < po.jumps.size() ? po.jumps[n].norm_inf() : 0.0;
    double corr = sr && n < sr->corrections.size() ? sr->corrections[n].norm_inf() : 0.0;
    os << n << ',' << po.points[n].x << ',' << po.points[n].y << ',' << jump << ',' << corr
       << '\n';
  }
  return os.str();
}

std::string word_to_text(const Word& w) {
  bool digits = true;
  for (int s : w)
    if (s < 1 || s > 9) {
      digits = false;
      break;
    }
  std::ostringstream os;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!digits && i) os << ' ';
    os << w[i];
  }
  return os.str();
}

Word word_from_text(const std::string& text) {
  // Two layouts: a bare digit run ("121121...") maps one digit per symbol;
  // anything with separators is a list of integers.
  std::string body;
  bool separated = false;
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      separated = separated || !body.empty();
      body += ' ';
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      body += c;
    } else {
      fail(Err::BadInput, "unexpected character in word text");
    }
  }
  // trailing whitespace alone does not make a digit run "separated"
  if (body.find_last_not_of(' ') != std::string::npos &&
      body.find(' ', 0) > body.find_last_not_of(' '))
    separated = false;

  Word w;
  if (separated) {
    std::istringstream is(body);
    i64 v = 0;
    while (is >> v) {
      if (v < 1) fail(Err::BadInput, "word symbols start at 1");
      w.push_back(int(v));
    }
  } else {
    for (char c : body) {
      if (c == ' ') continue;
      if (c == '0') fail(Err::BadInput, "digit words use symbols 1..9");
      w.push_back(c - '0');
    }
  }
  if (w.empty()) fail(Err::BadInput, "empty word");
  return w;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::BadInput, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::BadInput, "cannot write " + path);
  out << content;
}

}  // namespace ergolab
