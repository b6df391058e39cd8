// Command-line front end: every library module exposed as subcommands with
// seeded determinism and file-based outputs.  Results are wrapped in a JSON
// envelope {"config_hash", "results", "runtime_ms"}; timing goes to stderr so
// the files themselves are byte-reproducible.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ergolab/common.hpp"
#include "ergolab/katok.hpp"
#include "ergolab/saturation.hpp"
#include "ergolab/serialize.hpp"
#include "ergolab/sft.hpp"
#include "ergolab/shadowing.hpp"
#include "ergolab/toral.hpp"
#include "ergolab/weakstar.hpp"

namespace {

using ergolab::i64;
using ojson = nlohmann::ordered_json;

//---------------------------------------------------------------------------
// Envelope plumbing.
//---------------------------------------------------------------------------

struct Ctx {
  std::uint64_t seed = 1;
  int threads = 1;        // accepted everywhere; all aggregations are
                          // order-independent, so outputs never depend on it
  std::string out;        // output file ("" = stdout)
  std::string format = "json";
  std::string emit;       // optional CSV/text sidecar path
};

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[std::size_t(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

// The hash covers the command name, its parameters (file contents included
// via their own hashes), and the seed -- but never the thread count.
std::string config_hash(const std::string& cmd, const ojson& params, std::uint64_t seed) {
  ojson c{{"cmd", cmd}, {"params", params}, {"seed", seed}};
  return hex64(fnv1a64(c.dump()));
}

void write_output(const Ctx& ctx, const std::string& body) {
  if (ctx.out.empty())
    std::cout << body << '\n';
  else
    ergolab::write_text_file(ctx.out, body + "\n");
}

// Assemble and deliver the envelope; csv (when non-empty) serves both the
// --emit sidecar and --format csv primary output.
void finish(const Ctx& ctx, const std::string& cmd, const ojson& params, const ojson& results,
            const std::string& csv = "") {
  if (!ctx.emit.empty()) {
    if (csv.empty()) ergolab::fail(ergolab::Err::BadInput, cmd + " has no series to --emit");
    ergolab::write_text_file(ctx.emit, csv);
  }
  if (ctx.format == "csv") {
    if (csv.empty()) ergolab::fail(ergolab::Err::BadInput, cmd + " has no CSV form");
    write_output(ctx, csv);
    return;
  }
  ojson envelope{{"config_hash", config_hash(cmd, params, ctx.seed)},
                 {"results", results},
                 {"runtime_ms", 0}};
  write_output(ctx, envelope.dump(2));
}

//---------------------------------------------------------------------------
// Input loaders.  Each records a content hash into params so the envelope
// pins the exact inputs.
//---------------------------------------------------------------------------

ergolab::json load_json(const std::string& path) {
  ergolab::json j;
  try {
    j = ergolab::json::parse(ergolab::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    ergolab::fail(ergolab::Err::BadInput, path + ": " + e.what());
  }
  return j;
}

ergolab::TransitionMatrix load_matrix(const std::string& path, ojson& params) {
  params["matrix"] = path;
  params["matrix_hash"] = hex64(fnv1a64(ergolab::read_text_file(path)));
  return ergolab::matrix_from_json(load_json(path));
}

ergolab::MarkovPartition load_partition_file(const std::string& path, ojson& params) {
  params["partition"] = path;
  params["partition_hash"] = hex64(fnv1a64(ergolab::read_text_file(path)));
  ergolab::PartitionFile pf = ergolab::partition_from_json(load_json(path));
  ergolab::ToralAutomorphism T = ergolab::make_toral(pf.a, pf.b, pf.c, pf.d);
  return ergolab::load_partition(T, pf.rects);
}

std::vector<ergolab::LevelSpec> load_levels(const std::string& path, int& K, ojson& params) {
  params["levels"] = path;
  params["levels_hash"] = hex64(fnv1a64(ergolab::read_text_file(path)));
  ergolab::json j = load_json(path);
  K = j.at("K").get<int>();
  std::vector<ergolab::LevelSpec> levels;
  for (const ergolab::json& jl : j.at("levels")) {
    ergolab::LevelSpec L;
    L.k = jl.at("k").get<int>();
    for (const ergolab::json& jc : jl.at("components"))
      L.components.push_back(ergolab::measure_from_json(jc));
    for (const ergolab::json& jw : jl.at("weights")) {
      if (!jw.is_array() || jw.size() != 2)
        ergolab::fail(ergolab::Err::BadInput, "weights must be [num, den] pairs");
      L.weights.emplace_back(jw[0].get<i64>(), jw[1].get<i64>());
    }
    L.seg_len = jl.at("seg_len").get<std::vector<i64>>();
    L.ring_bridge = jl.at("ring_bridge").get<std::vector<i64>>();
    if (jl.contains("up_bridge")) L.up_bridge = jl.at("up_bridge").get<i64>();
    levels.push_back(std::move(L));
  }
  return levels;
}

//---------------------------------------------------------------------------
// Shared result builders.
//---------------------------------------------------------------------------

ojson measure_results(const ergolab::MarkovMeasure& m) {
  return ojson{{"p", m.p}, {"P", m.P}};
}

ergolab::KatokMap katok_from_flags(i64 a, i64 b, i64 c, i64 d, double r0, double r1,
                                   double alpha) {
  return ergolab::build_katok_map(a, b, c, d, r0, r1, alpha);
}

// Per-pool seeds must not collide across (level, component) cells.
std::uint64_t pool_seed(std::uint64_t base, int k, std::size_t j) {
  return base + 1000003ULL * std::uint64_t(k) + std::uint64_t(j);
}

std::vector<ergolab::MeasurePtr> level_mixtures(const std::vector<ergolab::LevelSpec>& levels) {
  std::vector<ergolab::MeasurePtr> targets;
  for (const ergolab::LevelSpec& L : levels) {
    std::vector<std::pair<double, ergolab::MeasurePtr>> parts;
    for (std::size_t j = 0; j < L.components.size(); ++j)
      parts.emplace_back(L.weights[j].value(), ergolab::measure_from_markov(L.components[j]));
    targets.push_back(ergolab::measure_mix(std::move(parts)));
  }
  return targets;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergodic-theory laboratory: subshifts, toral codings, shadowing, "
               "slowed-down automorphisms, and saturated-orbit assembly"};
  app.require_subcommand(1);
  // Global options (--seed, --out, ...) may legally appear after the
  // subcommand name; unmatched options climb back up to the main app.
  // Subcommands created below inherit this setting.
  app.fallthrough();

  Ctx ctx;
  app.add_option("--seed", ctx.seed, "RNG seed (default 1)")->capture_default_str();
  app.add_option("--threads", ctx.threads, "worker-thread cap; outputs never depend on it")
      ->capture_default_str();
  app.add_option("--out", ctx.out, "write primary output to this file instead of stdout");
  app.add_option("--format", ctx.format, "json (default) or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--emit", ctx.emit, "also write the command's CSV/text series to this file");

  const auto t_start = std::chrono::steady_clock::now();
  int exit_code = 0;

  //-------------------------------------------------------------------------
  // sft
  //-------------------------------------------------------------------------
  auto* sft = app.add_subcommand("sft", "subshift-of-finite-type analysis");
  sft->require_subcommand(1);

  {
    auto* cmd = sft->add_subcommand("parry", "Perron eigendata and the Parry measure");
    auto matrix = std::make_shared<std::string>();
    auto bits = std::make_shared<bool>(false);
    cmd->add_option("--matrix", *matrix, "transition-matrix JSON file")->required();
    cmd->add_flag("--bits", *bits, "report entropy in bits as well");
    cmd->callback([&, matrix, bits] {
      ojson params{{"bits", *bits}};
      ergolab::TransitionMatrix B = load_matrix(*matrix, params);
      ergolab::MixingReport mix = ergolab::validate_transition_matrix(B);
      ergolab::PerronData pd = ergolab::perron_eigendata(B);
      ergolab::MarkovMeasure m = ergolab::parry_measure(B);
      double h = ergolab::markov_entropy(m);
      ojson results{{"lambda", pd.lambda},
                    {"entropy", h},
                    {"left_eigenvector", pd.u},
                    {"right_eigenvector", pd.v},
                    {"measure", measure_results(m)},
                    {"mixing", ojson{{"irreducible", mix.irreducible},
                                     {"aperiodic", mix.aperiodic},
                                     {"period", mix.period}}}};
      if (*bits) results["entropy_bits"] = h / std::log(2.0);
      finish(ctx, "sft parry", params, results);
    });
  }

  {
    auto* cmd = sft->add_subcommand("sample", "seeded itinerary from the Parry measure");
    auto matrix = std::make_shared<std::string>();
    auto length = std::make_shared<i64>(100);
    cmd->add_option("--matrix", *matrix, "transition-matrix JSON file")->required();
    cmd->add_option("--length", *length, "itinerary length")->capture_default_str();
    cmd->callback([&, matrix, length] {
      ojson params{{"length", *length}};
      ergolab::TransitionMatrix B = load_matrix(*matrix, params);
      ergolab::Word w = ergolab::sample_itinerary(ergolab::parry_measure(B), *length, ctx.seed);
      finish(ctx, "sft sample", params,
             ojson{{"length", i64(w.size())}, {"word", ergolab::word_to_text(w)}});
    });
  }

  {
    auto* cmd = sft->add_subcommand("bridge", "exact-length connecting words");
    auto matrix = std::make_shared<std::string>();
    auto from = std::make_shared<int>(1);
    auto to = std::make_shared<int>(1);
    auto length = std::make_shared<i64>(-1);
    cmd->add_option("--matrix", *matrix, "transition-matrix JSON file")->required();
    cmd->add_option("--from", *from, "end symbol of the left block")->required();
    cmd->add_option("--to", *to, "start symbol of the right block")->required();
    cmd->add_option("--length", *length, "bridge length (omit: report the feasibility floor)");
    cmd->callback([&, matrix, from, to, length] {
      ojson params{{"from", *from}, {"to", *to}, {"length", *length}};
      ergolab::TransitionMatrix B = load_matrix(*matrix, params);
      ojson results{{"feasibility_floor", ergolab::bridge_feasibility_floor(B)},
                    {"shortest_connection", i64(ergolab::connecting_word(B, *from, *to).size())}};
      if (*length >= 0) {
        ergolab::Word w = ergolab::bridge_word(B, *from, *to, *length);
        results["bridge"] = ergolab::word_to_text(w);
      }
      finish(ctx, "sft bridge", params, results);
    });
  }

  {
    auto* cmd = sft->add_subcommand("recode-square", "2-block alphabet for the squared shift");
    auto matrix = std::make_shared<std::string>();
    cmd->add_option("--matrix", *matrix, "transition-matrix JSON file")->required();
    cmd->callback([&, matrix] {
      ojson params = ojson::object();
      ergolab::TransitionMatrix B = load_matrix(*matrix, params);
      ergolab::TwoBlockRecoding rec = ergolab::two_block_square_recoding(B);
      ojson blocks = ojson::array();
      for (auto [a, b] : rec.blocks) blocks.push_back(ojson::array({a, b}));
      finish(ctx, "sft recode-square", params,
             ojson{{"alphabet_size", rec.B2.size},
                   {"blocks", blocks},
                   {"matrix", ergolab::matrix_to_json(rec.B2)},
                   {"lambda", ergolab::perron_eigendata(rec.B2).lambda},
                   {"lambda_base", ergolab::perron_eigendata(B).lambda}});
    });
  }

  //-------------------------------------------------------------------------
  // toral
  //-------------------------------------------------------------------------
  auto* toral = app.add_subcommand("toral", "hyperbolic automorphisms and Markov partitions");
  toral->require_subcommand(1);

  {
    auto* cmd = toral->add_subcommand("validate-partition", "audit a partition file");
    auto part = std::make_shared<std::string>();
    cmd->add_option("--partition", *part, "partition JSON file")->required();
    cmd->callback([&, part] {
      ojson params = ojson::object();
      ergolab::MarkovPartition P = load_partition_file(*part, params);
      finish(ctx, "toral validate-partition", params,
             ojson{{"rectangles", i64(P.rects.size())},
                   {"matrix", ergolab::matrix_to_json(P.B)},
                   {"S_max", P.S_max},
                   {"U_max", P.U_max},
                   {"areas", ergolab::rectangle_areas(P)},
                   {"fixed_point_interior", P.fixed_point_interior},
                   {"lambda_u", P.T.lambda_u},
                   {"warnings", P.warnings}});
    });
  }

  {
    auto* cmd = toral->add_subcommand("encode", "itinerary of a point over a window");
    auto part = std::make_shared<std::string>();
    auto x = std::make_shared<double>(0), y = std::make_shared<double>(0);
    auto window = std::make_shared<i64>(20);
    auto margin = std::make_shared<double>(1e-9);
    cmd->add_option("--partition", *part, "partition JSON file")->required();
    cmd->add_option("--x", *x, "point x")->required();
    cmd->add_option("--y", *y, "point y")->required();
    cmd->add_option("--window", *window, "two-sided window half-length")->capture_default_str();
    cmd->add_option("--margin", *margin, "boundary clearance")->capture_default_str();
    cmd->callback([&, part, x, y, window, margin] {
      ojson params{{"x", *x}, {"y", *y}, {"window", *window}, {"margin", *margin}};
      ergolab::MarkovPartition P = load_partition_file(*part, params);
      ergolab::Itinerary it = ergolab::encode(P, {*x, *y}, -*window, *window, *margin);
      finish(ctx, "toral encode", params,
             ojson{{"word", ergolab::word_to_text(it.w)},
                   {"n_minus", it.n_minus},
                   {"n_plus", it.n_plus}});
    });
  }

  {
    auto* cmd = toral->add_subcommand("decode", "point pinned by an itinerary window");
    auto part = std::make_shared<std::string>();
    auto word = std::make_shared<std::string>();
    auto n_minus = std::make_shared<i64>(0);
    cmd->add_option("--partition", *part, "partition JSON file")->required();
    cmd->add_option("--word", *word, "itinerary (digit string or space-separated)")->required();
    cmd->add_option("--n-minus", *n_minus, "time index of the first symbol")
        ->capture_default_str();
    cmd->callback([&, part, word, n_minus] {
      ojson params{{"word", *word}, {"n_minus", *n_minus}};
      ergolab::MarkovPartition P = load_partition_file(*part, params);
      ergolab::Itinerary it;
      it.w = ergolab::word_from_text(*word);
      it.n_minus = *n_minus;
      it.n_plus = *n_minus + i64(it.w.size()) - 1;
      if (it.n_minus > 0 || it.n_plus < 0)
        ergolab::fail(ergolab::Err::BadInput, "window must contain time 0");
      ergolab::DecodedPoint d = ergolab::decode(P, it);
      finish(ctx, "toral decode", params,
             ojson{{"x", d.x.x},
                   {"y", d.x.y},
                   {"err_bound", d.err_bound},
                   {"err_s", d.err_s},
                   {"err_u", d.err_u}});
    });
  }

  //-------------------------------------------------------------------------
  // shadow
  //-------------------------------------------------------------------------
  auto* shadow = app.add_subcommand("shadow", "pseudo-orbit correction");
  shadow->require_subcommand(1);

  struct ShadowFlags {
    i64 a = 2, b = 1, c = 1, d = 1;
    double x0 = 0.2, y0 = 0.3;
    i64 length = 200;
    double delta = 1e-4;
    i64 single_jump = -1;  // >= 0: one jump at this index instead of noise
  };
  auto add_shadow_flags = [](CLI::App* cmd, const std::shared_ptr<ShadowFlags>& f) {
    cmd->add_option("--a", f->a, "matrix entry a")->capture_default_str();
    cmd->add_option("--b", f->b, "matrix entry b")->capture_default_str();
    cmd->add_option("--c", f->c, "matrix entry c")->capture_default_str();
    cmd->add_option("--d", f->d, "matrix entry d")->capture_default_str();
    cmd->add_option("--x0", f->x0, "orbit start x")->capture_default_str();
    cmd->add_option("--y0", f->y0, "orbit start y")->capture_default_str();
    cmd->add_option("--length", f->length, "number of steps")->capture_default_str();
    cmd->add_option("--delta", f->delta, "jump size bound")->capture_default_str();
    cmd->add_option("--single-jump", f->single_jump,
                    "place one jump at this index instead of per-step noise");
  };
  auto make_pseudo = [&ctx](const ShadowFlags& f, const ergolab::SurfaceMap& map) {
    if (f.single_jump >= 0)
      return ergolab::single_jump_orbit(map, {f.x0, f.y0}, int(f.length), int(f.single_jump),
                                        f.delta, ctx.seed);
    return ergolab::perturbed_orbit(map, {f.x0, f.y0}, int(f.length), f.delta, ctx.seed);
  };
  auto shadow_results = [](const ergolab::PseudoOrbit& po, const ergolab::ShadowResult& res) {
    return ojson{{"delta", po.delta},
                 {"tracking", res.tracking},
                 {"residual", res.residual},
                 {"shadow_constant", res.shadow_constant},
                 {"tracking_over_delta", po.delta > 0 ? res.tracking / po.delta : 0.0},
                 {"iterations", res.iterations},
                 {"converged", res.converged}};
  };

  {
    auto* cmd = shadow->add_subcommand("linear", "closed-form correction (integer matrix)");
    auto f = std::make_shared<ShadowFlags>();
    add_shadow_flags(cmd, f);
    cmd->callback([&, f] {
      ojson params{{"a", f->a}, {"b", f->b},       {"c", f->c},         {"d", f->d},
                   {"x0", f->x0}, {"y0", f->y0},   {"length", f->length}, {"delta", f->delta},
                   {"single_jump", f->single_jump}};
      ergolab::ToralAutomorphism T = ergolab::make_toral(f->a, f->b, f->c, f->d);
      ergolab::LinearToralMap map(T);
      ergolab::PseudoOrbit po = make_pseudo(*f, map);
      ergolab::ShadowResult res = ergolab::linear_shadow(T, po);
      finish(ctx, "shadow linear", params, shadow_results(po, res),
             ergolab::shadow_csv(po, &res));
    });
  }

  {
    auto* cmd = shadow->add_subcommand("newton", "Newton correction (any surface map)");
    auto f = std::make_shared<ShadowFlags>();
    add_shadow_flags(cmd, f);
    auto r0 = std::make_shared<double>(0.0), r1 = std::make_shared<double>(0.0);
    auto alpha = std::make_shared<double>(0.5);
    auto tol = std::make_shared<double>(1e-12);
    cmd->add_option("--r0", *r0, "slowdown core radius (0 = plain linear map)")
        ->capture_default_str();
    cmd->add_option("--r1", *r1, "gluing disk radius")->capture_default_str();
    cmd->add_option("--alpha", *alpha, "slowdown exponent")->capture_default_str();
    cmd->add_option("--tol", *tol, "residual tolerance")->capture_default_str();
    cmd->callback([&, f, r0, r1, alpha, tol] {
      ojson params{{"a", f->a}, {"b", f->b},       {"c", f->c},         {"d", f->d},
                   {"x0", f->x0}, {"y0", f->y0},   {"length", f->length}, {"delta", f->delta},
                   {"single_jump", f->single_jump}, {"r0", *r0},         {"r1", *r1},
                   {"alpha", *alpha},               {"tol", *tol}};
      std::unique_ptr<ergolab::SurfaceMap> map;
      if (*r0 > 0)
        map = std::make_unique<ergolab::KatokSurface>(
            katok_from_flags(f->a, f->b, f->c, f->d, *r0, *r1, *alpha));
      else
        map = std::make_unique<ergolab::LinearToralMap>(
            ergolab::make_toral(f->a, f->b, f->c, f->d));
      ergolab::PseudoOrbit po = make_pseudo(*f, *map);
      ergolab::ShadowResult res = ergolab::newton_shadow(*map, po, *tol);
      finish(ctx, "shadow newton", params, shadow_results(po, res),
             ergolab::shadow_csv(po, &res));
    });
  }

  //-------------------------------------------------------------------------
  // saturate
  //-------------------------------------------------------------------------
  auto* sat = app.add_subcommand("saturate", "quasi-orbit schedules and assembly");
  sat->require_subcommand(1);

  {
    auto* cmd = sat->add_subcommand("schedule", "integer schedule from a level file");
    auto levels_path = std::make_shared<std::string>();
    cmd->add_option("--levels", *levels_path, "level-spec JSON file")->required();
    cmd->callback([&, levels_path] {
      ojson params = ojson::object();
      int K = 0;
      auto levels = load_levels(*levels_path, K, params);
      ergolab::Schedule sch = ergolab::build_schedule(levels, K);
      finish(ctx, "saturate schedule", params,
             ojson::parse(ergolab::schedule_to_json(sch).dump()));
    });
  }

  {
    auto* cmd = sat->add_subcommand("assemble", "pools, bridges, and the full word");
    auto levels_path = std::make_shared<std::string>();
    auto pool_size = std::make_shared<int>(8);
    auto accept_floor = std::make_shared<double>(1e-4);
    auto imax = std::make_shared<int>(64);
    cmd->add_option("--levels", *levels_path, "level-spec JSON file")->required();
    cmd->add_option("--pool-size", *pool_size, "words per segment pool")->capture_default_str();
    cmd->add_option("--accept-floor", *accept_floor, "minimum pool acceptance rate")
        ->capture_default_str();
    cmd->add_option("--imax", *imax, "test-family truncation")->capture_default_str();
    cmd->callback([&, levels_path, pool_size, accept_floor, imax] {
      ojson params{{"pool_size", *pool_size}, {"accept_floor", *accept_floor}, {"imax", *imax}};
      int K = 0;
      auto levels = load_levels(*levels_path, K, params);
      ergolab::Schedule sch = ergolab::build_schedule(levels, K);
      const ergolab::TransitionMatrix& B = levels.front().components.front().B;
      ergolab::TestFamily F = ergolab::build_test_family_shift(B, *imax);
      std::vector<std::vector<ergolab::SegmentPool>> pools;
      ojson pool_rows = ojson::array();
      for (const ergolab::LevelSpec& L : levels) {
        std::vector<ergolab::SegmentPool> row;
        for (std::size_t j = 0; j < L.components.size(); ++j) {
          row.push_back(ergolab::build_segment_pool(L.components[j], F, L.seg_len[j], L.k,
                                                    *pool_size, pool_seed(ctx.seed, L.k, j),
                                                    *accept_floor));
          pool_rows.push_back(ojson{{"k", L.k},
                                    {"j", i64(j + 1)},
                                    {"anchor", row.back().anchor},
                                    {"acceptance", row.back().acceptance},
                                    {"attempts", row.back().attempts}});
        }
        pools.push_back(std::move(row));
      }
      ergolab::Assembly asmb = ergolab::assemble_symbolic(sch, pools, B);
      ojson results{{"total_len", i64(asmb.word.size())},
                    {"bridge_symbols", asmb.bridge_symbols},
                    {"segments", i64(asmb.segments.size())},
                    {"pools", pool_rows}};
      finish(ctx, "saturate assemble", params, results, ergolab::word_to_text(asmb.word) + "\n");
    });
  }

  {
    auto* cmd = sat->add_subcommand("track", "checkpointed tracking verification");
    auto levels_path = std::make_shared<std::string>();
    auto word_path = std::make_shared<std::string>();
    auto imax = std::make_shared<int>(64);
    cmd->add_option("--levels", *levels_path, "level-spec JSON file")->required();
    cmd->add_option("--word", *word_path, "assembled word (text file)")->required();
    cmd->add_option("--imax", *imax, "test-family truncation")->capture_default_str();
    cmd->callback([&, levels_path, word_path, imax] {
      ojson params{{"imax", *imax}};
      int K = 0;
      auto levels = load_levels(*levels_path, K, params);
      params["word"] = *word_path;
      std::string word_text = ergolab::read_text_file(*word_path);
      params["word_hash"] = hex64(fnv1a64(word_text));
      ergolab::Word w = ergolab::word_from_text(word_text);
      ergolab::Schedule sch = ergolab::build_schedule(levels, K);
      const ergolab::TransitionMatrix& B = levels.front().components.front().B;
      ergolab::TestFamily F = ergolab::build_test_family_shift(B, *imax);
      ergolab::TrackingReport rep = ergolab::verify_tracking(w, sch, level_mixtures(levels), F);
      ojson rows = ojson::array();
      for (const ergolab::Checkpoint& c : rep.rows)
        rows.push_back(ojson{{"kind", c.kind},
                             {"k", c.k},
                             {"i", c.i},
                             {"n", c.n},
                             {"pos", c.pos},
                             {"D", c.D},
                             {"threshold", c.threshold},
                             {"pass", c.pass}});
      finish(ctx, "saturate track", params,
             ojson{{"all_pass", rep.all_pass},
                   {"worst_margin", rep.worst_margin},
                   {"checkpoints", rows}},
             ergolab::tracking_csv(rep));
    });
  }

  {
    auto* cmd = sat->add_subcommand("certificate", "entropy lower-bound arithmetic");
    auto levels_path = std::make_shared<std::string>();
    auto k_single = std::make_shared<int>(0);
    auto h_single = std::make_shared<double>(0);
    cmd->add_option("--levels", *levels_path, "level-spec JSON file (component entropies used)");
    cmd->add_option("--k", *k_single, "single-level closed form: level index");
    cmd->add_option("--entropy", *h_single, "single-level closed form: entropy");
    cmd->callback([&, levels_path, k_single, h_single] {
      ojson params = ojson::object();
      ojson results = ojson::object();
      if (*k_single > 0) {
        params["k"] = *k_single;
        params["entropy"] = *h_single;
        results["closed_form"] = ergolab::certificate_closed_form(*k_single, *h_single);
      }
      if (!levels_path->empty()) {
        int K = 0;
        auto levels = load_levels(*levels_path, K, params);
        ergolab::Schedule sch = ergolab::build_schedule(levels, K);
        std::vector<std::vector<double>> h;
        for (const ergolab::LevelSpec& L : levels) {
          std::vector<double> row;
          for (const ergolab::MarkovMeasure& m : L.components)
            row.push_back(ergolab::markov_entropy(m));
          h.push_back(std::move(row));
        }
        ojson rows = ojson::array();
        for (const ergolab::CertificateRow& r : ergolab::entropy_lower_certificate(sch, h))
          rows.push_back(ojson{{"k", r.k},
                               {"closed_form", r.closed_form},
                               {"raw_count", r.raw_count},
                               {"informative", r.informative}});
        results["levels"] = rows;
      }
      if (results.empty())
        ergolab::fail(ergolab::Err::BadInput, "need --levels or --k/--entropy");
      finish(ctx, "saturate certificate", params, results);
    });
  }

  {
    auto* cmd = sat->add_subcommand("katok-entropy", "covering-number entropy estimate");
    auto matrix = std::make_shared<std::string>();
    auto n = std::make_shared<int>(12);
    auto eps = std::make_shared<double>(1.0);
    auto delta = std::make_shared<double>(0.1);
    auto samples = std::make_shared<int>(10000);
    auto budget = std::make_shared<i64>(100000000);
    cmd->add_option("--matrix", *matrix, "transition-matrix JSON file")->required();
    cmd->add_option("--n", *n, "window length")->capture_default_str();
    cmd->add_option("--eps", *eps, "ball radius 2^-m scale")->capture_default_str();
    cmd->add_option("--delta", *delta, "mass discard")->capture_default_str();
    cmd->add_option("--samples", *samples, "sampled itineraries")->capture_default_str();
    cmd->add_option("--budget", *budget, "symbol budget")->capture_default_str();
    cmd->callback([&, matrix, n, eps, delta, samples, budget] {
      ojson params{{"n", *n}, {"eps", *eps}, {"delta", *delta}, {"samples", *samples},
                   {"budget", *budget}};
      ergolab::TransitionMatrix B = load_matrix(*matrix, params);
      ergolab::MarkovMeasure m = ergolab::parry_measure(B);
      ergolab::KatokEntropyEstimate est =
          ergolab::katok_entropy_symbolic(m, *n, *eps, *delta, *samples, ctx.seed, *budget);
      finish(ctx, "saturate katok-entropy", params,
             ojson{{"estimate", est.estimate},
                   {"cover_count", est.cover_count},
                   {"sep_count", est.sep_count},
                   {"sep2_count", est.sep2_count},
                   {"kept_mass", est.kept_mass},
                   {"window", est.window},
                   {"reference_entropy", ergolab::markov_entropy(m)}});
    });
  }

  //-------------------------------------------------------------------------
  // katokmap
  //-------------------------------------------------------------------------
  auto* km = app.add_subcommand("katokmap", "slowed-down automorphism diagnostics");
  km->require_subcommand(1);

  struct KmFlags {
    i64 a = 2, b = 1, c = 1, d = 1;
    double r0 = 0.05, r1 = 0.15, alpha = 0.5;
  };
  auto add_km_flags = [](CLI::App* cmd, const std::shared_ptr<KmFlags>& f) {
    cmd->add_option("--a", f->a, "matrix entry a")->capture_default_str();
    cmd->add_option("--b", f->b, "matrix entry b")->capture_default_str();
    cmd->add_option("--c", f->c, "matrix entry c")->capture_default_str();
    cmd->add_option("--d", f->d, "matrix entry d")->capture_default_str();
    cmd->add_option("--r0", f->r0, "slowdown core radius")->capture_default_str();
    cmd->add_option("--r1", f->r1, "gluing disk radius")->capture_default_str();
    cmd->add_option("--alpha", f->alpha, "slowdown exponent")->capture_default_str();
  };
  auto km_params = [](const KmFlags& f) {
    return ojson{{"a", f.a},   {"b", f.b},   {"c", f.c},         {"d", f.d},
                 {"r0", f.r0}, {"r1", f.r1}, {"alpha", f.alpha}};
  };

  {
    auto* cmd = km->add_subcommand("orbit", "orbit series with running top exponent");
    auto f = std::make_shared<KmFlags>();
    add_km_flags(cmd, f);
    auto x = std::make_shared<double>(0.2), y = std::make_shared<double>(0.3);
    auto T = std::make_shared<int>(100);
    cmd->add_option("--x", *x, "start x")->capture_default_str();
    cmd->add_option("--y", *y, "start y")->capture_default_str();
    cmd->add_option("--T", *T, "steps")->capture_default_str();
    cmd->callback([&, f, x, y, T] {
      ojson params = km_params(*f);
      params["x"] = *x;
      params["y"] = *y;
      params["T"] = *T;
      ergolab::KatokMap m = katok_from_flags(f->a, f->b, f->c, f->d, f->r0, f->r1, f->alpha);
      std::vector<ergolab::OrbitRow> rows = ergolab::orbit_series(m, {*x, *y}, *T);
      i64 in_disk = 0;
      for (const ergolab::OrbitRow& r : rows) in_disk += r.in_disk ? 1 : 0;
      finish(ctx, "katokmap orbit", params,
             ojson{{"steps", i64(rows.size()) - 1},
                   {"in_disk_count", in_disk},
                   {"chi_plus_final", rows.back().chi_plus_run},
                   {"slowdown_time_integral", ergolab::slowdown_time_integral(m)}},
             ergolab::orbit_csv(rows));
    });
  }

  {
    auto* cmd = km->add_subcommand("lyapunov", "finite-time exponents by QR accumulation");
    auto f = std::make_shared<KmFlags>();
    add_km_flags(cmd, f);
    auto x = std::make_shared<double>(0.2), y = std::make_shared<double>(0.3);
    auto T = std::make_shared<int>(200);
    auto linear = std::make_shared<bool>(false);
    cmd->add_option("--x", *x, "start x")->capture_default_str();
    cmd->add_option("--y", *y, "start y")->capture_default_str();
    cmd->add_option("--T", *T, "steps")->capture_default_str();
    cmd->add_flag("--linear", *linear, "use the plain linear map instead");
    cmd->callback([&, f, x, y, T, linear] {
      ojson params = km_params(*f);
      params["x"] = *x;
      params["y"] = *y;
      params["T"] = *T;
      params["linear"] = *linear;
      std::unique_ptr<ergolab::SurfaceMap> map;
      if (*linear)
        map = std::make_unique<ergolab::LinearToralMap>(
            ergolab::make_toral(f->a, f->b, f->c, f->d));
      else
        map = std::make_unique<ergolab::KatokSurface>(
            katok_from_flags(f->a, f->b, f->c, f->d, f->r0, f->r1, f->alpha));
      double cond_log = 0;
      auto [chi_plus, chi_minus] = ergolab::finite_lyapunov(*map, {*x, *y}, *T, &cond_log);
      finish(ctx, "katokmap lyapunov", params,
             ojson{{"chi_plus", chi_plus},
                   {"chi_minus", chi_minus},
                   {"sum", chi_plus + chi_minus},
                   {"cond_log", cond_log},
                   {"T", *T}});
    });
  }

  {
    auto* cmd = km->add_subcommand("pesin-check", "finite-window hyperbolic-block certificate");
    auto f = std::make_shared<KmFlags>();
    add_km_flags(cmd, f);
    auto x = std::make_shared<double>(0.2), y = std::make_shared<double>(0.3);
    auto T = std::make_shared<int>(40);
    auto beta1 = std::make_shared<double>(0.0), beta2 = std::make_shared<double>(0.0);
    auto eps = std::make_shared<double>(0.01);
    auto burn_in = std::make_shared<int>(30);
    auto linear = std::make_shared<bool>(false);
    cmd->add_option("--x", *x, "start x")->capture_default_str();
    cmd->add_option("--y", *y, "start y")->capture_default_str();
    cmd->add_option("--T", *T, "window")->capture_default_str();
    cmd->add_option("--beta1", *beta1, "stable rate (0: log lambda_u)")->capture_default_str();
    cmd->add_option("--beta2", *beta2, "unstable rate (0: log lambda_u)")->capture_default_str();
    cmd->add_option("--eps", *eps, "block tolerance")->capture_default_str();
    cmd->add_option("--burn-in", *burn_in, "direction-estimation overshoot")
        ->capture_default_str();
    cmd->add_flag("--linear", *linear, "use the plain linear map instead");
    cmd->callback([&, f, x, y, T, beta1, beta2, eps, burn_in, linear] {
      ojson params = km_params(*f);
      params["x"] = *x;
      params["y"] = *y;
      params["T"] = *T;
      params["beta1"] = *beta1;
      params["beta2"] = *beta2;
      params["eps"] = *eps;
      params["burn_in"] = *burn_in;
      params["linear"] = *linear;
      std::unique_ptr<ergolab::SurfaceMap> map;
      double default_rate;
      if (*linear) {
        ergolab::ToralAutomorphism Tm = ergolab::make_toral(f->a, f->b, f->c, f->d);
        default_rate = std::log(Tm.lambda_u);
        map = std::make_unique<ergolab::LinearToralMap>(Tm);
      } else {
        ergolab::KatokMap m = katok_from_flags(f->a, f->b, f->c, f->d, f->r0, f->r1, f->alpha);
        default_rate = m.log_lambda;
        map = std::make_unique<ergolab::KatokSurface>(m);
      }
      double b1 = *beta1 > 0 ? *beta1 : default_rate;
      double b2 = *beta2 > 0 ? *beta2 : default_rate;
      ergolab::BlockCheckReport rep =
          ergolab::pesin_block_check(*map, {*x, *y}, *T, b1, b2, *eps, *burn_in);
      finish(ctx, "katokmap pesin-check", params,
             ojson{{"window", rep.window},
                   {"min_k", rep.min_k},
                   {"worst_a", rep.worst_a},
                   {"worst_b", rep.worst_b},
                   {"worst_c", rep.worst_c},
                   {"min_angle", rep.min_angle},
                   {"resolved", rep.resolved}});
    });
  }

  {
    auto* cmd = km->add_subcommand("frequency", "exact visit-frequency certificate");
    auto matrix = std::make_shared<std::string>();
    auto length = std::make_shared<i64>(10000);
    auto symbol = std::make_shared<int>(1);
    auto p_num = std::make_shared<i64>(0), p_den = std::make_shared<i64>(1);
    auto g_num = std::make_shared<i64>(1), g_den = std::make_shared<i64>(20);
    auto N = std::make_shared<i64>(50);
    auto n_cap = std::make_shared<i64>(200);
    cmd->add_option("--matrix", *matrix, "transition-matrix JSON file")->required();
    cmd->add_option("--length", *length, "itinerary window length")->capture_default_str();
    cmd->add_option("--symbol", *symbol, "visit symbol")->capture_default_str();
    cmd->add_option("--p-num", *p_num, "frequency numerator (0: rounded Parry mass)")
        ->capture_default_str();
    cmd->add_option("--p-den", *p_den, "frequency denominator")->capture_default_str();
    cmd->add_option("--gamma-num", *g_num, "slack numerator")->capture_default_str();
    cmd->add_option("--gamma-den", *g_den, "slack denominator")->capture_default_str();
    cmd->add_option("--N", *N, "additive constant to certify")->capture_default_str();
    cmd->add_option("--n-cap", *n_cap, "search cap for the minimal constant")
        ->capture_default_str();
    cmd->callback([&, matrix, length, symbol, p_num, p_den, g_num, g_den, N, n_cap] {
      ojson params{{"length", *length}, {"symbol", *symbol}, {"p_num", *p_num},
                   {"p_den", *p_den},   {"gamma_num", *g_num}, {"gamma_den", *g_den},
                   {"N", *N},           {"n_cap", *n_cap}};
      ergolab::TransitionMatrix B = load_matrix(*matrix, params);
      ergolab::MarkovMeasure m = ergolab::parry_measure(B);
      if (*symbol < 1 || *symbol > B.size)
        ergolab::fail(ergolab::Err::SymbolOutOfRange, "visit symbol out of range");
      ergolab::Rat p(*p_num, *p_den);
      if (*p_num == 0) {
        // rationalize the Parry mass with a fixed denominator
        const i64 den = 1000000;
        p = ergolab::Rat(i64(m.p[std::size_t(*symbol) - 1] * double(den) + 0.5), den);
      }
      ergolab::Word w = ergolab::sample_itinerary(m, *length, ctx.seed);
      std::vector<char> visits(w.size(), 0);
      for (std::size_t i = 0; i < w.size(); ++i) visits[i] = w[i] == *symbol ? 1 : 0;
      int origin = int(*length / 2);
      bool pass = ergolab::frequency_check(visits, origin, *N, p, ergolab::Rat(*g_num, *g_den));
      i64 min_n =
          ergolab::frequency_min_n(visits, origin, p, ergolab::Rat(*g_num, *g_den), *n_cap);
      finish(ctx, "katokmap frequency", params,
             ojson{{"pass", pass},
                   {"min_N", min_n},
                   {"p", ojson::array({p.num, p.den})},
                   {"visit_fraction",
                    double(std::count(visits.begin(), visits.end(), char(1))) /
                        double(visits.size())}});
    });
  }

  //-------------------------------------------------------------------------
  // Dispatch.
  //-------------------------------------------------------------------------
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ergolab::ErgoError& e) {
    ojson err{{"error",
               ojson{{"kind", ergolab::err_name(e.code())},
                     {"exit_code", e.exit_code()},
                     {"message", e.what()}}}};
    std::cerr << err.dump(2) << '\n';
    exit_code = e.exit_code();
  } catch (const std::exception& e) {
    ojson err{{"error", ojson{{"kind", "Internal"}, {"exit_code", 2}, {"message", e.what()}}}};
    std::cerr << err.dump(2) << '\n';
    exit_code = 2;
  }

  const auto t_end = std::chrono::steady_clock::now();
  std::cerr << "runtime_ms="
            << std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count()
            << '\n';
  return exit_code;
}
