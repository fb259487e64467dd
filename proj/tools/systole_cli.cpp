// systole: command-line front end over the C interface of libsystole.
//
// Exit codes: 0 success, 1 a mathematical verification failed, 2 bad input.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../src/common/json_io.hpp"
#include "systole/systole.h"

namespace {

using systole::io::Json;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitInput = 2;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(int status) {
  switch (status) {
    case SYSTOLE_E_NUMERICAL:
    case SYSTOLE_E_RECONSTRUCTION:
    case SYSTOLE_E_INTERNAL:
      return kExitVerification;
    default:
      return kExitInput;
  }
}

void check(int status) {
  if (status != SYSTOLE_OK)
    throw Failure{exit_code_for(status),
                  std::string(systole_status_name(status)) + ": " + systole_last_error()};
}

Json take_json(char* s) {
  Json j = Json::parse(s);
  systole_string_free(s);
  return j;
}

struct Global {
  std::string mode = "exact";
  std::uint64_t seed = 1;
  std::string out;
  std::string subcommand;
  std::vector<std::string> inputs;

  int c_mode() const { return mode == "exact" ? SYSTOLE_MODE_EXACT : SYSTOLE_MODE_FLOAT; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitInput, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Failure{kExitInput, "cannot write " + path};
  os << text;
}

// RAII owner for a gram handle.
struct Gram {
  systole_gram* h = nullptr;
  Gram() = default;
  Gram(const Gram&) = delete;
  Gram& operator=(const Gram&) = delete;
  ~Gram() { systole_gram_free(h); }
};

void load_gram(const std::string& path, const std::string& known, int mode, Global& g, Gram& out) {
  if (!known.empty()) {
    const auto colon = known.find(':');
    const std::string name = known.substr(0, colon);
    int dim = 0;
    if (colon != std::string::npos) {
      try {
        dim = std::stoi(known.substr(colon + 1));
      } catch (const std::exception&) {
        throw Failure{kExitInput, "bad dimension in --known " + known};
      }
    }
    g.inputs.push_back("known:" + known);
    check(systole_gram_known(name.c_str(), dim, &out.h));
    return;
  }
  if (path.empty()) throw Failure{kExitInput, "one of --gram FILE or --known NAME is required"};
  g.inputs.push_back(path);
  const std::string text = read_file(path);
  const int status = systole_gram_from_json(text.c_str(), mode == SYSTOLE_MODE_EXACT, &out.h);
  if (status != SYSTOLE_OK) throw Failure{kExitInput, path + ": " + systole_last_error()};
}

Json manifest(const Global& g) {
  Json m;
  m["subcommand"] = g.subcommand;
  Json in = Json::array();
  for (const auto& s : g.inputs) in.push_back(s);
  m["inputs"] = in;
  m["seed"] = g.seed;
  m["mode"] = g.mode;
  m["output"] = g.out.empty() ? "-" : g.out;
  return m;
}

int finish(const Global& g, Json result, bool pass) {
  Json report;
  report["tool"] = "systole";
  report["version"] = systole_version();
  report["seed"] = g.seed;
  report["mode"] = g.mode;
  report["manifest"] = manifest(g);
  report["pass"] = pass;
  report["result"] = std::move(result);
  write_text(g.out, systole::io::dump(report));
  return pass ? kExitOk : kExitVerification;
}

std::vector<std::int64_t> parse_classes(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    const auto comma = pair.find(',');
    if (comma == std::string::npos) throw Failure{kExitInput, "class '" + pair + "' must be a,b"};
    try {
      std::size_t used = 0;
      const std::string a = pair.substr(0, comma), b = pair.substr(comma + 1);
      out.push_back(std::stoll(a, &used));
      if (used != a.size()) throw std::invalid_argument(a);
      out.push_back(std::stoll(b, &used));
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::exception&) {
      throw Failure{kExitInput, "class '" + pair + "' must be two integers"};
    }
  }
  if (out.empty()) throw Failure{kExitInput, "--classes is empty"};
  return out;
}

std::vector<double> parse_ps(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "infinity") {
      out.push_back(HUGE_VAL);
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure{kExitInput, "bad p value '" + item + "'"};
    }
  }
  return out;
}

std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) {
      const int n = std::stoi(text);
      return {n, n};
    }
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw Failure{kExitInput, "grid must look like 128x128"};
  }
}

unsigned parse_checks(const std::string& text) {
  unsigned mask = 0;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") mask |= SYSTOLE_CHECK_ALL;
    else if (item == "submersion") mask |= SYSTOLE_CHECK_SUBMERSION;
    else if (item == "minimal") mask |= SYSTOLE_CHECK_MINIMAL;
    else if (item == "harmonic") mask |= SYSTOLE_CHECK_HARMONIC;
    else if (item == "hebda") mask |= SYSTOLE_CHECK_HEBDA;
    else throw Failure{kExitInput, "unknown check '" + item + "' (all, submersion, minimal, harmonic, hebda)"};
  }
  return mask;
}

struct GramArgs {
  std::string path;
  std::string known;
};

void add_gram_options(CLI::App* sub, GramArgs& args, const char* flag = "--gram") {
  sub->add_option(flag, args.path, "Gram JSON {\"dim\": b, \"gram\": [[...]]}; numbers or strings like \"1/2\"");
  sub->add_option("--known", args.known, "built-in lattice: hexagonal, fcc, identity:N");
}

const char* kSchemaHelp = R"(Schemas:
  Gram file   {"dim": b, "gram": [[g11, ..., g1b], ..., [gb1, ..., gbb]]}
              entries are JSON numbers or strings ("1/2", "0.25", "1e-3");
              in exact mode every entry is read as a rational.
  Reports     {"tool", "version", "seed", "mode", "manifest", "pass", "result"}
              doubles printed with 17 significant digits.
  Exit codes  0 success, 1 failed verification, 2 input error.
  Threads     SYSTOLE_THREADS sets optimizer worker threads.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice and discrete-geometry toolkit for optimal systolic inequalities"};
  app.footer(kSchemaHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(systole_version()));

  Global g;
  app.add_option("--mode", g.mode, "arithmetic: exact or float")->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--seed", g.seed, "random seed recorded in every report");
  app.add_option("--out", g.out, "report path (default stdout)");

  GramArgs svp_args, dual_args, bm_args, perfect_args, torus_args, hodge_args;

  auto* svp = app.add_subcommand("svp", "shortest vectors of a lattice");
  add_gram_options(svp, svp_args);

  auto* dual = app.add_subcommand("dual", "dual Gram matrix and its reduced form");
  add_gram_options(dual, dual_args);

  auto* bm = app.add_subcommand("bm", "lambda1(L) lambda1(L*) with the certificate against known constants");
  add_gram_options(bm, bm_args);

  struct OptArgs {
    int dim = 2;
    systole_optimizer_config config{};
  } opt_args;
  systole_optimizer_config_default(&opt_args.config);
  auto add_optimizer_options = [&](CLI::App* sub) {
    sub->add_option("--dim", opt_args.dim, "lattice rank b (1..6)")->required();
    sub->add_option("--restarts", opt_args.config.restarts, "random restarts");
    sub->add_option("--iters", opt_args.config.max_iters, "iterations per restart");
    sub->add_option("--step", opt_args.config.initial_step, "initial relative step");
    sub->add_option("--decay", opt_args.config.step_decay, "step decay in (0,1)");
    sub->add_option("--reduce-every", opt_args.config.reduce_every, "basis reduction period");
    sub->add_option("--stall", opt_args.config.stall_window, "rejections before the step decays");
  };
  auto* bm_opt = bm->add_subcommand("optimize", "hill-climb the product over unit-determinant Grams");
  add_optimizer_options(bm_opt);
  auto* optimize = app.add_subcommand("optimize", "same as 'bm optimize'");
  add_optimizer_options(optimize);

  auto* perfect = app.add_subcommand("perfect", "dual-perfection rank test");
  add_gram_options(perfect, perfect_args);

  auto* torus = app.add_subcommand("torus", "flat-torus systoles");
  torus->require_subcommand(1);
  auto* torus_verify = torus->add_subcommand("verify", "systole report, main inequality and identities");
  add_gram_options(torus_verify, torus_args);

  struct HodgeArgs {
    int n = 32;
    std::string phi = "0";
    std::string classes = "1,0;0,1";
    std::string ps = "2,4,inf";
    std::string csv;
    std::string off;
  } hodge_opts;
  auto* hodge = app.add_subcommand("hodge", "discrete Hodge theory on a meshed 2-torus");
  hodge->require_subcommand(1);
  auto* hodge_run = hodge->add_subcommand("run", "norm tables, Loewner check and conformal systole");
  add_gram_options(hodge_run, hodge_args, "--lattice");
  hodge_run->add_option("--n", hodge_opts.n, "grid resolution N (>= 8)");
  hodge_run->add_option("--phi", hodge_opts.phi, "conformal factor phi(x, y) on [0,1)^2");
  hodge_run->add_option("--classes", hodge_opts.classes, "cohomology classes \"a,b;c,d\"");
  hodge_run->add_option("--ps", hodge_opts.ps, "ascending p list containing 2, e.g. 1,2,4,inf");
  hodge_run->add_option("--csv", hodge_opts.csv, "write the norm table CSV here");
  hodge_run->add_option("--off", hodge_opts.off, "export the mesh as OFF");

  struct ConstructArgs {
    std::string rho = "1";
    std::string c = "0";
    double l = 1.0;
    std::string grid = "128x128";
    std::string checks = "all";
  } construct_opts;
  auto* construct = app.add_subcommand("construct", "extremal metric from a fiber family");
  construct->require_subcommand(1);
  auto* construct_run = construct->add_subcommand("run", "Moser lift, assembly and checks");
  construct_run->add_option("--rho", construct_opts.rho, "fiber density rho(u, v) > 0");
  construct_run->add_option("--c", construct_opts.c, "free function c(u)");
  construct_run->add_option("--l", construct_opts.l, "base circle length");
  construct_run->add_option("--grid", construct_opts.grid, "MxK");
  construct_run->add_option("--checks", construct_opts.checks, "all or any of submersion,minimal,harmonic,hebda");

  for (auto* sub : {svp, dual, bm, bm_opt, optimize, perfect, torus, torus_verify, hodge, hodge_run, construct,
                    construct_run})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    const int mode = g.c_mode();
    if (*svp) {
      g.subcommand = "svp";
      Gram gram;
      load_gram(svp_args.path, svp_args.known, mode, g, gram);
      char* s = nullptr;
      check(systole_shortest_vectors_json(gram.h, mode, &s));
      return finish(g, take_json(s), true);
    }
    if (*dual) {
      g.subcommand = "dual";
      Gram gram, inv;
      load_gram(dual_args.path, dual_args.known, mode, g, gram);
      check(systole_dual_gram(gram.h, &inv.h));
      char* s = nullptr;
      check(systole_gram_to_json(inv.h, &s));
      Json r;
      r["dual"] = take_json(s);
      check(systole_reduce_basis_json(inv.h, &s));
      r["dual_reduced"] = take_json(s);
      return finish(g, r, true);
    }
    if (*bm_opt || *optimize) {
      g.subcommand = *bm_opt ? "bm optimize" : "optimize";
      opt_args.config.seed = g.seed;
      char* s = nullptr;
      check(systole_optimize_json(opt_args.dim, &opt_args.config, &s));
      Json r = take_json(s);
      const bool pass = !r.contains("bounds") || r["bounds"]["pass"].get<bool>();
      return finish(g, r, pass);
    }
    if (*bm) {
      g.subcommand = "bm";
      Gram gram;
      load_gram(bm_args.path, bm_args.known, mode, g, gram);
      char* s = nullptr;
      check(systole_bm_product_json(gram.h, mode, &s));
      Json r = take_json(s);
      bool pass = r["certificate"]["verdict"] != "exceeds-known";
      if (r.contains("bounds")) pass = pass && r["bounds"]["pass"].get<bool>();
      return finish(g, r, pass);
    }
    if (*perfect) {
      g.subcommand = "perfect";
      Gram gram;
      load_gram(perfect_args.path, perfect_args.known, mode, g, gram);
      char* s = nullptr;
      check(systole_dual_perfect_json(gram.h, mode, &s));
      return finish(g, take_json(s), true);
    }
    if (*torus_verify) {
      g.subcommand = "torus verify";
      Gram gram;
      load_gram(torus_args.path, torus_args.known, mode, g, gram);
      char* s = nullptr;
      check(systole_torus_verify_json(gram.h, mode, &s));
      Json r = take_json(s);
      const bool pass = r["pass"].get<bool>();
      return finish(g, r, pass);
    }
    if (*hodge_run) {
      g.subcommand = "hodge run";
      Gram gram;
      if (hodge_args.path.empty() && hodge_args.known.empty()) hodge_args.known = "identity:2";
      load_gram(hodge_args.path, hodge_args.known, mode, g, gram);
      const auto classes = parse_classes(hodge_opts.classes);
      const auto ps = parse_ps(hodge_opts.ps);
      struct Mesh {
        systole_mesh* h = nullptr;
        ~Mesh() { systole_mesh_free(h); }
      } mesh;
      check(systole_mesh_create(gram.h, hodge_opts.n, hodge_opts.phi.c_str(), &mesh.h));
      char* js = nullptr;
      char* csv = nullptr;
      check(systole_hodge_report(mesh.h, classes.data(), static_cast<int>(classes.size() / 2), ps.data(),
                                 static_cast<int>(ps.size()), &js, &csv));
      const std::string table(csv);
      systole_string_free(csv);
      Json r = take_json(js);
      r["phi"] = hodge_opts.phi;
      if (!hodge_opts.csv.empty()) write_text(hodge_opts.csv, table);
      if (!hodge_opts.off.empty()) check(systole_mesh_write_off(mesh.h, hodge_opts.off.c_str()));
      const bool pass = r["pass"].get<bool>();
      return finish(g, r, pass);
    }
    if (*construct_run) {
      g.subcommand = "construct run";
      const auto [m, k] = parse_grid(construct_opts.grid);
      g.inputs.push_back("rho=" + construct_opts.rho);
      g.inputs.push_back("c=" + construct_opts.c);
      char* s = nullptr;
      check(systole_construct_json(construct_opts.rho.c_str(), construct_opts.c.c_str(), construct_opts.l, m, k,
                                   parse_checks(construct_opts.checks), &s));
      Json r = take_json(s);
      const bool pass = r["pass"].get<bool>();
      return finish(g, r, pass);
    }
    std::cerr << app.help();
    return kExitInput;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerification;
  }
}
