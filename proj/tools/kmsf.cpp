// Command-line front end. Talks to the library only through kmsf.h.

#include "kmsf/kmsf.h"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUndecided = 2;

struct Global {
  bool exact = false;
  double tol = 0.0;
  std::uint64_t seed = 1;
  std::string format = "text";
};

int report_error(kmsf_status s) {
  std::cerr << "error: " << kmsf_status_name(s) << ": " << kmsf_last_error() << "\n";
  return kExitError;
}

struct FamilyDeleter {
  void operator()(kmsf_family* f) const { kmsf_family_free(f); }
};
using FamilyPtr = std::unique_ptr<kmsf_family, FamilyDeleter>;

kmsf_status load(const std::string& path, FamilyPtr& out) {
  kmsf_family* f = nullptr;
  const kmsf_status s = kmsf_family_load(path.c_str(), &f);
  out.reset(f);
  return s;
}

int emit(kmsf_status s, char* text, int undecided) {
  if (s != KMSF_OK) return report_error(s);
  std::fputs(text, stdout);
  kmsf_string_free(text);
  return undecided ? kExitUndecided : kExitOk;
}

kmsf_format parse_format(const std::string& f) {
  if (f == "json-lines" || f == "jsonl" || f == "json") return KMSF_FORMAT_JSON_LINES;
  if (f == "csv") return KMSF_FORMAT_CSV;
  return KMSF_FORMAT_TEXT;
}

kmsf_mode parse_mode(const std::string& m) {
  if (m == "detour") return KMSF_MODE_DETOUR;
  if (m == "exit") return KMSF_MODE_EXIT;
  return KMSF_MODE_BOTH;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor types of dissipative KMS weights on graph algebras"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kmsf_version()));

  Global g;
  app.add_flag("--exact", g.exact, "Exact gcd arithmetic (needs exact potentials)");
  app.add_option("--tol", g.tol, "Tolerance for Green sums and exit ratios");
  app.add_option("--seed", g.seed, "Seed for sampling");
  app.add_option("--format", g.format, "Report format for classify")
      ->check(CLI::IsMember({"text", "json-lines", "jsonl", "json", "csv"}));

  std::string graph, beta = "1";

  auto* classify = app.add_subcommand("classify", "Factor type and S-invariant at beta");
  std::string mode = "both";
  std::size_t span = 0, mulen = 0;
  std::vector<std::size_t> horizons;
  classify->add_option("--graph", graph, "Graph file")->required();
  classify->add_option("--beta", beta, "Inverse temperature")->required();
  classify->add_option("--mode", mode, "detour, exit or both")->check(CLI::IsMember({"detour", "exit", "both"}));
  classify->add_option("--span", span, "Maximal detour span");
  classify->add_option("--mulen", mulen, "Maximal replacement length");
  classify->add_option("--horizons", horizons, "Horizon schedule")->delimiter(',');

  auto* green = app.add_subcommand("green", "Green function G_beta(from, to)");
  std::string from, to;
  std::size_t nmax = 0, horizon = 0;
  green->add_option("--graph", graph, "Graph file")->required();
  green->add_option("--beta", beta, "Inverse temperature")->required();
  green->add_option("--from", from, "Source vertex")->required();
  green->add_option("--to", to, "Target vertex")->required();
  green->add_option("--nmax", nmax, "Term cap");
  green->add_option("--horizon", horizon, "Horizon realized for preset families");

  auto* semigroup = app.add_subcommand("semigroup", "Detour semigroup with witnesses");
  semigroup->add_option("--graph", graph, "Graph file")->required();
  semigroup->add_option("--beta", beta, "Inverse temperature of the typical path");
  semigroup->add_option("--span", span, "Maximal detour span");
  semigroup->add_option("--mulen", mulen, "Maximal replacement length");
  semigroup->add_option("--horizons", horizons, "Horizon schedule")->delimiter(',');

  auto* exits = app.add_subcommand("exits", "Exit summability, slimness and product states");
  std::size_t imax = 0;
  exits->add_option("--graph", graph, "Graph file")->required();
  exits->add_option("--beta", beta, "Inverse temperature")->required();
  exits->add_option("--imax", imax, "Exit length");

  auto* orbits = app.add_subcommand("sample-orbits", "Histogram of the Radon-Nikodym cocycle");
  std::size_t samples = 1'000'000, depth = 8;
  std::string out;
  orbits->add_option("--graph", graph, "Graph file")->required();
  orbits->add_option("--beta", beta, "Inverse temperature")->required();
  orbits->add_option("--samples", samples, "Number of sampled pairs");
  orbits->add_option("--depth", depth, "Substitution depth");
  orbits->add_option("--out", out, "CSV output; the report goes next to it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  FamilyPtr fam;
  if (const kmsf_status s = load(graph, fam); s != KMSF_OK) return report_error(s);

  kmsf_options opts;
  kmsf_options_default(&opts);
  opts.exact = g.exact;
  if (g.tol > 0) opts.tol = g.tol;
  opts.seed = g.seed;
  opts.span = span;
  opts.mu_len = mulen;
  if (!horizons.empty()) {
    opts.horizons = horizons.data();
    opts.horizon_count = horizons.size();
  }

  char* text = nullptr;
  int undecided = 0;

  if (*classify) {
    opts.mode = parse_mode(mode);
    kmsf_verdict* v = nullptr;
    const kmsf_status s = kmsf_classify(fam.get(), beta.c_str(), &opts, &v);
    if (s != KMSF_OK) return report_error(s);
    const bool und = kmsf_verdict_type(v) == KMSF_UNDECIDED;
    const kmsf_status r = kmsf_verdict_report(v, parse_format(g.format), &text);
    kmsf_verdict_free(v);
    return emit(r, text, und);
  }
  kmsf_status s = KMSF_OK;
  if (*green)
    s = kmsf_green(fam.get(), beta.c_str(), from.c_str(), to.c_str(), g.tol, nmax, horizon, &text, &undecided);
  else if (*semigroup)
    s = kmsf_semigroup(fam.get(), beta.c_str(), &opts, &text, &undecided);
  else if (*exits)
    s = kmsf_exits(fam.get(), beta.c_str(), imax, g.tol, &text, &undecided);
  else
    s = kmsf_sample_orbits(fam.get(), beta.c_str(), samples, depth, g.seed, out.empty() ? nullptr : out.c_str(),
                           &text, &undecided);
  return emit(s, text, undecided);
}
