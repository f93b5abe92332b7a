#include "kmsf/kmsf.h"

#include "kmsf/classify.hpp"
#include "kmsf/errors.hpp"
#include "kmsf/reports.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct kmsf_family {
  kmsf::GraphFamily family;
};

struct kmsf_verdict {
  kmsf::FactorVerdict verdict;
};

namespace {

thread_local std::string g_last_error;

kmsf_status fail(kmsf_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <class F>
kmsf_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return KMSF_OK;
  } catch (const kmsf::ParseError& e) {
    return fail(KMSF_ERR_PARSE, e.what());
  } catch (const kmsf::IoError& e) {
    return fail(KMSF_ERR_IO, e.what());
  } catch (const kmsf::InvalidArgument& e) {
    return fail(KMSF_ERR_INVALID_ARGUMENT, e.what());
  } catch (const kmsf::NotSimple& e) {
    return fail(KMSF_ERR_NOT_SIMPLE, e.what());
  } catch (const kmsf::Inconsistency& e) {
    return fail(KMSF_ERR_INCONSISTENT, e.what());
  } catch (const kmsf::ResourceLimit& e) {
    return fail(KMSF_ERR_RESOURCE, e.what());
  } catch (const kmsf::NumericOverflow& e) {
    return fail(KMSF_ERR_OVERFLOW, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KMSF_ERR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(KMSF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KMSF_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(const void* p, const char* name) {
  if (!p) throw kmsf::InvalidArgument(std::string(name) + " is NULL");
}

kmsf::Scalar beta_of(const char* beta) {
  require(beta, "beta");
  return kmsf::parse_scalar(beta);
}

void apply(const kmsf_options* o, kmsf::TailOptions& tail) {
  if (!o) return;
  if (o->span) tail.bounds.span = o->span;
  if (o->mu_len) tail.bounds.mu_len = o->mu_len;
  if (o->horizons && o->horizon_count) tail.horizons.assign(o->horizons, o->horizons + o->horizon_count);
  if (o->exact) tail.mode = kmsf::GcdMode::Exact;
}

void set_flag(int* out, bool v) {
  if (out) *out = v ? 1 : 0;
}

}  // namespace

extern "C" {

const char* kmsf_version(void) { return KMSF_VERSION_STRING; }

const char* kmsf_last_error(void) { return g_last_error.c_str(); }

const char* kmsf_status_name(kmsf_status s) {
  switch (s) {
    case KMSF_OK:
      return "ok";
    case KMSF_ERR_PARSE:
      return "parse error";
    case KMSF_ERR_IO:
      return "i/o error";
    case KMSF_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case KMSF_ERR_NOT_SIMPLE:
      return "not-simple";
    case KMSF_ERR_INCONSISTENT:
      return "inconsistent";
    case KMSF_ERR_RESOURCE:
      return "resource limit";
    case KMSF_ERR_OVERFLOW:
      return "numeric overflow";
    case KMSF_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void kmsf_string_free(char* s) { std::free(s); }

kmsf_status kmsf_family_parse(const char* text, kmsf_family** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new kmsf_family{kmsf::parse_graph(text)};
  });
}

kmsf_status kmsf_family_load(const char* path, kmsf_family** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new kmsf_family{kmsf::load_graph_file(path)};
  });
}

kmsf_status kmsf_family_serialize(const kmsf_family* f, char** out) {
  return guarded([&] {
    require(f, "family");
    require(out, "out");
    *out = dup(kmsf::serialize_graph(f->family));
  });
}

void kmsf_family_free(kmsf_family* f) { delete f; }

void kmsf_options_default(kmsf_options* o) {
  if (!o) return;
  *o = kmsf_options{};
  o->mode = KMSF_MODE_BOTH;
  o->tol = kmsf::kDefaultGreenTol;
  o->n_max = kmsf::kDefaultGreenNMax;
  o->seed = 1;
}

kmsf_status kmsf_classify(const kmsf_family* f, const char* beta, const kmsf_options* o, kmsf_verdict** out) {
  return guarded([&] {
    require(f, "family");
    require(out, "out");
    kmsf::ClassificationRequest req{f->family, beta_of(beta)};
    if (o) {
      switch (o->mode) {
        case KMSF_MODE_DETOUR:
          req.mode = kmsf::ClassifyMode::Detour;
          break;
        case KMSF_MODE_EXIT:
          req.mode = kmsf::ClassifyMode::Exit;
          break;
        case KMSF_MODE_BOTH:
          req.mode = kmsf::ClassifyMode::Both;
          break;
        default:
          throw kmsf::InvalidArgument("unknown mode");
      }
      req.exact = o->exact != 0;
      if (o->tol > 0) req.spectral.tol = o->tol;
      if (o->n_max) req.spectral.n_max = o->n_max;
      req.seed = o->seed;
      apply(o, req.tail);
    }
    *out = new kmsf_verdict{kmsf::classify(req)};
  });
}

kmsf_factor_type kmsf_verdict_type(const kmsf_verdict* v) {
  if (!v) return KMSF_UNDECIDED;
  return static_cast<kmsf_factor_type>(static_cast<int>(v->verdict.type));
}

const char* kmsf_verdict_type_name(const kmsf_verdict* v) {
  return v ? kmsf::factor_type_name(v->verdict.type).data() : "";
}

int kmsf_verdict_s(const kmsf_verdict* v, double* s) {
  if (!v || !v->verdict.s) return 0;
  if (s) *s = *v->verdict.s;
  return 1;
}

int kmsf_verdict_lambda(const kmsf_verdict* v, double* lambda) {
  if (!v || !v->verdict.lambda) return 0;
  if (lambda) *lambda = *v->verdict.lambda;
  return 1;
}

const char* kmsf_verdict_lambda_text(const kmsf_verdict* v) { return v ? v->verdict.lambda_text.c_str() : ""; }
const char* kmsf_verdict_s_invariant(const kmsf_verdict* v) { return v ? v->verdict.s_invariant.c_str() : ""; }
const char* kmsf_verdict_message(const kmsf_verdict* v) { return v ? v->verdict.message.c_str() : ""; }

kmsf_status kmsf_verdict_report(const kmsf_verdict* v, kmsf_format format, char** out) {
  return guarded([&] {
    require(v, "verdict");
    require(out, "out");
    kmsf::ReportFormat fmt;
    switch (format) {
      case KMSF_FORMAT_TEXT:
        fmt = kmsf::ReportFormat::Text;
        break;
      case KMSF_FORMAT_JSON_LINES:
        fmt = kmsf::ReportFormat::JsonLines;
        break;
      case KMSF_FORMAT_CSV:
        fmt = kmsf::ReportFormat::Csv;
        break;
      default:
        throw kmsf::InvalidArgument("unknown report format");
    }
    *out = dup(kmsf::report(v->verdict, fmt));
  });
}

void kmsf_verdict_free(kmsf_verdict* v) { delete v; }

kmsf_status kmsf_green(const kmsf_family* f, const char* beta, const char* from, const char* to, double tol,
                       size_t n_max, size_t horizon, char** report, int* undecided) {
  return guarded([&] {
    require(f, "family");
    require(from, "from");
    require(to, "to");
    require(report, "report");
    kmsf::GreenQuery q{from, to};
    if (tol > 0) q.tol = tol;
    if (n_max) q.n_max = n_max;
    q.horizon = horizon;
    const auto r = kmsf::green_report(f->family, beta_of(beta), q);
    *report = dup(r.text);
    set_flag(undecided, r.undecided);
  });
}

kmsf_status kmsf_semigroup(const kmsf_family* f, const char* beta, const kmsf_options* o, char** report,
                           int* undecided) {
  return guarded([&] {
    require(f, "family");
    require(report, "report");
    kmsf::SemigroupQuery q;
    if (beta) q.beta = kmsf::parse_scalar(beta);
    apply(o, q.tail);
    q.exact = o && o->exact;
    const auto r = kmsf::semigroup_report(f->family, q);
    *report = dup(r.text);
    set_flag(undecided, r.undecided);
  });
}

kmsf_status kmsf_exits(const kmsf_family* f, const char* beta, size_t i_max, double tol, char** report,
                       int* undecided) {
  return guarded([&] {
    require(f, "family");
    require(report, "report");
    const auto r = kmsf::exits_report(f->family, beta_of(beta), i_max ? i_max : kmsf::kDefaultExitIMax,
                                      tol > 0 ? tol : kmsf::kDefaultExitTol);
    *report = dup(r.text);
    set_flag(undecided, r.undecided);
  });
}

kmsf_status kmsf_sample_orbits(const kmsf_family* f, const char* beta, size_t samples, size_t depth, uint64_t seed,
                               const char* out_csv, char** report, int* undecided) {
  return guarded([&] {
    require(f, "family");
    require(report, "report");
    kmsf::OrbitQuery q;
    if (samples) q.samples = samples;
    if (depth) q.sampler.depth = depth;
    q.sampler.seed = seed;
    if (out_csv) q.out_path = out_csv;
    const auto r = kmsf::sample_orbits_report(f->family, beta_of(beta), q);
    *report = dup(r.text);
    set_flag(undecided, r.undecided);
  });
}

}  // extern "C"
