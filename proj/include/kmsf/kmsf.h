#ifndef KMSF_KMSF_H
#define KMSF_KMSF_H

/* C interface to the factor-type classifier. Every function returns a
 * kmsf_status; on failure kmsf_last_error() describes the problem for the
 * calling thread. Strings handed out through char** belong to the caller and
 * are released with kmsf_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KMSF_API __declspec(dllexport)
#else
#define KMSF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  KMSF_OK = 0,
  KMSF_ERR_PARSE = 1,
  KMSF_ERR_IO = 2,
  KMSF_ERR_INVALID_ARGUMENT = 3,
  KMSF_ERR_NOT_SIMPLE = 4,
  KMSF_ERR_INCONSISTENT = 5,
  KMSF_ERR_RESOURCE = 6,
  KMSF_ERR_OVERFLOW = 7,
  KMSF_ERR_INTERNAL = 8
} kmsf_status;

typedef enum { KMSF_MODE_DETOUR = 0, KMSF_MODE_EXIT = 1, KMSF_MODE_BOTH = 2 } kmsf_mode;

typedef enum { KMSF_FORMAT_TEXT = 0, KMSF_FORMAT_JSON_LINES = 1, KMSF_FORMAT_CSV = 2 } kmsf_format;

typedef enum {
  KMSF_SEMIFINITE_I = 0,
  KMSF_SEMIFINITE_II = 1,
  KMSF_SEMIFINITE_UNDETERMINED = 2,
  KMSF_III_LAMBDA = 3,
  KMSF_III_0 = 4,
  KMSF_III_1 = 5,
  KMSF_UNDECIDED = 6
} kmsf_factor_type;

typedef struct kmsf_family kmsf_family;
typedef struct kmsf_verdict kmsf_verdict;

typedef struct {
  kmsf_mode mode;
  int exact;          /* nonzero: exact gcd arithmetic */
  double tol;         /* Green-function tolerance */
  size_t n_max;       /* Green-function term cap */
  uint64_t seed;
  size_t span;        /* detour bounds */
  size_t mu_len;
  const size_t* horizons; /* NULL keeps the defaults */
  size_t horizon_count;
} kmsf_options;

KMSF_API const char* kmsf_version(void);
KMSF_API const char* kmsf_last_error(void);
KMSF_API const char* kmsf_status_name(kmsf_status s);
KMSF_API void kmsf_string_free(char* s);

KMSF_API kmsf_status kmsf_family_parse(const char* text, kmsf_family** out);
KMSF_API kmsf_status kmsf_family_load(const char* path, kmsf_family** out);
KMSF_API kmsf_status kmsf_family_serialize(const kmsf_family* f, char** out);
KMSF_API void kmsf_family_free(kmsf_family* f);

KMSF_API void kmsf_options_default(kmsf_options* o);

/* beta is parsed like a potential: "1", "0.5", "3/4", "log(2)". */
KMSF_API kmsf_status kmsf_classify(const kmsf_family* f, const char* beta, const kmsf_options* o,
                                   kmsf_verdict** out);
KMSF_API kmsf_factor_type kmsf_verdict_type(const kmsf_verdict* v);
KMSF_API const char* kmsf_verdict_type_name(const kmsf_verdict* v);
/* Return 1 and store the value when defined, 0 otherwise. */
KMSF_API int kmsf_verdict_s(const kmsf_verdict* v, double* s);
KMSF_API int kmsf_verdict_lambda(const kmsf_verdict* v, double* lambda);
KMSF_API const char* kmsf_verdict_lambda_text(const kmsf_verdict* v);
KMSF_API const char* kmsf_verdict_s_invariant(const kmsf_verdict* v);
KMSF_API const char* kmsf_verdict_message(const kmsf_verdict* v);
KMSF_API kmsf_status kmsf_verdict_report(const kmsf_verdict* v, kmsf_format format, char** out);
KMSF_API void kmsf_verdict_free(kmsf_verdict* v);

/* Report generators behind the CLI subcommands. *undecided is set to 1 when
 * the computation ended without a decision. */
KMSF_API kmsf_status kmsf_green(const kmsf_family* f, const char* beta, const char* from, const char* to,
                                double tol, size_t n_max, size_t horizon, char** report, int* undecided);
KMSF_API kmsf_status kmsf_semigroup(const kmsf_family* f, const char* beta, const kmsf_options* o, char** report,
                                    int* undecided);
KMSF_API kmsf_status kmsf_exits(const kmsf_family* f, const char* beta, size_t i_max, double tol, char** report,
                                int* undecided);
/* Writes out_csv and out_csv.report when out_csv is not NULL. */
KMSF_API kmsf_status kmsf_sample_orbits(const kmsf_family* f, const char* beta, size_t samples, size_t depth,
                                        uint64_t seed, const char* out_csv, char** report, int* undecided);

#ifdef __cplusplus
}
#endif

#endif
