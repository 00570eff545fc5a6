/*
 * layerq C API
 *
 * Opaque handles over the C++ core. Every fallible call returns a
 * layerq_status; on failure layerq_last_error() holds a message for the
 * calling thread until its next failing call. Handles are released with the
 * matching *_free function, which accepts NULL.
 */
#ifndef LAYERQ_H
#define LAYERQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(LAYERQ_BUILDING_LIBRARY)
#  define LAYERQ_API __attribute__((visibility("default")))
#else
#  define LAYERQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum layerq_status {
    LAYERQ_OK = 0,
    LAYERQ_ERR_INVALID_ARGUMENT = 1,
    LAYERQ_ERR_MISSING_DATA = 2,
    LAYERQ_ERR_IO = 3,
    LAYERQ_ERR_CONSISTENCY = 4,
    LAYERQ_ERR_INTERNAL = 5
} layerq_status;

typedef struct layerq_state layerq_state;
typedef struct layerq_density layerq_density;
typedef struct layerq_counts layerq_counts;
typedef struct layerq_estimates layerq_estimates;
typedef struct layerq_qkd layerq_qkd;

/* Metadata embedded into written files. */
typedef struct layerq_metadata {
    int has_seed;
    uint64_t seed;
    int with_timestamp;
} layerq_metadata;

LAYERQ_API const char* layerq_version(void);
LAYERQ_API const char* layerq_last_error(void);
LAYERQ_API const char* layerq_status_name(layerq_status status);

/* ---- pure states ------------------------------------------------------ */

/* Closed-form (|000> + |111> + |220> + |331>)/2 on dims (4,4,2). */
LAYERQ_API layerq_status layerq_state_psi442(layerq_state** out);
/* Output of the simulated source: two Bell pairs, PBS fusion, dimension
 * doubling. success_probability may be NULL. */
LAYERQ_API layerq_status layerq_state_from_circuit(layerq_state** out, double* success_probability);
LAYERQ_API void layerq_state_free(layerq_state* state);

/* Array getters write up to capacity entries and always report the full size. */
LAYERQ_API layerq_status layerq_state_dims(const layerq_state* state, int* dims, size_t capacity,
                                           size_t* parties);
LAYERQ_API layerq_status layerq_state_amplitudes(const layerq_state* state, double* re, double* im,
                                                 size_t capacity, size_t* size);
LAYERQ_API layerq_status layerq_state_distance(const layerq_state* a, const layerq_state* b, double* out);
/* tol <= 0 selects the default relative tolerance 1e-8. */
LAYERQ_API layerq_status layerq_state_rank_vector(const layerq_state* state, double tol, int* ranks,
                                                  size_t capacity, size_t* parties);
/* Best overlap of target with any state of the rank class (e.g. {4,3,2}). */
LAYERQ_API layerq_status layerq_state_fmax(const layerq_state* target, const int* ranks, size_t n,
                                           double* out);

/* ---- density operators ------------------------------------------------ */

LAYERQ_API layerq_status layerq_density_white_noise(const layerq_state* state, double visibility,
                                                    layerq_density** out);
LAYERQ_API void layerq_density_free(layerq_density* rho);
LAYERQ_API layerq_status layerq_density_fidelity(const layerq_density* rho, const layerq_state* target,
                                                 double* out);

/* ---- coincidence counts ----------------------------------------------- */

/* Poissonian counts for the witness measurement plan on a (4,4,2) state. */
LAYERQ_API layerq_status layerq_counts_simulate(const layerq_density* rho, double rate,
                                                double integration_time, uint64_t seed,
                                                layerq_counts** out);
/* Mean counts, the infinite-statistics limit. */
LAYERQ_API layerq_status layerq_counts_expected(const layerq_density* rho, double rate,
                                                double integration_time, layerq_counts** out);
LAYERQ_API layerq_status layerq_counts_load(const char* path, layerq_counts** out);
LAYERQ_API layerq_status layerq_counts_save(const layerq_counts* counts, const char* path,
                                            const layerq_metadata* meta);
LAYERQ_API size_t layerq_counts_size(const layerq_counts* counts);
LAYERQ_API void layerq_counts_free(layerq_counts* counts);

/* ---- element estimates ------------------------------------------------ */

typedef struct layerq_element {
    char bra[8];
    char ket[8];
    double value;
    double std_dev;
    int low_statistics;
} layerq_element;

typedef struct layerq_estimates_info {
    size_t trials;           /* 0 for fixtures */
    int degenerate;          /* fewer than 100 Monte Carlo trials */
    size_t low_statistics_settings;
} layerq_estimates_info;

/* Point estimates plus Monte Carlo errors over `trials` Poisson resamplings. */
LAYERQ_API layerq_status layerq_estimates_from_counts(const layerq_counts* counts, size_t trials,
                                                      uint64_t seed, layerq_estimates** out);
/* Published element fixture (JSON) including its published fidelity error. */
LAYERQ_API layerq_status layerq_estimates_load_fixture(const char* path, layerq_estimates** out);
LAYERQ_API void layerq_estimates_free(layerq_estimates* est);
LAYERQ_API size_t layerq_estimates_size(const layerq_estimates* est);
LAYERQ_API layerq_status layerq_estimates_element(const layerq_estimates* est, size_t index,
                                                  layerq_element* out);
LAYERQ_API layerq_status layerq_estimates_info_get(const layerq_estimates* est, layerq_estimates_info* out);
/* Fidelity with the layered target and its standard deviation. */
LAYERQ_API layerq_status layerq_estimates_fidelity(const layerq_estimates* est, double* value,
                                                   double* std_dev);
/* Two-term GHZ fidelity on signal kets ket_a, ket_b (e.g. "000", "111"). */
LAYERQ_API layerq_status layerq_estimates_subspace(const layerq_estimates* est, const char* ket_a,
                                                   const char* ket_b, double* value, double* std_dev);
LAYERQ_API layerq_status layerq_estimates_save_csv(const layerq_estimates* est, const char* path,
                                                   const layerq_metadata* meta);

/* ---- certification ---------------------------------------------------- */

typedef struct layerq_certification {
    double sigma_margin;
    int whole_sigmas;
    int certified;
} layerq_certification;

typedef struct layerq_ghz_witness {
    double expectation; /* Tr(W rho) = 1/2 - F */
    double margin;      /* F - 1/2 */
    int witnessed;
} layerq_ghz_witness;

LAYERQ_API layerq_status layerq_certify(double fidelity, double std_dev, double bound,
                                        layerq_certification* out);
LAYERQ_API layerq_status layerq_ghz_witness_value(double fidelity, layerq_ghz_witness* out);

/* ---- layered key distribution ----------------------------------------- */

typedef struct layerq_layer_report {
    char subspace[16];
    double qber_z, qber_z_std;
    double qber_x, qber_x_std;
    int has_pairwise;
    double qber_z_ab, qber_z_ab_std;
    double qber_z_ac, qber_z_ac_std;
    double rate_mean;
    double rate_pessimistic;
    double printed_rate;    /* NaN unless loaded from a fixture */
    double z_discard_fraction;
    double x_discard_fraction;
} layerq_layer_report;

typedef struct layerq_key_agreement {
    double abc_agreement;
    double ab_agreement;
    double mutual_information;
    size_t rounds;
} layerq_key_agreement;

LAYERQ_API layerq_status layerq_qkd_simulate(const layerq_density* rho, size_t rounds, uint64_t seed,
                                             layerq_qkd** out);
LAYERQ_API layerq_status layerq_qkd_exact(const layerq_density* rho, layerq_qkd** out);
LAYERQ_API layerq_status layerq_qkd_load_fixture(const char* path, layerq_qkd** out);
LAYERQ_API void layerq_qkd_free(layerq_qkd* qkd);
LAYERQ_API size_t layerq_qkd_size(const layerq_qkd* qkd);
LAYERQ_API layerq_status layerq_qkd_layer(const layerq_qkd* qkd, size_t index, layerq_layer_report* out);
/* Overrides QBER_X (std 0) on every layer and recomputes the rates. */
LAYERQ_API layerq_status layerq_qkd_inject_qber_x(layerq_qkd* qkd, double qber_x);
LAYERQ_API layerq_status layerq_qkd_save_csv(const layerq_qkd* qkd, const char* path,
                                             const layerq_metadata* meta);
LAYERQ_API layerq_status layerq_key_agreement_simulate(const layerq_density* rho, size_t rounds,
                                                       uint64_t seed, layerq_key_agreement* out);
LAYERQ_API layerq_status layerq_binary_entropy(double p, double* out);

#ifdef __cplusplus
}
#endif

#endif /* LAYERQ_H */
