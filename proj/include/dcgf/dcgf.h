#ifndef DCGF_DCGF_H
#define DCGF_DCGF_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(DCGF_BUILDING_LIBRARY)
#    define DCGF_API __declspec(dllexport)
#  else
#    define DCGF_API __declspec(dllimport)
#  endif
#else
#  define DCGF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dcgf_status {
  DCGF_OK = 0,
  DCGF_ERR_MODEL = 1,      /* parse, validation or well-formedness failure */
  DCGF_ERR_INFEASIBLE = 2, /* no admissible control sequence */
  DCGF_ERR_RUNTIME = 3,    /* numeric failure, enumeration cap */
  DCGF_ERR_ARGUMENT = 4,   /* bad argument, null pointer, index out of range */
  DCGF_ERR_IO = 5,
  DCGF_ERR_INTERNAL = 6
} dcgf_status;

typedef enum dcgf_format { DCGF_FORMAT_JSON = 0, DCGF_FORMAT_TEXT = 1 } dcgf_format;
typedef enum dcgf_method { DCGF_EULER = 0, DCGF_RK4 = 1 } dcgf_method;

typedef struct dcgf_buffer dcgf_buffer;
typedef struct dcgf_model dcgf_model;
typedef struct dcgf_system dcgf_system;
typedef struct dcgf_trajectory dcgf_trajectory;
typedef struct dcgf_control_run dcgf_control_run;

/* Message of the last failed call on this thread; "" when none. */
DCGF_API const char* dcgf_last_error(void);
DCGF_API const char* dcgf_version(void);

/* Owned, NUL-terminated byte buffers returned by emitters. */
DCGF_API const char* dcgf_buffer_data(const dcgf_buffer* buffer);
DCGF_API size_t dcgf_buffer_size(const dcgf_buffer* buffer);
DCGF_API void dcgf_buffer_free(dcgf_buffer* buffer);

/* Models. `diagnostics` may be NULL; when given it receives the formatted
   diagnostics (warnings included) even if parsing fails. */
DCGF_API dcgf_status dcgf_model_parse(const char* source, const char* filename, dcgf_model** out,
                                      dcgf_buffer** diagnostics);
DCGF_API dcgf_status dcgf_model_load_file(const char* path, dcgf_model** out, dcgf_buffer** diagnostics);
/* "builtin:sir" or "builtin:sir-therapy" (prefix optional). */
DCGF_API dcgf_status dcgf_model_builtin(const char* name, dcgf_model** out);
DCGF_API dcgf_status dcgf_model_set_param(dcgf_model* model, const char* name, double value);
DCGF_API dcgf_status dcgf_model_render(const dcgf_model* model, dcgf_buffer** out);
DCGF_API size_t dcgf_model_species_count(const dcgf_model* model);
DCGF_API size_t dcgf_model_therapy_count(const dcgf_model* model);
DCGF_API void dcgf_model_free(dcgf_model* model);

/* Therapy analysis. `well_formed` may be NULL. */
DCGF_API dcgf_status dcgf_model_analyze(const dcgf_model* model, dcgf_format format, dcgf_buffer** report,
                                        int* well_formed);
DCGF_API dcgf_status dcgf_model_st_graph_dot(const dcgf_model* model, dcgf_buffer** out);
/* DCGF_ERR_MODEL when the therapies are not well-formed. */
DCGF_API dcgf_status dcgf_model_mode_graph_dot(const dcgf_model* model, dcgf_buffer** out);

/* Stoichiometric matrix, row-major. Call with entries == NULL to get the shape. */
DCGF_API dcgf_status dcgf_model_matrix(const dcgf_model* model, size_t* rows, size_t* columns, int* entries);
/* emit: "all", "matrix", "phi", "ode" or "css". */
DCGF_API dcgf_status dcgf_model_compile(const dcgf_model* model, const char* emit, dcgf_format format,
                                        dcgf_buffer** out);

/* Switched systems. */
DCGF_API dcgf_status dcgf_system_from_model(const dcgf_model* model, dcgf_system** out);
/* "builtin:osteomyelitis" takes parameter overrides; the SIR built-ins take
   overrides of their declared parameters. `keys`/`values` may be NULL when count is 0. */
DCGF_API dcgf_status dcgf_system_builtin(const char* name, const char* const* keys, const double* values,
                                         size_t count, dcgf_system** out);
DCGF_API size_t dcgf_system_state_dim(const dcgf_system* system);
DCGF_API size_t dcgf_system_output_dim(const dcgf_system* system);
DCGF_API size_t dcgf_system_input_dim(const dcgf_system* system);
DCGF_API size_t dcgf_system_mode_count(const dcgf_system* system);
/* NULL for an out-of-range index. */
DCGF_API const char* dcgf_system_state_name(const dcgf_system* system, size_t index);
DCGF_API const char* dcgf_system_output_name(const dcgf_system* system, size_t index);
DCGF_API const char* dcgf_system_input_name(const dcgf_system* system, size_t index);
DCGF_API const char* dcgf_system_mode_name(const dcgf_system* system, size_t index);
DCGF_API size_t dcgf_system_initial_mode(const dcgf_system* system);
DCGF_API dcgf_status dcgf_system_initial_state(const dcgf_system* system, double* x);
DCGF_API dcgf_status dcgf_system_rhs(const dcgf_system* system, size_t mode, const double* x, double* dx);
DCGF_API dcgf_status dcgf_system_output(const dcgf_system* system, size_t mode, const double* x, double* y);
DCGF_API dcgf_status dcgf_system_mode_for_input(const dcgf_system* system, const int* input, size_t* mode);
DCGF_API dcgf_status dcgf_system_find_mode(const dcgf_system* system, const char* name, size_t* mode);
DCGF_API void dcgf_system_free(dcgf_system* system);

/* Simulation. Times are in the rate time unit (years for the built-ins). */
typedef struct dcgf_simulate_options {
  double duration;
  double dt;
  dcgf_method method;
  const double* x0;            /* NULL: the system's initial state */
  const double* switch_times;  /* segment starts, first must be 0; NULL: constant mode */
  const size_t* switch_modes;
  size_t switch_count;
  size_t mode;                 /* used when switch_times is NULL */
  int clamp;                   /* nonzero: clamp every state to [clamp_lo, clamp_hi] */
  double clamp_lo;
  double clamp_hi;
} dcgf_simulate_options;

DCGF_API void dcgf_simulate_options_init(dcgf_simulate_options* options);
/* A non-finite state ends the run early with DCGF_OK; see dcgf_trajectory_failure. */
DCGF_API dcgf_status dcgf_simulate(const dcgf_system* system, const dcgf_simulate_options* options,
                                   dcgf_trajectory** out);
DCGF_API size_t dcgf_trajectory_size(const dcgf_trajectory* trajectory);
DCGF_API double dcgf_trajectory_time(const dcgf_trajectory* trajectory, size_t sample);
DCGF_API dcgf_status dcgf_trajectory_state(const dcgf_trajectory* trajectory, size_t sample, double* x);
DCGF_API size_t dcgf_trajectory_mode(const dcgf_trajectory* trajectory, size_t sample);
/* NULL when the run completed. */
DCGF_API const char* dcgf_trajectory_failure(const dcgf_trajectory* trajectory);
/* DCGF_FORMAT_TEXT writes CSV. */
DCGF_API dcgf_status dcgf_trajectory_write(const dcgf_trajectory* trajectory, dcgf_format format, dcgf_buffer** out);
DCGF_API void dcgf_trajectory_free(dcgf_trajectory* trajectory);

/* Receding-horizon control. Q is n-by-n and R m-by-m, row-major. */
typedef struct dcgf_control_options {
  size_t horizon;
  double dt;
  double duration;
  const double* Q;
  const double* R;
  const double* terminal_vertices; /* vertex_count rows of n values; NULL: no terminal set */
  size_t vertex_count;
  int hard_terminal;
  double terminal_penalty;
  double terminal_epsilon;
  const double* box_lo;            /* NULL: 0 in every coordinate */
  const double* box_hi;            /* NULL: 1 in every coordinate */
  int clamp_plant;                 /* nonzero: clamp plant states to the box */
  size_t enumeration_cap;
  const double* x0;                /* NULL: the system's initial state */
  const char* label;
} dcgf_control_options;

/* Defaults: horizon 3, dt 1/365, duration 0, soft terminal (penalty 1e3,
   epsilon 1e-6), unit box, cap 4096. Q and R must still be supplied. */
DCGF_API void dcgf_control_options_init(dcgf_control_options* options);
/* Scenario presets 1..3 for the SIR therapy model: fills Q, R, terminal set,
   horizon, dt and label. The pointers refer to static storage. */
DCGF_API dcgf_status dcgf_control_options_scenario(dcgf_control_options* options, int scenario);
/* A hard-terminal infeasibility halts the run with DCGF_OK and a failure message. */
DCGF_API dcgf_status dcgf_control(const dcgf_system* system, const dcgf_control_options* options,
                                  dcgf_control_run** out);
/* First-step solve only: writes horizon*m inputs into `inputs`. */
DCGF_API dcgf_status dcgf_solve_cftoc(const dcgf_system* system, const dcgf_control_options* options,
                                      const double* x0, int* inputs, double* cost, int* feasible);
DCGF_API size_t dcgf_control_run_size(const dcgf_control_run* run);
DCGF_API dcgf_status dcgf_control_run_input(const dcgf_control_run* run, size_t sample, int* input);
DCGF_API double dcgf_control_run_cost(const dcgf_control_run* run, size_t sample);
DCGF_API int dcgf_control_run_feasible(const dcgf_control_run* run, size_t sample);
DCGF_API const char* dcgf_control_run_failure(const dcgf_control_run* run);
DCGF_API dcgf_status dcgf_control_run_csv(const dcgf_control_run* run, dcgf_buffer** out);
DCGF_API dcgf_status dcgf_control_run_summary(const dcgf_control_run* run, dcgf_buffer** out);
DCGF_API dcgf_status dcgf_control_run_trajectory(const dcgf_control_run* run, dcgf_format format, dcgf_buffer** out);
DCGF_API void dcgf_control_run_free(dcgf_control_run* run);

#ifdef __cplusplus
}
#endif

#endif
