/* FMI-lite component contract for generated simulators.
 *
 * Mirrors the engine's instance semantics exactly: variables are doubles
 * (booleans encoded 0.0/1.0), lifecycle runs instantiated -> initialized ->
 * stepping -> terminated, parameters freeze once stepping begins, and
 * do_step checks the master clock against the instance clock at an absolute
 * tolerance of 1e-12 seconds.
 */
#ifndef FMI_LITE_H
#define FMI_LITE_H

#include <stddef.h>

#define FL_TIME_TOLERANCE 1e-12

typedef enum { FL_OK = 0, FL_FAIL = 1 } fl_status;

typedef enum {
    FL_PARAMETER = 0,
    FL_INPUT = 1,
    FL_OUTPUT = 2,
    FL_LOCAL = 3
} fl_kind;

typedef enum { FL_REAL = 0, FL_BOOLEAN = 1 } fl_vtype;

typedef enum {
    FL_INSTANTIATED = 0,
    FL_INITIALIZED = 1,
    FL_STEPPING = 2,
    FL_TERMINATED = 3
} fl_state;

typedef struct {
    const char *model_name;
    int n_vars;
    const fl_kind *kinds;
    const fl_vtype *types;
    const double *defaults;
    void (*step)(double *values, double t, double h);
    void (*init)(double *values); /* NULL when the model needs no init hook */
} fl_model;

typedef struct {
    const fl_model *model;
    const char *name;
    double *values; /* caller-supplied storage of model->n_vars doubles */
    fl_state state;
    double current_time;
} fl_instance;

/* The five lifecycle operations, exposed as a vtable so generated code and
 * tests drive models through one indirection point. */
typedef struct {
    fl_status (*instantiate)(fl_instance *inst, const fl_model *model,
                             const char *name, double *storage);
    fl_status (*set_real)(fl_instance *inst, int vr, double v);
    fl_status (*get_real)(const fl_instance *inst, int vr, double *out);
    fl_status (*do_step)(fl_instance *inst, double t, double h);
    fl_status (*terminate)(fl_instance *inst);
} fl_vtable;

extern const fl_vtable FL_API;

/* Transition instantiated -> initialized, running the model's init hook and
 * pinning the instance clock to the start time. */
fl_status fl_initialize(fl_instance *inst, double start_time);

/* Message describing the most recent FL_FAIL, for error reporting. */
const char *fl_last_error(void);

#endif /* FMI_LITE_H */
