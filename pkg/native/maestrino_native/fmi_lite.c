#include "fmi_lite.h"

#include <math.h>
#include <stdio.h>
#include <string.h>

static char fl_error_buf[256];

const char *fl_last_error(void) { return fl_error_buf; }

static fl_status fl_fail(const char *inst, const char *what) {
    snprintf(fl_error_buf, sizeof fl_error_buf, "%s: %s", inst ? inst : "?", what);
    return FL_FAIL;
}

static fl_status api_instantiate(fl_instance *inst, const fl_model *model,
                                 const char *name, double *storage) {
    if (!name || !name[0])
        return fl_fail(name, "instance name must be non-empty");
    inst->model = model;
    inst->name = name;
    inst->values = storage;
    inst->state = FL_INSTANTIATED;
    inst->current_time = 0.0;
    memcpy(storage, model->defaults, (size_t)model->n_vars * sizeof(double));
    return FL_OK;
}

static fl_status api_set_real(fl_instance *inst, int vr, double v) {
    if (inst->state == FL_TERMINATED)
        return fl_fail(inst->name, "set_real on terminated instance");
    if (vr < 0 || vr >= inst->model->n_vars)
        return fl_fail(inst->name, "unknown value reference");
    fl_kind kind = inst->model->kinds[vr];
    if (kind == FL_OUTPUT || kind == FL_LOCAL)
        return fl_fail(inst->name, "variable kind forbids set_real");
    if (kind == FL_PARAMETER && inst->state == FL_STEPPING)
        return fl_fail(inst->name, "parameters are frozen once stepping has begun");
    if (inst->model->types[vr] == FL_BOOLEAN && v != 0.0 && v != 1.0)
        return fl_fail(inst->name, "boolean variable accepts only 0.0/1.0");
    inst->values[vr] = v;
    return FL_OK;
}

static fl_status api_get_real(const fl_instance *inst, int vr, double *out) {
    if (inst->state == FL_TERMINATED)
        return fl_fail(inst->name, "get_real on terminated instance");
    if (vr < 0 || vr >= inst->model->n_vars)
        return fl_fail(inst->name, "unknown value reference");
    *out = inst->values[vr];
    return FL_OK;
}

static fl_status api_do_step(fl_instance *inst, double t, double h) {
    if (inst->state == FL_TERMINATED)
        return fl_fail(inst->name, "do_step on terminated instance");
    if (inst->state == FL_INSTANTIATED)
        return fl_fail(inst->name, "do_step before initialize");
    if (!(h > 0.0))
        return fl_fail(inst->name, "step size must be positive");
    if (fabs(t - inst->current_time) > FL_TIME_TOLERANCE)
        return fl_fail(inst->name, "master time disagrees with instance time");
    inst->state = FL_STEPPING;
    inst->model->step(inst->values, t, h);
    inst->current_time = t + h;
    return FL_OK;
}

static fl_status api_terminate(fl_instance *inst) {
    if (inst->state == FL_TERMINATED)
        return fl_fail(inst->name, "already terminated");
    inst->state = FL_TERMINATED;
    return FL_OK;
}

const fl_vtable FL_API = {
    api_instantiate,
    api_set_real,
    api_get_real,
    api_do_step,
    api_terminate,
};

fl_status fl_initialize(fl_instance *inst, double start_time) {
    if (inst->state != FL_INSTANTIATED)
        return fl_fail(inst->name, "initialize requires the instantiated state");
    if (inst->model->init)
        inst->model->init(inst->values);
    inst->state = FL_INITIALIZED;
    inst->current_time = start_time;
    return FL_OK;
}
