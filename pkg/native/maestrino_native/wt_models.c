#include "wt_models.h"

#include <string.h>

/* One expression per update, no reassociation: keeps binary64 results
 * identical to the reference implementation. */
double watertank_c_step(double level, double valve, double inflow_rate,
                        double outflow_rate, double h) {
    double next = level + h * (inflow_rate - valve * outflow_rate);
    return next < 0.0 ? 0.0 : next;
}

double controller_c_step(double level, double prev_valve, double min_level,
                         double max_level) {
    if (level >= max_level)
        return 1.0;
    if (level <= min_level)
        return 0.0;
    return prev_valve;
}

static void wt_step(double *v, double t, double h) {
    (void)t;
    v[WT_LEVEL] = watertank_c_step(v[WT_LEVEL], v[WT_VALVE], v[WT_INFLOW],
                                   v[WT_OUTFLOW], h);
}

static void wt_init(double *v) {
    /* The level state starts wherever the initialLevel parameter points. */
    v[WT_LEVEL] = v[WT_INITIAL];
}

static void ct_step(double *v, double t, double h) {
    (void)t;
    (void)h;
    v[CT_VALVE] = controller_c_step(v[CT_LEVEL], v[CT_VALVE], v[CT_MIN], v[CT_MAX]);
}

static const fl_kind wt_kinds[] = {FL_OUTPUT, FL_INPUT, FL_PARAMETER,
                                   FL_PARAMETER, FL_PARAMETER};
static const fl_vtype wt_types[] = {FL_REAL, FL_BOOLEAN, FL_REAL, FL_REAL, FL_REAL};
static const double wt_defaults[] = {1.0, 0.0, 1.0, 2.0, 1.0};

static const fl_kind ct_kinds[] = {FL_INPUT, FL_OUTPUT, FL_PARAMETER, FL_PARAMETER};
static const fl_vtype ct_types[] = {FL_REAL, FL_BOOLEAN, FL_REAL, FL_REAL};
static const double ct_defaults[] = {0.0, 0.0, 1.0, 2.0};

const fl_model WT_WATERTANK_MODEL = {
    "singlewatertank-20sim", 5, wt_kinds, wt_types, wt_defaults, wt_step, wt_init,
};

const fl_model WT_CONTROLLER_MODEL = {
    "watertankcontroller-c", 4, ct_kinds, ct_types, ct_defaults, ct_step, NULL,
};

const fl_model *wt_model_by_name(const char *model_name) {
    if (strcmp(model_name, WT_WATERTANK_MODEL.model_name) == 0)
        return &WT_WATERTANK_MODEL;
    if (strcmp(model_name, WT_CONTROLLER_MODEL.model_name) == 0)
        return &WT_CONTROLLER_MODEL;
    return NULL;
}
