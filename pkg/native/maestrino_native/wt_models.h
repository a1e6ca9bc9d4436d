/* Built-in model implementations: single water tank and two-level controller.
 * Arithmetic matches the engine's reference implementation operation for
 * operation so results are bit-equal (compile with -ffp-contract=off).
 */
#ifndef WT_MODELS_H
#define WT_MODELS_H

#include "fmi_lite.h"

/* Value references, same numbering as the builtin descriptions. */
enum { WT_LEVEL = 0, WT_VALVE = 1, WT_INFLOW = 2, WT_OUTFLOW = 3, WT_INITIAL = 4 };
enum { CT_LEVEL = 0, CT_VALVE = 1, CT_MIN = 2, CT_MAX = 3 };

extern const fl_model WT_WATERTANK_MODEL;  /* singlewatertank-20sim  */
extern const fl_model WT_CONTROLLER_MODEL; /* watertankcontroller-c */

/* Pure step functions, exposed for cross-implementation equivalence tests. */
double watertank_c_step(double level, double valve, double inflow_rate,
                        double outflow_rate, double h);
double controller_c_step(double level, double prev_valve, double min_level,
                         double max_level);

/* Model lookup by name; returns NULL when unknown. */
const fl_model *wt_model_by_name(const char *model_name);

#endif /* WT_MODELS_H */
