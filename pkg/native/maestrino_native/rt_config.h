/* Reader for the runtime configuration file consumed with -runtime.
 *
 * Supports exactly the schema the engine emits and nothing more: a top
 * level object with "environment_variables" (flat object of numbers),
 * "DataWriter" (array with one {"filename","type":"CSV"} object) and an
 * optional numeric "endTime". Unknown or duplicate keys are errors.
 */
#ifndef RT_CONFIG_H
#define RT_CONFIG_H

#define RT_MAX_PARAMS 256
#define RT_MAX_KEY 128
#define RT_MAX_PATH 1024
#define RT_MAX_ERROR 256

typedef struct {
    char key[RT_MAX_KEY];
    double value;
} rt_param;

typedef struct {
    rt_param params[RT_MAX_PARAMS];
    int n_params;
    char out_filename[RT_MAX_PATH];
    int has_end_time;
    double end_time;
} rt_config;

/* Parse `path` into `cfg`. Returns 0 on success; on failure returns -1 and
 * fills `error` (capacity RT_MAX_ERROR) with a message including the line
 * number. */
int rt_load_config(const char *path, rt_config *cfg, char *error);

/* Look up a parameter; returns 1 and stores the value when present. */
int rt_config_get(const rt_config *cfg, const char *key, double *out);

#endif /* RT_CONFIG_H */
