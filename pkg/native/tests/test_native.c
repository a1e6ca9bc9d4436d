/* Unit tests for the C runtime: config reader, CSV formatter, models and
 * the instance lifecycle. Exits non-zero on the first failure.
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "../maestrino_native/fmi_lite.h"
#include "../maestrino_native/rt_config.h"
#include "../maestrino_native/rt_csv.h"
#include "../maestrino_native/wt_models.h"

static int failures = 0;

#define CHECK(cond)                                                          \
    do {                                                                     \
        if (!(cond)) {                                                       \
            ++failures;                                                      \
            fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond);  \
        }                                                                    \
    } while (0)

static void check_format(double value, const char *expected) {
    char buf[RT_REAL_BUF];
    int len = rt_format_real(value, buf);
    if (len < 0 || strcmp(buf, expected) != 0) {
        ++failures;
        fprintf(stderr, "FAIL format: got %s want %s\n", len < 0 ? "<err>" : buf,
                expected);
    }
}

static void test_formatter(void) {
    check_format(1.0, "1.0");
    check_format(-1.0, "-1.0");
    check_format(0.0, "0.0");
    check_format(-0.0, "-0.0");
    check_format(0.1, "0.1");
    check_format(0.1 + 0.2, "0.30000000000000004");
    check_format(60.0, "60.0");
    check_format(1e15, "1000000000000000.0");
    check_format(1e16, "1e+16");
    check_format(1e-4, "0.0001");
    check_format(1e-5, "1e-05");
    check_format(5e-324, "5e-324");
    check_format(1.7976931348623157e308, "1.7976931348623157e+308");
    check_format(2.100000000000001, "2.100000000000001");

    char buf[RT_REAL_BUF];
    CHECK(rt_format_real(0.0 / 0.0, buf) < 0);
    CHECK(rt_format_real(1.0 / 0.0, buf) < 0);
}

static void write_file(const char *path, const char *text) {
    FILE *f = fopen(path, "wb");
    fputs(text, f);
    fclose(f);
}

static void test_config_reader(void) {
    rt_config cfg;
    char error[RT_MAX_ERROR];

    write_file("tmp_rt_ok.json",
               "{\n"
               "  \"DataWriter\": [{\"filename\": \"results.csv\", \"type\": \"CSV\"}],\n"
               "  \"endTime\": 60.0,\n"
               "  \"environment_variables\": {\"crtlInstance.minLevel\": 1.0,\n"
               "                              \"crtlInstance.maxLevel\": 2.0}\n"
               "}\n");
    CHECK(rt_load_config("tmp_rt_ok.json", &cfg, error) == 0);
    CHECK(cfg.n_params == 2);
    CHECK(strcmp(cfg.out_filename, "results.csv") == 0);
    CHECK(cfg.has_end_time && cfg.end_time == 60.0);
    double v = 0.0;
    CHECK(rt_config_get(&cfg, "crtlInstance.minLevel", &v) == 1 && v == 1.0);
    CHECK(rt_config_get(&cfg, "nope", &v) == 0);

    write_file("tmp_rt_empty.json", "");
    CHECK(rt_load_config("tmp_rt_empty.json", &cfg, error) != 0);
    CHECK(strstr(error, "empty") != NULL);

    write_file("tmp_rt_dup.json",
               "{\"DataWriter\": [{\"filename\": \"r.csv\", \"type\": \"CSV\"}],\n"
               " \"environment_variables\": {\"a\": 1.0, \"a\": 2.0}}\n");
    CHECK(rt_load_config("tmp_rt_dup.json", &cfg, error) != 0);
    CHECK(strstr(error, "duplicate") != NULL);
    CHECK(strstr(error, "line 2") != NULL);

    write_file("tmp_rt_unknown.json",
               "{\"DataWriter\": [{\"filename\": \"r.csv\", \"type\": \"CSV\"}],\n"
               " \"bogus\": 1}\n");
    CHECK(rt_load_config("tmp_rt_unknown.json", &cfg, error) != 0);
    CHECK(strstr(error, "unknown runtime key") != NULL);

    write_file("tmp_rt_nowriter.json", "{\"environment_variables\": {}}\n");
    CHECK(rt_load_config("tmp_rt_nowriter.json", &cfg, error) != 0);

    remove("tmp_rt_ok.json");
    remove("tmp_rt_empty.json");
    remove("tmp_rt_dup.json");
    remove("tmp_rt_unknown.json");
    remove("tmp_rt_nowriter.json");
}

static void test_models(void) {
    CHECK(watertank_c_step(1.0, 0.0, 1.0, 2.0, 0.1) == 1.1);
    CHECK(watertank_c_step(2.0, 1.0, 1.0, 2.0, 0.1) == 1.9);
    CHECK(watertank_c_step(0.0, 1.0, 1.0, 2.0, 0.1) == 0.0);

    CHECK(controller_c_step(2.5, 0.0, 1.0, 2.0) == 1.0);
    CHECK(controller_c_step(0.5, 1.0, 1.0, 2.0) == 0.0);
    CHECK(controller_c_step(1.5, 1.0, 1.0, 2.0) == 1.0);
    CHECK(controller_c_step(1.5, 0.0, 1.0, 2.0) == 0.0);

    CHECK(wt_model_by_name("singlewatertank-20sim") == &WT_WATERTANK_MODEL);
    CHECK(wt_model_by_name("watertankcontroller-c") == &WT_CONTROLLER_MODEL);
    CHECK(wt_model_by_name("other") == NULL);
}

static void test_lifecycle(void) {
    fl_instance tank;
    double storage[5];
    CHECK(FL_API.instantiate(&tank, &WT_WATERTANK_MODEL, "wt", storage) == FL_OK);
    CHECK(storage[WT_LEVEL] == 1.0 && storage[WT_VALVE] == 0.0);

    double v = -1.0;
    CHECK(FL_API.get_real(&tank, WT_LEVEL, &v) == FL_OK && v == 1.0);
    CHECK(FL_API.get_real(&tank, 99, &v) == FL_FAIL);
    CHECK(FL_API.set_real(&tank, WT_LEVEL, 2.0) == FL_FAIL); /* output */
    CHECK(FL_API.set_real(&tank, WT_INITIAL, 0.5) == FL_OK);
    CHECK(FL_API.set_real(&tank, WT_VALVE, 0.5) == FL_FAIL); /* boolean */

    CHECK(FL_API.do_step(&tank, 0.0, 0.1) == FL_FAIL); /* before initialize */
    CHECK(fl_initialize(&tank, 0.0) == FL_OK);
    CHECK(storage[WT_LEVEL] == 0.5); /* init hook copied initialLevel */
    CHECK(fl_initialize(&tank, 0.0) == FL_FAIL);

    CHECK(FL_API.do_step(&tank, 0.0, 0.0) == FL_FAIL);  /* h = 0 */
    CHECK(FL_API.do_step(&tank, 0.05, 0.1) == FL_FAIL); /* clock mismatch */
    CHECK(FL_API.do_step(&tank, 0.0, 0.1) == FL_OK);
    CHECK(fabs(tank.current_time - 0.1) < 1e-15);
    CHECK(FL_API.set_real(&tank, WT_INITIAL, 1.0) == FL_FAIL); /* frozen */
    CHECK(FL_API.set_real(&tank, WT_VALVE, 1.0) == FL_OK);     /* inputs ok */

    CHECK(FL_API.terminate(&tank) == FL_OK);
    CHECK(FL_API.terminate(&tank) == FL_FAIL);
    CHECK(FL_API.do_step(&tank, 0.1, 0.1) == FL_FAIL);
    CHECK(FL_API.get_real(&tank, WT_LEVEL, &v) == FL_FAIL);
    CHECK(strlen(fl_last_error()) > 0);
}

int main(void) {
    test_formatter();
    test_config_reader();
    test_models();
    test_lifecycle();
    if (failures) {
        fprintf(stderr, "%d native test(s) failed\n", failures);
        return 1;
    }
    printf("all native tests passed\n");
    return 0;
}
