/* Deterministic CSV output: shortest round-trip decimal formatting of
 * binary64 values, matching the engine's formatter digit for digit.
 */
#ifndef RT_CSV_H
#define RT_CSV_H

#include <stdio.h>

/* Longest possible rendering: sign + 17 digits + point + "e-308" + NUL. */
#define RT_REAL_BUF 32

/* Format `value` into `buf` (capacity RT_REAL_BUF). Returns the string
 * length, or -1 for non-finite values. The result is the shortest decimal
 * string that parses back to exactly `value` and always carries a '.' or
 * an exponent. */
int rt_format_real(double value, char *buf);

/* Same contract; `hint` carries the previous shortest precision for this
 * stream of values (0 for none) and is updated in place. Values in one CSV
 * column mostly keep their digit count, so the hint usually confirms
 * minimality in two probes. */
int rt_format_real_hinted(double value, char *buf, int *hint);

#define RT_CSV_MAX_COLUMNS 64

typedef struct {
    FILE *f;
    int hints[RT_CSV_MAX_COLUMNS];
} rt_csv_writer;

/* Open `path` for writing; returns 0 on success. */
int rt_csv_open(rt_csv_writer *w, const char *path);

/* Write a raw header line (no trailing newline in `header`). */
int rt_csv_header(rt_csv_writer *w, const char *header);

/* Write one comma-separated row of formatted reals. Returns 0 on success,
 * -1 on I/O failure, -2 on a non-finite value. */
int rt_csv_row(rt_csv_writer *w, const double *values, int n);

int rt_csv_close(rt_csv_writer *w);

#endif /* RT_CSV_H */
