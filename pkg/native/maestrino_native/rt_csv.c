#include "rt_csv.h"

#include <math.h>
#include <stdlib.h>
#include <string.h>

/* Shortest round-trip formatting, presented exactly like the engine writes
 * it. The digits come from the smallest precision whose %e rendering parses
 * back bit-identically (printf and strtod are both correctly rounded);
 * presentation then follows the engine's rule: scientific notation if and
 * only if the decimal point position is <= -4 or > 16, fixed otherwise,
 * with a ".0" appended to integral fixed-form values and a signed two-digit
 * minimum exponent.
 *
 * Round-trip success is monotone in the digit count (each precision's
 * decimal grid refines the previous one, so the correctly rounded rendering
 * only gets closer to the value), which lets a binary search find the
 * shortest precision in at most five probes. Exact integers below 1e16 skip
 * the probing entirely. */

static int bits_equal(double a, double b) {
    return memcmp(&a, &b, sizeof(double)) == 0;
}

static int probe_round_trips(double value, int prec, char *probe, size_t cap) {
    snprintf(probe, cap, "%.*e", prec - 1, value);
    return bits_equal(strtod(probe, NULL), value);
}

/* Minimal round-trip precision within [1, 17], using `guess` (if in range)
 * to confirm the common case in two probes. Leaves the winning rendering in
 * `out_probe` (capacity 40). */
static int shortest_precision(double value, int guess, char *out_probe) {
    char candidate[40];
    int lo = 1, hi = 17;
    int best = 0;

    if (guess >= 1 && guess <= 17) {
        if (probe_round_trips(value, guess, candidate, sizeof candidate)) {
            best = guess;
            memcpy(out_probe, candidate, sizeof candidate);
            if (guess == 1 || !probe_round_trips(value, guess - 1, candidate, sizeof candidate))
                return best;
            best = guess - 1;
            memcpy(out_probe, candidate, sizeof candidate);
            hi = guess - 2;
        } else {
            lo = guess + 1;
        }
    }
    while (lo <= hi) {
        int prec = (lo + hi) / 2;
        if (probe_round_trips(value, prec, candidate, sizeof candidate)) {
            best = prec;
            memcpy(out_probe, candidate, sizeof candidate);
            hi = prec - 1;
        } else {
            lo = prec + 1;
        }
    }
    if (best == 0) { /* unreachable: 17 digits always round-trip */
        probe_round_trips(value, 17, out_probe, 40);
        best = 17;
    }
    return best;
}

int rt_format_real_hinted(double value, char *buf, int *hint) {
    char probe[40];
    char digits[20];

    if (isnan(value) || isinf(value))
        return -1;

    char *out = buf;
    if (signbit(value))
        *out++ = '-';
    if (value == 0.0) {
        strcpy(out, "0.0");
        return (int)strlen(buf);
    }

    double magnitude = fabs(value);
    if (magnitude < 1e16 && magnitude == floor(magnitude)) {
        sprintf(out, "%llu.0", (unsigned long long)magnitude);
        return (int)strlen(buf);
    }

    int guess = hint ? *hint : 0;
    int best = shortest_precision(value, guess, probe);
    if (hint)
        *hint = best;

    int exp10 = 0;
    int n_digits = 0;
    {
        const char *p = probe;
        if (*p == '-')
            ++p;
        for (; *p && *p != 'e'; ++p) {
            if (*p != '.')
                digits[n_digits++] = *p;
        }
        exp10 = (int)strtol(p + 1, NULL, 10);
    }
    /* A minimal-precision rendering never carries trailing zeros, but strip
     * defensively so presentation cannot disagree with minimality. */
    while (n_digits > 1 && digits[n_digits - 1] == '0')
        --n_digits;
    digits[n_digits] = '\0';

    int decpt = exp10 + 1; /* value = 0.digits * 10^decpt */

    if (decpt <= -4 || decpt > 16) {
        *out++ = digits[0];
        if (n_digits > 1) {
            *out++ = '.';
            memcpy(out, digits + 1, (size_t)(n_digits - 1));
            out += n_digits - 1;
        }
        out += sprintf(out, "e%+03d", decpt - 1);
        *out = '\0';
    } else if (decpt <= 0) {
        *out++ = '0';
        *out++ = '.';
        for (int i = 0; i < -decpt; ++i)
            *out++ = '0';
        memcpy(out, digits, (size_t)n_digits);
        out[n_digits] = '\0';
    } else if (decpt < n_digits) {
        memcpy(out, digits, (size_t)decpt);
        out += decpt;
        *out++ = '.';
        memcpy(out, digits + decpt, (size_t)(n_digits - decpt));
        out[n_digits - decpt] = '\0';
    } else {
        memcpy(out, digits, (size_t)n_digits);
        out += n_digits;
        for (int i = 0; i < decpt - n_digits; ++i)
            *out++ = '0';
        *out++ = '.';
        *out++ = '0';
        *out = '\0';
    }
    return (int)strlen(buf);
}

int rt_format_real(double value, char *buf) {
    return rt_format_real_hinted(value, buf, NULL);
}

int rt_csv_open(rt_csv_writer *w, const char *path) {
    w->f = fopen(path, "wb");
    memset(w->hints, 0, sizeof w->hints);
    return w->f ? 0 : -1;
}

int rt_csv_header(rt_csv_writer *w, const char *header) {
    if (fputs(header, w->f) < 0 || fputc('\n', w->f) == EOF)
        return -1;
    return 0;
}

int rt_csv_row(rt_csv_writer *w, const double *values, int n) {
    char buf[RT_REAL_BUF];
    for (int i = 0; i < n; ++i) {
        int *hint = i < RT_CSV_MAX_COLUMNS ? &w->hints[i] : NULL;
        if (rt_format_real_hinted(values[i], buf, hint) < 0)
            return -2;
        if (i > 0 && fputc(',', w->f) == EOF)
            return -1;
        if (fputs(buf, w->f) < 0)
            return -1;
    }
    return fputc('\n', w->f) == EOF ? -1 : 0;
}

int rt_csv_close(rt_csv_writer *w) {
    int rc = fclose(w->f);
    w->f = NULL;
    return rc;
}
