#include "rt_config.h"

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

/* Hand-rolled scanner for the flat runtime schema: one object level for
 * environment_variables, one array level for DataWriter. Tracks the line
 * number for error messages. No general JSON features (nested arrays,
 * unicode escapes, exponents-in-keys) are needed or accepted. */

typedef struct {
    const char *text;
    size_t pos;
    size_t len;
    int line;
    char *error;
} rt_scanner;

static int rt_err(rt_scanner *s, const char *msg) {
    snprintf(s->error, RT_MAX_ERROR, "line %d: %s", s->line, msg);
    return -1;
}

static void skip_ws(rt_scanner *s) {
    while (s->pos < s->len) {
        char c = s->text[s->pos];
        if (c == '\n')
            ++s->line;
        else if (c != ' ' && c != '\t' && c != '\r')
            break;
        ++s->pos;
    }
}

static int expect(rt_scanner *s, char c, const char *msg) {
    skip_ws(s);
    if (s->pos >= s->len || s->text[s->pos] != c)
        return rt_err(s, msg);
    ++s->pos;
    return 0;
}

static int peek(rt_scanner *s) {
    skip_ws(s);
    return s->pos < s->len ? s->text[s->pos] : EOF;
}

static int parse_string(rt_scanner *s, char *out, size_t cap) {
    if (expect(s, '"', "expected a string") != 0)
        return -1;
    size_t n = 0;
    while (s->pos < s->len) {
        char c = s->text[s->pos++];
        if (c == '"') {
            out[n] = '\0';
            return 0;
        }
        if (c == '\\') {
            if (s->pos >= s->len)
                break;
            char esc = s->text[s->pos++];
            if (esc == '"' || esc == '\\' || esc == '/')
                c = esc;
            else
                return rt_err(s, "unsupported string escape");
        }
        if (c == '\n')
            return rt_err(s, "unterminated string");
        if (n + 1 >= cap)
            return rt_err(s, "string too long");
        out[n++] = c;
    }
    return rt_err(s, "unterminated string");
}

static int parse_number(rt_scanner *s, double *out) {
    skip_ws(s);
    char *end = NULL;
    *out = strtod(s->text + s->pos, &end);
    if (end == s->text + s->pos)
        return rt_err(s, "expected a number");
    s->pos = (size_t)(end - s->text);
    return 0;
}

static int parse_env_vars(rt_scanner *s, rt_config *cfg) {
    if (expect(s, '{', "environment_variables must be an object") != 0)
        return -1;
    if (peek(s) == '}') {
        ++s->pos;
        return 0;
    }
    for (;;) {
        char key[RT_MAX_KEY];
        if (parse_string(s, key, sizeof key) != 0)
            return -1;
        if (expect(s, ':', "expected ':' after key") != 0)
            return -1;
        double value;
        if (parse_number(s, &value) != 0)
            return -1;
        for (int i = 0; i < cfg->n_params; ++i)
            if (strcmp(cfg->params[i].key, key) == 0)
                return rt_err(s, "duplicate environment variable");
        if (cfg->n_params >= RT_MAX_PARAMS)
            return rt_err(s, "too many environment variables");
        strcpy(cfg->params[cfg->n_params].key, key);
        cfg->params[cfg->n_params].value = value;
        ++cfg->n_params;
        int c = peek(s);
        if (c == ',') {
            ++s->pos;
            continue;
        }
        if (c == '}') {
            ++s->pos;
            return 0;
        }
        return rt_err(s, "expected ',' or '}' in environment_variables");
    }
}

static int parse_data_writer(rt_scanner *s, rt_config *cfg) {
    if (expect(s, '[', "DataWriter must be an array") != 0)
        return -1;
    if (peek(s) == ']')
        return rt_err(s, "DataWriter needs at least one entry");
    int n_writers = 0;
    for (;;) {
        if (expect(s, '{', "DataWriter entries must be objects") != 0)
            return -1;
        int have_filename = 0, have_type = 0;
        for (;;) {
            char key[RT_MAX_KEY];
            if (parse_string(s, key, sizeof key) != 0)
                return -1;
            if (expect(s, ':', "expected ':' after key") != 0)
                return -1;
            if (strcmp(key, "filename") == 0) {
                if (have_filename)
                    return rt_err(s, "duplicate filename");
                if (parse_string(s, cfg->out_filename, sizeof cfg->out_filename) != 0)
                    return -1;
                have_filename = 1;
            } else if (strcmp(key, "type") == 0) {
                char type[16];
                if (have_type)
                    return rt_err(s, "duplicate type");
                if (parse_string(s, type, sizeof type) != 0)
                    return -1;
                if (strcmp(type, "CSV") != 0)
                    return rt_err(s, "unsupported DataWriter type");
                have_type = 1;
            } else {
                return rt_err(s, "unknown DataWriter key");
            }
            int c = peek(s);
            if (c == ',') {
                ++s->pos;
                continue;
            }
            if (c == '}') {
                ++s->pos;
                break;
            }
            return rt_err(s, "expected ',' or '}' in DataWriter entry");
        }
        if (!have_filename || !have_type)
            return rt_err(s, "DataWriter entry needs filename and type");
        ++n_writers;
        int c = peek(s);
        if (c == ',') {
            ++s->pos;
            continue;
        }
        if (c == ']') {
            ++s->pos;
            break;
        }
        return rt_err(s, "expected ',' or ']' in DataWriter array");
    }
    if (n_writers != 1)
        return rt_err(s, "exactly one DataWriter entry is supported");
    return 0;
}

int rt_load_config(const char *path, rt_config *cfg, char *error) {
    memset(cfg, 0, sizeof *cfg);
    error[0] = '\0';

    FILE *f = fopen(path, "rb");
    if (!f) {
        snprintf(error, RT_MAX_ERROR, "cannot open %s", path);
        return -1;
    }
    fseek(f, 0, SEEK_END);
    long size = ftell(f);
    fseek(f, 0, SEEK_SET);
    if (size < 0 || size > 1 << 20) {
        fclose(f);
        snprintf(error, RT_MAX_ERROR, "unreadable or oversized file %s", path);
        return -1;
    }
    char *text = malloc((size_t)size + 1);
    if (!text || fread(text, 1, (size_t)size, f) != (size_t)size) {
        fclose(f);
        free(text);
        snprintf(error, RT_MAX_ERROR, "cannot read %s", path);
        return -1;
    }
    fclose(f);
    text[size] = '\0';

    rt_scanner s = {text, 0, (size_t)size, 1, error};
    int have_env = 0, have_writer = 0, have_end = 0;
    int rc = -1;

    if (peek(&s) == EOF) {
        rt_err(&s, "empty runtime file");
        goto done;
    }
    if (expect(&s, '{', "runtime file must start with '{'") != 0)
        goto done;
    if (peek(&s) == '}') {
        ++s.pos;
    } else {
        for (;;) {
            char key[RT_MAX_KEY];
            if (parse_string(&s, key, sizeof key) != 0)
                goto done;
            if (expect(&s, ':', "expected ':' after key") != 0)
                goto done;
            if (strcmp(key, "environment_variables") == 0) {
                if (have_env) {
                    rt_err(&s, "duplicate environment_variables");
                    goto done;
                }
                if (parse_env_vars(&s, cfg) != 0)
                    goto done;
                have_env = 1;
            } else if (strcmp(key, "DataWriter") == 0) {
                if (have_writer) {
                    rt_err(&s, "duplicate DataWriter");
                    goto done;
                }
                if (parse_data_writer(&s, cfg) != 0)
                    goto done;
                have_writer = 1;
            } else if (strcmp(key, "endTime") == 0) {
                if (have_end) {
                    rt_err(&s, "duplicate endTime");
                    goto done;
                }
                if (parse_number(&s, &cfg->end_time) != 0)
                    goto done;
                cfg->has_end_time = 1;
                have_end = 1;
            } else {
                rt_err(&s, "unknown runtime key");
                goto done;
            }
            int c = peek(&s);
            if (c == ',') {
                ++s.pos;
                continue;
            }
            if (c == '}') {
                ++s.pos;
                break;
            }
            rt_err(&s, "expected ',' or '}' at top level");
            goto done;
        }
    }
    if (peek(&s) != EOF) {
        rt_err(&s, "trailing content after top-level object");
        goto done;
    }
    if (!have_writer) {
        rt_err(&s, "runtime file needs a DataWriter");
        goto done;
    }
    rc = 0;

done:
    free(text);
    return rc;
}

int rt_config_get(const rt_config *cfg, const char *key, double *out) {
    for (int i = 0; i < cfg->n_params; ++i) {
        if (strcmp(cfg->params[i].key, key) == 0) {
            *out = cfg->params[i].value;
            return 1;
        }
    }
    return 0;
}
