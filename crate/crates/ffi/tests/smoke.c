#include <stdio.h>
#include <string.h>

#include "ltlground.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(int argc, char **argv) {
    LgFormula *f = NULL, *g = NULL;
    CHECK(lg_formula_parse_infix("F walmart & (!walmart U chase)", &f) == LG_STATUS_OK);
    char *text = NULL;
    CHECK(lg_formula_to_prefix(f, &text) == LG_STATUS_OK);
    CHECK(strcmp(text, "& F walmart U ! walmart chase") == 0);
    lg_string_free(text);

    CHECK(lg_formula_classify(f, &text) == LG_STATUS_OK);
    CHECK(text && strcmp(text, "ordered_visit_2") == 0);
    lg_string_free(text);

    CHECK(lg_formula_parse_prefix("& F walmart", &g) == LG_STATUS_PARSE);
    CHECK(g == NULL && lg_last_error() != NULL);

    CHECK(argc > 1);
    LgMap *map = NULL;
    CHECK(lg_map_load(argv[1], &map) == LG_STATUS_OK);
    CHECK(lg_formula_parse_prefix("& F kitchen_counter G ! kitchen_counter", &g) == LG_STATUS_OK);
    bool sat = true;
    char *json = NULL;
    CHECK(lg_plan(map, g, &sat, &json) == LG_STATUS_OK);
    CHECK(!sat && strstr(json, "unsatisfiable") != NULL);
    lg_string_free(json);

    const char *props[] = {"a", "b"};
    LgDecoder *d = NULL;
    CHECK(lg_decoder_new(props, 2, 3, 10, &d) == LG_STATUS_OK);
    size_t n = lg_decoder_vocab_size(d);
    bool mask[64];
    CHECK(n <= 64);
    /* greedy: always the last admissible token */
    while (!lg_decoder_finished(d)) {
        CHECK(lg_decoder_allowed(d, mask, n) == LG_STATUS_OK);
        size_t pick = n;
        for (size_t i = 0; i < n; i++)
            if (mask[i]) pick = i;
        CHECK(pick < n);
        CHECK(lg_decoder_feed(d, pick) == LG_STATUS_OK);
    }
    LgFormula *h = NULL;
    CHECK(lg_decoder_formula(d, &h) == LG_STATUS_OK);
    CHECK(lg_formula_to_prefix(h, &text) == LG_STATUS_OK);
    printf("%s\n", text);
    lg_string_free(text);

    lg_formula_free(h);
    lg_decoder_free(d);
    lg_map_free(map);
    lg_formula_free(g);
    lg_formula_free(f);
    return 0;
}
