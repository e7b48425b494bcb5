/* Compiled as C99: proves the public header needs no C++ compiler. */
#include <stdio.h>
#include <string.h>

#include "qkd3/qkd3.h"

int main(void) {
    if (strlen(qkd3_version()) == 0) return 1;

    qkd3_params* params = NULL;
    if (qkd3_params_derive(4, 0.05, 0.1, 0.05, &params) != QKD3_OK) return 1;
    if (qkd3_params_r(params) != 7) return 1;

    qkd3_strategy* strategy = NULL;
    if (qkd3_strategy_parse("honest", &strategy) != QKD3_OK) return 1;

    qkd3_matrix* matrix = NULL;
    if (qkd3_matrix_generate(params, 20000, 42, &matrix) != QKD3_OK) return 1;

    qkd3_session* session = NULL;
    if (qkd3_session_run(params, strategy, matrix, 7, &session) != QKD3_OK) return 1;
    double rate = -1.0;
    if (qkd3_session_error_rate(session, &rate) != QKD3_OK || rate != 0.0) return 1;

    char* json = NULL;
    if (qkd3_session_to_json(session, &json) != QKD3_OK) return 1;
    qkd3_string_free(json);

    qkd3_session_free(session);
    qkd3_matrix_free(matrix);
    qkd3_strategy_free(strategy);
    qkd3_params_free(params);

    double v = 0.0;
    if (qkd3_binary_entropy(0.5, &v) != QKD3_OK || v < 0.999) return 1;
    if (qkd3_binary_entropy(2.0, &v) != QKD3_ERR_INVALID_ARGUMENT) return 1;
    if (strlen(qkd3_last_error()) == 0) return 1;

    printf("c header check ok\n");
    return 0;
}
