#include <stdio.h>
#include <string.h>

#include "syrec.h"

static const char *ALU =
    "module alu(in op(1), out x0(2), in x1(2), in x2(2))\n"
    "  if (op = 1) then x0 ^= (x1 + x2) else x0 ^= (x1 - x2) fi (op = 1)\n";

int main(void) {
    SyrecCircuit *c = NULL;
    if (syrec_compile(ALU, SYREC_MODE_LINE_AWARE, &c) != SYREC_STATUS_OK) {
        fprintf(stderr, "compile: %s\n", syrec_last_error_message());
        return 1;
    }
    SyrecStats s;
    syrec_circuit_stats(c, &s);
    const char *names[] = {"op", "x1", "x2"};
    uint64_t values[] = {1, 3, 1};
    SyrecValues *out = NULL;
    if (syrec_simulate(c, names, values, 3, &out) != SYREC_STATUS_OK) {
        fprintf(stderr, "simulate: %s\n", syrec_last_error_message());
        return 1;
    }
    uint64_t x0 = 99;
    syrec_values_get(out, "x0", &x0);
    char *real = NULL;
    syrec_circuit_real(c, &real);
    printf("lines=%zu constants=%zu x0=%llu real=%d\n", s.lines, s.constants, (unsigned long long)x0,
           real != NULL && strstr(real, ".numvars 7") != NULL);
    syrec_string_free(real);
    syrec_values_free(out);
    syrec_circuit_free(c);

    SyrecCircuit *bad = (SyrecCircuit *)1;
    SyrecStatus st = syrec_compile("module", SYREC_MODE_COST_AWARE, &bad);
    printf("bad=%d null=%d msg=%d\n", (int)st, bad == NULL, syrec_last_error_message() != NULL);
    return 0;
}
