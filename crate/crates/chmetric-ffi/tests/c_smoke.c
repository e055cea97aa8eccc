/* Minimal C caller: build two states, measure their distance, clean up.
 * Exits nonzero on the first unexpected status or value. */

#include <math.h>
#include <stdio.h>

#include "chmetric.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "FAILED at line %d: %s\n", __LINE__, #cond); \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    CHECK(chm_version() != NULL);

    ChmSolution *sol = NULL;
    CHECK(chm_solution_new(2.0, 2.0, &sol) == ChmOk);
    CHECK(chm_solution_new(-1.0, 2.0, &sol) == ChmInvalidArgument);

    double c = 0.0;
    CHECK(chm_solution_energy(sol, &c) == ChmOk);
    CHECK(fabs(c - 4.0) < 1e-15);

    double u = 1.0;
    CHECK(chm_velocity_at(sol, 2.0, 0.5, &u) == ChmOk);
    CHECK(u == 0.0); /* velocity vanishes at the breaking time */

    ChmScaled *peak = NULL;
    ChmScaled *zero = NULL;
    CHECK(chm_scaled_exact(sol, 3.0, 64, &peak) == ChmOk);
    CHECK(chm_scaled_zero(64, &zero) == ChmOk);
    CHECK(chm_scaled_len(peak) == 64);

    double a = 0.0;
    CHECK(chm_scaled_amplitude(peak, &a) == ChmOk);
    CHECK(fabs(a - sqrt(8.0)) < 1e-15);

    double eta[64];
    CHECK(chm_scaled_field(peak, ChmFieldEta, eta, 64) == ChmOk);
    CHECK(eta[0] > 0.0 && eta[63] < 1.0);
    CHECK(chm_scaled_field(peak, ChmFieldEta, eta, 32) == ChmMismatch);

    ChmDistance d;
    CHECK(chm_distance(peak, zero, &d) == ChmOk);
    CHECK(d.amplitude == a);
    CHECK(d.total >= a);
    CHECK(chm_distance(peak, peak, &d) == ChmOk);
    CHECK(d.total == 0.0);
    CHECK(chm_distance(peak, NULL, &d) == ChmNullArgument);

    chm_scaled_free(peak);
    chm_scaled_free(zero);
    chm_solution_free(sol);
    chm_solution_free(NULL);

    printf("c smoke ok\n");
    return 0;
}
