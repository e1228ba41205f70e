#include <stdio.h>
#include "hetcorr.h"

int main(void) {
    double g = 0.0;
    if (hetcorr_optimum_gain_db(0.4, 50.0, 0.9428, 1.9e14, 1.6e9, 1e-3, &g) != HETCORR_STATUS_OK) {
        char msg[256];
        hetcorr_last_error_message(msg, sizeof msg);
        fprintf(stderr, "%s\n", msg);
        return 1;
    }
    HetcorrScenario *s = NULL;
    if (hetcorr_scenario_from_preset("power-sweep", &s) != HETCORR_STATUS_OK) return 1;
    hetcorr_scenario_set_seed(s, 7);
    hetcorr_scenario_set_duration(s, 0.01);
    HetcorrResult *r = NULL;
    if (hetcorr_scenario_run(s, "hetcorr-c-out", 0, &r) == HETCORR_STATUS_OK) {
        double ac = 0.0, cc = 0.0;
        hetcorr_result_t_rec(r, &ac, &cc);
        printf("%s gain=%.2f t_rec_ac=%.0f t_rec_cc=%.0f\n", hetcorr_version(), g, ac, cc);
        hetcorr_result_free(r);
    }
    hetcorr_scenario_free(s);

    HetcorrCorrelator *c = NULL;
    double a[64] = {0}, b[64] = {0};
    a[1] = b[1] = 1.0;
    hetcorr_correlator_new(64, 1e6, &c);
    hetcorr_correlator_push(c, a, b, 64);
    size_t n = hetcorr_correlator_channels(c);
    double aa[32], ab[32], re[32], im[32];
    hetcorr_correlator_read(c, aa, ab, re, im, n);
    hetcorr_correlator_free(c);
    return 0;
}
