#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "gnnsim.h"

#define CHECK(call)                                                            \
    do {                                                                       \
        GnnsimStatus st_ = (call);                                             \
        if (st_ != GNNSIM_STATUS_OK) {                                         \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)st_,          \
                    gnnsim_last_error());                                      \
            return 1;                                                          \
        }                                                                      \
    } while (0)

int main(void) {
    GnnsimGraph *g = NULL;
    GnnsimFeatures *f = NULL;
    GnnsimNetwork *n = NULL;
    GnnsimHardware *hw = NULL;
    GnnsimReport *r = NULL;

    CHECK(gnnsim_graph_random(64, 4.0, 1, &g));
    CHECK(gnnsim_features_random(64, 16, 2, &f));
    CHECK(gnnsim_network_builtin(GNNSIM_NETWORK_KIND_GCN, 16, 8, 4, 3, &n));
    CHECK(gnnsim_hardware_default(&hw));

    GnnsimDataflow df = gnnsim_dataflow_default();
    df.blocked = true;
    df.block_size = 4;
    CHECK(gnnsim_run(g, f, n, hw, &df, true, &r));

    GnnsimStats stats;
    CHECK(gnnsim_report_stats(r, &stats));
    size_t rows = 0, cols = 0;
    CHECK(gnnsim_report_output_shape(r, &rows, &cols));
    float *out = malloc(rows * cols * sizeof(float));
    CHECK(gnnsim_report_copy_output(r, out, rows * cols));
    char *hash = gnnsim_report_output_hash(r);
    printf("cycles=%llu rows=%zu cols=%zu hash=%s\n",
           (unsigned long long)stats.total_cycles, rows, cols, hash);
    gnnsim_string_free(hash);
    free(out);

    df.block_size = 999;
    GnnsimReport *bad = NULL;
    if (gnnsim_run(g, f, n, hw, &df, true, &bad) != GNNSIM_STATUS_CONFIG || bad != NULL ||
        strlen(gnnsim_last_error()) == 0) {
        fprintf(stderr, "expected a config error\n");
        return 1;
    }

    gnnsim_report_free(r);
    gnnsim_hardware_free(hw);
    gnnsim_network_free(n);
    gnnsim_features_free(f);
    gnnsim_graph_free(g);
    return 0;
}
