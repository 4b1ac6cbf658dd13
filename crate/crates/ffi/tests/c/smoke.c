#include <math.h>
#include <stdio.h>
#include <string.h>

#include "dlcomm.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__,        \
                    __LINE__, #cond, dlc_last_error());          \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    DlcCodebook *cb = NULL;
    size_t len = 0;
    CHECK(dlc_codebook_new(8, 4, &cb) == DLC_STATUS_OK);
    CHECK(dlc_codebook_len(cb, &len) == DLC_STATUS_OK);
    CHECK(len == 64);
    dlc_codebook_free(cb);

    CHECK(dlc_codebook_new(8, 9, &cb) == DLC_STATUS_DOMAIN);
    CHECK(strlen(dlc_last_error()) > 0);
    CHECK(dlc_codebook_len(NULL, &len) == DLC_STATUS_NULL_POINTER);

    DlcModel *model = NULL;
    CHECK(dlc_model_new(4, 1, 7, 1, &model) == DLC_STATUS_OK);
    DlcTrainOptions opts = dlc_train_options_default();
    opts.epochs = 3;
    opts.train_samples = 1000;
    double loss = NAN;
    CHECK(dlc_model_train(model, &opts, &loss) == DLC_STATUS_OK);
    CHECK(isfinite(loss));

    double x[7];
    size_t index = 99;
    CHECK(dlc_model_transmit(model, 3, x, 7) == DLC_STATUS_OK);
    CHECK(dlc_model_decode(model, x, 7, &index) == DLC_STATUS_OK);
    CHECK(index == 3);
    CHECK(dlc_model_transmit(model, 3, x, 5) == DLC_STATUS_SHAPE);

    DlcMetrics m;
    CHECK(dlc_model_estimate(model, DLC_AXIS_SNR_DB, 20.0, 1000, 1, &m) == DLC_STATUS_OK);
    CHECK(m.blocks == 1000 && m.bler <= 1.0);
    dlc_model_free(model);

    uint8_t data[4] = {1, 0, 1, 1}, code[7], back[4];
    CHECK(dlc_hamming_encode(data, code) == DLC_STATUS_OK);
    code[5] ^= 1;
    CHECK(dlc_hamming_decode_hd(code, back) == DLC_STATUS_OK);
    CHECK(memcmp(data, back, 4) == 0);

    DlcParamCounts c = dlc_param_counts(16, 7);
    CHECK(c.total == 35 * 23);
    printf("ok %s\n", dlc_version());
    return 0;
}
