#include <stdio.h>

#include "raptor/raptor.h"

int main(void) {
    raptor_dataset* data = NULL;
    raptor_probe* probe = NULL;
    raptor_probe_options opts;
    raptor_status st = raptor_dataset_generate(8, 200, 2.0, 3, &data);
    if (st != RAPTOR_OK) {
        fprintf(stderr, "generate: %s\n", raptor_last_error());
        return 1;
    }
    raptor_probe_options_default(&opts);
    st = raptor_probe_train(data, &opts, &probe);
    if (st != RAPTOR_OK) {
        fprintf(stderr, "train: %s\n", raptor_last_error());
        raptor_dataset_free(data);
        return 1;
    }
    printf("lambda=%g test_accuracy=%g\n", raptor_probe_lambda(probe),
           raptor_probe_test_accuracy(probe));
    raptor_probe_free(probe);
    raptor_dataset_free(data);
    return 0;
}
