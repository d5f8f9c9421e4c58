#include <stdio.h>
#include "pdfa_forge.h"

int main(void) {
    PfPdfa *a = NULL;
    PfQuotient *h = NULL;
    if (pf_pdfa_builtin("fig3a", &a) != PF_STATUS_OK) {
        fprintf(stderr, "%s\n", pf_last_error());
        return 1;
    }
    if (pf_learn(a, "quant:7", "exact", 0, &h) != PF_STATUS_OK) {
        fprintf(stderr, "%s\n", pf_last_error());
        pf_pdfa_free(a);
        return 1;
    }
    printf("%zu states\n", pf_quotient_num_states(h));
    pf_quotient_free(h);
    pf_pdfa_free(a);
    return 0;
}
