/* cc -Icrates/ffi/include crates/ffi/examples/demo.c target/release/libbubble_ffi.a -lm -lpthread -ldl */
#include <stdio.h>
#include "bubble.h"

int main(void) {
    BubbleModel *m = NULL;
    BubbleSurface *s = NULL;
    BubblePayoff f = {BUBBLE_PAYOFF_KIND_IDENTITY, 0.0};
    BubbleGrid g = {100.0, 9999, 2000, 1.0, 1.0, 0};
    double v, exact;

    if (bubble_model_new(1.0, 2.0, 1.0, &m) != BUBBLE_STATUS_OK) return 1;
    BubbleStatus st = bubble_pde_solve_fbeta(m, f, &g, &s);
    if (st != BUBBLE_STATUS_OK) {
        fprintf(stderr, "%s: %s\n", bubble_status_str(st), bubble_last_error_message());
        return 1;
    }
    bubble_surface_at(s, 1.0, 0.0, &v);
    bubble_cev_price(1.0, 0.0, 1.0, &exact);
    printf("pde %.6f  exact %.6f\n", v, exact);
    bubble_surface_free(s);
    bubble_model_free(m);
    return 0;
}
