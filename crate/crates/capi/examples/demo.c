/* Minimal consumer of the rstreg C API: loads two PGM files, detects the
 * RST parameters, and prints them.
 *
 * Build (from the repository root, after `cargo build -p rstreg-capi`):
 *
 *   cc crates/capi/examples/demo.c \
 *      -Icrates/capi/include -Ltarget/debug -lrstreg_capi -lm -o demo
 *   LD_LIBRARY_PATH=target/debug ./demo reference.pgm user.pgm
 */
#include <stdio.h>
#include <stdlib.h>

#include "rstreg.h"

static unsigned char *read_file(const char *path, size_t *len) {
    FILE *f = fopen(path, "rb");
    if (!f) {
        return NULL;
    }
    fseek(f, 0, SEEK_END);
    long size = ftell(f);
    fseek(f, 0, SEEK_SET);
    unsigned char *buf = malloc((size_t)size);
    if (buf && fread(buf, 1, (size_t)size, f) != (size_t)size) {
        free(buf);
        buf = NULL;
    }
    fclose(f);
    *len = (size_t)size;
    return buf;
}

int main(int argc, char **argv) {
    if (argc != 3) {
        fprintf(stderr, "usage: %s reference.pgm user.pgm\n", argv[0]);
        return 2;
    }

    size_t ref_len, user_len;
    unsigned char *ref_bytes = read_file(argv[1], &ref_len);
    unsigned char *user_bytes = read_file(argv[2], &user_len);
    if (!ref_bytes || !user_bytes) {
        fprintf(stderr, "cannot read input files\n");
        return 2;
    }

    RstregImage *reference = NULL;
    RstregImage *user = NULL;
    RstregStatus status = rstreg_image_load_pnm(ref_bytes, ref_len, &reference);
    if (status == RSTREG_STATUS_OK) {
        status = rstreg_image_load_pnm(user_bytes, user_len, &user);
    }
    if (status != RSTREG_STATUS_OK) {
        fprintf(stderr, "decode failed: status %d\n", (int)status);
        return 1;
    }

    RstregConfig config = rstreg_config_default();
    RstregReport *report = NULL;
    status = rstreg_detect(reference, user, &config, &report);
    if (status != RSTREG_STATUS_OK) {
        fprintf(stderr, "detection failed: status %d\n", (int)status);
        return 1;
    }

    size_t dx, dy;
    rstreg_report_translation(report, &dx, &dy);
    printf("rotation: %.1f deg\n", rstreg_report_rotation_deg(report));
    printf("scale:    %.4f\n", rstreg_report_scale(report));
    printf("translation: (%zu, %zu)\n", dx, dy);

    rstreg_report_free(report);
    rstreg_image_free(reference);
    rstreg_image_free(user);
    free(ref_bytes);
    free(user_bytes);
    return 0;
}
