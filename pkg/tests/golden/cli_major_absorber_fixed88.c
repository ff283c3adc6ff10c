/* kernel: major_absorber */
/* generated text; edits will be overwritten */
/* #pragma olympus replicate R=2 */
/* #pragma olympus pack P=4 */
/* #pragma olympus double_buffer on */
/* #pragma olympus tile 512 */

#include <math.h>

static double q_fix_8_8(double x) {
    double s = nearbyint(x * 256.0);
    if (s > 32767.0) s = 32767.0;
    if (s < -32768.0) s = -32768.0;
    return s / 256.0;
}

static double i_strato[16];
static double i_flav[256];
static double i_T[2];
static double i_eta[1024];
static double i_p[32];

void major_absorber(const double *strato, const double *j_T, const double *j_p, const double *p_lev, const double *g_bnd, const double *bnd_to_flav, const double *j_eta, const double *r_mix, const double *f_major, const double *k_major, double *tau_abs) {
    /* i_strato[x] */
    for (int x = 0; x < 16; ++x) {
        i_strato[x] = ((p_lev[x] <= strato[0]) ? (1.0) : (0.0));
    }

    /* i_flav[x, g] */
    for (int x = 0; x < 16; ++x) {
        for (int g = 0; g < 16; ++g) {
            i_flav[(x) * 16 + g] = bnd_to_flav[((int)(i_strato[x])) * 4 + (int)(g_bnd[g])];
        }
    }

    /* i_T[__pick_i_T] */
    i_T[0] = j_T[0];
    i_T[1] = (j_T[0] + 1.0);

    /* i_eta[x, g, p, __pick_i_eta] */
    for (int x = 0; x < 16; ++x) {
        for (int g = 0; g < 16; ++g) {
            for (int p = 0; p < 2; ++p) {
                i_eta[(((x) * 16 + g) * 2 + p) * 2 + 0] = j_eta[(((int)(i_flav[(x) * 16 + g])) * 16 + x) * 2 + p];
                i_eta[(((x) * 16 + g) * 2 + p) * 2 + 1] = (j_eta[(((int)(i_flav[(x) * 16 + g])) * 16 + x) * 2 + p] + 1.0);
            }
        }
    }

    /* i_p[x, __pick_i_p] */
    for (int x = 0; x < 16; ++x) {
        i_p[(x) * 2 + 0] = (j_p[0] + i_strato[x]);
        i_p[(x) * 2 + 1] = ((j_p[0] + i_strato[x]) + 1.0);
    }

    /* tau_abs[x, g] */
    for (int x = 0; x < 16; ++x) {
        for (int g = 0; g < 16; ++g) {
            double acc = 0.0;
            for (int t = 0; t < 2; ++t) {
                for (int p = 0; p < 2; ++p) {
                    for (int e = 0; e < 2; ++e) {
                        acc += ((r_mix[(((int)(i_flav[(x) * 16 + g])) * 16 + x) * 2 + e] * f_major[(((((int)(i_flav[(x) * 16 + g])) * 16 + x) * 2 + t) * 2 + p) * 2 + e]) * k_major[((((int)(i_T[t])) * 8 + (int)(i_p[(x) * 2 + p])) * 4 + (int)(i_eta[(((x) * 16 + g) * 2 + p) * 2 + e])) * 16 + g]);
                    }
                }
            }
            tau_abs[(x) * 16 + g] = q_fix_8_8(acc);
        }
    }
}
