#include "xt/kernels.hpp"

#include <omp.h>

namespace xt::kernels {

namespace {

Mode g_mode = Mode::OpenMP;
int g_threads = 0;

int resolve_threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

inline int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Per-output-element helpers. Serial and OpenMP variants both call these, so
// the floating-point accumulation order is identical in either mode.

inline double conv_cell(const double* x, const double* w, const Conv2dDims& d,
                        int n, int f, int i, int j) {
    double acc = 0.0;
    const int ih0 = i * d.stride - d.pad;
    const int iw0 = j * d.stride - d.pad;
    for (int c = 0; c < d.c; ++c) {
        const double* xc = x + (static_cast<size_t>(n) * d.c + c) * d.h * d.w;
        const double* wc = w + (static_cast<size_t>(f) * d.c + c) * d.kh * d.kw;
        for (int p = 0; p < d.kh; ++p) {
            const int ih = ih0 + p;
            if (ih < 0 || ih >= d.h) continue;
            const double* xrow = xc + static_cast<size_t>(ih) * d.w;
            const double* wrow = wc + static_cast<size_t>(p) * d.kw;
            for (int q = 0; q < d.kw; ++q) {
                const int iw = iw0 + q;
                if (iw < 0 || iw >= d.w) continue;
                acc += xrow[iw] * wrow[q];
            }
        }
    }
    return acc;
}

inline double conv_input_grad_cell(const double* gy, const double* w, const Conv2dDims& d,
                                   int n, int c, int ih, int iw) {
    double acc = 0.0;
    for (int f = 0; f < d.f; ++f) {
        const double* gyf = gy + (static_cast<size_t>(n) * d.f + f) * d.oh * d.ow;
        const double* wc = w + (static_cast<size_t>(f) * d.c + c) * d.kh * d.kw;
        for (int p = 0; p < d.kh; ++p) {
            const int num_h = ih + d.pad - p;
            if (num_h < 0 || num_h % d.stride != 0) continue;
            const int oh = num_h / d.stride;
            if (oh >= d.oh) continue;
            for (int q = 0; q < d.kw; ++q) {
                const int num_w = iw + d.pad - q;
                if (num_w < 0 || num_w % d.stride != 0) continue;
                const int ow = num_w / d.stride;
                if (ow >= d.ow) continue;
                acc += gyf[static_cast<size_t>(oh) * d.ow + ow] *
                       wc[static_cast<size_t>(p) * d.kw + q];
            }
        }
    }
    return acc;
}

inline double conv_weight_grad_cell(const double* gy, const double* x, const Conv2dDims& d,
                                    int f, int c, int p, int q) {
    double acc = 0.0;
    for (int n = 0; n < d.n; ++n) {
        const double* gyf = gy + (static_cast<size_t>(n) * d.f + f) * d.oh * d.ow;
        const double* xc = x + (static_cast<size_t>(n) * d.c + c) * d.h * d.w;
        for (int oh = 0; oh < d.oh; ++oh) {
            const int ih = oh * d.stride - d.pad + p;
            if (ih < 0 || ih >= d.h) continue;
            const double* xrow = xc + static_cast<size_t>(ih) * d.w;
            const double* gyrow = gyf + static_cast<size_t>(oh) * d.ow;
            for (int ow = 0; ow < d.ow; ++ow) {
                const int iw = ow * d.stride - d.pad + q;
                if (iw < 0 || iw >= d.w) continue;
                acc += gyrow[ow] * xrow[iw];
            }
        }
    }
    return acc;
}

inline double conv_bias_grad_cell(const double* gy, const Conv2dDims& d, int f) {
    double acc = 0.0;
    for (int n = 0; n < d.n; ++n) {
        const double* gyf = gy + (static_cast<size_t>(n) * d.f + f) * d.oh * d.ow;
        for (int k = 0; k < d.oh * d.ow; ++k) acc += gyf[k];
    }
    return acc;
}

inline double sep_cell(const double* x, int h, int w, const double* taps, int radius,
                       bool horizontal, int r, int c) {
    double acc = 0.0;
    if (horizontal) {
        const double* row = x + static_cast<size_t>(r) * w;
        for (int k = -radius; k <= radius; ++k)
            acc += taps[k + radius] * row[reflect(c + k, w)];
    } else {
        for (int k = -radius; k <= radius; ++k)
            acc += taps[k + radius] * x[static_cast<size_t>(reflect(r + k, h)) * w + c];
    }
    return acc;
}

}  // namespace

Mode mode() { return g_mode; }
void set_mode(Mode m) { g_mode = m; }
void set_threads(int n) { g_threads = n; }
int threads() { return g_threads; }

// ---------------------------------------------------------------------------
// serial reference
// ---------------------------------------------------------------------------

namespace serial {

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dDims& d) {
    for (int n = 0; n < d.n; ++n)
        for (int f = 0; f < d.f; ++f) {
            double* yf = y + (static_cast<size_t>(n) * d.f + f) * d.oh * d.ow;
            for (int i = 0; i < d.oh; ++i)
                for (int j = 0; j < d.ow; ++j)
                    yf[static_cast<size_t>(i) * d.ow + j] = b[f] + conv_cell(x, w, d, n, f, i, j);
        }
}

void conv2d_backward_input(const double* gy, const double* w, double* gx, const Conv2dDims& d) {
    for (int n = 0; n < d.n; ++n)
        for (int c = 0; c < d.c; ++c) {
            double* gxc = gx + (static_cast<size_t>(n) * d.c + c) * d.h * d.w;
            for (int ih = 0; ih < d.h; ++ih)
                for (int iw = 0; iw < d.w; ++iw)
                    gxc[static_cast<size_t>(ih) * d.w + iw] +=
                        conv_input_grad_cell(gy, w, d, n, c, ih, iw);
        }
}

void conv2d_backward_weight(const double* gy, const double* x, double* gw, const Conv2dDims& d) {
    for (int f = 0; f < d.f; ++f)
        for (int c = 0; c < d.c; ++c)
            for (int p = 0; p < d.kh; ++p)
                for (int q = 0; q < d.kw; ++q)
                    gw[((static_cast<size_t>(f) * d.c + c) * d.kh + p) * d.kw + q] +=
                        conv_weight_grad_cell(gy, x, d, f, c, p, q);
}

void conv2d_backward_bias(const double* gy, double* gb, const Conv2dDims& d) {
    for (int f = 0; f < d.f; ++f) gb[f] += conv_bias_grad_cell(gy, d, f);
}

void avgpool2_forward(const double* x, double* y, int n, int c, int h, int w) {
    const int oh = h / 2, ow = w / 2;
    for (int p = 0; p < n * c; ++p) {
        const double* xp = x + static_cast<size_t>(p) * h * w;
        double* yp = y + static_cast<size_t>(p) * oh * ow;
        for (int i = 0; i < oh; ++i)
            for (int j = 0; j < ow; ++j) {
                const double* x0 = xp + static_cast<size_t>(2 * i) * w + 2 * j;
                yp[static_cast<size_t>(i) * ow + j] = (x0[0] + x0[1] + x0[w] + x0[w + 1]) * 0.25;
            }
    }
}

void avgpool2_backward(const double* gy, double* gx, int n, int c, int h, int w) {
    const int ow = w / 2;
    for (int p = 0; p < n * c; ++p) {
        const double* gyp = gy + static_cast<size_t>(p) * (h / 2) * ow;
        double* gxp = gx + static_cast<size_t>(p) * h * w;
        for (int ih = 0; ih < h; ++ih)
            for (int iw = 0; iw < w; ++iw)
                gxp[static_cast<size_t>(ih) * w + iw] +=
                    0.25 * gyp[static_cast<size_t>(ih / 2) * ow + iw / 2];
    }
}

void affine_forward(const double* x, const double* w, const double* b, double* y,
                    int n, int d, int e) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < e; ++j) {
            double acc = b[j];
            for (int k = 0; k < d; ++k) acc += x[static_cast<size_t>(i) * d + k] * w[static_cast<size_t>(k) * e + j];
            y[static_cast<size_t>(i) * e + j] = acc;
        }
}

void affine_backward_input(const double* gy, const double* w, double* gx, int n, int d, int e) {
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            double acc = 0.0;
            for (int j = 0; j < e; ++j) acc += gy[static_cast<size_t>(i) * e + j] * w[static_cast<size_t>(k) * e + j];
            gx[static_cast<size_t>(i) * d + k] += acc;
        }
}

void affine_backward_weight(const double* gy, const double* x, double* gw, int n, int d, int e) {
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < e; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += x[static_cast<size_t>(i) * d + k] * gy[static_cast<size_t>(i) * e + j];
            gw[static_cast<size_t>(k) * e + j] += acc;
        }
}

void affine_backward_bias(const double* gy, double* gb, int n, int e) {
    for (int j = 0; j < e; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += gy[static_cast<size_t>(i) * e + j];
        gb[j] += acc;
    }
}

void sep_filter(const double* x, double* y, int h, int w, const double* taps, int radius,
                bool horizontal) {
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            y[static_cast<size_t>(r) * w + c] = sep_cell(x, h, w, taps, radius, horizontal, r, c);
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP kernels: parallel over disjoint outputs, same per-cell math
// ---------------------------------------------------------------------------

namespace omp {

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dDims& d) {
    const int nt = resolve_threads();
#pragma omp parallel for collapse(2) schedule(static) num_threads(nt)
    for (int n = 0; n < d.n; ++n)
        for (int f = 0; f < d.f; ++f) {
            double* yf = y + (static_cast<size_t>(n) * d.f + f) * d.oh * d.ow;
            for (int i = 0; i < d.oh; ++i)
                for (int j = 0; j < d.ow; ++j)
                    yf[static_cast<size_t>(i) * d.ow + j] = b[f] + conv_cell(x, w, d, n, f, i, j);
        }
}

void conv2d_backward_input(const double* gy, const double* w, double* gx, const Conv2dDims& d) {
    const int nt = resolve_threads();
#pragma omp parallel for collapse(2) schedule(static) num_threads(nt)
    for (int n = 0; n < d.n; ++n)
        for (int c = 0; c < d.c; ++c) {
            double* gxc = gx + (static_cast<size_t>(n) * d.c + c) * d.h * d.w;
            for (int ih = 0; ih < d.h; ++ih)
                for (int iw = 0; iw < d.w; ++iw)
                    gxc[static_cast<size_t>(ih) * d.w + iw] +=
                        conv_input_grad_cell(gy, w, d, n, c, ih, iw);
        }
}

void conv2d_backward_weight(const double* gy, const double* x, double* gw, const Conv2dDims& d) {
    const int nt = resolve_threads();
#pragma omp parallel for collapse(2) schedule(static) num_threads(nt)
    for (int f = 0; f < d.f; ++f)
        for (int c = 0; c < d.c; ++c)
            for (int p = 0; p < d.kh; ++p)
                for (int q = 0; q < d.kw; ++q)
                    gw[((static_cast<size_t>(f) * d.c + c) * d.kh + p) * d.kw + q] +=
                        conv_weight_grad_cell(gy, x, d, f, c, p, q);
}

void conv2d_backward_bias(const double* gy, double* gb, const Conv2dDims& d) {
    const int nt = resolve_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int f = 0; f < d.f; ++f) gb[f] += conv_bias_grad_cell(gy, d, f);
}

void avgpool2_forward(const double* x, double* y, int n, int c, int h, int w) {
    const int oh = h / 2, ow = w / 2;
    const int nt = resolve_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int p = 0; p < n * c; ++p) {
        const double* xp = x + static_cast<size_t>(p) * h * w;
        double* yp = y + static_cast<size_t>(p) * oh * ow;
        for (int i = 0; i < oh; ++i)
            for (int j = 0; j < ow; ++j) {
                const double* x0 = xp + static_cast<size_t>(2 * i) * w + 2 * j;
                yp[static_cast<size_t>(i) * ow + j] = (x0[0] + x0[1] + x0[w] + x0[w + 1]) * 0.25;
            }
    }
}

void avgpool2_backward(const double* gy, double* gx, int n, int c, int h, int w) {
    const int ow = w / 2;
    const int nt = resolve_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int p = 0; p < n * c; ++p) {
        const double* gyp = gy + static_cast<size_t>(p) * (h / 2) * ow;
        double* gxp = gx + static_cast<size_t>(p) * h * w;
        for (int ih = 0; ih < h; ++ih)
            for (int iw = 0; iw < w; ++iw)
                gxp[static_cast<size_t>(ih) * w + iw] +=
                    0.25 * gyp[static_cast<size_t>(ih / 2) * ow + iw / 2];
    }
}

void affine_forward(const double* x, const double* w, const double* b, double* y,
                    int n, int d, int e) {
    const int nt = resolve_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < e; ++j) {
            double acc = b[j];
            for (int k = 0; k < d; ++k) acc += x[static_cast<size_t>(i) * d + k] * w[static_cast<size_t>(k) * e + j];
            y[static_cast<size_t>(i) * e + j] = acc;
        }
}

void affine_backward_input(const double* gy, const double* w, double* gx, int n, int d, int e) {
    const int nt = resolve_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            double acc = 0.0;
            for (int j = 0; j < e; ++j) acc += gy[static_cast<size_t>(i) * e + j] * w[static_cast<size_t>(k) * e + j];
            gx[static_cast<size_t>(i) * d + k] += acc;
        }
}

void affine_backward_weight(const double* gy, const double* x, double* gw, int n, int d, int e) {
    const int nt = resolve_threads();
#pragma omp parallel for collapse(2) schedule(static) num_threads(nt)
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < e; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += x[static_cast<size_t>(i) * d + k] * gy[static_cast<size_t>(i) * e + j];
            gw[static_cast<size_t>(k) * e + j] += acc;
        }
}

void affine_backward_bias(const double* gy, double* gb, int n, int e) {
    const int nt = resolve_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int j = 0; j < e; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += gy[static_cast<size_t>(i) * e + j];
        gb[j] += acc;
    }
}

void sep_filter(const double* x, double* y, int h, int w, const double* taps, int radius,
                bool horizontal) {
    const int nt = resolve_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            y[static_cast<size_t>(r) * w + c] = sep_cell(x, h, w, taps, radius, horizontal, r, c);
}

}  // namespace omp

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

#define XT_DISPATCH(fn, ...)                 \
    do {                                     \
        if (g_mode == Mode::Serial)          \
            serial::fn(__VA_ARGS__);         \
        else                                 \
            omp::fn(__VA_ARGS__);            \
    } while (0)

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dDims& d) { XT_DISPATCH(conv2d_forward, x, w, b, y, d); }
void conv2d_backward_input(const double* gy, const double* w, double* gx, const Conv2dDims& d) {
    XT_DISPATCH(conv2d_backward_input, gy, w, gx, d);
}
void conv2d_backward_weight(const double* gy, const double* x, double* gw, const Conv2dDims& d) {
    XT_DISPATCH(conv2d_backward_weight, gy, x, gw, d);
}
void conv2d_backward_bias(const double* gy, double* gb, const Conv2dDims& d) {
    XT_DISPATCH(conv2d_backward_bias, gy, gb, d);
}
void avgpool2_forward(const double* x, double* y, int n, int c, int h, int w) {
    XT_DISPATCH(avgpool2_forward, x, y, n, c, h, w);
}
void avgpool2_backward(const double* gy, double* gx, int n, int c, int h, int w) {
    XT_DISPATCH(avgpool2_backward, gy, gx, n, c, h, w);
}
void affine_forward(const double* x, const double* w, const double* b, double* y,
                    int n, int d, int e) { XT_DISPATCH(affine_forward, x, w, b, y, n, d, e); }
void affine_backward_input(const double* gy, const double* w, double* gx, int n, int d, int e) {
    XT_DISPATCH(affine_backward_input, gy, w, gx, n, d, e);
}
void affine_backward_weight(const double* gy, const double* x, double* gw, int n, int d, int e) {
    XT_DISPATCH(affine_backward_weight, gy, x, gw, n, d, e);
}
void affine_backward_bias(const double* gy, double* gb, int n, int e) {
    XT_DISPATCH(affine_backward_bias, gy, gb, n, e);
}
void sep_filter(const double* x, double* y, int h, int w, const double* taps, int radius,
                bool horizontal) { XT_DISPATCH(sep_filter, x, y, h, w, taps, radius, horizontal); }

#undef XT_DISPATCH

}  // namespace xt::kernels
