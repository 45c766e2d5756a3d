#pragma once

#include <cstddef>

namespace xt::kernels {

// Dense kernels behind the autodiff ops. Every kernel exists twice: a serial
// reference under kernels::serial and an OpenMP version under kernels::omp
// that parallelizes over disjoint output elements while keeping each
// element's accumulation order identical to the serial code. The two modes
// therefore produce bit-identical results (tested), and training stays
// reproducible at any thread count.
//
// Backward kernels ACCUMULATE (+=) into their gradient outputs.

enum class Mode { Serial, OpenMP };

Mode mode();
void set_mode(Mode m);
void set_threads(int n);  // 0 = OpenMP runtime default
int threads();

struct Conv2dDims {
    int n, c, h, w;    // input  [n,c,h,w]
    int f, kh, kw;     // kernel [f,c,kh,kw]
    int stride, pad;
    int oh, ow;        // output [n,f,oh,ow]
};

namespace serial {
void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dDims& d);
void conv2d_backward_input(const double* gy, const double* w, double* gx, const Conv2dDims& d);
void conv2d_backward_weight(const double* gy, const double* x, double* gw, const Conv2dDims& d);
void conv2d_backward_bias(const double* gy, double* gb, const Conv2dDims& d);

void avgpool2_forward(const double* x, double* y, int n, int c, int h, int w);
void avgpool2_backward(const double* gy, double* gx, int n, int c, int h, int w);

void affine_forward(const double* x, const double* w, const double* b, double* y,
                    int n, int d, int e);
void affine_backward_input(const double* gy, const double* w, double* gx, int n, int d, int e);
void affine_backward_weight(const double* gy, const double* x, double* gw, int n, int d, int e);
void affine_backward_bias(const double* gy, double* gb, int n, int e);

// Separable 1-D correlation along rows (horizontal=true) or columns, with
// reflect padding. taps has 2*radius+1 entries. One image plane [h,w].
void sep_filter(const double* x, double* y, int h, int w, const double* taps, int radius,
                bool horizontal);
}  // namespace serial

namespace omp {
void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dDims& d);
void conv2d_backward_input(const double* gy, const double* w, double* gx, const Conv2dDims& d);
void conv2d_backward_weight(const double* gy, const double* x, double* gw, const Conv2dDims& d);
void conv2d_backward_bias(const double* gy, double* gb, const Conv2dDims& d);

void avgpool2_forward(const double* x, double* y, int n, int c, int h, int w);
void avgpool2_backward(const double* gy, double* gx, int n, int c, int h, int w);

void affine_forward(const double* x, const double* w, const double* b, double* y,
                    int n, int d, int e);
void affine_backward_input(const double* gy, const double* w, double* gx, int n, int d, int e);
void affine_backward_weight(const double* gy, const double* x, double* gw, int n, int d, int e);
void affine_backward_bias(const double* gy, double* gb, int n, int e);

void sep_filter(const double* x, double* y, int h, int w, const double* taps, int radius,
                bool horizontal);
}  // namespace omp

// Mode-dispatching entry points used by the ops layer.
void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dDims& d);
void conv2d_backward_input(const double* gy, const double* w, double* gx, const Conv2dDims& d);
void conv2d_backward_weight(const double* gy, const double* x, double* gw, const Conv2dDims& d);
void conv2d_backward_bias(const double* gy, double* gb, const Conv2dDims& d);
void avgpool2_forward(const double* x, double* y, int n, int c, int h, int w);
void avgpool2_backward(const double* gy, double* gx, int n, int c, int h, int w);
void affine_forward(const double* x, const double* w, const double* b, double* y,
                    int n, int d, int e);
void affine_backward_input(const double* gy, const double* w, double* gx, int n, int d, int e);
void affine_backward_weight(const double* gy, const double* x, double* gw, int n, int d, int e);
void affine_backward_bias(const double* gy, double* gb, int n, int e);
void sep_filter(const double* x, double* y, int h, int w, const double* taps, int radius,
                bool horizontal);

}  // namespace xt::kernels
