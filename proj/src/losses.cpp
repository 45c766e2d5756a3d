#include "xt/losses.hpp"

#include <cmath>

#include "xt/errors.hpp"
#include "xt/ops.hpp"

namespace xt {

Tensor bce(const Tensor& scores, const Tensor& labels) {
    return ops::bce_loss(scores, labels);
}

double wmw_pair(double si, double sj, double gamma, double p) {
    const double d = si - sj;
    if (d >= gamma) return 0.0;
    return std::pow(gamma - d, p);
}

Tensor auc_loss(const Tensor& scores, const Tensor& labels, double gamma, double p) {
    return ops::wmw_auc_loss(scores, labels, gamma, p);
}

double alpha_coefficient(double l1, double l2, double l3) {
    const double denom = l1 + l2;
    if (denom < 1e-12) return 0.0;
    return 2.0 * l3 / denom;
}

Tensor l2_fc(const BlockNet& net) {
    return ops::add(ops::sum_squares(net.param("head.weight")),
                    ops::sum_squares(net.param("head.bias")));
}

namespace {

bool has_both_hard_classes(const Tensor& labels) {
    bool pos = false, neg = false;
    for (double y : labels.data()) {
        if (y == 1.0) pos = true;
        else if (y == 0.0) neg = true;
    }
    return pos && neg;
}

}  // namespace

LossBundle target_loss(const Tensor& out1, const Tensor& out2, const Tensor& out3,
                       const Tensor& labels, const BlockNet& master, double beta, double s,
                       double gamma, double p, std::optional<double> fixed_alpha) {
    if (beta < 0.0 || beta > 1.0) throw ShapeError("target_loss: beta must be in [0,1]");
    if (s < 0.0) throw ShapeError("target_loss: s must be non-negative");

    LossBundle bundle;
    bundle.beta = beta;
    bundle.s = s;

    Tensor t1 = bce(out1, labels);
    Tensor t2 = bce(out2, labels);
    Tensor t3 = bce(out3, labels);
    bundle.l1 = t1.value();
    bundle.l2 = t2.value();
    bundle.l3 = t3.value();

    bundle.alpha = fixed_alpha ? *fixed_alpha
                               : alpha_coefficient(bundle.l1, bundle.l2, bundle.l3);

    Tensor t_auc;
    if (has_both_hard_classes(labels)) {
        t_auc = auc_loss(out3, labels, gamma, p);
        bundle.auc_active = true;
    } else {
        t_auc = Tensor::scalar(0.0);
        bundle.auc_active = false;
    }
    bundle.l_auc = t_auc.value();

    Tensor omega = l2_fc(master);
    bundle.omega_fc = omega.value();

    bundle.total = ops::add(ops::add(ops::scale(ops::add(t1, t2), bundle.alpha),
                                     ops::scale(t3, beta)),
                            ops::add(ops::scale(t_auc, 1.0 - beta), ops::scale(omega, s)));
    return bundle;
}

}  // namespace xt
