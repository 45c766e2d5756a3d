#include "xt/xroutes.hpp"

#include "xt/errors.hpp"

namespace xt {

namespace {

const BlockNet& owner_of_segment(const SiblingPair& pair, int k, int m) {
    return ((k + m) % 2 == 1) ? pair.aux : pair.master;
}

const char* prefix_of(const SiblingPair& pair, const BlockNet& net) {
    return &net == &pair.aux ? "aux." : "master.";
}

}  // namespace

SiblingPair::SiblingPair(BlockNet aux_net, BlockNet master_net)
    : aux(std::move(aux_net)), master(std::move(master_net)) {
    if (!(aux.spec() == master.spec()) || aux.input_channels() != master.input_channels())
        throw ShapeError("SiblingPair: aux and master must share one spec");
    if (aux.segment_count() < 2)
        throw ShapeError("SiblingPair: routes need K >= 2 segments");
}

SiblingPair SiblingPair::from_checkpoint(const std::filesystem::path& path,
                                         std::vector<SegmentSpec> spec, int input_channels) {
    BlockNet aux = BlockNet::load_checkpoint(path, spec, input_channels);
    BlockNet master = BlockNet::load_checkpoint(path, std::move(spec), input_channels);
    return SiblingPair(std::move(aux), std::move(master));
}

std::map<std::string, Tensor> SiblingPair::qualified_params() const {
    std::map<std::string, Tensor> all;
    for (const auto& [name, t] : aux.params()) all["aux." + name] = t;
    for (const auto& [name, t] : master.params()) all["master." + name] = t;
    return all;
}

RouteResult route_forward(const SiblingPair& pair, const Tensor& x, int m, RouteHead head_rule) {
    if (m != 0 && m != 1) throw ShapeError("route_forward: m must be 0 or 1");

    RouteResult result;
    Tensor h = x;
    const int K = pair.aux.segment_count();
    for (int k = 1; k <= K; ++k) {
        const BlockNet& net = owner_of_segment(pair, k, m);
        h = net.forward_segment(k, h);
        const std::string prefix = prefix_of(pair, net);
        for (const auto& name : net.segment_param_names(k)) result.participation.insert(prefix + name);
    }

    const BlockNet& head_net =
        head_rule == RouteHead::Master ? pair.master : owner_of_segment(pair, K, m);
    result.scores = head_net.forward_head(h);
    const std::string prefix = prefix_of(pair, head_net);
    for (const auto& name : head_net.head_param_names()) result.participation.insert(prefix + name);
    return result;
}

Tensor route3_forward(const SiblingPair& pair, const Tensor& x) {
    return pair.master.forward(x);
}

std::set<std::string> route_gradient_mask(const SiblingPair& pair, bool update_aux) {
    std::set<std::string> mask;
    for (const auto& [name, t] : pair.master.params()) mask.insert("master." + name);
    if (update_aux)
        for (const auto& [name, t] : pair.aux.params()) mask.insert("aux." + name);
    return mask;
}

}  // namespace xt
