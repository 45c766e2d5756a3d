#pragma once

#include <set>
#include <string>

#include "xt/blocknet.hpp"
#include "xt/tensor.hpp"

namespace xt {

// Which head finishes a crossed route: the net that ran the last segment
// (default, keeps the route one contiguous alternation), or always the master.
enum class RouteHead { LastSegmentOwner, Master };

// Auxiliary network f plus master network g, architecturally identical. At
// transfer start both come from the same pretrained checkpoint, so their
// outputs coincide bit for bit until the first update.
struct SiblingPair {
    BlockNet aux;
    BlockNet master;

    SiblingPair(BlockNet aux_net, BlockNet master_net);

    static SiblingPair from_checkpoint(const std::filesystem::path& path,
                                       std::vector<SegmentSpec> spec, int input_channels);

    // All parameters with qualified names: aux.<name>, master.<name>.
    std::map<std::string, Tensor> qualified_params() const;
};

struct RouteResult {
    Tensor scores;                        // [N]
    std::set<std::string> participation;  // qualified parameter names touched
};

// Crossed forward. Segment k (1-based) runs on aux when (k + m) is odd and on
// master when even: m=0 gives aux, master, aux, ...; m=1 the reverse. The
// configured head rule picks who scores.
RouteResult route_forward(const SiblingPair& pair, const Tensor& x, int m,
                          RouteHead head_rule = RouteHead::LastSegmentOwner);

// Master-only forward (route 3).
Tensor route3_forward(const SiblingPair& pair, const Tensor& x);

// Names the optimizer may step. update_aux=false: master only (the algorithm
// updates g). update_aux=true: every parameter either net contributes to any
// route, which the alternation makes the full set. Gradients always flow
// through non-updated parameters either way.
std::set<std::string> route_gradient_mask(const SiblingPair& pair, bool update_aux);

}  // namespace xt
