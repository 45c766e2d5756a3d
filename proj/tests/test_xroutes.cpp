#include <doctest.h>

#include <cstring>

#include "helpers.hpp"
#include "xt/errors.hpp"
#include "xt/losses.hpp"
#include "xt/ops.hpp"
#include "xt/trainer.hpp"
#include "xt/xroutes.hpp"

using namespace xt;
using namespace xt::testing;

namespace {

SiblingPair make_pair(std::vector<int> channels, uint64_t aux_seed, uint64_t master_seed) {
    auto spec = tiny_spec(std::move(channels));
    return SiblingPair(BlockNet::build(spec, 1, aux_seed), BlockNet::build(spec, 1, master_seed));
}

bool contains_prefix(const std::set<std::string>& names, const std::string& prefix) {
    for (const auto& n : names)
        if (n.rfind(prefix, 0) == 0) return true;
    return false;
}

}  // namespace

TEST_CASE("alternation rule, K=3") {
    SiblingPair pair = make_pair({3, 4, 5}, 1, 2);
    Tensor x = random_tensor({2, 1, 16, 16}, 3, 0.0, 1.0);

    // m=0: aux, master, aux; head owned by aux
    RouteResult r0 = route_forward(pair, x, 0);
    CHECK(contains_prefix(r0.participation, "aux.seg1."));
    CHECK(contains_prefix(r0.participation, "master.seg2."));
    CHECK(contains_prefix(r0.participation, "aux.seg3."));
    CHECK(contains_prefix(r0.participation, "aux.head."));
    CHECK_FALSE(contains_prefix(r0.participation, "master.seg1."));
    CHECK_FALSE(contains_prefix(r0.participation, "aux.seg2."));
    CHECK_FALSE(contains_prefix(r0.participation, "master.head."));

    // m=1: master, aux, master; head owned by master
    RouteResult r1 = route_forward(pair, x, 1);
    CHECK(contains_prefix(r1.participation, "master.seg1."));
    CHECK(contains_prefix(r1.participation, "aux.seg2."));
    CHECK(contains_prefix(r1.participation, "master.seg3."));
    CHECK(contains_prefix(r1.participation, "master.head."));

    // alternation is a partition: each segment of each net in exactly one route
    for (int k = 1; k <= 3; ++k) {
        const std::string aux_seg = "aux.seg" + std::to_string(k) + ".";
        const std::string master_seg = "master.seg" + std::to_string(k) + ".";
        CHECK((contains_prefix(r0.participation, aux_seg) ^
               contains_prefix(r1.participation, aux_seg)) == 1);
        CHECK((contains_prefix(r0.participation, master_seg) ^
               contains_prefix(r1.participation, master_seg)) == 1);
    }

    CHECK_THROWS_AS(route_forward(pair, x, 2), ShapeError);
}

TEST_CASE("route3 equals master forward and ignores aux") {
    SiblingPair pair = make_pair({3, 4}, 5, 6);
    Tensor x = random_tensor({3, 1, 8, 8}, 7, 0.0, 1.0);

    Tensor direct = pair.master.forward(x);
    Tensor via_route = route3_forward(pair, x);
    CHECK(std::memcmp(direct.data().data(), via_route.data().data(),
                      direct.data().size() * sizeof(double)) == 0);
    CHECK(via_route.dim(0) == 3);

    // gradient of a route-3 loss w.r.t. any aux parameter is zero
    Tensor labels = Tensor::from_data({3}, {1.0, 0.0, 1.0});
    for (auto& [name, t] : pair.aux.params()) t.zero_grad();
    {
        Tape tape;
        Tensor loss = bce(route3_forward(pair, x), labels);
        backward(loss);
    }
    for (const auto& [name, t] : pair.aux.params()) CHECK_FALSE(t.has_grad());
}

TEST_CASE("identity at transfer start") {
    auto spec = tiny_spec({3, 4, 5});
    BlockNet net = BlockNet::build(spec, 1, 11);
    SiblingPair pair(net.clone(), net.clone());

    for (int trial = 0; trial < 5; ++trial) {
        Tensor x = random_tensor({4, 1, 16, 16}, 100 + static_cast<uint64_t>(trial), 0.0, 1.0);
        Tensor o1 = route_forward(pair, x, 0).scores;
        Tensor o2 = route_forward(pair, x, 1).scores;
        Tensor o3 = route3_forward(pair, x);
        CHECK(std::memcmp(o1.data().data(), o3.data().data(), o3.data().size() * sizeof(double)) == 0);
        CHECK(std::memcmp(o2.data().data(), o3.data().data(), o3.data().size() * sizeof(double)) == 0);
    }
}

TEST_CASE("participation matches finite perturbation") {
    SiblingPair pair = make_pair({2, 3}, 21, 22);
    Tensor x = random_tensor({2, 1, 8, 8}, 23, 0.0, 1.0);

    for (int m = 0; m <= 1; ++m) {
        RouteResult base = route_forward(pair, x, m);
        auto all = pair.qualified_params();
        for (auto& [name, t] : all) {
            // bump the whole tensor so dead relu units cannot mask a live path
            const auto saved = t.data();
            for (auto& v : t.data()) v += 0.5;
            Tensor bumped = route_forward(pair, x, m).scores;
            t.data() = saved;

            bool changed = false;
            for (size_t i = 0; i < bumped.data().size(); ++i)
                if (bumped.data()[i] != base.scores.data()[i]) changed = true;

            CAPTURE(m);
            CAPTURE(name);
            CHECK(changed == (base.participation.count(name) > 0));
        }
    }
}

TEST_CASE("gradient mask") {
    SiblingPair pair = make_pair({3, 4, 5}, 31, 32);

    auto master_only = route_gradient_mask(pair, false);
    for (const auto& name : master_only) CHECK(name.rfind("master.", 0) == 0);
    CHECK(master_only.size() == pair.master.params().size());

    auto everything = route_gradient_mask(pair, true);
    CHECK(everything.size() == pair.master.params().size() + pair.aux.params().size());
    CHECK(everything.count("aux.seg2.conv1.weight") == 1);  // reached via route 2
    CHECK_FALSE(everything.empty());
}

TEST_CASE("masking keeps aux bit-unchanged through an optimizer step") {
    auto spec = tiny_spec({3, 4});
    BlockNet net = BlockNet::build(spec, 1, 41);
    SiblingPair pair(net.clone(), net.clone());
    auto aux_before = pair.aux.clone();

    Tensor x = random_tensor({4, 1, 8, 8}, 42, 0.0, 1.0);
    Tensor labels = Tensor::from_data({4}, {1.0, 0.0, 1.0, 0.0});

    ParamMap params = pair.qualified_params();
    VelocityMap velocity;
    {
        Tape tape;
        RouteResult r1 = route_forward(pair, x, 0);
        RouteResult r2 = route_forward(pair, x, 1);
        Tensor o3 = route3_forward(pair, x);
        LossBundle bundle = target_loss(r1.scores, r2.scores, o3, labels, pair.master,
                                        0.6, 1e-4, 0.16, 2.0);
        backward(bundle.total);
    }
    sgd_step(params, velocity, 0.05, 0.0, route_gradient_mask(pair, false));

    for (const auto& [name, t] : pair.aux.params()) {
        const auto& before = aux_before.param(name);
        CHECK(std::memcmp(t.data().data(), before.data().data(),
                          t.data().size() * sizeof(double)) == 0);
    }
    // and the master actually moved
    bool master_moved = false;
    for (const auto& [name, t] : pair.master.params()) {
        const auto& before = net.param(name);
        if (std::memcmp(t.data().data(), before.data().data(),
                        t.data().size() * sizeof(double)) != 0)
            master_moved = true;
    }
    CHECK(master_moved);
}

TEST_CASE("route head override") {
    SiblingPair pair = make_pair({3, 4, 5}, 51, 52);
    Tensor x = random_tensor({2, 1, 16, 16}, 53, 0.0, 1.0);

    RouteResult owner_head = route_forward(pair, x, 0, RouteHead::LastSegmentOwner);
    RouteResult master_head = route_forward(pair, x, 0, RouteHead::Master);
    CHECK(contains_prefix(owner_head.participation, "aux.head."));
    CHECK(contains_prefix(master_head.participation, "master.head."));
    CHECK_FALSE(contains_prefix(master_head.participation, "aux.head."));
}
