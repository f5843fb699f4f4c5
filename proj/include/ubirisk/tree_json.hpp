// Copyright 2026 The ubirisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <json.hpp>

#include "ubirisk/cart.hpp"

namespace ubirisk {

inline nlohmann::json cart_tree_to_json(const CartTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back({{"f", n.feature},
                         {"t", n.threshold},
                         {"v", n.value},
                         {"l", n.left},
                         {"r", n.right},
                         {"n", n.n_rows},
                         {"w", n.weighted_decrease}});
    }
    return nodes;
}

inline CartTree cart_tree_from_json(const nlohmann::json& nodes) {
    CartTree tree;
    for (const auto& n : nodes) {
        CartNode node;
        node.feature = n.at("f").get<int>();
        node.threshold = n.at("t").get<double>();
        node.value = n.at("v").get<double>();
        node.left = n.at("l").get<int>();
        node.right = n.at("r").get<int>();
        node.n_rows = n.at("n").get<int>();
        node.weighted_decrease = n.at("w").get<double>();
        tree.nodes.push_back(node);
    }
    return tree;
}

}  // namespace ubirisk
