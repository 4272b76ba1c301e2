#pragma once

// A minimal reverse-mode tape over vector-valued nodes. Each recorded node
// carries its forward value and a closure mapping the output cotangent to
// one cotangent per input. Only primitives registered by name may be
// recorded; anything else is a ContractError.

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace moddisc {

using Vec = std::vector<double>;

struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Returns one cotangent per input, in input order. An empty vector means
/// "no contribution" for that input.
using BackwardFn = std::function<std::vector<Vec>(const Vec& upstream)>;

void register_primitive(std::string_view name);
bool is_registered_primitive(std::string_view name);
std::vector<std::string> registered_primitives();

class Tape {
 public:
  Tape();

  Var leaf(Vec value, bool requires_grad = true);
  Var constant(Vec value) { return leaf(std::move(value), false); }
  Var apply(std::string_view primitive, std::vector<Var> inputs, Vec output, BackwardFn backward);

  const Vec& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep from `output`, seeded with `seed` (defaults to ones).
  /// Gradients from earlier sweeps are cleared.
  void backward(Var output, Vec seed = {});
  /// Cotangent of v after backward(); zeros when v received none.
  Vec grad(Var v) const;

 private:
  struct Node {
    std::string primitive;
    std::vector<Var> inputs;
    Vec value;
    Vec grad;
    BackwardFn backward;
    bool requires_grad = false;
  };
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace moddisc
