#include "moddisc/tape.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include "moddisc/error.hpp"

namespace moddisc {

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::set<std::string, std::less<>>& registry() {
  static std::set<std::string, std::less<>> names;
  return names;
}

}  // namespace

void register_primitive(std::string_view name) {
  if (name.empty()) throw ContractError("primitive name must not be empty");
  std::lock_guard lock(registry_mutex());
  registry().emplace(name);
}

bool is_registered_primitive(std::string_view name) {
  std::lock_guard lock(registry_mutex());
  return registry().find(name) != registry().end();
}

std::vector<std::string> registered_primitives() {
  std::lock_guard lock(registry_mutex());
  return {registry().begin(), registry().end()};
}

void register_builtin_primitives();  // graph.cpp

Tape::Tape() {
  static std::once_flag once;
  std::call_once(once, register_builtin_primitives);
}

Var Tape::leaf(Vec value, bool requires_grad) {
  Node n;
  n.primitive = "leaf";
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::apply(std::string_view primitive, std::vector<Var> inputs, Vec output,
                BackwardFn backward) {
  if (!is_registered_primitive(primitive))
    throw ContractError("unregistered primitive '" + std::string(primitive) + "'");
  bool needs = false;
  for (Var in : inputs) needs = needs || node(in).requires_grad;
  Node n;
  n.primitive = std::string(primitive);
  n.inputs = std::move(inputs);
  n.value = std::move(output);
  n.backward = std::move(backward);
  n.requires_grad = needs;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw ContractError("variable does not belong to this tape");
  return nodes_[v.id];
}

const Vec& Tape::value(Var v) const { return node(v).value; }
bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

void Tape::backward(Var output, Vec seed) {
  const Node& out = node(output);
  if (seed.empty()) seed.assign(out.value.size(), 1.0);
  if (seed.size() != out.value.size()) throw ContractError("seed size does not match output");
  for (Node& n : nodes_) n.grad.clear();
  nodes_[output.id].grad = std::move(seed);

  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.requires_grad || !n.backward) continue;
    std::vector<Vec> in_grads = n.backward(n.grad);
    if (in_grads.size() != n.inputs.size())
      throw ContractError("primitive '" + n.primitive + "' returned the wrong number of cotangents");
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      Vec& g = in_grads[k];
      if (g.empty()) continue;
      Node& in = nodes_[n.inputs[k].id];
      if (!in.requires_grad) continue;
      if (g.size() != in.value.size())
        throw ContractError("primitive '" + n.primitive + "' returned a mis-sized cotangent");
      if (in.grad.empty()) in.grad = std::move(g);
      else
        for (std::size_t j = 0; j < g.size(); ++j) in.grad[j] += g[j];
    }
  }
}

Vec Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) return Vec(n.value.size(), 0.0);
  return n.grad;
}

}  // namespace moddisc
