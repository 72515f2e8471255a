#include "l1reg/cli/presets.hpp"

#include <fmt/format.h>

namespace l1reg::cli {

std::string Preset::command() const { return config.at("command").get<std::string>(); }

std::string Preset::analysis() const {
  if (command() != "analyze") return {};
  return config.at("analyze").begin().key();
}

namespace {

json sparse5() {
  return {{"kind", "sparse"}, {"support", {3, 10, 25, 60, 120}}, {"values", {1.0, -0.8, 0.6, 1.2, -0.5}}};
}

json power2() { return {{"kind", "power_decay"}, {"exponent", 2.0}, {"scale", 1.0}}; }

json bidiagonal(std::size_t n, const char* image_norm = "l2") {
  return {{"kind", "bidiagonal_sum"}, {"n", n}, {"image_norm", image_norm}};
}

json analyze(const char* name, json body) { return {{"command", "analyze"}, {"analyze", {{name, std::move(body)}}}}; }

std::vector<Preset> make_presets() {
  std::vector<Preset> out;

  out.push_back({"identity-p1-sdp", "identity operator, p = 1 closed form, l1 noise, discrepancy principle",
                 {{"command", "rates"},
                  {"operator", {{"kind", "identity"}, {"n", 100}, {"image_norm", "l1"}}},
                  {"model", {{"kind", "sparse"}, {"support", {1, 2, 5, 10}}, {"values", {1.0, -0.5, 0.25, 2.0}}}},
                  {"rates", {{"p", 1.0}, {"repetitions", 5}, {"seed", 11}, {"rule", {{"kind", "sdp"}}}}}}});

  out.push_back({"sparse-bidiagonal-sdp", "bidiagonal sum, N = 400, five-term sparse solution, discrepancy principle",
                 {{"command", "rates"},
                  {"operator", bidiagonal(400)},
                  {"model", sparse5()},
                  {"rates", {{"p", 2.0}, {"repetitions", 5}, {"seed", 12}, {"rule", {{"kind", "sdp"}}}}}}});

  out.push_back({"power2-bidiagonal-sdp", "bidiagonal sum, N = 1000, x_k = 1/k^2, discrepancy principle",
                 {{"command", "rates"},
                  {"operator", bidiagonal(1000)},
                  {"model", power2()},
                  {"rates",
                   {{"p", 2.0},
                    {"repetitions", 5},
                    {"seed", 13},
                    {"gamma", {{"kind", "linear"}, {"factor", 1.0}}},
                    {"rule", {{"kind", "sdp"}}}}}}});

  out.push_back({"bidiagonal-sdp-bracketing", "bidiagonal sum, N = 200, deltas 1e-1 to 1e-3, discrepancy principle",
                 {{"command", "rates"},
                  {"operator", bidiagonal(200)},
                  {"model", power2()},
                  {"rates",
                   {{"p", 2.0},
                    {"deltas", {1e-1, 3.1622776601683794e-2, 1e-2, 3.1622776601683794e-3, 1e-3}},
                    {"repetitions", 5},
                    {"seed", 14},
                    {"rule", {{"kind", "sdp"}, {"tau", 1.5}, {"q", 0.5}}}}}}});

  out.push_back({"witness-e1", "source element for e^(1) under the bidiagonal sum, mu = 0",
                 analyze("witness", {{"operator", {{"kind", "bidiagonal_sum"}}},
                                     {"xi", {1.0}},
                                     {"mu", 0.0},
                                     {"tail", "alternating"},
                                     {"truncation", 12}})});

  out.push_back({"witness-decaying", "bidiagonal sum witness with a decaying tail, mu = 0.5",
                 analyze("witness", {{"operator", {{"kind", "bidiagonal_sum"}}},
                                     {"xi", {0.5, -1.0, 0.25, 1.0}},
                                     {"mu", 0.5},
                                     {"tail", "decaying"},
                                     {"truncation", 16}})});

  out.push_back({"conditioning-bidiagonal", "smallest singular value of the bidiagonal sum for N = 10, 100, 1000",
                 analyze("conditioning", {{"operator", {{"kind", "bidiagonal_sum"}}}, {"grid", {10, 100, 1000}}})});

  out.push_back({"conditioning-identity", "smallest singular value of the identity for N = 10, 100, 1000",
                 analyze("conditioning", {{"operator", {{"kind", "identity"}}}, {"grid", {10, 100, 1000}}})});

  out.push_back({"weakstar-bidiagonal", "first adjoint entries of the bidiagonal sum on the constant-one probe",
                 analyze("weakstar",
                         {{"operator", {{"kind", "bidiagonal_sum"}}}, {"k", 8}, {"probe", "constant-one"}})});

  out.push_back({"weakstar-first-row", "first adjoint entries of the first-row summation on the constant-one probe",
                 analyze("weakstar",
                         {{"operator", {{"kind", "first_row_summation"}}}, {"k", 8}, {"probe", "constant-one"}})});

  out.push_back({"vsc-bidiagonal", "variational inequality, bidiagonal sum N = 50, beta = 1/3, gamma_n = n",
                 analyze("vsc", {{"operator", bidiagonal(50, "l1")},
                                 {"model", power2()},
                                 {"gamma", {{"kind", "linear"}, {"factor", 1.0}}},
                                 {"tail", "truncated"},
                                 {"beta", 1.0 / 3.0},
                                 {"samples", 10000},
                                 {"seed", 8}})});

  out.push_back({"phi-sparse", "index function of the five-term sparse solution, gamma_n = n",
                 analyze("phi", {{"model", sparse5()}, {"gamma", {{"kind", "linear"}, {"factor", 1.0}}},
                                 {"n_max", 1000}})});

  out.push_back({"phi-power2", "index function of x_k = 1/k^2, gamma_n = n",
                 analyze("phi", {{"model", power2()}, {"gamma", {{"kind", "linear"}, {"factor", 1.0}}},
                                 {"n_max", 1000}})});

  out.push_back({"phi-exponential", "index function of x_k = 2^-k, gamma_n = n",
                 analyze("phi", {{"model", {{"kind", "exponential_decay"}, {"rate", 0.69314718055994531}}},
                                 {"gamma", {{"kind", "linear"}, {"factor", 1.0}}},
                                 {"n_max", 1000}})});

  out.push_back({"gamma-embedding2", "gamma_n of the l1 to l2 embedding, sum and signed-sup forms",
                 analyze("gamma", {{"operator", {{"kind", "embedding"}, {"q", 2.0}}}, {"n_max", 4},
                                   {"dual_norm", "l2"}})});
  return out;
}

}  // namespace

const std::vector<Preset>& bundled_presets() {
  static const std::vector<Preset> presets = make_presets();
  return presets;
}

const Preset& find_preset(const std::string& name) {
  std::string known;
  for (const auto& p : bundled_presets()) {
    if (p.name == name) return p;
    known += (known.empty() ? "" : ", ") + p.name;
  }
  throw InvalidArgument(fmt::format("unknown preset '{}' (known: {})", name, known));
}

}  // namespace l1reg::cli
