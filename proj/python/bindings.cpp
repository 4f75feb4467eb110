#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "goalcraft/analysis.hpp"
#include "goalcraft/checkpoint.hpp"
#include "goalcraft/commands.hpp"
#include "goalcraft/config.hpp"
#include "goalcraft/critic.hpp"
#include "goalcraft/env.hpp"
#include "goalcraft/error.hpp"
#include "goalcraft/evalx.hpp"
#include "goalcraft/trainer.hpp"

namespace py = pybind11;
using namespace goalcraft;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a, std::size_t cols, const char* what) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != cols) {
    throw ShapeError(std::string(what) + " must have shape (n, " + std::to_string(cols) + ")");
  }
  const auto n = static_cast<std::size_t>(a.shape(0));
  return Tensor({n, cols}, std::vector<double>(a.data(), a.data() + n * cols));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

EnvConfig env_by_name(const std::string& kind, double drag) {
  switch (parse_env_kind(kind)) {
    case EnvKind::point_reach: return EnvConfig::point_reach();
    case EnvKind::u_maze: return EnvConfig::u_maze();
    case EnvKind::drag_world: return EnvConfig::drag_world(drag);
  }
  return {};
}

class PyCritic {
 public:
  PyCritic(const std::string& variant, std::size_t monolithic_width, std::uint64_t seed,
           std::optional<std::size_t> latent_dim)
      : spec_(make_critic_spec(parse_critic_variant(variant), env_dims(), monolithic_width, latent_dim)),
        params_(init_critic(spec_, seed)) {}

  Array q(const Array& s, const Array& a, const Array& g) const {
    return to_array(q_value(spec_, params_, to_tensor(s, kStateDim, "s"), to_tensor(a, kActionDim, "a"),
                            to_tensor(g, kGoalDim, "g")));
  }

  py::tuple embeddings(const Array& s, const Array& a, const Array& g) const {
    Embeddings e = embed(spec_, params_, to_tensor(s, kStateDim, "s"), to_tensor(a, kActionDim, "a"),
                         to_tensor(g, kGoalDim, "g"));
    return py::make_tuple(to_array(e.f), to_array(e.phi));
  }

  std::size_t param_count() const { return total_params(spec_); }
  std::string variant() const { return to_string(spec_.variant); }
  std::size_t latent_dim() const { return spec_.latent_dim; }
  std::size_t branch_width() const { return spec_.branch_width; }

 private:
  CriticSpec spec_;
  CriticParams params_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "goalcraft core bindings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("version", &version);

  m.def("variants", [] {
    std::vector<std::string> out;
    for (CriticVariant v : kAllVariants) out.push_back(to_string(v));
    return out;
  });

  m.def("matched_width",
        [](std::size_t state, std::size_t action, std::size_t goal, std::size_t latent_dim,
           std::size_t monolithic_width, const std::string& variant) {
          return matched_width(CriticDims{state, action, goal}, latent_dim, monolithic_width,
                               parse_critic_variant(variant));
        },
        py::arg("state"), py::arg("action"), py::arg("goal"), py::arg("latent_dim"),
        py::arg("monolithic_width"), py::arg("variant") = "bvn");

  py::class_<PyCritic>(m, "Critic")
      .def(py::init<const std::string&, std::size_t, std::uint64_t, std::optional<std::size_t>>(),
           py::arg("variant"), py::arg("monolithic_width") = 64, py::arg("seed") = 0,
           py::arg("latent_dim") = py::none())
      .def("q", &PyCritic::q, py::arg("s"), py::arg("a"), py::arg("g"))
      .def("embeddings", &PyCritic::embeddings, py::arg("s"), py::arg("a"), py::arg("g"))
      .def_property_readonly("param_count", &PyCritic::param_count)
      .def_property_readonly("variant", &PyCritic::variant)
      .def_property_readonly("latent_dim", &PyCritic::latent_dim)
      .def_property_readonly("branch_width", &PyCritic::branch_width);

  m.def("step",
        [](const std::string& kind, std::pair<double, double> pos, std::pair<double, double> vel,
           std::pair<double, double> action, std::pair<double, double> goal, double drag) {
          const EnvConfig env = env_by_name(kind, drag);
          const StepResult r = step(env, EnvState{{pos.first, pos.second}, {vel.first, vel.second}},
                                    {action.first, action.second}, {goal.first, goal.second});
          return py::dict(py::arg("pos") = py::make_tuple(r.next.pos.x, r.next.pos.y),
                          py::arg("vel") = py::make_tuple(r.next.vel.x, r.next.vel.y),
                          py::arg("reward") = r.reward, py::arg("reached") = r.reached);
        },
        py::arg("kind"), py::arg("pos"), py::arg("vel"), py::arg("action"), py::arg("goal"),
        py::arg("drag") = 0.6);

  m.def("is_free", [](const std::string& kind, double x, double y) {
    return is_free(env_by_name(kind, 0.6), {x, y});
  });

  m.def("bootstrap_ci",
        [](std::vector<double> values, double level, int resamples, std::uint64_t seed) {
          const ConfidenceInterval ci = bootstrap_ci(values, level, resamples, seed);
          return py::make_tuple(ci.mean, ci.low, ci.high);
        },
        py::arg("values"), py::arg("level") = 0.95, py::arg("resamples") = 1000, py::arg("seed") = 0);

  m.def("pca_fit", [](const Array& data) {
    if (data.ndim() != 2) throw ShapeError("pca_fit expects a 2-D array");
    const Pca2D p = pca_fit(to_tensor(data, static_cast<std::size_t>(data.shape(1)), "data"));
    return py::dict(py::arg("mean") = p.mean,
                    py::arg("components") = std::vector<std::vector<double>>{p.components[0], p.components[1]},
                    py::arg("explained_variance") = std::vector<double>{p.explained_variance[0],
                                                                        p.explained_variance[1]});
  });

  m.def("angle_deg", [](std::vector<double> u, std::vector<double> v) { return angle_deg(u, v); });

  m.def("canonical_config", [](const std::string& text) { return parse_run_config(text).to_text(); });
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_run_config(text)); });

  m.def("load_checkpoint", [](const std::string& path) {
    const Checkpoint c = load_checkpoint(path);
    py::dict tensors;
    for (const auto& [n, t] : c.params.actor) tensors[py::str("actor/" + n)] = to_array(t);
    for (const auto& [n, t] : c.params.critic) tensors[py::str("critic/" + n)] = to_array(t);
    return py::dict(py::arg("config_hash") = c.meta.config_hash, py::arg("epoch") = c.meta.epoch,
                    py::arg("variant") = c.meta.variant, py::arg("seed") = c.meta.seed,
                    py::arg("extra") = c.meta.extra, py::arg("tensors") = tensors);
  });

  m.def("run_cli",
        [](std::vector<std::string> args) {
          std::vector<std::string> argv_s{"goalcraft"};
          argv_s.insert(argv_s.end(), args.begin(), args.end());
          std::vector<char*> argv;
          for (auto& s : argv_s) argv.push_back(s.data());
          py::gil_scoped_release release;
          return run_cli(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Run the command-line tool in-process; returns its exit code.");
}
