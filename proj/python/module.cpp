#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "stackrl/commands.hpp"
#include "stackrl/config.hpp"
#include "stackrl/errors.hpp"
#include "stackrl/ppo.hpp"
#include "stackrl/reward.hpp"
#include "stackrl/trainer.hpp"
#include "stackrl/vec_env.hpp"

namespace py = pybind11;
using namespace stackrl;

namespace {

py::dict summary_dict(const TrainSummary& s) {
  py::dict d;
  d["iterations"] = s.iterations;
  d["global_steps"] = s.global_steps;
  d["final_stage"] = s.final_stage;
  d["final_accuracy"] = s.final_accuracy;
  d["mean_episode_length"] = s.mean_episode_length;
  d["solved"] = s.solved;
  d["solved_at_steps"] = s.solved_at_steps ? py::cast(*s.solved_at_steps) : py::none();
  d["advance_steps"] = s.advance_steps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Curriculum PPO core: environments, advantage estimation and training loop";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RuntimeFault>(m, "RuntimeFault", PyExc_RuntimeError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_ArithmeticError);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("parse", [](const std::string& text) { return parse_run_config(text); })
      .def_static("load", [](const std::string& path) { return load_run_config(path); })
      .def("to_text", [](const RunConfig& c) { return write_run_config(c); })
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("num_envs", &RunConfig::num_envs)
      .def_readwrite("shards", &RunConfig::shards)
      .def_readwrite("total_steps", &RunConfig::total_steps)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("stop_on_solve", &RunConfig::stop_on_solve)
      .def_readwrite("hidden", &RunConfig::hidden)
      .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; });

  py::class_<VecEnv>(m, "VecEnv")
      .def(py::init([](const RunConfig& cfg, int stage) {
             const auto& st = cfg.stages.at(static_cast<std::size_t>(stage));
             return VecEnv(apply_stage(st, cfg.env, cfg.ppo, cfg.ppo.lr).env, cfg.num_envs,
                           cfg.seed, cfg.shards);
           }),
           py::arg("config"), py::arg("stage") = 0)
      .def_property_readonly("size", &VecEnv::size)
      .def_property_readonly("observation_size", &VecEnv::observation_size)
      .def_property_readonly("action_size", &VecEnv::action_size)
      .def_property_readonly("discrete", &VecEnv::discrete)
      .def("observations", [](const VecEnv& v) { return Mat(v.observations()); })
      .def("step", [](VecEnv& v, const Mat& actions) {
        const VecStep s = v.step(actions);
        Vec rewards(static_cast<Eigen::Index>(s.outcomes.size()));
        std::vector<bool> dones, successes;
        for (std::size_t i = 0; i < s.outcomes.size(); ++i) {
          rewards(static_cast<Eigen::Index>(i)) = s.outcomes[i].reward;
          dones.push_back(s.outcomes[i].done);
          successes.push_back(s.outcomes[i].success);
        }
        return py::make_tuple(s.obs, rewards, dones, successes);
      });

  py::class_<Trainer>(m, "Trainer")
      .def(py::init([](const RunConfig& cfg, const std::string& out) { return new Trainer(cfg, out); }),
           py::arg("config"), py::arg("output_dir") = "")
      .def("iterate", [](Trainer& t) { return metrics_line(t.iterate()); },
           "Runs one iteration and returns its metrics record as a JSON string.")
      .def("run", [](Trainer& t) { return summary_dict(t.run()); })
      .def("budget_left", &Trainer::budget_left)
      .def_property_readonly("stage", &Trainer::stage)
      .def_property_readonly("lr", &Trainer::lr)
      .def_property_readonly("global_steps", &Trainer::global_steps)
      .def("save_checkpoint", [](const Trainer& t, const std::string& path) { t.write_checkpoint(path); });

  m.def("compute_gae",
        [](const Mat& rewards, const Mat& values, const Mask& dones, const Vec& bootstrap,
           double gamma, double tau) {
          GaeConfig cfg{gamma, tau};
          cfg.validate();
          const GaeResult r = compute_gae(rewards, values, dones, bootstrap, cfg);
          return py::make_tuple(r.advantages, r.returns);
        },
        py::arg("rewards"), py::arg("values"), py::arg("dones"), py::arg("bootstrap"),
        py::arg("gamma") = 0.99, py::arg("tau") = 0.95);

  m.def("ppo_objective",
        [](const std::vector<double>& logp_new, const std::vector<double>& logp_old,
           const std::vector<double>& adv, double eps) {
          return ppo_objective(logp_new, logp_old, adv, eps);
        },
        py::arg("logp_new"), py::arg("logp_old"), py::arg("advantages"), py::arg("clip_epsilon") = 0.2);

  m.def("default_reward_weights", [] {
    py::dict d;
    const RewardTable t;
    for (std::size_t k = 0; k < kNumSignals; ++k) {
      d[py::str(std::string(signal_name(static_cast<Signal>(k))))] = t.lambda[k];
    }
    return d;
  });

  m.def("evaluate_checkpoint",
        [](const std::string& path, int episodes) {
          std::ostringstream out;
          const EvalResult r = cmd_eval(path, episodes, out);
          return py::make_tuple(r.success_rate, r.mean_episode_length);
        },
        py::arg("path"), py::arg("episodes"));
}
