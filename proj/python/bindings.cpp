#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "iaffect/cli.hpp"
#include "iaffect/error.hpp"
#include "iaffect/eval.hpp"
#include "iaffect/ingest.hpp"
#include "iaffect/model.hpp"
#include "iaffect/select.hpp"
#include "iaffect/synth.hpp"

namespace py = pybind11;
using namespace iaffect;

namespace {

std::vector<std::uint8_t> as_flags(const std::vector<bool>& positive) {
  return {positive.begin(), positive.end()};
}

py::dict run(const std::string& command, const std::filesystem::path& config_path,
             std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out,
             std::optional<int> jobs) {
  auto config = cli::load_run_config(config_path);
  cli::apply(config, {seed, std::move(out), jobs});
  std::ostringstream log, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run_command(command, config, log, err);
  }
  py::dict d;
  d["code"] = code;
  d["log"] = log.str();
  d["error"] = err.str();
  return d;
}

py::dict synth_session(std::uint64_t seed, std::size_t infant_index, double session_s) {
  synth::SynthConfig cfg;
  cfg.seed = seed;
  cfg.session_s = session_s;
  synth::validate(cfg);
  const auto g = synth::generate_session(cfg, infant_index);
  std::vector<std::string> states;
  for (auto s : g.truth.bin_states) states.emplace_back(to_string(s));
  py::dict d;
  d["infant_id"] = g.truth.infant_id;
  d["session_id"] = g.truth.session_id;
  d["frames_text"] = g.frames_text;
  d["labels_text"] = g.labels_text;
  d["bin_states"] = states;
  return d;
}

py::dict session_summary(const Session& s) {
  std::size_t alert = 0, fussy = 0;
  for (const auto& b : s.bins) {
    alert += b.label == AffectLabel::Alert;
    fussy += b.label == AffectLabel::Fussy;
  }
  py::dict d;
  d["session_id"] = s.session_id;
  d["infant_id"] = s.infant_id;
  d["bins"] = s.bins.size();
  d["alert_bins"] = alert;
  d["fussy_bins"] = fussy;
  return d;
}

py::list load_sessions(const std::filesystem::path& manifest) {
  const auto dataset = ingest::load_dataset(ingest::read_manifest(manifest));
  py::list out;
  for (const auto& s : dataset.sessions) out.append(session_summary(s));
  return out;
}

py::dict model_info(const std::filesystem::path& path) {
  const auto m = model::load_model(path);
  std::vector<std::string> groups;
  for (auto g : m.groups()) groups.emplace_back(iaffect::to_string(g));
  py::dict d;
  d["groups"] = groups;
  d["input_widths"] = m.input_widths();
  d["hidden"] = m.hidden();
  d["embedding"] = m.embedding();
  d["parameters"] = m.parameter_count();
  return d;
}

}  // namespace

PYBIND11_MODULE(_iaffect, m) {
  m.doc() = "Infant affect recognition from face and body landmarks";

  py::register_exception<Error>(m, "Error");

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<bool>& positive) {
        const auto flags = as_flags(positive);
        return eval::auc(scores, flags);
      },
      py::arg("scores"), py::arg("positive"), "Mann-Whitney AUC; `positive` marks the fussy class.");
  m.def(
      "welch_t",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = select::welch_t(a, b);
        return std::pair{r.t, r.df};
      },
      py::arg("a"), py::arg("b"), "Welch t statistic and degrees of freedom.");
  m.def("t_sf_two_sided", &select::t_sf_two_sided, py::arg("t"), py::arg("df"));
  m.def("synth_session", &synth_session, py::arg("seed") = 0, py::arg("infant_index") = 0,
        py::arg("session_s") = 600.0, "One synthetic session with default settings.");
  m.def("load_sessions", &load_sessions, py::arg("manifest"),
        "Per-session summaries of every loadable manifest entry.");
  m.def("model_info", &model_info, py::arg("path"));
  m.def("run", &run, py::arg("command"), py::arg("config"), py::arg("seed") = py::none(),
        py::arg("out") = py::none(), py::arg("jobs") = py::none(),
        "Runs a command like the iaffect executable; returns code, log and error text.");
  m.attr("commands") = std::vector<std::string>(std::begin(cli::kCommands), std::end(cli::kCommands));
}
