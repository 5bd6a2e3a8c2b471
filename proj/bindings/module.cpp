// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

// Python surface: worlds, training, dispatch and the analyzers.
// Configuration crosses the boundary as the same flat key/value pairs the CLI reads.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "vod/analysis.hpp"
#include "vod/checkpoint.hpp"
#include "vod/errors.hpp"
#include "vod/pipeline.hpp"

namespace py = pybind11;

namespace {

using vod::KeyValues;

// Accepts str, int, float, bool or a list of ints as a config value.
KeyValues to_key_values(const py::dict& d) {
  KeyValues kv;
  for (const auto& [k, v] : d) {
    const std::string key = py::str(k);
    if (py::isinstance<py::bool_>(v)) {
      kv[key] = v.cast<bool>() ? "true" : "false";
    } else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      std::string s;
      for (const auto& item : v) s += (s.empty() ? "" : ",") + std::string(py::str(item));
      kv[key] = s;
    } else if (py::isinstance<py::float_>(v)) {
      kv[key] = py::str(py::repr(v));
    } else {
      kv[key] = py::str(v);
    }
  }
  return kv;
}

KeyValues split(const KeyValues& all, vod::ConfigBinder& binder) {
  const KeyValues known = binder.entries();
  KeyValues mine, rest;
  for (const auto& [k, v] : all) (known.contains(k) ? mine : rest)[k] = v;
  binder.apply(mine);
  return rest;
}

vod::WorldConfig world_config(const py::dict& d) {
  vod::WorldConfig c;
  vod::ConfigBinder b;
  vod::bind_world_config(b, c);
  const KeyValues rest = split(to_key_values(d), b);
  if (!rest.empty()) throw vod::ConfigError("unknown world key: " + rest.begin()->first);
  return c;
}

vod::TrainConfig train_config(const py::dict& d, const vod::World& world) {
  vod::TrainConfig c;
  vod::ConfigBinder b;
  vod::bind_train_config(b, c);
  const KeyValues rest = split(to_key_values(d), b);
  if (!rest.empty()) throw vod::ConfigError("unknown training key: " + rest.begin()->first);
  c.temporal.intervals = world.config.intervals;
  return c;
}

py::array_t<double> to_array(const vod::RequestTensor& x) {
  py::array_t<double> out({x.users(), x.days(), x.intervals()});
  std::copy(x.values().begin(), x.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array(const vod::Tensor& t) {
  py::array_t<double> out(t.shape());
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

vod::Tensor to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw vod::ShapeError("expected a 2-d array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return vod::Tensor({r, c}, std::vector<double>(a.data(), a.data() + r * c));
}

py::dict report_dict(const vod::EvalReport& r) {
  py::dict d;
  d["r_whole"] = r.r_whole;
  d["r_peak"] = r.r_peak;
  d["accuracy"] = r.accuracy;
  d["dispatched"] = r.dispatched;
  d["whole_hits"] = r.whole_hits;
  d["peak_hits"] = r.peak_hits;
  d["capacity_exceeded"] = r.capacity_exceeded;
  return d;
}

py::list plan_rows(const vod::DispatchPlan& plan) {
  py::list rows;
  for (std::size_t i = 0; i < plan.per_cdn.size(); ++i) {
    for (const auto& e : plan.per_cdn[i]) rows.append(py::make_tuple(i, e.video, e.cluster, e.cp));
  }
  return rows;
}

struct Trained {
  vod::TrainConfig cfg;
  vod::TrainResult result;
};

py::list trace(const std::vector<vod::TraceRow>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(py::make_tuple(r.iteration, r.loss));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Learned VOD dispatch core";

  py::register_exception<vod::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<vod::ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<vod::NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<vod::MissingArtifact>(m, "MissingArtifact", PyExc_FileNotFoundError);

  py::class_<vod::World>(m, "World")
      .def_property_readonly("videos", &vod::World::video_count)
      .def_property_readonly("users", [](const vod::World& w) { return w.config.users; })
      .def_property_readonly("cdns", [](const vod::World& w) { return w.config.cdns; })
      .def_property_readonly("days", [](const vod::World& w) { return w.config.days; })
      .def_property_readonly("intervals", [](const vod::World& w) { return w.config.intervals; })
      .def_property_readonly("eval_day", &vod::World::eval_day)
      .def_property_readonly("peak_window", [](const vod::World& w) { return w.config.peak_window(); })
      .def_property_readonly("upload_day", [](const vod::World& w) { return w.upload_day; })
      .def_property_readonly("serving", [](const vod::World& w) { return w.topology.serving; })
      .def("requests", [](const vod::World& w, std::size_t v) { return to_array(w.requests.at(v)); }, py::arg("video"),
           "Requests of one video as a [users, days, intervals] array.")
      .def("config", [](const vod::World& w) {
        vod::WorldConfig c = w.config;
        vod::ConfigBinder b;
        vod::bind_world_config(b, c);
        return b.entries();
      })
      .def("write", [](const vod::World& w, const std::string& dir) { vod::write_world(w, dir); }, py::arg("directory"));

  m.def("generate_world", [](const py::dict& cfg) { return vod::generate_world(world_config(cfg)); },
        py::arg("config") = py::dict());
  m.def("read_world", [](const std::string& dir) { return vod::read_world(dir); }, py::arg("directory"));

  py::class_<Trained>(m, "Trained")
      .def_property_readonly("policy_trace", [](const Trained& t) { return trace(t.result.policy_trace); })
      .def_property_readonly("cluster_trace", [](const Trained& t) { return trace(t.result.cluster_trace); })
      .def_property_readonly("versions",
                             [](const Trained& t) {
                               const auto& s = t.result.models;
                               return py::make_tuple(s.temporal.version(), s.policy.version(), s.clustering.version());
                             })
      .def("save", [](const Trained& t, const std::string& dir) {
        const std::string d = dir + "/";
        vod::save_checkpoint(d + "temporal.ckpt", t.result.models.temporal);
        vod::save_checkpoint(d + "policy.ckpt", t.result.models.policy);
        vod::save_checkpoint(d + "clustering.ckpt", t.result.models.clustering);
      });

  m.def(
      "train",
      [](const vod::World& world, const py::dict& cfg) {
        Trained t;
        t.cfg = train_config(cfg, world);
        vod::check_compatible(world, t.cfg);
        const vod::RequestTensor totals = vod::world_corpus_totals(world, t.cfg);
        const vod::ReplayDataset ds = vod::world_dataset(world, t.cfg);
        const vod::TrainState start = vod::init_models(t.cfg, world.config.users, totals);
        py::gil_scoped_release release;
        t.result = vod::run_training(t.cfg, ds, world.config.users, totals, start);
        return t;
      },
      py::arg("world"), py::arg("config") = py::dict());

  m.def(
      "learned_dispatch",
      [](const vod::World& world, const Trained& t) {
        const auto pred = vod::predict_day(world, t.cfg, t.result.models, world.eval_day());
        const auto out = vod::learned_dispatch(world, pred);
        py::dict d = report_dict(out.report);
        d["plan"] = plan_rows(out.plan);
        d["cp"] = to_array(pred.cp);
        return d;
      },
      py::arg("world"), py::arg("trained"));

  m.def(
      "threshold_dispatch",
      [](const vod::World& world, double h, std::size_t p) {
        const auto out = vod::threshold_dispatch(world, world.eval_day(), h, p);
        py::dict d = report_dict(out.report);
        d["plan"] = plan_rows(out.plan);
        return d;
      },
      py::arg("world"), py::arg("h") = 1.0, py::arg("p") = 2);

  m.def(
      "cluster_quality",
      [](const vod::World& world, const Trained& t) {
        const auto pred = vod::predict_day(world, t.cfg, t.result.models, world.eval_day());
        const auto q = vod::prediction_quality(world, t.cfg, t.result.models, pred);
        py::dict d;
        d["intra_mean"] = q.intra_mean;
        d["inter_mean"] = q.inter_mean;
        d["intra_cv"] = q.intra_cv;
        d["inter_cv"] = q.inter_cv;
        d["corr_nv_area"] = q.corr_nv_area;
        d["corr_nv_ad"] = q.corr_nv_ad;
        return d;
      },
      py::arg("world"), py::arg("trained"));

  m.def(
      "stationarity",
      [](const vod::World& world) {
        const auto r = vod::stationarity_report(world.requests, world.config.intervals);
        py::dict d;
        d["dom_raw"] = r.raw;
        d["dom_diff"] = r.differenced;
        d["series"] = r.series;
        return d;
      },
      py::arg("world"));

  m.def(
      "rank_frequency",
      [](const vod::World& world) {
        py::list out;
        for (const auto& r : vod::rank_frequency(world.requests)) out.append(py::make_tuple(r.rank, r.video, r.requests));
        return out;
      },
      py::arg("world"));

  m.def(
      "pearson", [](const std::vector<double>& xs, const std::vector<double>& ys) { return vod::pearson(xs, ys); },
      py::arg("xs"), py::arg("ys"));

  m.def(
      "compute_cp", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& up,
                       const py::array_t<double, py::array::c_style | py::array::forcecast>& uc) {
        return to_array(vod::compute_cp(to_matrix(up), to_matrix(uc)));
      },
      py::arg("up"), py::arg("uc"));

  py::class_<vod::BlockPartition>(m, "BlockPartition")
      .def(py::init(&vod::BlockPartition::build), py::arg("divisions"), py::arg("budget"))
      .def_property_readonly("intervals",
                             [](const vod::BlockPartition& p) {
                               py::list out;
                               for (const auto& iv : p.intervals()) out.append(py::make_tuple(iv.left, iv.right));
                               return out;
                             })
      .def_property_readonly("cluster_count", &vod::BlockPartition::cluster_count)
      .def("assign", &vod::BlockPartition::assign, py::arg("x"), py::arg("y"))
      .def("center", &vod::BlockPartition::center, py::arg("block"))
      .def("area", &vod::BlockPartition::area, py::arg("block"));
}
