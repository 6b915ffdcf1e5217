// SPDX-License-Identifier: Apache-2.0
//
// sitefb: site-specific limited-feedback beamforming simulation library
// Copyright (C) 2026 The sitefb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Python bindings: numpy in, numpy out.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sitefb/harness.hpp"

namespace py = pybind11;
using namespace sitefb;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

CVec to_cvec(const CArray& a) {
  if (a.ndim() != 1) throw Error(ErrorCode::dimension_mismatch, "expected a 1-D complex array");
  return CVec(a.data(), a.data() + a.size());
}

CMat to_cmat(const CArray& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::dimension_mismatch, "expected a 2-D complex array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  return CMat(rows, cols, std::vector<cplx>(a.data(), a.data() + a.size()));
}

CArray from_cvec(const CVec& v) {
  CArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

CArray from_cmat(const CMat& m) {
  CArray out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> from_rvec(const RVec& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

LinkParams link_of(double rho, int t_c) {
  LinkParams l;
  l.rho = rho;
  l.t_c = t_c;
  l.validate();
  return l;
}

py::dict outcome_dict(const FeedbackOutcome& o) {
  py::dict d;
  d["scheme"] = to_string(o.report.scheme);
  d["indices"] = o.report.indices;
  d["coefficients"] = from_cvec(o.report.coefficients);
  d["h_hat"] = from_cvec(o.h_hat);
  d["w_hat"] = from_cvec(o.w_hat);
  d["eta"] = o.eta;
  d["rate_bps_hz"] = o.rate_bps_hz;
  d["overhead"] = o.overhead_uses;
  d["effective_se"] = o.effective_se;
  d["flags"] = o.flags;
  d["q_or_np"] = o.q_or_np;
  return d;
}

py::dict trace_dict(const TrainTrace& t) {
  py::dict d;
  d["initial_train_eta"] = t.initial_train_eta;
  d["initial_val_eta"] = t.initial_val_eta;
  py::list epochs;
  for (const auto& e : t.epochs) {
    py::dict r;
    r["epoch"] = e.epoch;
    r["train_eta"] = e.train_eta;
    r["val_eta"] = e.val_eta;
    r["grad_norm"] = e.grad_norm;
    epochs.append(r);
  }
  d["epochs"] = epochs;
  return d;
}

ExperimentConfig config_for(const std::filesystem::path& config, const std::filesystem::path& out,
                            std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load_config(config);
  cfg.output_dir = out;
  if (seed) cfg.seed = *seed;
  return cfg;
}

// Trained probing codebook and decoder, as produced by `train` or loaded
// from a checkpoint.
struct Model {
  TrainResult artifacts;

  int n_t() const { return artifacts.model.n_t(); }
  int k() const { return artifacts.model.k(); }
  int q() const { return artifacts.model.q(); }
};

}  // namespace

PYBIND11_MODULE(_sitefb, m) {
  m.doc() = "Site-specific limited-feedback beamforming core";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::io:
        case ErrorCode::format:
        case ErrorCode::truncation:
          PyErr_SetString(PyExc_OSError, e.what());
          break;
        case ErrorCode::numeric_failure:
        case ErrorCode::rank_deficient:
        case ErrorCode::degenerate_channel:
        case ErrorCode::empty_basis:
          PyErr_SetString(PyExc_ArithmeticError, e.what());
          break;
        default:
          PyErr_SetString(PyExc_ValueError, e.what());
      }
    }
  });

  m.def("steering", [](double u, int n_t) { return from_cvec(steering(u, n_t)); }, py::arg("u"), py::arg("n_t"),
        "Unit-norm ULA steering vector at spatial frequency u.");
  m.def("dft_codebook", [](int n_t, int oversample) { return from_cmat(dft_codebook(n_t, oversample).beams); },
        py::arg("n_t"), py::arg("oversample") = 4, "Oversampled DFT codebook, one beam per column.");
  m.def(
      "orthonormalize", [](const CArray& a, double tol) { return from_cmat(orthonormalize(to_cmat(a), tol)); },
      py::arg("a"), py::arg("tol") = 1e-8);
  m.def("spectral_norm", [](const CArray& a) { return spectral_norm(to_cmat(a)); }, py::arg("a"));
  m.def(
      "capture_efficiency",
      [](const CArray& basis, const CArray& h) {
        return capture_efficiency(Subspace::from_span(to_cmat(basis)), to_cvec(h));
      },
      py::arg("basis"), py::arg("h"), "||P h||^2 / ||h||^2 for the span of the basis columns.");
  m.def(
      "mismatch_bound",
      [](const CArray& inferred, const CArray& oracle, const CArray& h) {
        const auto b = mismatch_bound(Subspace::from_span(to_cmat(inferred)), Subspace::from_span(to_cmat(oracle)),
                                      to_cvec(h));
        return py::make_tuple(b.delta, b.lower_bound_eta);
      },
      py::arg("inferred"), py::arg("oracle"), py::arg("h"), "(delta, [eta_oracle - delta]_+)");
  m.def(
      "effective_se",
      [](double captured, int overhead, double rho, int t_c) {
        return effective_se(captured, overhead, link_of(rho, t_c));
      },
      py::arg("captured_energy"), py::arg("overhead"), py::arg("rho"), py::arg("t_c") = 1000);

  m.def(
      "type1",
      [](const CArray& h, int oversample, double rho, int t_c) {
        const CVec v = to_cvec(h);
        return outcome_dict(type1(v, dft_codebook(static_cast<int>(v.size()), oversample), link_of(rho, t_c)));
      },
      py::arg("h"), py::arg("oversample") = 4, py::arg("rho") = 1e14, py::arg("t_c") = 1000);
  m.def(
      "type2",
      [](const CArray& h, int q, int oversample, double rho, int t_c) {
        const CVec v = to_cvec(h);
        return outcome_dict(type2(v, dft_codebook(static_cast<int>(v.size()), oversample), q, link_of(rho, t_c)));
      },
      py::arg("h"), py::arg("q"), py::arg("oversample") = 4, py::arg("rho") = 1e14, py::arg("t_c") = 1000);
  m.def(
      "psc",
      [](const CArray& h, int n_p, double rho, int t_c) { return outcome_dict(psc(to_cvec(h), n_p, link_of(rho, t_c))); },
      py::arg("h"), py::arg("n_p"), py::arg("rho") = 1e14, py::arg("t_c") = 1000);
  m.def(
      "proposed",
      [](const CArray& h, const CArray& basis, int k_probe, double rho, int t_c) {
        return outcome_dict(proposed(to_cvec(h), Subspace::from_span(to_cmat(basis)), k_probe, link_of(rho, t_c)));
      },
      py::arg("h"), py::arg("basis"), py::arg("k_probe"), py::arg("rho") = 1e14, py::arg("t_c") = 1000);

  m.def(
      "sample_site",
      [](const std::filesystem::path& config, std::size_t count, std::uint64_t seed) {
        const auto ds = sample_site(load_config(config).site, count, seed);
        CArray out({static_cast<py::ssize_t>(ds.size()), static_cast<py::ssize_t>(ds.n_t)});
        for (std::size_t i = 0; i < ds.size(); ++i)
          std::copy(ds.samples[i].h.begin(), ds.samples[i].h.end(), out.mutable_data() + i * ds.n_t);
        return out;
      },
      py::arg("config"), py::arg("count"), py::arg("seed"), "Channels (count x n_t) drawn from the configured site.");

  py::class_<Model>(m, "Model")
      .def_static(
          "load", [](const std::filesystem::path& p) { return Model{[&] {
                                                          auto [b, mdl] = load_checkpoint(p);
                                                          return TrainResult{std::move(b), std::move(mdl), {}};
                                                        }()}; },
          py::arg("path"))
      .def("save", [](const Model& self, const std::filesystem::path& p) {
        save_checkpoint(p, self.artifacts.probing, self.artifacts.model);
      })
      .def_property_readonly("n_t", &Model::n_t)
      .def_property_readonly("k", &Model::k)
      .def_property_readonly("q", &Model::q)
      .def_property_readonly("probing", [](const Model& self) { return from_cmat(self.artifacts.probing.b); })
      .def_property_readonly("trace", [](const Model& self) { return trace_dict(self.artifacts.trace); })
      .def(
          "deploy",
          [](const Model& self, const CArray& h, std::uint64_t seed, double sigma_db, double rho, int t_c) {
            NoiseModel noise;
            noise.sigma_b = sigma_db;
            noise.enabled = sigma_db > 0.0;
            return outcome_dict(
                export_deployment(self.artifacts.probing, self.artifacts.model, to_cvec(h), noise, seed,
                                  link_of(rho, t_c)));
          },
          py::arg("h"), py::arg("seed") = 0, py::arg("sigma_db") = 1.0, py::arg("rho") = 1e14, py::arg("t_c") = 1000,
          "Fingerprint, decode and run the proposed feedback scheme on one channel.");

  m.def(
      "train",
      [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed) {
        py::gil_scoped_release release;
        return Model{run_train(config_for(config, out, seed))};
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = py::none(),
      "Train the configured (K, Q) setting; writes model.blml and train_trace.csv under `out`.");
  m.def(
      "gen_site",
      [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed) {
        run_gen_site(config_for(config, out, seed));
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = py::none());
  m.def(
      "compare",
      [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<Model> model,
         std::optional<std::uint64_t> seed) {
        std::optional<TrainResult> art;
        if (model) art = model->artifacts;
        ComparisonResult res;
        {
          py::gil_scoped_release release;
          res = run_comparison(config_for(config, out, seed), art);
        }
        py::dict d;
        for (const auto& s : res.schemes) {
          py::dict e;
          e["overhead"] = s.overhead;
          e["mean_eta"] = s.mean_eta;
          e["mean_effective_se"] = s.mean_effective_se;
          e["eta"] = from_rvec(s.eta);
          d[py::str(s.scheme)] = e;
        }
        return d;
      },
      py::arg("config"), py::arg("out"), py::arg("model") = py::none(), py::arg("seed") = py::none(),
      "Scheme comparison on the test split; returns per-scheme summaries.");
  m.attr("build_tag") = build_tag();
}
