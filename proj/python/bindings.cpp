#include <sstream>

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cli.hpp"
#include "layoutpref/checkpoint.hpp"
#include "layoutpref/dataio.hpp"
#include "layoutpref/error.hpp"
#include "layoutpref/eval.hpp"
#include "layoutpref/image.hpp"
#include "layoutpref/judge.hpp"
#include "layoutpref/layout.hpp"
#include "layoutpref/metrics.hpp"
#include "layoutpref/policy.hpp"
#include "layoutpref/prompt.hpp"
#include "layoutpref/render.hpp"

namespace py = pybind11;
using namespace layoutpref;

PYBIND11_MODULE(_layoutpref, m) {
  m.doc() = "Layout tokenization, quality metrics, evaluation and CLI access";

  // Messages carry the error code prefix, e.g. "invalid-token: ...".
  py::register_exception<Error>(m, "LayoutprefError");

  py::enum_<ElementKind>(m, "ElementKind")
      .value("IMAGE", ElementKind::kImage)
      .value("TEXT", ElementKind::kText)
      .value("SHAPE", ElementKind::kShape)
      .value("BACKGROUND", ElementKind::kBackground);

  py::class_<Canvas>(m, "Canvas")
      .def(py::init<double, double>(), py::arg("width"), py::arg("height"))
      .def_readwrite("width", &Canvas::width)
      .def_readwrite("height", &Canvas::height)
      .def(py::self == py::self);

  py::class_<Element>(m, "Element")
      .def(py::init([](std::string id, ElementKind kind, std::optional<std::string> text,
                       std::optional<std::string> asset, std::optional<double> aspect) {
             Element e{std::move(id), kind, std::move(text), std::move(asset), aspect};
             validate(e);
             return e;
           }),
           py::arg("id"), py::arg("kind"), py::arg("text") = py::none(), py::arg("asset") = py::none(),
           py::arg("aspect") = py::none())
      .def_readwrite("id", &Element::id)
      .def_readwrite("kind", &Element::kind)
      .def_readwrite("text", &Element::text)
      .def_readwrite("asset", &Element::asset_ref)
      .def_readwrite("aspect", &Element::intrinsic_aspect);

  py::class_<BBox>(m, "BBox")
      .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("w"),
           py::arg("h"))
      .def_readwrite("x", &BBox::x)
      .def_readwrite("y", &BBox::y)
      .def_readwrite("w", &BBox::w)
      .def_readwrite("h", &BBox::h)
      .def("__repr__", [](const BBox& b) {
        std::ostringstream os;
        os << "BBox(" << b.x << ", " << b.y << ", " << b.w << ", " << b.h << ")";
        return os.str();
      });

  py::class_<Layout>(m, "Layout")
      .def(py::init([](Canvas canvas, const std::vector<std::pair<Element, BBox>>& placements) {
             Layout l{canvas, {}};
             for (const auto& [e, b] : placements) l.placements.push_back({e, b});
             validate(l);
             return l;
           }),
           py::arg("canvas"), py::arg("placements"))
      .def_readonly("canvas", &Layout::canvas)
      .def_property_readonly("placements", [](const Layout& l) {
        std::vector<std::pair<Element, BBox>> out;
        for (const auto& p : l.placements) out.emplace_back(p.element, p.box);
        return out;
      });

  m.attr("DEFAULT_BINS") = kDefaultBins;
  m.def("bin", &bin, py::arg("coordinate"), py::arg("extent"), py::arg("bins") = kDefaultBins);
  m.def("unbin", &unbin, py::arg("token"), py::arg("extent"), py::arg("bins") = kDefaultBins);
  m.def("tokenize", [](const Layout& l, int bins) { return tokenize_layout(l, bins).tokens; },
        py::arg("layout"), py::arg("bins") = kDefaultBins);
  m.def("detokenize",
        [](const std::vector<int>& tokens, const std::vector<Element>& elements, const Canvas& canvas,
           int bins) { return detokenize_layout({tokens, bins}, elements, canvas); },
        py::arg("tokens"), py::arg("elements"), py::arg("canvas"), py::arg("bins") = kDefaultBins);
  m.def("iou", &iou);

  m.def("quality", [](const Layout& l) {
    const QualityReport r = quality(l);
    return py::dict(py::arg("q_align") = r.q_align, py::arg("q_overlap_raw") = r.q_overlap_raw,
                    py::arg("q_overlap_norm") = r.q_overlap_norm, py::arg("q") = r.q);
  });
  m.def("dataset_stats", [](const std::vector<double>& q) {
    const auto s = dataset_stats(q);
    return py::dict(py::arg("mean") = s.mean, py::arg("std") = s.std, py::arg("threshold") = s.threshold,
                    py::arg("count") = s.count);
  });
  m.def("filter_indices", [](const std::vector<double>& q) { return filter_by_threshold(q, dataset_stats(q)); });

  py::class_<DatasetSample>(m, "Sample")
      .def_readonly("id", &DatasetSample::id)
      .def_readonly("canvas", &DatasetSample::canvas)
      .def_property_readonly("elements", &DatasetSample::element_list)
      .def("has_ground_truth", &DatasetSample::has_ground_truth)
      .def("ground_truth", &DatasetSample::ground_truth);

  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("save_dataset", &save_dataset, py::arg("samples"), py::arg("path"));
  m.def("make_synthetic",
        [](int n, const std::string& style, std::uint64_t seed, double jitter) {
          SyntheticSpec spec;
          spec.n_samples = n;
          spec.style = parse_synthetic_style(style);
          spec.seed = seed;
          spec.jitter_px = jitter;
          return make_synthetic(spec);
        },
        py::arg("n"), py::arg("style") = "grid_aligned", py::arg("seed") = 0, py::arg("jitter") = 12.0);

  py::class_<PolicyParams>(m, "Policy")
      .def(py::init<int>(), py::arg("bins") = kDefaultBins)
      .def_property_readonly("bins", &PolicyParams::bins)
      .def_property_readonly("size", &PolicyParams::size)
      .def_readwrite("temperature", &PolicyParams::sampling_temperature)
      .def("predict", [](const PolicyParams& p, const DatasetSample& s) {
        return PolicyPredictor(p).predict(s, {});
      });
  m.def("load_policy", &load_checkpoint, py::arg("path"));

  m.def("mean_iou",
        [](const std::vector<DatasetSample>& samples, const PolicyParams* policy, const std::string& mode) {
          const EvalMode em = parse_eval_mode(mode);
          if (policy == nullptr) return mean_iou(samples, GroundTruthPredictor{}, em).mean_iou_percent;
          return mean_iou(samples, PolicyPredictor(*policy), em, {policy->bins(), 1}).mean_iou_percent;
        },
        py::arg("samples"), py::arg("policy") = nullptr, py::arg("mode") = "all",
        "Mean IoU x 100; without a policy the ground truth is scored.");

  m.def("judge_prompt", &judge_prompt);
  m.def("parse_decision", [](const std::string& text) { return parse_decision(text).d; });
  m.def("heuristic_compare", [](const Layout& a, const Layout& b) { return compare_heuristic(a, b).d; });
  m.def("build_prompt",
        [](const Canvas& c, const std::vector<Element>& elements) { return build_prompt(c, elements).text; });
  m.def("render_png",
        [](const Layout& l, const std::string& mode, int size) {
          RenderStyle style;
          style.mode = parse_render_mode(mode);
          style.target_long_side = size;
          const auto png = encode_png(render(l, style));
          return py::bytes(reinterpret_cast<const char*>(png.data()), png.size());
        },
        py::arg("layout"), py::arg("mode") = "boxes", py::arg("size") = 512);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
