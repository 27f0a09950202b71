// Python bindings for the main operations: loss primitives, positive-set
// construction, contrastive regularization, EMA teacher, label mixing,
// prediction fusion and the synthetic dataset generator.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "attrep/augment.hpp"
#include "attrep/contrastive.hpp"
#include "attrep/data.hpp"
#include "attrep/gradcheck.hpp"
#include "attrep/harness.hpp"
#include "attrep/losses.hpp"
#include "attrep/model.hpp"
#include "attrep/teacher.hpp"
#include "attrep/train.hpp"

namespace py = pybind11;
using namespace attrep;

namespace {

py::array_t<std::uint8_t> dataset_images(const Dataset& ds) {
  py::array_t<std::uint8_t> arr({ds.size(), ds.channels, ds.height, ds.width});
  std::memcpy(arr.mutable_data(), ds.pixels.data(), ds.pixels.size());
  return arr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attract-and-Repulse training primitives";

  m.def("softmax", &softmax, py::arg("logits"));
  m.def("cross_entropy", &cross_entropy, py::arg("q"), py::arg("p"));
  m.def("reverse_cross_entropy", &reverse_cross_entropy, py::arg("q"), py::arg("p"),
        py::arg("rce_floor") = -4.0);
  m.def("symmetric_cross_entropy", &symmetric_cross_entropy, py::arg("q"), py::arg("p"),
        py::arg("alpha"), py::arg("rce_floor") = -4.0);
  m.def("kl_divergence", &kl_divergence, py::arg("p"), py::arg("r"));
  m.def("js_divergence", &js_divergence, py::arg("p"), py::arg("r"));
  m.def("label_smoothing", &label_smoothing, py::arg("q"), py::arg("epsilon"),
        py::arg("num_classes"));
  m.def("cross_entropy_grad_logits", &cross_entropy_grad_logits, py::arg("q"), py::arg("p"));

  py::class_<PositiveSets>(m, "PositiveSets")
      .def_readonly("members", &PositiveSets::members)
      .def("mean_size", &PositiveSets::mean_size)
      .def("skipped_count", &PositiveSets::skipped_count);
  m.def(
      "build_positive_sets",
      [](const std::vector<Vec>& labels, double delta) { return build_positive_sets(labels, delta); },
      py::arg("labels"), py::arg("delta"));
  m.def("pairwise_js", &pairwise_js, py::arg("labels"));
  m.def("contrastive_regularization", &contrastive_regularization, py::arg("inputs"),
        py::arg("positives"), py::arg("tau"), py::arg("normalize") = true);
  m.def("info_nce_reference", &info_nce_reference, py::arg("inputs"), py::arg("tau"),
        py::arg("normalize") = true);

  py::class_<TeacherState>(m, "TeacherState")
      .def_readonly("params", &TeacherState::params)
      .def_readonly("eta", &TeacherState::eta)
      .def_readonly("step_count", &TeacherState::step_count);
  m.def("make_teacher", &make_teacher, py::arg("student_params"), py::arg("eta"));
  m.def(
      "ema_update",
      [](TeacherState& t, const Eigen::VectorXd& student) {
        ema_update(t, student);
        return t;
      },
      py::arg("teacher"), py::arg("student_params"));
  m.def("mean_teacher_loss", &mean_teacher_loss, py::arg("student_probs"), py::arg("teacher_probs"));

  m.def("aux_fusion", &aux_fusion, py::arg("final_probs"), py::arg("aux_probs"),
        py::arg("fusion_weight"));
  m.def(
      "ensemble_average",
      [](const std::vector<std::vector<Vec>>& probs) { return ensemble_average(probs); },
      py::arg("per_model_probs"));

  py::class_<ScheduleConfig>(m, "ScheduleConfig")
      .def(py::init<>())
      .def_readwrite("base_lr", &ScheduleConfig::base_lr)
      .def_readwrite("warmup_start_lr", &ScheduleConfig::warmup_start_lr)
      .def_readwrite("warmup_epochs", &ScheduleConfig::warmup_epochs)
      .def_readwrite("total_epochs", &ScheduleConfig::total_epochs)
      .def_readwrite("steps_per_epoch", &ScheduleConfig::steps_per_epoch);
  m.def("lr_at", &lr_at, py::arg("step"), py::arg("schedule"));

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("num_classes", &Dataset::num_classes)
      .def_readonly("height", &Dataset::height)
      .def_readonly("width", &Dataset::width)
      .def("size", &Dataset::size)
      .def("images", &dataset_images);
  m.def("make_synthetic_blobs", &make_synthetic_blobs, py::arg("num_classes"),
        py::arg("n_per_class"), py::arg("image_size"), py::arg("seed"),
        py::arg("noise_stddev") = 48.0);
  m.def("load_cifar10_binary", &load_cifar10_binary, py::arg("file"));
  m.def("subsample_per_class", &subsample_per_class, py::arg("dataset"), py::arg("n_per_class"),
        py::arg("seed"));

  m.def("check_loss_gradients",
        [](int cases, double tol, std::uint64_t seed) {
          const GradCheckReport r = check_loss_gradients(cases, tol, seed);
          return py::dict(py::arg("cases") = r.cases, py::arg("failures") = r.failures,
                          py::arg("worst_error") = r.worst_error);
        },
        py::arg("cases_per_op") = 10, py::arg("tolerance") = 1e-4, py::arg("seed") = 0);

  m.attr("LN2") = kLn2;
  m.attr("__version__") = "0.1.0";
}
