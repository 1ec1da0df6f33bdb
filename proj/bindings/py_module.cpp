#include <pybind11/pybind11.h>

#include "cograph/rng.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_cograph, m) {
  m.doc() = "CoGraph core bindings";
  m.def("derive_seed", &cograph::derive_seed, py::arg("base"), py::arg("tag"),
        py::arg("a") = 0, py::arg("b") = 0);
}
