#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "dcolor/color.hpp"
#include "dcolor/error.hpp"
#include "dcolor/global_descriptor.hpp"
#include "dcolor/io.hpp"
#include "dcolor/model.hpp"
#include "dcolor/parallel.hpp"
#include "dcolor/pipeline.hpp"
#include "dcolor/refine.hpp"
#include "dcolor/synthetic.hpp"

namespace py = pybind11;
using namespace dcolor;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Plane to_plane(const DoubleArray& a) {
    if (a.ndim() != 2) {
        throw InvalidArgument("expected a 2-D array");
    }
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return Plane(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

DoubleArray from_plane(const Plane& p) {
    DoubleArray out({p.height(), p.width()});
    std::copy(p.values().begin(), p.values().end(), out.mutable_data());
    return out;
}

ColorImage to_color(const DoubleArray& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) {
        throw InvalidArgument("expected an (H, W, 3) array");
    }
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    ColorImage img(w, h);
    const double* d = a.data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = 3 * (static_cast<std::size_t>(y) * w + x);
            img.r(x, y) = d[i];
            img.g(x, y) = d[i + 1];
            img.b(x, y) = d[i + 2];
        }
    }
    return img;
}

DoubleArray from_color(const ColorImage& img) {
    const int h = img.height();
    const int w = img.width();
    DoubleArray out({h, w, 3});
    double* d = out.mutable_data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = 3 * (static_cast<std::size_t>(y) * w + x);
            d[i] = img.r(x, y);
            d[i + 1] = img.g(x, y);
            d[i + 2] = img.b(x, y);
        }
    }
    return out;
}

SemanticMap labels_to_map(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& labels,
                          const std::vector<std::string>& categories) {
    if (labels.ndim() != 2) {
        throw InvalidArgument("labels must be a 2-D array");
    }
    return SemanticMap::from_labels(static_cast<int>(labels.shape(1)), static_cast<int>(labels.shape(0)),
                                    std::span(labels.data(), static_cast<std::size_t>(labels.size())), categories);
}

ColorizerConfig make_config(double epsilon, int mu, int n0, int samples, int epochs, std::uint64_t seed) {
    ColorizerConfig cfg;
    cfg.apply_seed(seed);
    cfg.clustering.epsilon = epsilon;
    cfg.clustering.mu = mu;
    cfg.clustering.n0 = n0;
    cfg.samples_per_image = samples;
    cfg.training.epochs = epochs;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_dcolor, m) {
    m.doc() = "Example-based grayscale image colorization";

    const auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<TrainingDiverged>(m, "TrainingDiverged", base.ptr());

    m.def("set_threads", &set_thread_count, py::arg("threads"));

    m.def("rgb_to_yuv", [](const DoubleArray& rgb) {
        const auto [gray, chroma] = rgb_to_yuv(to_color(rgb));
        return py::make_tuple(from_plane(gray.y), from_plane(chroma.u), from_plane(chroma.v));
    });
    m.def("yuv_to_rgb", [](const DoubleArray& y, const DoubleArray& u, const DoubleArray& v) {
        ChromaPlanes chroma;
        chroma.u = to_plane(u);
        chroma.v = to_plane(v);
        return from_color(yuv_to_rgb(GrayImage(to_plane(y)), chroma));
    });
    m.def("psnr", [](const DoubleArray& a, const DoubleArray& b) { return psnr(to_color(a), to_color(b)); });

    m.def(
        "joint_bilateral",
        [](const DoubleArray& input, const DoubleArray& guide, double sigma_spatial, double sigma_range, int radius) {
            const Plane in = to_plane(input);
            const GrayImage g(to_plane(guide));
            Plane out;
            {
                py::gil_scoped_release release;
                out = joint_bilateral(in, g, BilateralParams{sigma_spatial, sigma_range, radius});
            }
            return from_plane(out);
        },
        py::arg("input"), py::arg("guide"), py::arg("sigma_spatial") = kChromaRefineDefaults.sigma_spatial,
        py::arg("sigma_range") = kChromaRefineDefaults.sigma_range, py::arg("radius") = kChromaRefineDefaults.radius);

    m.def("gist", [](const DoubleArray& gray) {
        const auto g = compute_gist(GrayImage(to_plane(gray)));
        return py::array_t<double>(static_cast<py::ssize_t>(g.values.size()), g.values.data());
    });

    m.def("categories", &scene_categories);
    m.def(
        "synthetic_scene",
        [](const std::string& family, int size, std::uint64_t seed) {
            if (family != "coast" && family != "city") {
                throw InvalidArgument("family must be 'coast' or 'city'");
            }
            const SceneFamily f = family == "coast" ? SceneFamily::Coast : SceneFamily::SunsetCity;
            const SyntheticScene s = make_scene(f, size, size, seed);
            py::array_t<std::uint8_t> labels({size, size});
            std::copy(s.labels.begin(), s.labels.end(), labels.mutable_data());
            return py::make_tuple(from_color(s.color), labels);
        },
        py::arg("family"), py::arg("size") = 64, py::arg("seed") = 1);
    m.def(
        "write_synthetic_dataset",
        [](const std::filesystem::path& out, int train, int test, int size, std::uint64_t seed) {
            const auto corpus = make_corpus(train, test, size, seed);
            save_dataset(corpus.train, out / "train");
            save_dataset(corpus.test, out / "test");
        },
        py::arg("out"), py::arg("train_per_family") = 25, py::arg("test_per_family") = 5, py::arg("size") = 64,
        py::arg("seed") = 7);

    py::class_<Model>(m, "Model")
        .def_static("load", &load_model, py::arg("path"))
        .def("save", [](const Model& model, const std::filesystem::path& p) { save_model(model, p); })
        .def("to_bytes",
             [](const Model& model) {
                 const auto b = serialize_model(model);
                 return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
             })
        .def_readonly("categories", &Model::categories)
        .def_property_readonly("cluster_count", [](const Model& model) { return model.clusters.size(); })
        .def_property_readonly("layers",
                               [](const Model& model) {
                                   std::vector<int> layers;
                                   for (const auto& c : model.clusters) {
                                       layers.push_back(c.layer);
                                   }
                                   return layers;
                               })
        .def_property_readonly("config", [](const Model& model) { return canonical_json(model.config); })
        .def(
            "colorize",
            [](const Model& model, const DoubleArray& gray, std::optional<py::array_t<std::uint8_t>> labels,
               bool refine) {
                const GrayImage target(to_plane(gray));
                std::optional<SemanticMap> sem;
                if (labels) {
                    sem = labels_to_map(*labels, model.categories);
                }
                ColorizeOptions opts;
                opts.refine = refine;
                ColorImage out;
                {
                    py::gil_scoped_release release;
                    out = colorize(target, sem, model, opts);
                }
                return from_color(out);
            },
            py::arg("gray"), py::arg("labels") = py::none(), py::arg("refine") = true);

    m.def(
        "train",
        [](const std::filesystem::path& dataset, double epsilon, int mu, int n0, int samples, int epochs,
           std::uint64_t seed) {
            const ColorizerConfig cfg = make_config(epsilon, mu, n0, samples, epochs, seed);
            py::gil_scoped_release release;
            return train_model(load_dataset(dataset), cfg).model;
        },
        py::arg("dataset"), py::arg("epsilon") = ClusterConfig{}.epsilon, py::arg("mu") = ClusterConfig{}.mu,
        py::arg("n0") = ClusterConfig{}.n0, py::arg("samples") = ColorizerConfig{}.samples_per_image,
        py::arg("epochs") = TrainConfig{}.epochs, py::arg("seed") = 1);

    m.def(
        "evaluate",
        [](const Model& model, const std::filesystem::path& dataset) {
            EvaluationReport report;
            {
                py::gil_scoped_release release;
                report = evaluate(load_dataset(dataset), model);
            }
            py::dict rows;
            for (const auto& r : report.rows) {
                rows[py::str(r.image)] = r.error ? py::object(py::none()) : py::object(py::float_(r.psnr_db));
            }
            return py::make_tuple(rows, report.mean_db, report.median_db);
        },
        py::arg("model"), py::arg("dataset"));
}
