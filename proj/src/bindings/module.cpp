#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "biphoton/applications.hpp"
#include "biphoton/detector.hpp"
#include "biphoton/estimator.hpp"
#include "biphoton/experiments.hpp"
#include "biphoton/fields.hpp"
#include "biphoton/propagation.hpp"
#include "biphoton/slm_calibration.hpp"
#include "biphoton/threading.hpp"

namespace py = pybind11;
using namespace biphoton;

namespace {

EnvelopeShape shape_from_args(const std::string& kind, double a, double b) {
    if (kind == "disk") return Disk{a};
    if (kind == "ring") return Ring{a, b};
    if (kind == "gaussian") return Gaussian{a};
    throw std::invalid_argument("shape must be disk, ring or gaussian");
}

FrameBlock frames_from_array(const py::array_t<std::uint16_t>& arr) {
    const auto buf = arr.request();
    if (buf.ndim != 3 || buf.shape[1] != buf.shape[2])
        throw std::invalid_argument("frames must be an (m, n, n) uint16 array");
    FrameBlock block(static_cast<int>(buf.shape[1]), static_cast<int>(buf.shape[0]));
    const auto* src = static_cast<const std::uint16_t*>(buf.ptr);
    const auto stride_f = static_cast<size_t>(buf.strides[0] / sizeof(std::uint16_t));
    const auto stride_i = static_cast<size_t>(buf.strides[1] / sizeof(std::uint16_t));
    const auto stride_j = static_cast<size_t>(buf.strides[2] / sizeof(std::uint16_t));
    for (int f = 0; f < block.m; ++f)
        for (int i = 0; i < block.n; ++i)
            for (int j = 0; j < block.n; ++j)
                block.at(f, i, j) = src[f * stride_f + i * stride_i + j * stride_j];
    return block;
}

py::array_t<std::uint16_t> frames_to_array(const FrameBlock& block) {
    py::array_t<std::uint16_t> arr({block.m, block.n, block.n});
    auto buf = arr.mutable_unchecked<3>();
    for (int f = 0; f < block.m; ++f)
        for (int i = 0; i < block.n; ++i)
            for (int j = 0; j < block.n; ++j) buf(f, i, j) = block.at(f, i, j);
    return arr;
}

}  // namespace

PYBIND11_MODULE(biphoton, m) {
    m.doc() = "Photon-pair correlation shaping simulator";

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<int, double, double, double>(), py::arg("n"), py::arg("pitch") = 8e-6,
             py::arg("wavelength") = 810e-9, py::arg("focal_eff") = 0.1)
        .def_readonly("n", &GridSpec::n)
        .def_readonly("pitch", &GridSpec::pitch)
        .def_readonly("wavelength", &GridSpec::wavelength)
        .def_readonly("focal_eff", &GridSpec::focal_eff)
        .def("camera_pitch", &GridSpec::camera_pitch);

    py::class_<ComplexGrid>(m, "ComplexGrid")
        .def_readonly("spec", &ComplexGrid::spec)
        .def_readonly("data", &ComplexGrid::data)
        .def("power", &ComplexGrid::power);

    py::class_<PhaseMask>(m, "PhaseMask")
        .def(py::init([](const GridSpec& spec, const Eigen::MatrixXd& theta) {
                 return PhaseMask(spec, theta);
             }),
             py::arg("spec"), py::arg("theta"))
        .def_readonly("spec", &PhaseMask::spec)
        .def_readonly("theta", &PhaseMask::theta);

    py::class_<IntensityImage>(m, "IntensityImage")
        .def_readonly("spec", &IntensityImage::spec)
        .def_readonly("data", &IntensityImage::data);

    py::enum_<PairConfig>(m, "PairConfig")
        .value("FF", PairConfig::FF)
        .value("NF", PairConfig::NF);

    py::enum_<Orientation>(m, "Orientation")
        .value("Horizontal", Orientation::Horizontal)
        .value("Vertical", Orientation::Vertical);

    py::class_<BiphotonState>(m, "BiphotonState")
        .def_readonly("spec", &BiphotonState::spec)
        .def_readonly("corr_width", &BiphotonState::corr_width)
        .def_property_readonly("tensor",
                               [](const BiphotonState& s) { return s.tensor; });

    m.def("make_envelope",
          [](const GridSpec& spec, const std::string& kind, double a, double b) {
              return make_envelope(spec, shape_from_args(kind, a, b));
          },
          py::arg("spec"), py::arg("shape"), py::arg("size"), py::arg("thickness") = 0.0);
    m.def("make_biphoton", &make_biphoton, py::arg("spec"), py::arg("config"),
          py::arg("envelope"), py::arg("sigma") = 0.0);
    m.def("to_full4d", &to_full4d);
    m.def("make_grating", &make_grating, py::arg("spec"), py::arg("period"), py::arg("alpha"),
          py::arg("offset") = 0, py::arg("orientation") = Orientation::Horizontal);

    py::class_<G2Tensor>(m, "G2Tensor")
        .def_readonly("spec", &G2Tensor::spec)
        .def_readonly("data", &G2Tensor::data)
        .def("total", &G2Tensor::total);

    py::enum_<PsfKind>(m, "PsfKind")
        .value("Fourier", PsfKind::Fourier)
        .value("Identity", PsfKind::Identity);

    m.def("effective_mask_ff", &effective_mask_ff);
    m.def("effective_mask_nf", &effective_mask_nf);
    m.def("propagate_coherent", &propagate_coherent);
    m.def("propagate_pairs_analytic", &propagate_pairs_analytic);
    m.def("propagate_g2_full", &propagate_g2_full, py::arg("state"), py::arg("mask"),
          py::arg("kind") = PsfKind::Fourier);
    m.def("propagate_pairs_intensity", &propagate_pairs_intensity);

    py::class_<DetectorModel>(m, "DetectorModel")
        .def(py::init<>())
        .def_readwrite("pairs_per_frame", &DetectorModel::pairs_per_frame)
        .def_readwrite("stray_rate", &DetectorModel::stray_rate)
        .def_readwrite("readout_noise", &DetectorModel::readout_noise)
        .def_readwrite("smear_fraction", &DetectorModel::smear_fraction)
        .def_readwrite("quantum_efficiency", &DetectorModel::quantum_efficiency)
        .def_readwrite("seed", &DetectorModel::seed);

    m.def("synthesize_frames",
          [](const G2Tensor& truth, const DetectorModel& model, int m, std::uint64_t first) {
              return frames_to_array(synthesize_block(truth, model, m, first));
          },
          py::arg("truth"), py::arg("model"), py::arg("frames"),
          py::arg("first_frame_index") = 0);

    py::class_<G2Accumulator>(m, "G2Accumulator")
        .def(py::init<int>())
        .def_readonly("frames_processed", &G2Accumulator::frames_processed)
        .def_readonly("blocks_processed", &G2Accumulator::blocks_processed)
        .def("merge", &G2Accumulator::merge);

    m.def("accumulate_frames",
          [](G2Accumulator& acc, const py::array_t<std::uint16_t>& frames) {
              accumulate_block(acc, frames_from_array(frames));
          });
    m.def("finalize", &finalize);

    py::enum_<FixPolicy>(m, "FixPolicy")
        .value("NeighborMean", FixPolicy::NeighborMean)
        .value("Zero", FixPolicy::Zero);
    m.def("fix_artifacts", &fix_artifacts, py::arg("g2"), py::arg("policy"),
          py::arg("same_row") = false);

    py::class_<Projection> proj(m, "Projection");
    py::enum_<Projection::Kind>(proj, "Kind")
        .value("SumCoordinate", Projection::Kind::SumCoordinate)
        .value("MinusCoordinate", Projection::Kind::MinusCoordinate);
    proj.def_readonly("kind", &Projection::kind)
        .def_readonly("n", &Projection::n)
        .def_readonly("origin", &Projection::origin)
        .def_readonly("data", &Projection::data)
        .def("value_at", &Projection::value_at)
        .def("center", &Projection::center);

    m.def("project_minus", &project_minus);
    m.def("project_plus", &project_plus);
    m.def("guidestar_value", &guidestar_value, py::arg("projection"),
          py::arg("mean_3x3") = false);

    m.def("extract_orders",
          py::overload_cast<const Projection&, int, int, int, Orientation>(&extract_orders),
          py::arg("projection"), py::arg("period"), py::arg("max_order"),
          py::arg("window") = 1, py::arg("orientation") = Orientation::Horizontal);

    py::class_<SinusoidFit>(m, "SinusoidFit")
        .def_readonly("amplitude", &SinusoidFit::amplitude)
        .def_readonly("period", &SinusoidFit::period)
        .def_readonly("phase", &SinusoidFit::phase)
        .def_readonly("offset", &SinusoidFit::offset)
        .def_readonly("residual_rms", &SinusoidFit::residual_rms)
        .def_readonly("converged", &SinusoidFit::converged);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("parameters", &SweepResult::parameters)
        .def_readonly("orders", &SweepResult::orders)
        .def_readonly("magnitudes", &SweepResult::magnitudes)
        .def_readonly("fits", &SweepResult::fits);

    py::enum_<SweepMode>(m, "SweepMode")
        .value("Pairs", SweepMode::Pairs)
        .value("Classical", SweepMode::Classical);

    m.def("ff_translation_sweep", &ff_translation_sweep, py::arg("spec"), py::arg("period"),
          py::arg("offsets"), py::arg("alpha") = kPi / 2, py::arg("envelope_waist") = 0.0);
    m.def("nf_amplitude_sweep", &nf_amplitude_sweep, py::arg("spec"), py::arg("period"),
          py::arg("amplitudes"), py::arg("mode") = SweepMode::Pairs,
          py::arg("envelope_waist") = 0.0);

    py::class_<CoordinateDescentModes>(m, "CoordinateDescentModes")
        .def(py::init<>())
        .def_readwrite("k_modes", &CoordinateDescentModes::k_modes)
        .def_readwrite("steps_per_mode", &CoordinateDescentModes::steps_per_mode)
        .def_readwrite("passes", &CoordinateDescentModes::passes)
        .def_readwrite("coeff_range", &CoordinateDescentModes::coeff_range);

    py::class_<AoResult>(m, "AoResult")
        .def_readonly("mask", &AoResult::mask)
        .def_readonly("trace", &AoResult::trace)
        .def_readonly("coefficients", &AoResult::coefficients);

    py::class_<AberrationModel>(m, "AberrationModel")
        .def_static("low_order", &AberrationModel::low_order)
        .def("mask_from_coefficients",
             [](const AberrationModel& model, const std::vector<double>& coeffs) {
                 return model.mask_from_coefficients(coeffs);
             })
        .def_property_readonly("size", &AberrationModel::size);

    m.def("ao_optimize", &ao_optimize);

    py::class_<TransmissionMatrix>(m, "TransmissionMatrix")
        .def_static("identity", &TransmissionMatrix::identity)
        .def_static("random_unitary", &TransmissionMatrix::random_unitary)
        .def_readonly("n_modes", &TransmissionMatrix::n_modes)
        .def_readonly("t", &TransmissionMatrix::t);

    py::enum_<ProbeBasis>(m, "ProbeBasis").value("PhaseStepping", ProbeBasis::PhaseStepping);

    m.def("tm_propagate", &tm_propagate);
    m.def("tm_correction_mask", &tm_correction_mask);
    m.def("measure_tm_classical", &measure_tm_classical, py::arg("hidden"),
          py::arg("basis") = ProbeBasis::PhaseStepping, py::arg("intensity_noise") = 0.0,
          py::arg("seed") = 1);
    m.def("correlated_mode_state", &correlated_mode_state);
    m.def("tm_correlation_peak", &tm_correlation_peak);
    m.def("tm_background", &tm_background);

    py::class_<PixelResponse>(m, "PixelResponse")
        .def_static("linear", &PixelResponse::linear)
        .def_static("quadratic", &PixelResponse::quadratic, py::arg("a1"), py::arg("a2"),
                    py::arg("a3") = 0.0)
        .def("phase_at", &PixelResponse::phase_at);

    py::class_<CalibrationCurve>(m, "CalibrationCurve")
        .def_readonly("m", &CalibrationCurve::m);

    py::class_<InverseResponse>(m, "InverseResponse")
        .def("grayscale_at", &InverseResponse::grayscale_at);

    py::class_<LutReport>(m, "LutReport")
        .def_readonly("fitted_period", &LutReport::fitted_period)
        .def_readonly("fitted_amplitude", &LutReport::fitted_amplitude)
        .def_readonly("residual_rms", &LutReport::residual_rms);

    m.def("simulate_speckle_curve",
          [](const PixelResponse& hidden, std::uint64_t seed, int n) {
              const SpeckleSet set = simulate_speckles(hidden, seed, n);
              return correlation_curve(set.reference, set.images);
          },
          py::arg("hidden"), py::arg("seed") = 1, py::arg("n") = 256);
    m.def("fit_response", &fit_response);
    m.def("invert_response", &invert_response);
    m.def("verify_lut", &verify_lut, py::arg("hidden"), py::arg("lut"), py::arg("seed") = 1,
          py::arg("n") = 256);

    m.def("set_max_threads", &set_max_threads);
}
