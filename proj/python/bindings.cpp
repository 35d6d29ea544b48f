#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "activecq/config.hpp"
#include "activecq/csv.hpp"
#include "activecq/errors.hpp"
#include "activecq/harness.hpp"

namespace py = pybind11;
using namespace activecq;

namespace {

Dataset make_dataset(Eigen::VectorXd a, Eigen::MatrixXd z, Eigen::MatrixXd s, Eigen::VectorXd y) {
    Dataset d;
    d.a = std::move(a);
    d.z = std::move(z);
    d.s = std::move(s);
    d.y = std::move(y);
    d.validate();
    return d;
}

GenSpec make_genspec(const std::string& generator, Eigen::Index n, const std::string& mode,
                     std::uint64_t seed, double noise_sd) {
    return GenSpec{generator_from_string(generator), n, treatment_mode_from_string(mode), seed,
                   noise_sd};
}

}  // namespace

PYBIND11_MODULE(_activecq, m) {
    m.doc() = "Active estimation of causal quantities: GP outcome models, "
              "mean-embedding estimators and uncertainty-reduction acquisition.";

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("a") = Eigen::VectorXd(),
             py::arg("z") = Eigen::MatrixXd(0, 0), py::arg("s") = Eigen::MatrixXd(0, 0),
             py::arg("y") = Eigen::VectorXd())
        .def_readonly("a", &Dataset::a)
        .def_readonly("z", &Dataset::z)
        .def_readonly("s", &Dataset::s)
        .def_readonly("y", &Dataset::y)
        .def_property_readonly("rows", &Dataset::rows)
        .def("__len__", &Dataset::rows);

    m.def("gen_visualization",
          [](Eigen::Index n, const std::string& mode, std::uint64_t seed, double noise_sd) {
              return gen_visualization(make_genspec("visualization", n, mode, seed, noise_sd));
          },
          py::arg("n"), py::arg("mode") = "continuous", py::arg("seed") = 0,
          py::arg("noise_sd") = 0.4);
    m.def("gen_simulation",
          [](Eigen::Index n, const std::string& mode, std::uint64_t seed, double noise_sd) {
              return gen_simulation(make_genspec("simulation", n, mode, seed, noise_sd));
          },
          py::arg("n"), py::arg("mode") = "continuous", py::arg("seed") = 0,
          py::arg("noise_sd") = 0.4);
    m.def("gen_shift_target",
          [](Eigen::Index n, std::uint64_t seed) {
              return gen_shift_target(make_genspec("shift_target", n, "continuous", seed, 0.0));
          },
          py::arg("n"), py::arg("seed") = 0);
    m.def("write_dataset_csv", &write_dataset_csv, py::arg("dataset"), py::arg("path"));
    m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"));

    py::class_<GpPosterior>(m, "GpPosterior")
        .def_property_readonly("train_size", &GpPosterior::train_size)
        .def_property_readonly("noise_variance",
                               [](const GpPosterior& p) { return p.model.noise_variance; });

    // GP fit with median-heuristic defaults followed by MLL ascent.
    m.def(
        "fit_gp",
        [](const Dataset& train, bool conditioning_block, int iterations, double step) {
            GpModel model;
            model.kernel.treatment =
                KernelSpec{KernelFamily::Rbf,
                           train.rows() >= 2 ? median_heuristic(Eigen::MatrixXd(train.a)) : 1.0,
                           1.0, 1.0};
            if (conditioning_block)
                model.kernel.conditioning = KernelSpec{
                    KernelFamily::Rbf, train.rows() >= 2 ? median_heuristic(train.z) : 1.0, 1.0,
                    1.0};
            model.kernel.adjustment = KernelSpec{
                KernelFamily::Rbf, train.rows() >= 2 ? median_heuristic(train.s) : 1.0, 1.0, 1.0};
            model = optimize_hyperparameters(model, train, iterations, step);
            return fit(model, train);
        },
        py::arg("train"), py::arg("conditioning_block") = true, py::arg("iterations") = 200,
        py::arg("step") = 0.05);
    m.def(
        "predict",
        [](const GpPosterior& post, const Dataset& query, bool with_covariance) {
            const GpPrediction pred = predict(post, query, with_covariance);
            return py::make_tuple(pred.mean,
                                  with_covariance ? py::cast(pred.covariance)
                                                  : py::cast(pred.variance));
        },
        py::arg("posterior"), py::arg("query"), py::arg("with_covariance") = false);

    py::class_<InterestSet>(m, "InterestSet")
        .def(py::init([](const std::string& kind, Eigen::VectorXd a, Eigen::MatrixXd z,
                         Eigen::VectorXd a_tilde) {
                 InterestSet set;
                 set.kind = cq_kind_from_string(kind);
                 set.a = std::move(a);
                 set.z = std::move(z);
                 set.a_tilde = std::move(a_tilde);
                 set.validate();
                 return set;
             }),
             py::arg("kind"), py::arg("a"), py::arg("z") = Eigen::MatrixXd(0, 0),
             py::arg("a_tilde") = Eigen::VectorXd())
        .def_property_readonly("size", &InterestSet::size);

    py::class_<CqPosterior>(m, "CqPosterior")
        .def_readonly("nu", &CqPosterior::nu)
        .def_readonly("q", &CqPosterior::q);

    m.def(
        "cq_posterior",
        [](const GpPosterior& post, const InterestSet& interest, const Dataset& all_rows,
           double lambda, bool scale_lambda_by_n, const Dataset* target) {
            KernelSpec conditioning_kernel{KernelFamily::Rbf, 1.0, 1.0, 1.0};
            if (interest.kind == CqKind::Cate && all_rows.z.rows() >= 2)
                conditioning_kernel.lengthscale = median_heuristic(all_rows.z);
            if (interest.kind == CqKind::Att && all_rows.a.size() >= 2)
                conditioning_kernel.lengthscale = median_heuristic(Eigen::MatrixXd(all_rows.a));
            const EmbeddingContext ctx = build_embedding_context(
                interest.kind, all_rows, conditioning_kernel, lambda, scale_lambda_by_n, target);
            return cq_posterior_cme(post, interest, ctx);
        },
        py::arg("posterior"), py::arg("interest"), py::arg("all_rows"), py::arg("lambda") = 0.01,
        py::arg("scale_lambda_by_n") = true, py::arg("target") = nullptr);

    m.def(
        "select_batch",
        [](const GpPosterior& post, const CqPosterior& cq, const Dataset& pool,
           const std::string& utility, const std::string& selection, int batch_size,
           std::uint64_t seed) {
            UtilitySpec spec;
            if (utility == "ig") spec.kind = UtilityKind::InformationGain;
            else if (utility == "tvr") spec.kind = UtilityKind::TotalVarianceReduction;
            else throw SchemaError("utility: expected ig or tvr");
            if (selection == "topb") spec.selection = SelectionRule::TopB;
            else if (selection == "greedy") spec.selection = SelectionRule::Greedy;
            else if (selection == "softmax") spec.selection = SelectionRule::Softmax;
            else throw SchemaError("selection: expected topb, greedy or softmax");
            spec.batch_size = batch_size;
            RandomStream rng(seed);
            return select_batch(spec, post, cq, pool, rng);
        },
        py::arg("posterior"), py::arg("cq"), py::arg("pool"), py::arg("utility") = "tvr",
        py::arg("selection") = "topb", py::arg("batch_size") = 1, py::arg("seed") = 0);

    m.def("amse", &amse, py::arg("estimated"), py::arg("truth"));

    m.def(
        "true_cq_oracle",
        [](const std::string& generator, const InterestSet& interest, const std::string& mode,
           Eigen::Index draws, std::uint64_t seed) {
            const GenSpec spec = make_genspec(generator, 0, mode, 0, 0.4);
            RandomStream rng(seed);
            return true_cq_oracle(spec, interest, draws, rng);
        },
        py::arg("generator"), py::arg("interest"), py::arg("mode") = "continuous",
        py::arg("draws") = 100000, py::arg("seed") = 0);

    py::class_<RoundRecord>(m, "RoundRecord")
        .def_readonly("round", &RoundRecord::round)
        .def_readonly("labeled", &RoundRecord::labeled)
        .def_readonly("amse", &RoundRecord::amse)
        .def_readonly("trace_q", &RoundRecord::trace_q)
        .def_readonly("logdet_q", &RoundRecord::logdet_q)
        .def_readonly("selected", &RoundRecord::selected);

    py::class_<TrialResult>(m, "TrialResult")
        .def_readonly("seed", &TrialResult::seed)
        .def_readonly("records", &TrialResult::records)
        .def_readonly("aborted", &TrialResult::aborted)
        .def_readonly("abort_reason", &TrialResult::abort_reason);

    // Full active loop driven by a JSON config fragment (same schema as the
    // CLI's run subcommand, minus strategies/seeds).
    m.def(
        "run_active_loop",
        [](const std::string& config_json, const std::string& strategy, std::uint64_t seed) {
            RunConfig config = parse_config_text(config_json);
            config.trial.strategy = strategy;
            return run_active_loop(config.trial, seed);
        },
        py::arg("config_json"), py::arg("strategy") = "tvr_cme", py::arg("seed") = 1);

    m.attr("rng_version") = std::string(RandomStream::kVersion);
}
