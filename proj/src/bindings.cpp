#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nssbm/greedy.hpp"
#include "nssbm/icl.hpp"
#include "nssbm/ingest.hpp"
#include "nssbm/metrics.hpp"
#include "nssbm/simulate.hpp"
#include "nssbm/tensor.hpp"
#include "nssbm/version.hpp"

namespace py = pybind11;
using namespace nssbm;

namespace {

Partition make_partition(const std::vector<std::int32_t>& labels) {
  std::int32_t max_label = -1;
  for (std::int32_t lab : labels) max_label = std::max(max_label, lab);
  return Partition(labels, max_label + 1);
}

py::array_t<double> grid_array(int k, int d, const std::vector<double>& values) {
  py::array_t<double> arr({k, k, d});
  std::copy(values.begin(), values.end(), arr.mutable_data());
  return arr;
}

RateGrid grid_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> rates) {
  if (rates.ndim() != 3 || rates.shape(0) != rates.shape(1)) {
    throw std::invalid_argument("rates must have shape (K, K, D)");
  }
  RateGrid grid;
  grid.num_node_clusters = static_cast<int>(rates.shape(0));
  grid.num_time_clusters = static_cast<int>(rates.shape(2));
  grid.values.assign(rates.data(), rates.data() + rates.size());
  return grid;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "non-stationary stochastic block model: exact ICL clustering of "
            "nodes and time bins";
  m.attr("__version__") = kVersion;

  py::enum_<Mode>(m, "Mode")
      .value("directed", Mode::directed)
      .value("undirected", Mode::undirected);

  py::register_exception<empty_cluster_error>(m, "EmptyClusterError");

  py::class_<Hyperparameters>(m, "Hyperparameters")
      .def(py::init([](double a, double b, double alpha, double gamma, double delta) {
             Hyperparameters h{a, b, alpha, gamma, delta};
             h.validate();
             return h;
           }),
           py::arg("a") = 1.0, py::arg("b") = 1.0, py::arg("alpha") = 1.0,
           py::arg("gamma") = 1.0, py::arg("delta") = 1.0)
      .def_readwrite("a", &Hyperparameters::a)
      .def_readwrite("b", &Hyperparameters::b)
      .def_readwrite("alpha", &Hyperparameters::alpha)
      .def_readwrite("gamma", &Hyperparameters::gamma)
      .def_readwrite("delta", &Hyperparameters::delta);

  py::class_<InteractionTensor>(m, "InteractionTensor")
      .def_property_readonly("num_nodes", &InteractionTensor::num_nodes)
      .def_property_readonly("num_bins", &InteractionTensor::num_bins)
      .def_property_readonly("mode", &InteractionTensor::mode)
      .def_property_readonly("total_count", &InteractionTensor::total_count)
      .def("bin_total", &InteractionTensor::bin_total, py::arg("bin"))
      .def("entries",
           [](const InteractionTensor& t) {
             py::list out;
             for (const TensorEntry& e : t.entries()) {
               out.append(py::make_tuple(e.source, e.target, e.bin, e.count));
             }
             return out;
           })
      .def("__repr__", [](const InteractionTensor& t) {
        std::ostringstream out;
        out << "InteractionTensor(num_nodes=" << t.num_nodes() << ", num_bins=" << t.num_bins()
            << ", mode=" << mode_name(t.mode()) << ", total_count=" << t.total_count() << ")";
        return out.str();
      });

  m.def(
      "build_tensor",
      [](const std::vector<std::tuple<int, int, int, count_t>>& records, int num_nodes,
         int num_bins, Mode mode) {
        std::vector<EventRecord> recs;
        recs.reserve(records.size());
        for (const auto& [s, t, bin, count] : records) {
          recs.push_back({s, t, bin, count});
        }
        return build_tensor(recs, num_nodes, num_bins, mode);
      },
      py::arg("records"), py::arg("num_nodes"), py::arg("num_bins"),
      py::arg("mode") = Mode::directed,
      "Build a sparse interaction tensor from (source, target, bin, count) records.");

  py::class_<BlockStats>(m, "BlockStats")
      .def_readonly("num_node_clusters", &BlockStats::num_node_clusters)
      .def_readonly("num_time_clusters", &BlockStats::num_time_clusters)
      .def_readonly("log_fact_const", &BlockStats::log_fact_const)
      .def("s", &BlockStats::s, py::arg("k"), py::arg("g"), py::arg("d"))
      .def("r", &BlockStats::r, py::arg("k"), py::arg("g"), py::arg("d"))
      .def("total", &BlockStats::total);

  m.def(
      "compute_block_stats",
      [](const InteractionTensor& tensor, const std::vector<std::int32_t>& node_labels,
         const std::vector<std::int32_t>& time_labels) {
        return compute_block_stats(tensor, make_partition(node_labels),
                                   make_partition(time_labels));
      },
      py::arg("tensor"), py::arg("node_labels"), py::arg("time_labels"));

  py::class_<IclValue>(m, "IclValue")
      .def_readonly("total", &IclValue::total)
      .def_readonly("emission_term", &IclValue::emission_term)
      .def_readonly("label_term", &IclValue::label_term)
      .def("__repr__", [](const IclValue& v) {
        std::ostringstream out;
        out << "IclValue(total=" << v.total << ", emission_term=" << v.emission_term
            << ", label_term=" << v.label_term << ")";
        return out.str();
      });

  m.def("log_emission", &log_emission, py::arg("stats"), py::arg("h"));
  m.def(
      "log_label_prior",
      [](const std::vector<std::int32_t>& node_sizes, const std::vector<std::int32_t>& time_sizes,
         const Hyperparameters& h, std::int64_t num_nodes, std::int64_t num_bins) {
        return log_label_prior(node_sizes, time_sizes, h, num_nodes, num_bins);
      },
      py::arg("node_sizes"), py::arg("time_sizes"), py::arg("h"), py::arg("num_nodes"),
      py::arg("num_bins"));
  m.def(
      "icl",
      [](const InteractionTensor& tensor, const std::vector<std::int32_t>& node_labels,
         const std::vector<std::int32_t>& time_labels, const Hyperparameters& h) {
        return icl(tensor, make_partition(node_labels), make_partition(time_labels), h);
      },
      py::arg("tensor"), py::arg("node_labels"), py::arg("time_labels"),
      py::arg("h") = Hyperparameters{});
  m.def(
      "posterior_rates",
      [](const BlockStats& stats, const Hyperparameters& h) {
        const RateEstimate est = posterior_rates(stats, h);
        return grid_array(est.num_node_clusters, est.num_time_clusters, est.values);
      },
      py::arg("stats"), py::arg("h") = Hyperparameters{});

  py::class_<SearchConfig>(m, "SearchConfig")
      .def(py::init([](int k_max, int d_max, int max_sweeps, double improvement_epsilon,
                       int num_restarts, std::uint64_t seed, int num_threads) {
             SearchConfig cfg{k_max, d_max, max_sweeps, improvement_epsilon,
                              num_restarts, seed, num_threads};
             cfg.validate();
             return cfg;
           }),
           py::arg("k_max") = 10, py::arg("d_max") = 10, py::arg("max_sweeps") = 100,
           py::arg("improvement_epsilon") = 1e-10, py::arg("num_restarts") = 5,
           py::arg("seed") = 0, py::arg("num_threads") = 0)
      .def_readwrite("k_max", &SearchConfig::k_max)
      .def_readwrite("d_max", &SearchConfig::d_max)
      .def_readwrite("max_sweeps", &SearchConfig::max_sweeps)
      .def_readwrite("improvement_epsilon", &SearchConfig::improvement_epsilon)
      .def_readwrite("num_restarts", &SearchConfig::num_restarts)
      .def_readwrite("seed", &SearchConfig::seed)
      .def_readwrite("num_threads", &SearchConfig::num_threads);

  py::class_<FitResult>(m, "FitResult")
      .def_property_readonly("node_labels",
                             [](const FitResult& f) { return f.node_partition.labels(); })
      .def_property_readonly("time_labels",
                             [](const FitResult& f) { return f.time_partition.labels(); })
      .def_readonly("num_node_clusters", &FitResult::num_node_clusters)
      .def_readonly("num_time_clusters", &FitResult::num_time_clusters)
      .def_readonly("icl", &FitResult::icl)
      .def_property_readonly("rates",
                             [](const FitResult& f) {
                               return grid_array(f.rates.num_node_clusters,
                                                 f.rates.num_time_clusters, f.rates.values);
                             })
      .def_readonly("restart_id", &FitResult::restart_id)
      .def_readonly("revalidation_error", &FitResult::revalidation_error)
      .def_property_readonly("trace", [](const FitResult& f) {
        py::list out;
        for (const TraceEntry& t : f.trace) {
          out.append(py::make_tuple(t.sweep, move_kind_name(t.kind), t.delta, t.icl_after));
        }
        return out;
      });

  m.def("greedy_fit", &greedy_fit, py::arg("tensor"), py::arg("h") = Hyperparameters{},
        py::arg("config") = SearchConfig{},
        py::call_guard<py::gil_scoped_release>(),
        "Greedy ICL maximization over node labels, time labels, K and D.");

  m.def(
      "additive_rates",
      [](const std::vector<double>& s1, const std::vector<double>& s2,
         const std::vector<double>& s3) {
        const RateGrid grid = additive_rates(s1, s2, s3);
        return grid_array(grid.num_node_clusters, grid.num_time_clusters, grid.values);
      },
      py::arg("s1"), py::arg("s2"), py::arg("s3"));

  m.def(
      "sample_partition",
      [](int n, const std::vector<double>& weights, std::uint64_t seed) {
        return sample_partition(n, weights, seed);
      },
      py::arg("n"), py::arg("weights"), py::arg("seed") = 0);

  m.def(
      "simulate",
      [](int num_nodes, int num_bins,
         py::array_t<double, py::array::c_style | py::array::forcecast> rates,
         std::optional<std::vector<double>> node_weights,
         std::optional<std::vector<double>> time_weights, double delta, Mode mode,
         std::uint64_t seed) {
        GenerativeSpec spec;
        spec.num_nodes = num_nodes;
        spec.num_bins = num_bins;
        spec.rates = grid_from_array(rates);
        const int k = spec.rates.num_node_clusters;
        const int d = spec.rates.num_time_clusters;
        spec.node_weights = node_weights.value_or(std::vector<double>(k, 1.0 / k));
        spec.time_weights = time_weights.value_or(std::vector<double>(d, 1.0 / d));
        spec.delta = delta;
        spec.mode = mode;
        spec.seed = seed;
        SimulatedData data = simulate(spec);
        return py::make_tuple(std::move(data.tensor), data.node_labels, data.time_labels);
      },
      py::arg("num_nodes"), py::arg("num_bins"), py::arg("rates"),
      py::arg("node_weights") = std::nullopt, py::arg("time_weights") = std::nullopt,
      py::arg("delta") = 1.0, py::arg("mode") = Mode::directed, py::arg("seed") = 0,
      "Draw labels and a Poisson interaction tensor; returns (tensor, c, y).");

  m.def(
      "simulate_tensor",
      [](int num_nodes, int num_bins,
         py::array_t<double, py::array::c_style | py::array::forcecast> rates,
         const std::vector<std::int32_t>& node_labels,
         const std::vector<std::int32_t>& time_labels, double delta, Mode mode,
         std::uint64_t seed) {
        GenerativeSpec spec;
        spec.num_nodes = num_nodes;
        spec.num_bins = num_bins;
        spec.rates = grid_from_array(rates);
        const int k = spec.rates.num_node_clusters;
        const int d = spec.rates.num_time_clusters;
        spec.node_weights.assign(static_cast<std::size_t>(k), 1.0 / k);
        spec.time_weights.assign(static_cast<std::size_t>(d), 1.0 / d);
        spec.delta = delta;
        spec.mode = mode;
        spec.seed = seed;
        return simulate_tensor(spec, node_labels, time_labels);
      },
      py::arg("num_nodes"), py::arg("num_bins"), py::arg("rates"), py::arg("node_labels"),
      py::arg("time_labels"), py::arg("delta") = 1.0, py::arg("mode") = Mode::directed,
      py::arg("seed") = 0);

  m.def(
      "adjusted_rand_index",
      [](const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
        return adjusted_rand_index(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "parse_contact_log",
      [](const std::string& text) {
        std::istringstream in(text);
        ParsedContactLog log = parse_contact_log(in);
        py::list events;
        for (const ContactEvent& e : log.events) {
          events.append(py::make_tuple(e.timestamp, e.person_a, e.person_b));
        }
        return py::make_tuple(events, log.nodes.dense_to_raw);
      },
      py::arg("text"),
      "Parse `t i j` contact lines; returns (events, raw ids in dense order).");

  m.def(
      "aggregate_contact_log",
      [](const std::string& text, std::int64_t origin, std::int64_t bin_width, int num_bins,
         bool drop_out_of_range) {
        std::istringstream in(text);
        ParsedContactLog log = parse_contact_log(in);
        BinningSpec spec{origin, bin_width, num_bins, drop_out_of_range};
        AggregationResult agg = aggregate_bins(log.events, log.nodes, spec);
        return py::make_tuple(std::move(agg.tensor), agg.dropped, log.nodes.dense_to_raw);
      },
      py::arg("text"), py::arg("origin") = 0, py::arg("bin_width") = 900,
      py::arg("num_bins") = 96, py::arg("drop_out_of_range") = true,
      "Parse and bin a contact log; returns (tensor, dropped, raw ids).");
}
