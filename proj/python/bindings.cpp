#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qtwist/arith.hpp"
#include "qtwist/cli.hpp"
#include "qtwist/curve.hpp"
#include "qtwist/error.hpp"
#include "qtwist/io.hpp"
#include "qtwist/lfun.hpp"
#include "qtwist/parallel.hpp"
#include "qtwist/primesum.hpp"
#include "qtwist/stats.hpp"

namespace py = pybind11;
using namespace qtwist;

namespace {

arith::WeightSpec weight(const std::string& text) { return arith::parse_weight(text); }

py::dict estimate_dict(const primesum::RankEstimate& r) {
  py::dict d;
  d["d"] = r.d;
  d["r_hat"] = r.r_hat;
  d["prime_term"] = r.prime_term;
  d["sym2_term"] = r.sym2_term;
  d["sym3_term"] = r.sym3_term;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qtwist, m) {
  m.doc() = "Quadratic-twist statistics of elliptic curves";

  static py::exception<Error> base_exc(m, "Error");
  static py::exception<DomainError> domain_exc(m, "DomainError", base_exc.ptr());
  static py::exception<CapacityError> capacity_exc(m, "CapacityError", base_exc.ptr());
  static py::exception<FixtureError> fixture_exc(m, "FixtureError", base_exc.ptr());
  static py::exception<DataError> data_exc(m, "DataError", base_exc.ptr());
  static py::exception<ConfigError> config_exc(m, "ConfigError", base_exc.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      domain_exc(e.what());
    } catch (const CapacityError& e) {
      capacity_exc(e.what());
    } catch (const FixtureError& e) {
      fixture_exc(e.what());
    } catch (const DataError& e) {
      data_exc(e.what());
    } catch (const ConfigError& e) {
      config_exc(e.what());
    } catch (const Error& e) {
      base_exc(e.what());
    }
  });

  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.def("num_threads", &num_threads);

  m.def("kronecker", &arith::kronecker, py::arg("d"), py::arg("n"));
  m.def("primes_upto", [](std::uint64_t P) { return arith::sieve_primes(P).primes; }, py::arg("P"));
  m.def("mellin", [](const std::string& w, std::complex<double> s) { return arith::mellin(weight(w), s); },
        py::arg("weight"), py::arg("s"));

  py::class_<curve::EllipticCurve>(m, "EllipticCurve")
      .def(py::init([](std::string label, std::int64_t a, std::int64_t b, std::uint64_t N, int eps,
                       std::map<std::uint32_t, int> overrides) {
             return curve::make_curve(std::move(label), a, b, N, eps, std::move(overrides));
           }),
           py::arg("label"), py::arg("a"), py::arg("b"), py::arg("conductor"), py::arg("root_number"),
           py::arg("ap_overrides") = std::map<std::uint32_t, int>{})
      .def_readonly("label", &curve::EllipticCurve::label)
      .def_readonly("a", &curve::EllipticCurve::a)
      .def_readonly("b", &curve::EllipticCurve::b)
      .def_readonly("conductor", &curve::EllipticCurve::conductor)
      .def_readonly("root_number", &curve::EllipticCurve::root_number)
      .def("ap", [](const curve::EllipticCurve& e, std::uint64_t p) { return curve::ap_of(e, p); }, py::arg("p"))
      .def("__repr__", [](const curve::EllipticCurve& e) {
        std::ostringstream os;
        os << "EllipticCurve('" << e.label << "', a=" << e.a << ", b=" << e.b << ", N=" << e.conductor << ")";
        return os.str();
      });

  m.def("load_curves", &io::load_curves, py::arg("path"));

  py::class_<curve::ApTable>(m, "ApTable")
      .def_readonly("label", &curve::ApTable::label)
      .def_readonly("bound", &curve::ApTable::bound)
      .def("__len__", &curve::ApTable::size)
      .def("primes", [](const curve::ApTable& t) { return t.primes->primes; })
      .def("ap", [](const curve::ApTable& t) { return t.ap; })
      .def("ap_at", &curve::ApTable::ap_at, py::arg("p"));

  m.def(
      "build_ap_table",
      [](const curve::EllipticCurve& e, std::uint64_t P, const std::string& cache_dir) {
        return io::cache_load(cache_dir, e, P).table;
      },
      py::arg("curve"), py::arg("P"), py::arg("cache_dir") = "", py::call_guard<py::gil_scoped_release>());

  m.def("twist_ap", &curve::twist_ap, py::arg("curve"), py::arg("d"), py::arg("p"));
  m.def("twist_root_number", [](const curve::EllipticCurve& e, std::int64_t d) { return curve::make_twist(e, d).root_number; },
        py::arg("curve"), py::arg("d"));

  m.def(
      "l_value",
      [](const curve::EllipticCurve& e, const curve::ApTable& t, std::int64_t d) {
        const auto tw = curve::make_twist(e, d);
        const auto v = tw.root_number == 1 ? lfun::l_value_center(tw, t) : lfun::l_prime_center(tw, t);
        return py::make_tuple(v.value, v.tail_bound, tw.root_number == 1 ? "L(1)" : "L'(1)");
      },
      py::arg("curve"), py::arg("table"), py::arg("d") = 1);

  m.def(
      "classify_family",
      [](const curve::EllipticCurve& e, std::int64_t D) {
        const auto table = curve::build_ap_table(e, lfun::family_table_bound(e, D));
        const auto classes = lfun::classify_family(e, table, D);
        py::list out;
        for (const auto& c : classes) out.append(py::make_tuple(c.d, c.root_number, c.rank.cls));
        return out;
      },
      py::arg("curve"), py::arg("D"));

  m.def(
      "prime_sum",
      [](const curve::EllipticCurve& e, const curve::ApTable& t, std::int64_t D, std::uint64_t P, const std::string& w,
         const std::string& g, const std::string& path) {
        primesum::PrimeSumConfig cfg;
        cfg.D = D;
        cfg.P = P;
        cfg.w = weight(w);
        cfg.g = weight(g);
        cfg.path = path == "twist" ? primesum::SumPath::TwistLoop
                   : path == "table" ? primesum::SumPath::ResidueTable
                                     : primesum::SumPath::Both;
        py::gil_scoped_release release;
        const auto r = primesum::prime_sum_S(e, t, cfg);
        py::gil_scoped_acquire acquire;
        py::dict d;
        d["S"] = r.S;
        d["normalized"] = r.normalized;
        d["S_twist"] = r.S_twist ? py::object(py::float_(*r.S_twist)) : py::object(py::none());
        d["S_table"] = r.S_table ? py::object(py::float_(*r.S_table)) : py::object(py::none());
        return d;
      },
      py::arg("curve"), py::arg("table"), py::arg("D"), py::arg("P"), py::arg("w") = "gaussian:1",
      py::arg("g") = "triangular", py::arg("path") = "both");

  m.def(
      "rank_estimate",
      [](const curve::EllipticCurve& e, const curve::ApTable& t, std::int64_t d, std::uint64_t P, const std::string& g) {
        return estimate_dict(primesum::rank_estimator(e, t, d, P, weight(g)));
      },
      py::arg("curve"), py::arg("table"), py::arg("d"), py::arg("P"), py::arg("g") = "triangular");

  m.def(
      "family_average_rank",
      [](const curve::EllipticCurve& e, const curve::ApTable& t, std::int64_t D, std::uint64_t P, const std::string& w,
         const std::string& g) {
        primesum::PrimeSumConfig cfg;
        cfg.D = D;
        cfg.P = P;
        cfg.w = weight(w);
        cfg.g = weight(g);
        return primesum::family_average_rank(e, t, cfg).average;
      },
      py::arg("curve"), py::arg("table"), py::arg("D"), py::arg("P"), py::arg("w") = "gaussian:1",
      py::arg("g") = "triangular");

  m.def("sym2_prime_sum", [](const curve::ApTable& t, double x, const std::string& h) {
    return primesum::sym2_prime_sum(t, x, weight(h));
  }, py::arg("table"), py::arg("x"), py::arg("h") = "triangular");

  m.def("gauss_sum_check", [](std::uint64_t p) { return primesum::gauss_sum_check(p).max_deviation; }, py::arg("p"));
  m.def(
      "poisson_check",
      [](std::int64_t a, std::int64_t c, std::int64_t p, double D, std::int64_t x, const std::string& w) {
        return primesum::poisson_identity_check(a, c, p, D, weight(w), x).abs_diff;
      },
      py::arg("a"), py::arg("c"), py::arg("p"), py::arg("D"), py::arg("x"), py::arg("w") = "gaussian:1");

  m.def(
      "root_number_sum",
      [](const curve::EllipticCurve& e, const std::vector<std::int64_t>& grid, const std::string& mode) {
        const auto r = stats::root_number_sum(
            e, grid, mode == "all_squarefree" ? stats::RootNumberMode::AllSquarefree : stats::RootNumberMode::Coprime);
        py::dict d;
        d["grid"] = r.grid;
        d["sums"] = r.sums;
        d["beta"] = r.fit ? py::object(py::float_(r.fit->beta)) : py::object(py::none());
        return d;
      },
      py::arg("curve"), py::arg("grid"), py::arg("mode") = "coprime");

  m.def(
      "omega_moment",
      [](std::uint64_t D, unsigned q) {
        const auto r = stats::omega_moments(D, q);
        return py::make_tuple(py::int_(py::str(r.moment.str())), r.bound);
      },
      py::arg("D"), py::arg("q"));

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"qtwist"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI command; returns (exit_code, stdout, stderr).");
}
