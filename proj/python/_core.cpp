// JSON-string bindings; sorryforge/__init__.py turns them into Python objects.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sorryforge/cli.hpp"
#include "sorryforge/database.hpp"
#include "sorryforge/eval_harness.hpp"
#include "sorryforge/indexer.hpp"
#include "sorryforge/scanner.hpp"
#include "sorryforge/verifier.hpp"

namespace py = pybind11;
using namespace sorryforge;

namespace {

json parse(const std::string& text) { return json::parse(text); }

std::vector<SorryRecord> records_from(const std::string& text) {
  std::vector<SorryRecord> out;
  for (const auto& r : parse(text)) out.push_back(record_from_json(r));
  return out;
}

std::string records_to(const std::vector<SorryRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back(to_json(r));
  return out.dump();
}

json location_json(const SourceLocation& l) {
  return {{"path", l.path},
          {"start_line", l.start_line},
          {"start_column", l.start_column},
          {"end_line", l.end_line},
          {"end_column", l.end_column}};
}

SourceLocation location_from(const json& j) {
  return {j.at("path").get<std::string>(), j.at("start_line").get<int>(), j.at("start_column").get<int>(),
          j.at("end_line").get<int>(), j.at("end_column").get<int>()};
}

std::string scan(const std::string& source) {
  json out = json::array();
  for (const auto& h : scan_for_sorries(source)) {
    json loc = location_json(h.location);
    loc.erase("path");
    out.push_back({{"token", h.token}, {"location", loc}});
  }
  return out.dump();
}

std::string splice(const std::string& source, const std::string& location, const std::string& proposal) {
  auto r = splice_proposal(source, location_from(parse(location)), proposal);
  return json{{"text", r.text}, {"replaced_span", location_json(r.replaced_span)}}.dump();
}

// Verifies against a workspace that is already built; no checkout happens.
std::string verify(const std::string& workspace_root, const std::string& record, const std::string& proposal,
                   const std::optional<std::string>& mock_script, int timeout_seconds) {
  Workspace ws;
  ws.root = workspace_root;
  ws.build_state.status = BuildStatus::Built;
  Backend backend = mock_script ? Backend{MockBackend{*mock_script}} : Backend{RealBackend{}};
  auto session = open_session(ws, backend);
  SorryRecord r = record_from_json(parse(record));
  VerifyOptions options;
  options.timeout = std::chrono::seconds(timeout_seconds);
  auto verdict = verify_proposal(*session, r, ProofProposal{r.id, proposal, "python", 0}, options);
  session->close();
  return to_json(verdict).dump();
}

std::string metrics(const std::string& runs_text, const std::string& provers_text) {
  std::vector<RunRecord> runs;
  for (const auto& r : parse(runs_text)) runs.push_back(run_from_json(r));
  return to_json(compute_metrics(runs, load_prover_configs(parse(provers_text)))).dump();
}

std::string report(const std::string& metrics_text, const std::string& format) {
  auto f = parse_report_format(format);
  if (!f) throw Error(ErrorCode::UsageError, "unknown report format " + format);
  return emit_report(metrics_from_json(parse(metrics_text)), *f);
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = dispatch(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  static PyObject* error_type = py::exception<Error>(m, "SorryforgeError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("compute_id", [](const std::string& record) {
    json j = parse(record);
    if (!j.contains("id")) j["id"] = "";  // not hashed; lets callers mint ids for fresh records
    return compute_id(record_from_json(j));
  });
  m.def("validate_record", [](const std::string& record) { return validate_record(record_from_json(parse(record))); });
  m.def("normalize_goal", [](const std::string& goal) { return normalize_goal(goal); });
  m.def("hash_email", [](const std::string& email) { return hash_email(email); });
  m.def("scan_for_sorries", &scan);
  m.def("deduplicate", [](const std::string& records) { return records_to(deduplicate(records_from(records))); });
  m.def("select_test_slice", [](const std::string& snapshot, std::size_t n) {
    return serialize_snapshot(select_test_slice(snapshot_from_json(parse(snapshot)), n));
  });
  m.def("load_database", [](const std::string& path) { return serialize_snapshot(load_database(path).snapshot); });
  m.def("save_database", [](const std::string& path, const std::string& snapshot) {
    save_database({path, snapshot_from_json(parse(snapshot))});
  });
  m.def("splice_proposal", &splice);
  m.def("verify_proposal", &verify, py::arg("workspace_root"), py::arg("record"), py::arg("proposal"),
        py::arg("mock_script") = std::nullopt, py::arg("timeout_seconds") = 300);
  m.def("pass_at_k", &pass_at_k);
  m.def("compute_metrics", &metrics);
  m.def("emit_report", &report);
  m.def("run_cli", &run_cli);
}
