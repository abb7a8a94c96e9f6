#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "pcc.h"
#include "pcc/io.hpp"

namespace fs = std::filesystem;

namespace {

// Owns a char* returned through a C out-parameter and parses it as JSON.
struct OwnedJson {
  char* raw = nullptr;
  ~OwnedJson() { pcc_string_free(raw); }
  pcc::json parse() const {
    REQUIRE(raw != nullptr);
    return pcc::json::parse(raw);
  }
};

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("pcc_capi_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string tiny_lattice_json() {
  // single-hole pattern keeps rasterization fast
  return R"({"a": 425, "nx": 0, "ny": 0, "r_center": 0.23, "r_edge": 0.35,
             "cladding_extent": 500})";
}

}  // namespace

TEST_CASE("version and error strings are always available") {
  const char* v = pcc_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) > 0);
  REQUIRE(pcc_last_error() != nullptr);
}

TEST_CASE("q from linewidth round trips through the c interface") {
  double q = 0;
  REQUIRE(pcc_q_from_linewidth(1616.0, 0.041, &q) == PCC_OK);
  CHECK(q == doctest::Approx(1616.0 / 0.041).epsilon(1e-12));

  CHECK(pcc_q_from_linewidth(1616.0, 0.0, &q) == PCC_ERR_CONFIG);
  CHECK(std::strlen(pcc_last_error()) > 0);
  CHECK(pcc_q_from_linewidth(1616.0, 0.041, nullptr) == PCC_ERR_CONFIG);
}

TEST_CASE("harmonic inversion returns the planted mode as json") {
  const double f = 0.263, q = 39500.0;
  const double alpha = 3.14159265358979323846 * f / q;
  std::vector<double> s(1 << 14);
  for (std::size_t n = 0; n < s.size(); ++n)
    s[n] = std::exp(-alpha * n) * std::cos(2 * 3.14159265358979323846 * f * n);

  OwnedJson out;
  REQUIRE(pcc_harmonic_inversion(s.data(), s.size(), 1.0, 0.24, 0.29, &out.raw) == PCC_OK);
  const pcc::json modes = out.parse();
  REQUIRE(modes.is_array());
  REQUIRE(!modes.empty());
  double best_amp = -1;
  pcc::json best;
  for (const auto& m : modes) {
    const double amp = std::hypot(m.at("amplitude_re").get<double>(),
                                  m.at("amplitude_im").get<double>());
    if (amp > best_amp) {
      best_amp = amp;
      best = m;
    }
  }
  CHECK(best.at("frequency").get<double>() == doctest::Approx(f).epsilon(1e-3));
  CHECK(best.at("Q").get<double>() == doctest::Approx(q).epsilon(0.01));

  CHECK(pcc_harmonic_inversion(nullptr, 0, 1.0, 0.2, 0.3, &out.raw) == PCC_ERR_CONFIG);
  // inverted band surfaces as a config failure with a message
  double one[32] = {1.0};
  CHECK(pcc_harmonic_inversion(one, 32, 1.0, 0.3, 0.2, &out.raw) == PCC_ERR_CONFIG);
  CHECK(std::strlen(pcc_last_error()) > 0);
}

TEST_CASE("taper solve parses a fiber spec and reports the mode") {
  OwnedJson out;
  REQUIRE(pcc_taper_solve(
              R"({"diameter_um": 1.7, "n_core": 1.45, "n_clad": 1.0, "wavelength_nm": 1600})",
              &out.raw) == PCC_OK);
  const pcc::json mode = out.parse();
  const double neff = mode.at("n_eff").get<double>();
  CHECK(neff > 1.0);
  CHECK(neff < 1.45);
  CHECK(mode.at("dispersion_residual").get<double>() < 1e-10);

  OwnedJson bad;
  CHECK(pcc_taper_solve(R"({"diameter_um": -1})", &bad.raw) == PCC_ERR_CONFIG);
  CHECK(pcc_taper_solve("not json", &bad.raw) != PCC_OK);
}

TEST_CASE("fit entry point recovers lorentzian parameters") {
  const double lc = 1616.0, gamma = 0.047, depth = 0.1, base = 1.0;
  std::vector<double> x, y;
  for (int i = 0; i < 200; ++i) {
    const double xi = lc - 0.5 + i * (1.0 / 199);
    const double hw = gamma / 2;
    x.push_back(xi);
    y.push_back(base - depth * hw * hw / ((xi - lc) * (xi - lc) + hw * hw));
  }
  OwnedJson out;
  REQUIRE(pcc_fit("lorentzian", x.data(), y.data(), x.size(), &out.raw) == PCC_OK);
  const pcc::json r = out.parse();
  CHECK(r.at("converged").get<bool>());
  CHECK(r.at("params").at("lambda_c").get<double>() == doctest::Approx(lc).epsilon(1e-8));
  CHECK(r.at("params").at("gamma").get<double>() == doctest::Approx(gamma).epsilon(1e-6));
  CHECK(r.at("params").at("depth").get<double>() == doctest::Approx(depth).epsilon(1e-6));

  OwnedJson bad;
  CHECK(pcc_fit("parabola", x.data(), y.data(), x.size(), &bad.raw) == PCC_ERR_CONFIG);
  CHECK(std::string(pcc_last_error()).find("parabola") != std::string::npos);
  CHECK(pcc_fit("gaussian", nullptr, y.data(), y.size(), &bad.raw) == PCC_ERR_CONFIG);
}

TEST_CASE("cqed assessment reports the figures of merit") {
  OwnedJson out;
  REQUIRE(pcc_cqed_assess(
              R"({"Q": 40000, "V_eff": 0.9, "lambda_c": 852, "n": 3.4, "eta": 0.42})",
              R"({"lambda0": 852, "gamma_perp": 2.6e6})", &out.raw) == PCC_OK);
  const pcc::json r = out.parse();
  CHECK(r.at("kappa_Hz").get<double>() == doctest::Approx(4.4e9).epsilon(0.01));
  CHECK(r.at("g_Hz").get<double>() == doctest::Approx(17e9).epsilon(0.05));
  CHECK(r.at("F_P").get<double>() == doctest::Approx(3500.0).epsilon(0.05));
  CHECK(r.at("strong_coupling").get<bool>());

  // defaulted atom block gives the same numbers
  OwnedJson def;
  REQUIRE(pcc_cqed_assess(
              R"({"Q": 40000, "V_eff": 0.9, "lambda_c": 852, "n": 3.4, "eta": 0.42})",
              nullptr, &def.raw) == PCC_OK);
  CHECK(def.parse().at("g_Hz").get<double>() ==
        doctest::Approx(r.at("g_Hz").get<double>()).epsilon(1e-12));

  OwnedJson bad;
  CHECK(pcc_cqed_assess(R"({"Q": 40000, "eta": 1.5})", nullptr, &bad.raw) == PCC_ERR_CONFIG);
}

TEST_CASE("grid handles rasterize, query, and file round trip") {
  pcc_grid* grid = nullptr;
  REQUIRE(pcc_grid_rasterize(tiny_lattice_json().c_str(), 42.5, &grid) == PCC_OK);
  REQUIRE(grid != nullptr);

  int dims[3] = {0, 0, 0};
  REQUIRE(pcc_grid_dims(grid, dims) == PCC_OK);
  CHECK(dims[0] > 8);
  CHECK(dims[1] > 8);
  CHECK(dims[2] > 8);

  // corner sits in the air cladding; scan one row for slab material
  double corner = 0;
  REQUIRE(pcc_grid_value(grid, 0, 0, 0, &corner) == PCC_OK);
  CHECK(corner == doctest::Approx(1.0));
  bool saw_slab = false;
  for (int i = 0; i < dims[0]; ++i) {
    double v = 0;
    REQUIRE(pcc_grid_value(grid, i, 0, dims[2] / 2, &v) == PCC_OK);
    if (v > 11.0) saw_slab = true;
  }
  CHECK(saw_slab);
  double oob = 0;
  CHECK(pcc_grid_value(grid, dims[0], 0, 0, &oob) == PCC_ERR_CONFIG);

  const fs::path dir = fresh_dir("grid");
  REQUIRE(pcc_grid_save(grid, (dir / "eps").string().c_str()) == PCC_OK);
  pcc_grid* back = nullptr;
  REQUIRE(pcc_grid_load((dir / "eps.json").string().c_str(), &back) == PCC_OK);
  int dims2[3] = {0, 0, 0};
  REQUIRE(pcc_grid_dims(back, dims2) == PCC_OK);
  CHECK(dims2[0] == dims[0]);
  CHECK(dims2[1] == dims[1]);
  CHECK(dims2[2] == dims[2]);
  double a = 0, b = 0;
  REQUIRE(pcc_grid_value(grid, dims[0] / 2, dims[1] / 2, dims[2] / 2, &a) == PCC_OK);
  REQUIRE(pcc_grid_value(back, dims[0] / 2, dims[1] / 2, dims[2] / 2, &b) == PCC_OK);
  CHECK(a == b);
  pcc_grid_free(back);
  pcc_grid_free(grid);

  pcc_grid* missing = nullptr;
  CHECK(pcc_grid_load((dir / "no_such.json").string().c_str(), &missing) == PCC_ERR_IO);
  CHECK(pcc_grid_rasterize("{\"bogus\": 1}", 40.0, &missing) == PCC_ERR_CONFIG);
}

TEST_CASE("stage runner executes a cqed stage into a directory") {
  const fs::path dir = fresh_dir("stage");
  const std::string stage = R"({
    "stage": "cqed", "name": "figures",
    "cavity": {"Q": 40000, "V_eff": 0.9, "lambda_c": 852, "n": 3.4, "eta": 0.42}
  })";
  OwnedJson out;
  REQUIRE(pcc_stage_run(stage.c_str(), dir.string().c_str(), 1, 7, &out.raw) == PCC_OK);
  const pcc::json summary = out.parse();
  CHECK(summary.at("kappa_Hz").get<double>() == doctest::Approx(4.4e9).epsilon(0.01));
  CHECK(fs::exists(dir / "figures.json"));
  CHECK(fs::exists(dir / "manifest.json"));

  OwnedJson bad;
  CHECK(pcc_stage_run(R"({"stage": "warp", "name": "x"})", dir.string().c_str(), 1, 0,
                      &bad.raw) == PCC_ERR_CONFIG);
}

TEST_CASE("pipeline runner chains stages and emits a manifest") {
  const fs::path dir = fresh_dir("pipeline");
  const std::string config = R"({
    "stages": [
      {"stage": "taper", "name": "taper",
       "fiber": {"diameter_um": 1.7, "n_core": 1.45, "n_clad": 1.0, "wavelength_nm": 1600}},
      {"stage": "cqed", "name": "figures",
       "cavity": {"Q": 40000, "V_eff": 0.9, "lambda_c": 852, "n": 3.4, "eta": 0.42}}
    ]
  })";
  OwnedJson out;
  REQUIRE(pcc_pipeline_run(config.c_str(), dir.string().c_str(), 1, 11, &out.raw) == PCC_OK);
  const pcc::json manifest = out.parse();
  CHECK(manifest.at("format").get<std::string>() == "pcc-manifest-v1");
  CHECK(manifest.at("complete").get<bool>());
  REQUIRE(manifest.at("stages").size() == 2);
  CHECK(manifest.at("stages")[0].at("stage").get<std::string>() == "taper");
  // every recorded output carries a content hash
  for (const auto& st : manifest.at("stages"))
    for (const auto& [path, hash] : st.at("outputs").items())
      CHECK(hash.get<std::string>().size() == 64);
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("sweep runner varies a dotted parameter path") {
  const fs::path dir = fresh_dir("sweep");
  const std::string config = R"({
    "parameter": "stages.0.cavity.Q",
    "values": [20000, 40000],
    "template": {
      "stages": [
        {"stage": "cqed", "name": "figures",
         "cavity": {"Q": 0, "V_eff": 0.9, "lambda_c": 852, "n": 3.4, "eta": 0.42}}
      ]
    }
  })";
  OwnedJson out;
  REQUIRE(pcc_sweep_run(config.c_str(), dir.string().c_str(), 1, 3, &out.raw) == PCC_OK);
  const pcc::json manifest = out.parse();
  CHECK(manifest.at("format").get<std::string>() == "pcc-sweep-v1");
  REQUIRE(manifest.at("runs").size() == 2);
  CHECK(fs::exists(dir / "run_000" / "manifest.json"));
  CHECK(fs::exists(dir / "run_001" / "manifest.json"));
  CHECK(fs::exists(dir / "sweep.csv"));

  OwnedJson bad;
  CHECK(pcc_sweep_run(R"({"parameter": "nope"})", dir.string().c_str(), 1, 0, &bad.raw) ==
        PCC_ERR_CONFIG);
}
