#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "wannierlab/io.hpp"
#include "wannierlab/linalg.hpp"

using namespace wannierlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(bool(f));
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

fs::path tmpdir() {
  auto dir = fs::temp_directory_path() / "wannierlab_io_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("frame file round trip") {
  auto h = build_bloch(preset_ssh(1.0, 2.0));
  auto grid = KGrid::line(32);
  check_cs(h, grid);
  auto p = spectral_projection(h, SpectralWindow::bands({0}), grid);
  auto f = frame_1d(p);
  auto path = tmpdir() / "frame.csv";
  write_frame(f, path.string());
  auto g = read_frame(path.string());
  CHECK(g.grid.n1 == f.grid.n1);
  CHECK(g.d == f.d);
  CHECK(g.nbands == f.nbands);
  CHECK(g.cs == CsState::holds);
  double worst = 0;
  for (int i = 0; i <= 32; ++i) worst = std::max(worst, (g.at(i) - f.at(i)).norm());
  CHECK(worst < 1e-15);  // %.17g is lossless for doubles
}

TEST_CASE("emitters are byte-stable across repeated runs") {
  auto h = build_bloch(preset_ssh(1.0, 2.0));
  auto grid = KGrid::line(32);
  check_cs(h, grid);
  auto p = spectral_projection(h, SpectralWindow::bands({0}), grid);
  auto f = frame_1d(p);
  auto w = wannier_transform(f, 8);
  auto rep = decay_fit(w);
  auto dir = tmpdir();
  write_wannier_csv(w, (dir / "w1.csv").string());
  write_wannier_csv(w, (dir / "w2.csv").string());
  CHECK(slurp(dir / "w1.csv") == slurp(dir / "w2.csv"));
  write_decay_report(rep, 1e-6, (dir / "d1.json").string());
  write_decay_report(rep, 1e-6, (dir / "d2.json").string());
  CHECK(slurp(dir / "d1.json") == slurp(dir / "d2.json"));
}

TEST_CASE("error json carries stage and k-node") {
  Error e("spectral", "gap closes", {0.25, -0.5}, 2);
  auto s = error_json(e);
  CHECK(s.find("\"stage\": \"spectral\"") != std::string::npos);
  CHECK(s.find("0.25") != std::string::npos);
  Error gate("frame_2d", "no CS");
  gate.chern = 1;
  gate.chern_residual = 0.01;
  auto s2 = error_json(gate);
  CHECK(s2.find("\"chern\": 1") != std::string::npos);
}

#ifdef WANNIERLAB_CLI_PATH
TEST_CASE("cli: deterministic outputs and machine-readable failures") {
  const std::string cli = WANNIERLAB_CLI_PATH;
  auto dir = tmpdir();
  auto run = [&](const std::string& args) {
    return std::system((cli + " " + args + " > " + (dir / "stdout.txt").string() + " 2>&1")
                           .c_str());
  };
  SUBCASE("repeated identical configs produce byte-identical files") {
    auto o1 = dir / "r1", o2 = dir / "r2";
    REQUIRE(run("wannier1d --preset ssh --v 1 --w 2 --band lower --grid 64 --box 12 --out " +
                o1.string()) == 0);
    REQUIRE(run("wannier1d --preset ssh --v 1 --w 2 --band lower --grid 64 --box 12 --out " +
                o2.string()) == 0);
    for (const char* name : {"frame.csv", "wannier.csv", "decay.json"})
      CHECK(slurp(o1 / name) == slurp(o2 / name));
  }
  SUBCASE("diagnose emits the chern number for the topological preset") {
    auto o = dir / "diag";
    REQUIRE(run("diagnose --preset haldane-topological --bands 1 --grid 32 --out " +
                o.string()) == 0);
    auto rep = slurp(o / "topology.json");
    CHECK((rep.find("\"chern\": 1") != std::string::npos ||
           rep.find("\"chern\": -1") != std::string::npos));
  }
  SUBCASE("wannier2d on the topological preset fails at the cs gate") {
    auto o = dir / "fail";
    CHECK(run("wannier2d --preset haldane-topological --bands 1 --grid 32 --out " + o.string()) !=
          0);
    auto out = slurp(dir / "stdout.txt");
    CHECK(out.find("\"stage\": \"frame_2d\"") != std::string::npos);
    CHECK(out.find("chern") != std::string::npos);
  }
  SUBCASE("invalid grid is rejected") {
    CHECK(run("wannier1d --preset ssh --grid 100 --out " + (dir / "x").string()) != 0);
    auto out = slurp(dir / "stdout.txt");
    CHECK(out.find("powers of two") != std::string::npos);
  }
}
#endif
