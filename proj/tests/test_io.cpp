#include <cmath>
#include <gtest/gtest.h>

#include <clocale>
#include <cstdlib>

#include "latgl/errors.hpp"
#include "latgl/io.hpp"
#include "support/scenarios.hpp"

using namespace latgl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("latgl_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 12345.678901234567}) {
    const auto s = io::format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
    EXPECT_EQ(s.find(','), std::string::npos);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(PotentialJson, ExactRoundTrip) {
  const auto pot = make_potential(preset::SeededRandom{77, {}}, {3, -2, 2});
  const std::vector<FlaggedEntry> flags{{'c', 3, 0, "copied"}};
  const auto text = io::potential_to_json(pot, flags).dump();
  std::vector<FlaggedEntry> back_flags;
  const auto back = io::potential_from_json(io::json::parse(text), &back_flags);
  EXPECT_TRUE(back == pot);
  ASSERT_EQ(back_flags.size(), 1u);
  EXPECT_EQ(back_flags[0].reason, "copied");
}

TEST(PotentialJson, LayoutIsFlatNMajor) {
  const GridSpec g{1, 0, 2};
  auto pot = make_potential(preset::Free{}, g);
  pot.set_c(1, 2, 7.0);
  pot.set_b(0, 1, 3.0);
  const auto j = io::potential_to_json(pot);
  EXPECT_EQ(j["a"].size(), 3u);
  EXPECT_EQ(j["b"].size(), 4u);
  EXPECT_EQ(j["c"].size(), 6u);
  EXPECT_EQ(j["c"][5].get<double>(), 7.0);
  EXPECT_EQ(j["b"][0].get<double>(), 3.0);
}

TEST(PotentialJson, Rejections) {
  auto j = io::potential_to_json(make_potential(preset::Free{}, {1, 0, 1}));
  auto short_c = j;
  short_c["c"].erase(0);
  EXPECT_THROW(io::potential_from_json(short_c), ValidationError);
  auto neg = j;
  neg["a"][0] = -1.0;
  EXPECT_THROW(io::potential_from_json(neg), ValidationError);
  auto missing = j;
  missing.erase("b");
  EXPECT_THROW(io::potential_from_json(missing), ValidationError);
}

TEST(ModificationJson, ParsesAllForms) {
  const auto pot = make_potential(preset::Free{}, {2, -1, 2});
  const auto sd = spectral_data(pot);
  const auto groups = scen::sectors(sd);
  const auto j = io::json::parse(R"({
    "added_states": [{"lambda": 9.0, "gamma": [0.1, 0.2, 0.3, 0.4]}],
    "reweights": [{"nu": 2, "delta_c": [{"s": -1, "s_prime": 1, "value": 0.25}]}],
    "compensated_pairs": [{"from": )" + std::to_string(groups[0][0]) + R"(, "to": )" +
                                 std::to_string(groups[0][1]) + R"(, "weight": 0.01}]})");
  const auto mod = io::modification_from_json(j, sd);
  ASSERT_EQ(mod.added.size(), 1u);
  EXPECT_EQ(mod.added[0].gamma[3], 0.4);
  ASSERT_EQ(mod.reweights.size(), 3u);
  EXPECT_EQ(mod.reweights[0].delta_c(0, 2), 0.25);
  EXPECT_EQ(mod.reweights[0].delta_c(2, 0), 0.25);
  const auto again = io::modification_from_json(io::modification_to_json(mod, pot.grid()), sd);
  EXPECT_EQ(again.reweights[1].delta_c, mod.reweights[1].delta_c);
}

TEST(ModificationJson, ChannelOutOfRange) {
  const auto sd = spectral_data(make_potential(preset::Free{}, {1, 0, 1}));
  const auto j = io::json::parse(R"({"reweights": [{"nu": 0, "delta_c": [{"s": 5, "s_prime": 0, "value": 1}]}]})");
  EXPECT_THROW(io::modification_from_json(j, sd), DomainError);
}

TEST(Config, DefaultsAndOverrides) {
  const auto cfg = io::config_from_json(io::json::parse(
      R"({"grid": {"n_max": 2, "m_min": 0, "m_max": 3}, "potential": {"preset": "seeded_random", "seed": 4,
          "ranges": {"b_lo": 0, "b_hi": 0}}, "modification": "m.json", "tolerances": {"residual": 1e-7}})"),
      "/base");
  EXPECT_EQ(cfg.tol.residual, 1e-7);
  EXPECT_EQ(cfg.tol.orthogonality, 1e-9);
  EXPECT_EQ(cfg.tol.eigensolver, 1e-12);
  EXPECT_EQ(*cfg.modification_file, fs::path("/base/m.json"));
  const auto pot = io::load_potential(cfg);
  EXPECT_TRUE(pot == scen::decoupled({2, 0, 3}, 4));
}

TEST(Config, Rejections) {
  EXPECT_THROW(io::config_from_json(io::json::parse(R"({"potential": {"preset": "free"}})")), ValidationError);
  EXPECT_THROW(io::config_from_json(io::json::parse(
                   R"({"grid": {"n_max": 1, "m_min": 0, "m_max": 0}, "potential": {"preset": "weird"}})")),
               ValidationError);
  EXPECT_THROW(io::config_from_json(io::json::parse(
                   R"({"grid": {"n_max": 1, "m_min": 0, "m_max": 0}, "tolerances": {"route": 0}})")),
               ValidationError);
}

TEST(Files, AtomicWriteAndErrors) {
  const auto dir = scratch("atomic");
  const auto path = dir / "sub" / "x.txt";
  io::write_atomic(path, "hello\n");
  EXPECT_EQ(io::read_text(path), "hello\n");
  io::write_atomic(path, "again\n");
  EXPECT_EQ(io::read_text(path), "again\n");
  std::size_t count = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++count;
  EXPECT_EQ(count, 1u);
  EXPECT_THROW(io::read_json(dir / "missing.json"), IoError);
  io::write_atomic(dir / "bad.json", "{nope");
  EXPECT_THROW(io::read_json(dir / "bad.json"), ValidationError);
  fs::remove_all(dir);
}

TEST(Csv, Layouts) {
  const auto pot = make_potential(preset::Free{}, {1, 0, 0});
  const auto sd = spectral_data(pot);
  const auto csv = io::spectral_csv(sd);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "nu,lambda,gamma_0");
  const auto row0 = csv.find("\n0,");
  const auto row1 = csv.find("\n1,");
  ASSERT_NE(row0, std::string::npos) << csv;
  ASSERT_NE(row1, std::string::npos) << csv;
  EXPECT_NEAR(std::stod(csv.substr(row0 + 3)), -1.0, 1e-14);
  EXPECT_NEAR(std::stod(csv.substr(row1 + 3)), 1.0, 1e-14);
  const auto pt = io::polytable_csv(propagate_polynomials(pot));
  EXPECT_NE(pt.find("\n1,0,0,1,0,1\n"), std::string::npos) << pt;
  const TransformKernel id{pot.grid(), Matrix::identity(2)};
  EXPECT_EQ(io::kernel_csv(id), "n,m,n_prime,m_prime,value\n0,0,0,0,1\n1,0,1,0,1\n");
}

TEST(Csv, DegreesText) {
  const auto t = propagate_polynomials(make_potential(preset::Free{}, {2, 0, 4}));
  const auto text = io::degrees_text(t, 2);
  EXPECT_NE(text.find("n=0  |  ·  ·  0  ·  ·"), std::string::npos) << text;
  EXPECT_NE(text.find("n=1  |  ·  0  1  0  ·"), std::string::npos) << text;
  EXPECT_NE(text.find("n=2  |  0  1  2  1  0"), std::string::npos) << text;
}

TEST(ReportJson, RoundTrip) {
  VerificationReport rep;
  rep.add(make_check("a", 1e-12, 1e-9, "x"));
  auto c = make_check("b", INFINITY, 1e-9);
  c.gating = false;
  c.note = "n";
  rep.add(c);
  const auto j = io::report_to_json(rep, {"w"});
  EXPECT_TRUE(j["pass"].get<bool>());
  const auto back = io::report_from_json(io::json::parse(j.dump()));
  ASSERT_EQ(back.checks.size(), 2u);
  EXPECT_EQ(back.checks[0].deviation, 1e-12);
  EXPECT_TRUE(std::isinf(back.checks[1].deviation));
  EXPECT_FALSE(back.checks[1].gating);
}
