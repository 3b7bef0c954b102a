#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ricci4/cli.hpp"

using namespace ricci4;
namespace fs = std::filesystem;
using Catch::Approx;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    REQUIRE(os.good());
    os << content;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

size_t count_of(const std::string& hay, const std::string& needle) {
    size_t count = 0;
    for (size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++count;
    return count;
}

std::string synthetic_decay_csv() {
    std::string csv = "t,F2\n";
    for (int k = 0; k <= 30; ++k) {
        const Real t = 0.1 * k;
        csv += detail::fmt17(t) + "," + detail::fmt17(5.0 * std::exp(-3.0 * t)) + "\n";
    }
    return csv;
}

}  // namespace

TEST_CASE("config parser reads every documented key") {
    std::istringstream is(
        "# comment line\n"
        "ansatz = conformal\n"
        "N = 65   # trailing comment\n"
        "amplitude = 0.25\n"
        "shape = neck\n"
        "cfl = 0.05\n"
        "T = 0.75\n"
        "p-list = 2, 2.5\n"
        "a = 0.001\n"
        "mode = unnormalized\n"
        "stride = 7\n"
        "amplitudes = 0.1, 0.2, 0.3\n");
    const cli::RunConfig c = cli::parse_config(is);
    REQUIRE(c.ansatz == "conformal");
    REQUIRE(c.n == 65);
    REQUIRE(c.amplitude == 0.25);
    REQUIRE(c.shape == "neck");
    REQUIRE(c.cfl == 0.05);
    REQUIRE(c.t_final == 0.75);
    REQUIRE(c.p_list == std::vector<Real>{2.0, 2.5});
    REQUIRE(c.a == 0.001);
    REQUIRE(c.mode == "unnormalized");
    REQUIRE(c.stride == 7);
    REQUIRE(c.amplitudes == std::vector<Real>{0.1, 0.2, 0.3});

    std::istringstream empty("# only comments\n\n");
    const cli::RunConfig d = cli::parse_config(empty);
    REQUIRE(d.ansatz == "squashed");
    REQUIRE(d.n == 129);
    REQUIRE(d.amplitudes == std::vector<Real>{0.01, 0.02, 0.05});
}

TEST_CASE("config parser rejects unknown, repeated, and malformed entries") {
    const auto parse = [](const std::string& text) {
        std::istringstream is(text);
        return cli::parse_config(is);
    };
    REQUIRE_THROWS_WITH(parse("N = 65\nanzatz = squashed\n"),
                        "config error at line 2: unknown key 'anzatz'");
    REQUIRE_THROWS_WITH(parse("N = 65\nN = 129\n"),
                        "config error at line 2: repeated key 'N'");
    REQUIRE_THROWS_WITH(parse("just words\n"),
                        "config error at line 1: expected key = value");
    REQUIRE_THROWS_WITH(parse("cfl = fast\n"), "config error at line 1: bad number 'fast'");
    REQUIRE_THROWS_WITH(parse("N = 64.5\n"), "config error at line 1: bad integer '64.5'");
    REQUIRE_THROWS_WITH(parse("p-list = ,\n"), "config error at line 1: bad number ''");
    REQUIRE_THROWS_WITH(parse("shape = twist\n"),
                        "config error at line 1: unknown shape 'twist'");
    REQUIRE_THROWS_WITH(parse("mode = backwards\n"),
                        "config error at line 1: unknown mode 'backwards'");
    REQUIRE_THROWS_WITH(parse("ansatz = torus\n"),
                        "config error at line 1: unknown ansatz 'torus'");
    REQUIRE_THROWS_WITH(parse("T =\n"), "config error at line 1: expected key = value");
}

TEST_CASE("canonical config hashing is stable and sensitive") {
    const cli::RunConfig base;
    REQUIRE(cli::hex64(cli::fnv1a64(cli::canonical_config(base, 0))) == "44c6ccd2470e07fd");

    cli::RunConfig other = base;
    other.amplitude = 0.01;
    REQUIRE(cli::fnv1a64(cli::canonical_config(other, 0))
            != cli::fnv1a64(cli::canonical_config(base, 0)));
    REQUIRE(cli::fnv1a64(cli::canonical_config(base, 1))
            != cli::fnv1a64(cli::canonical_config(base, 0)));
}

TEST_CASE("flow config translation maps exponents and modes") {
    cli::RunConfig c;
    c.p_list = {2.0, 2.5};
    c.mode = "rescale-after";
    c.cfl = 0.07;
    const FlowConfig f = cli::flow_config(c);
    REQUIRE(f.mode == FlowMode::rescale_after);
    REQUIRE(f.cfl == 0.07);
    REQUIRE(f.series.deltas.size() == 2);
    REQUIRE(f.series.deltas[0] == Approx(0.0).margin(1e-15));
    REQUIRE(f.series.deltas[1] == Approx(0.5).epsilon(1e-15));

    c.p_list = {3.1};
    REQUIRE_THROWS_AS(cli::flow_config(c), std::invalid_argument);
}

TEST_CASE("check report on the round profile passes every gap") {
    const cli::CheckReport r = cli::make_check_report(round_profile(129), "squashed");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.weyl_full == 4.0 * r.snap.int_w2);
    REQUIRE(r.gaps.size() == 3);
    for (const auto& g : r.gaps) REQUIRE(g.inside);
    REQUIRE(r.gaps[0].threshold == Approx(32.0 * pi * pi).epsilon(1e-15));
    REQUIRE(r.gaps[2].threshold == Approx(128.0 * pi * pi / 3.0).epsilon(1e-15));
    REQUIRE(r.wp_inside);
    REQUIRE(r.snap.y_in_range);
    REQUIRE(r.flags.small_weyl);
    REQUIRE(r.flags.f2_small);
    REQUIRE(r.flags.delta0_alt);

    const std::string json = cli::check_report_json(r);
    REQUIRE(json == cli::check_report_json(r));
    REQUIRE(count_of(json, "inside gap") == 4);
    REQUIRE(count_of(json, "outside gap") == 0);
    REQUIRE(count_of(json, "\"exit_code\": 0") == 1);
}

TEST_CASE("check report flags a visibly squashed profile") {
    const SquashedProfile p = perturb_squash(round_profile(129), 0.05, "sym");
    const cli::CheckReport r = cli::make_check_report(p, "squashed");
    REQUIRE(r.exit_code == 2);
    REQUIRE_FALSE(r.flags.small_weyl);
    for (const auto& g : r.gaps) REQUIRE(g.inside);
    REQUIRE(std::abs(r.snap.gb_residual) / gauss_bonnet_total < 1e-4);
    REQUIRE(r.snap.int_w2 > 1.0);
}

TEST_CASE("check command reports input failures with line diagnostics") {
    const fs::path dir = fresh_dir("ricci4_cli_check");
    std::ostringstream out, err;

    REQUIRE(cli::cmd_check((dir / "absent.txt").string(), {}, out, err) == 4);
    REQUIRE(err.str().find("cannot open profile") != std::string::npos);

    spit(dir / "broken.txt", "squashed\n129\nbad\n");
    err.str("");
    REQUIRE(cli::cmd_check((dir / "broken.txt").string(), {}, out, err) == 4);
    REQUIRE(err.str().find("line 3") != std::string::npos);

    std::ostringstream ps;
    write_profile(ps, round_profile(65));
    spit(dir / "round.txt", ps.str());
    out.str("");
    const cli::RunOptions opts{(dir / "rep").string(), 0, false};
    REQUIRE(cli::cmd_check((dir / "round.txt").string(), opts, out, err) == 0);
    REQUIRE(out.str() == slurp(dir / "rep" / "check_report.json"));
}

TEST_CASE("flow command writes a reproducible artifact set") {
    const fs::path dir = fresh_dir("ricci4_cli_flow");
    spit(dir / "run.cfg",
         "ansatz = squashed\nN = 65\namplitude = 0.01\nshape = sym\n"
         "cfl = 0.1\nT = 0.02\nstride = 20\n");
    std::ostringstream out, err;

    const cli::RunOptions opt_a{(dir / "a").string(), 0, true};
    const cli::RunOptions opt_b{(dir / "b").string(), 0, true};
    REQUIRE(cli::cmd_flow((dir / "run.cfg").string(), opt_a, out, err) == 0);
    REQUIRE(cli::cmd_flow((dir / "run.cfg").string(), opt_b, out, err) == 0);
    REQUIRE(out.str().empty());

    REQUIRE(slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv"));
    REQUIRE(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));

    const std::string manifest = slurp(dir / "a" / "manifest.json");
    REQUIRE(manifest.find("\"kind\": \"flow\"") != std::string::npos);
    REQUIRE(manifest.find("\"reason\": \"reached_time\"") != std::string::npos);
    REQUIRE(manifest.find("\"samples\": 13") != std::string::npos);
    REQUIRE(manifest.find("\"config_hash\": \"") != std::string::npos);
    REQUIRE(manifest.find("snapshots/sample_00012.txt") != std::string::npos);

    REQUIRE(fs::exists(dir / "a" / "snapshots" / "sample_00000.txt"));
    REQUIRE(fs::exists(dir / "a" / "snapshots" / "sample_00012.txt"));
    size_t snapshots = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a" / "snapshots")) {
        (void)entry;
        ++snapshots;
    }
    REQUIRE(snapshots == 13);

    const std::string series = slurp(dir / "a" / "series.csv");
    REQUIRE(series.rfind("t,Vol,Rbar,F2,", 0) == 0);
}

TEST_CASE("flow snapshots round-trip at unit volume after rescaling") {
    const fs::path dir = fresh_dir("ricci4_cli_rescale");
    spit(dir / "run.cfg",
         "ansatz = squashed\nN = 65\namplitude = 0.005\nshape = sym\n"
         "cfl = 0.1\nT = 0.01\nstride = 2\nmode = rescale-after\n");
    std::ostringstream out, err;
    const cli::RunOptions opts{(dir / "out").string(), 0, true};
    REQUIRE(cli::cmd_flow((dir / "run.cfg").string(), opts, out, err) == 0);

    const AnyProfile back = read_profile((dir / "out" / "snapshots" / "sample_00005.txt").string());
    REQUIRE(std::holds_alternative<SquashedProfile>(back));
    REQUIRE(volume(std::get<SquashedProfile>(back)) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sweep produces one verdict row per amplitude") {
    const fs::path dir = fresh_dir("ricci4_cli_sweep");
    spit(dir / "sweep.cfg",
         "ansatz = squashed\nN = 65\nshape = sym\ncfl = 0.1\nT = 0.1\nstride = 20\n"
         "amplitudes = 0.0005, 0.001\n");
    std::ostringstream out, err;
    const cli::RunOptions opts{(dir / "out").string(), 0, true};
    REQUIRE(cli::cmd_sweep((dir / "sweep.cfg").string(), opts, out, err) == 0);

    const std::string csv = slurp(dir / "out" / "sweep.csv");
    const auto lines = split(csv, '\n');
    REQUIRE(lines.size() == 3);
    REQUIRE(lines[0]
            == "amplitude,int_W2_0,F2_0,small_weyl,f2_small,f2_monotone,f2_worst_rel,"
               "gp_monotone_0,gp_monotone_1,gp_monotone_2,decay_rate,decay_r2,decay_floor,"
               "termination,steps");
    for (size_t row = 1; row <= 2; ++row) {
        const auto cells = split(lines[row], ',');
        REQUIRE(cells.size() == 15);
        REQUIRE(cells[3] == "1");
        REQUIRE(cells[4] == "1");
        REQUIRE(cells[5] == "1");
        REQUIRE(cells[7] == "1");
        REQUIRE(cells[8] == "1");
        REQUIRE(cells[9] == "1");
        const Real rate = std::strtod(cells[10].c_str(), nullptr);
        const Real r2 = std::strtod(cells[11].c_str(), nullptr);
        REQUIRE(rate > 50.0);
        REQUIRE(rate < 90.0);
        REQUIRE(r2 > 0.99);
        REQUIRE(cells[13] == "reached_time");
    }
    REQUIRE(std::strtod(split(lines[1], ',')[0].c_str(), nullptr) == Approx(0.0005));
    REQUIRE(std::strtod(split(lines[2], ',')[0].c_str(), nullptr) == Approx(0.001));

    const std::string manifest = slurp(dir / "out" / "manifest.json");
    REQUIRE(manifest.find("\"kind\": \"sweep\"") != std::string::npos);
    REQUIRE(manifest.find("sweep.csv") != std::string::npos);
}

TEST_CASE("sweep results do not depend on the worker count") {
    const fs::path dir = fresh_dir("ricci4_cli_threads");
    spit(dir / "sweep.cfg",
         "N = 65\nshape = sym\ncfl = 0.1\nT = 0.05\nstride = 20\namplitudes = 0.0005, 0.001\n");
    std::ostringstream out, err;

    setenv("RICCI4_THREADS", "1", 1);
    REQUIRE(cli::env_thread_cap() == 1);
    const cli::RunOptions opt_serial{(dir / "serial").string(), 0, true};
    REQUIRE(cli::cmd_sweep((dir / "sweep.cfg").string(), opt_serial, out, err) == 0);

    setenv("RICCI4_THREADS", "3", 1);
    REQUIRE(cli::env_thread_cap() == 3);
    const cli::RunOptions opt_pool{(dir / "pool").string(), 0, true};
    REQUIRE(cli::cmd_sweep((dir / "sweep.cfg").string(), opt_pool, out, err) == 0);
    unsetenv("RICCI4_THREADS");

    REQUIRE(slurp(dir / "serial" / "sweep.csv") == slurp(dir / "pool" / "sweep.csv"));
}

TEST_CASE("series reader keeps the functional columns") {
    const fs::path dir = fresh_dir("ricci4_cli_reader");
    spit(dir / "mini.csv", "t,Vol,F2,Gp_0\n0,1,2,3\n1,1,4,5\n");
    const auto cols = cli::detail::read_series_csv((dir / "mini.csv").string());
    REQUIRE(cols.size() == 2);
    REQUIRE(cols[0].label == "mini:F2");
    REQUIRE(cols[1].label == "mini:Gp_0");
    REQUIRE(cols[0].v == std::vector<Real>{2.0, 4.0});
    REQUIRE(cols[1].v == std::vector<Real>{3.0, 5.0});

    spit(dir / "plain.csv", "t,value\n0,1\n1,2\n");
    const auto plain = cli::detail::read_series_csv((dir / "plain.csv").string());
    REQUIRE(plain.size() == 1);
    REQUIRE(plain[0].label == "plain:value");
}

TEST_CASE("plot renders a deterministic log-scale page") {
    const fs::path dir = fresh_dir("ricci4_cli_plot");
    spit(dir / "synthetic.csv", synthetic_decay_csv());
    std::ostringstream out, err;
    const cli::RunOptions opts{(dir / "out").string(), 0, true};
    REQUIRE(cli::cmd_plot({(dir / "synthetic.csv").string()}, opts, out, err) == 0);

    const std::string svg = slurp(dir / "out" / "plot.svg");
    REQUIRE(svg.size() == 2846);
    REQUIRE(cli::hex64(cli::fnv1a64(svg)) == "c04b203d21531ee0");
    REQUIRE(count_of(svg, "<polyline") == 1);
    REQUIRE(svg.find("synthetic:F2") != std::string::npos);

    const size_t start = svg.find("points=\"") + 8;
    const auto pairs = split(svg.substr(start, svg.find('"', start) - start), ' ');
    REQUIRE(pairs.size() == 31);
    const auto coord = [&](size_t k) {
        const auto xy = split(pairs[k], ',');
        return std::pair<Real, Real>{std::strtod(xy[0].c_str(), nullptr),
                                     std::strtod(xy[1].c_str(), nullptr)};
    };
    const auto [x0, y0] = coord(0);
    const auto [x1, y1] = coord(30);
    for (size_t k = 1; k < 30; ++k) {
        const auto [x, y] = coord(k);
        const Real expected = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        REQUIRE(y == Approx(expected).margin(0.02));
    }
}

TEST_CASE("plot rejects unusable series data") {
    const fs::path dir = fresh_dir("ricci4_cli_plot_bad");
    std::ostringstream out, err;
    const cli::RunOptions opts{(dir / "out").string(), 0, true};

    REQUIRE(cli::cmd_plot({(dir / "absent.csv").string()}, opts, out, err) == 4);
    REQUIRE(err.str().find("cannot open series") != std::string::npos);

    spit(dir / "head.csv", "x,F2\n0,1\n");
    err.str("");
    REQUIRE(cli::cmd_plot({(dir / "head.csv").string()}, opts, out, err) == 4);
    REQUIRE(err.str().find("first column must be t") != std::string::npos);

    spit(dir / "ragged.csv", "t,F2\n0,1\n1\n");
    err.str("");
    REQUIRE(cli::cmd_plot({(dir / "ragged.csv").string()}, opts, out, err) == 4);
    REQUIRE(err.str().find("line 3: wrong column count") != std::string::npos);

    spit(dir / "floor.csv", "t,F2\n0,0\n1,-1\n2,0\n");
    err.str("");
    REQUIRE(cli::cmd_plot({(dir / "floor.csv").string()}, opts, out, err) == 4);
    REQUIRE(err.str().find("no positive samples") != std::string::npos);
}
