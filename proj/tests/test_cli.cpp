#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "iotsense/cli.hpp"
#include "iotsense/event_log.hpp"
#include "json.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace iotsense;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("iotsense-cli-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_manifest(const std::string& path, const testsupport::Corpus& c) {
  std::ofstream out(path);
  out << "mac,name,label\n";
  for (const auto& d : c.devices) out << d.mac << ',' << d.name << ',' << to_string(d.label) << '\n';
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"bogus"}).code == 1);
  CHECK(cli({"extract", "--width", "600"}).code == 1);
  auto help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("train-traffic") != std::string::npos);
}

TEST_CASE("extract on an empty capture writes only the header") {
  TempDir tmp;
  {
    std::ofstream m(tmp / "m.csv");
    m << "mac,name,label\n02:00:00:00:00:01,cam,IoT\n";
  }
  auto r = cli({"extract", "--pcap", std::string(IOTSENSE_FIXTURE_DIR) + "/empty.pcap", "--manifest",
                tmp / "m.csv", "--width", "600", "--out", tmp / "f.csv"});
  CHECK(r.code == 0);
  auto text = slurp(tmp / "f.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(text.rfind("device_key,slot_start,width,pkt_count,", 0) == 0);
}

TEST_CASE("data errors exit with 2 and one message line") {
  TempDir tmp;
  {
    std::ofstream m(tmp / "m.csv");
    m << "mac,name,label\n02:00:00:00:00:01,cam,IoT\n";
    std::ofstream bad(tmp / "bad.pcap", std::ios::binary);
    bad << "\xde\xad\xbe\xef";
  }
  auto r = cli({"extract", "--pcap", tmp / "bad.pcap", "--manifest", tmp / "m.csv", "--width", "600",
                "--out", tmp / "f.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("BadMagic") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("end-to-end on a synthetic corpus") {
  TempDir tmp;
  testsupport::CorpusOptions opt;
  opt.n_iot = 6;
  opt.n_not = 6;
  opt.periods = 6;
  opt.seed = 3;
  auto corpus = testsupport::make_corpus(opt);
  write_manifest(tmp / "m.csv", corpus);
  {
    std::ofstream ev(tmp / "events.jsonl");
    write_event_log(ev, corpus.records);
  }

  for (std::string w : {"300", "600", "1200"}) {
    REQUIRE(cli({"extract", "--events", tmp / "events.jsonl", "--manifest", tmp / "m.csv", "--width", w,
                 "--out", tmp / ("f" + w + ".csv")})
                .code == 0);
  }

  auto sel = cli({"train-traffic", "--features", tmp / "f600.csv", "--manifest", tmp / "m.csv", "--width",
                  "600", "--select", "--k", "3", "--seed", "5", "--report", tmp / "sel.json", "--out",
                  tmp / "m600.json"});
  REQUIRE_MESSAGE(sel.code == 0, sel.err);
  auto report = nlohmann::json::parse(slurp(tmp / "sel.json"));
  CHECK(report["selected"].size() >= 1);
  CHECK(report["slot_width"] == 600);

  for (std::string w : {"300", "1200"}) {
    auto r = cli({"train-traffic", "--features", tmp / ("f" + w + ".csv"), "--manifest", tmp / "m.csv",
                  "--width", w, "--feature-set", "max_tcp_window,n_unique_dns,n_remote_ips", "--out",
                  tmp / ("m" + w + ".json")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  REQUIRE(cli({"train-dhcp", "--events", tmp / "events.jsonl", "--manifest", tmp / "m.csv", "--out",
               tmp / "dhcp.json"})
              .code == 0);

  // Slot verdicts from the 10-minute model.
  auto p = cli({"predict", "--model", tmp / "m600.json", "--events", tmp / "events.jsonl", "--manifest",
                tmp / "m.csv", "--out", tmp / "v600.jsonl"});
  REQUIRE_MESSAGE(p.code == 0, p.err);
  auto e = cli({"evaluate", "--verdicts", tmp / "v600.jsonl", "--manifest", tmp / "m.csv", "--out",
                tmp / "r600.json", "--cdf-csv", tmp / "cdf.csv"});
  REQUIRE_MESSAGE(e.code == 0, e.err);
  auto r600 = nlohmann::json::parse(slurp(tmp / "r600.json"));
  CHECK(r600["f1"].get<double>() >= 0.95);
  CHECK(r600["per_device"].size() == 12);
  CHECK(slurp(tmp / "cdf.csv").rfind("rate,fraction\n", 0) == 0);

  // Predicting straight from the feature CSV gives the same lines.
  auto pf = cli({"predict", "--model", tmp / "m600.json", "--features", tmp / "f600.csv", "--out",
                 tmp / "v600b.jsonl"});
  REQUIRE(pf.code == 0);
  CHECK(slurp(tmp / "v600b.jsonl") == slurp(tmp / "v600.jsonl"));

  // Unified windows.
  auto u = cli({"predict", "--unified", "--model",
                tmp / "m300.json" + "," + tmp / "m600.json" + "," + tmp / "m1200.json" + "," + tmp / "dhcp.json",
                "--events", tmp / "events.jsonl", "--manifest", tmp / "m.csv", "--out", tmp / "vu.jsonl"});
  REQUIRE_MESSAGE(u.code == 0, u.err);
  std::istringstream lines(slurp(tmp / "vu.jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j["votes"].size() == 8);
    CHECK(j["window_start"].get<std::int64_t>() % 1200 == 0);
    ++n;
  }
  CHECK(n == 12 * 3);
  auto eu = cli({"evaluate", "--verdicts", tmp / "vu.jsonl", "--manifest", tmp / "m.csv", "--out",
                 tmp / "ru.json"});
  REQUIRE(eu.code == 0);
  CHECK(nlohmann::json::parse(slurp(tmp / "ru.json"))["f1"].get<double>() >= 0.95);

  // DHCP device verdicts.
  auto d = cli({"predict", "--model", tmp / "dhcp.json", "--events", tmp / "events.jsonl", "--manifest",
                tmp / "m.csv", "--out", tmp / "vd.jsonl"});
  REQUIRE(d.code == 0);
  auto ed = cli({"evaluate", "--verdicts", tmp / "vd.jsonl", "--manifest", tmp / "m.csv", "--out",
                 tmp / "rd.json"});
  REQUIRE(ed.code == 0);
  CHECK(nlohmann::json::parse(slurp(tmp / "rd.json"))["f1"].get<double>() == 1.0);

  // Width mismatches.
  auto wm = cli({"predict", "--model", tmp / "m600.json", "--features", tmp / "f300.csv", "--out",
                 tmp / "x.jsonl"});
  CHECK(wm.code != 0);
  CHECK(wm.err.find("WidthMismatch") != std::string::npos);
  auto wm2 = cli({"predict", "--model", tmp / "m600.json", "--width", "300", "--events", tmp / "events.jsonl",
                  "--manifest", tmp / "m.csv", "--out", tmp / "x.jsonl"});
  CHECK(wm2.code != 0);
  CHECK(wm2.err.find("WidthMismatch") != std::string::npos);
  auto wm3 = cli({"predict", "--unified", "--model", tmp / "m600.json" + "," + tmp / "m600.json" + "," + tmp / "m1200.json",
                  "--events", tmp / "events.jsonl", "--manifest", tmp / "m.csv", "--out", tmp / "x.jsonl"});
  CHECK(wm3.code == 2);
  CHECK(wm3.err.find("ModelWidthMismatch") != std::string::npos);
}
