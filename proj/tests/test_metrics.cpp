#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metrics.hpp"

using namespace peerfl;

namespace {

MetricsLog sample_log() {
  return {
      {1, 0, RecordEvent::Train, 0.5, 0.7, 0.6, {}, 0, {}, 0.5},
      {1, 0, RecordEvent::Send, 0.5, {}, {}, {}, 200, 1, 0.0},
      {1, 1, RecordEvent::Train, 1.0, 0.8, 0.55, {}, 0, {}, 1.0},
      {1, 1, RecordEvent::Receive, 0.75, {}, {}, {}, 200, 0, 0.25},
      {1, 1, RecordEvent::Eval, 1.0, 0.123456789012, 0.9, 0.4, 0, {}, 0.0},
      {1, 0, RecordEvent::Eval, 1.2, 0.2, 0.8, {}, 0, {}, 0.0},
  };
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(WriteMetrics, EmptyLogIsHeaderOnly) {
  EXPECT_EQ(format_metrics({}, MetricsFormat::Csv), std::string(kCsvHeader) + "\n");
  EXPECT_EQ(format_metrics({}, MetricsFormat::Jsonl), "");
}

TEST(WriteMetrics, EvalRowPopulated) {
  MetricsLog log{{3, 2, RecordEvent::Eval, 4.25, 0.5, 0.75, {}, 0, {}, 0.0}};
  EXPECT_EQ(format_metrics(log, MetricsFormat::Csv), std::string(kCsvHeader) + "\n3,2,eval,4.25,0.5,0.75,,0,,0\n");
}

TEST(WriteMetrics, NineSignificantDigits) {
  const auto text = format_metrics(sample_log(), MetricsFormat::Csv);
  EXPECT_NE(text.find(",0.123456789,"), std::string::npos);
}

TEST(WriteMetrics, JsonlIsOneValidObjectPerLine) {
  const auto log = sample_log();
  std::istringstream in(format_metrics(log, MetricsFormat::Jsonl));
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["round"], log[i].round);
    EXPECT_EQ(j["device"], log[i].device);
    EXPECT_EQ(j["event"], to_string(log[i].event));
    EXPECT_EQ(j["peer"].is_null(), !log[i].peer.has_value());
    EXPECT_EQ(j["adv_accuracy"].is_null(), !log[i].adv_accuracy.has_value());
    ++i;
  }
  EXPECT_EQ(i, log.size());
}

TEST(WriteMetrics, FileOutputIsStable) {
  const auto path = (std::filesystem::temp_directory_path() / "peerfl_metrics_test.csv").string();
  write_metrics(sample_log(), path, MetricsFormat::Csv);
  const auto first = slurp(path);
  write_metrics(sample_log(), path, MetricsFormat::Csv);
  EXPECT_EQ(slurp(path), first);
  EXPECT_EQ(first, format_metrics(sample_log(), MetricsFormat::Csv));
  std::filesystem::remove(path);
  EXPECT_THROW(write_metrics(sample_log(), "/nonexistent-dir/x.csv", MetricsFormat::Csv), std::runtime_error);
}

TEST(Summarize, SingleDeviceHasNoCommunication) {
  MetricsLog log{{1, 0, RecordEvent::Train, 2.0, 0.3, 0.9, {}, 0, {}, 2.0},
                 {1, 0, RecordEvent::Eval, 2.0, 0.3, 0.9, {}, 0, {}, 0.0}};
  const auto s = summarize(log);
  EXPECT_EQ(s.comm_time, 0.0);
  EXPECT_EQ(s.compute_time, 2.0);
  EXPECT_EQ(s.devices, 1u);
  EXPECT_DOUBLE_EQ(s.final_mean_accuracy, 0.9);
}

TEST(Summarize, TotalsAndAccountingIdentity) {
  const auto s = summarize(sample_log());
  EXPECT_EQ(s.devices, 2u);
  EXPECT_EQ(s.rounds, 1);
  EXPECT_EQ(s.total_bytes, 200u);
  EXPECT_EQ(s.messages, 1u);
  EXPECT_DOUBLE_EQ(s.total_sim_time, 1.2);
  EXPECT_DOUBLE_EQ(s.final_mean_accuracy, (0.9 + 0.8) / 2);
  ASSERT_TRUE(s.final_mean_adv_accuracy);
  EXPECT_DOUBLE_EQ(*s.final_mean_adv_accuracy, 0.4);
  EXPECT_DOUBLE_EQ(s.comm_time, 0.25);
  EXPECT_DOUBLE_EQ(s.compute_time, 1.5);
  double per_round = 0;
  for (const auto& r : s.per_round) per_round += r.comm_time + r.compute_time;
  EXPECT_DOUBLE_EQ(per_round, s.busy_time());
}

TEST(Summarize, JsonIsParseable) {
  const auto j = nlohmann::json::parse(summary_json(summarize(sample_log())));
  EXPECT_EQ(j["devices"], 2);
  EXPECT_EQ(j["per_round"].size(), 1u);
  EXPECT_EQ(j["total_bytes"], 200);
}
